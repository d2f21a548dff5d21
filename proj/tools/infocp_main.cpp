// Command-line front end: apply a selection procedure to CSV data, run
// configured Monte-Carlo experiments, or validate a config file.
//
// Exit codes: 0 success, 2 validation/parse error, 1 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "infocp/config.hpp"

namespace {

using namespace infocp;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitValidation = 2;

struct RunArgs {
  std::string cal_csv;
  std::string test_csv;
  std::string score_path;
  std::string spec_path;
  std::string procedure = "infosp";
  std::string alpha = "0.1";
  std::uint64_t seed = 1;
  std::string pvalues = "full";
  std::string init = "bhq";
  std::string init_level;
  std::size_t split_r = 0;
  int null_class = 1;
  double jc_y0 = 0.0;
  std::string train_csv;
  bool tie_break = false;
  std::string out_path = "outcome.json";
  std::string dump_pvalues;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

ScoreMatrix matrix_from_pi_tables(const RunScoreConfig& score, std::size_t n, std::size_t m) {
  const auto pi_cal = load_pi_table(score.pi_cal_csv, score.K);
  const auto pi_test = load_pi_table(score.pi_test_csv, score.K);
  if (pi_cal.size() != n || pi_test.size() != m) {
    throw std::invalid_argument("pi tables must have one row per calibration/test example");
  }
  ScoreMatrix matrix;
  matrix.K = score.K;
  matrix.s.reserve(n + m);
  for (const auto& row : pi_cal) {
    std::vector<double> s(row.size());
    for (std::size_t k = 0; k < row.size(); ++k) s[k] = 1.0 - row[k];
    matrix.s.push_back(std::move(s));
  }
  for (const auto& row : pi_test) {
    std::vector<double> s(row.size());
    for (std::size_t k = 0; k < row.size(); ++k) s[k] = 1.0 - row[k];
    matrix.s.push_back(std::move(s));
  }
  return matrix;
}

void apply_tiebreak(ScoreMatrix& matrix, std::uint64_t seed) {
  const TieBreaker tb{seed, 1e-12};
  for (std::size_t i = 0; i < matrix.s.size(); ++i) {
    for (std::size_t k = 0; k < matrix.s[i].size(); ++k) {
      matrix.s[i][k] = tb.apply(matrix.s[i][k], i, k + 1);
    }
  }
}

int cmd_run(const RunArgs& args) {
  const Rational alpha = parse_rational(args.alpha);
  if (!(Rational::zero() < alpha && alpha < Rational::one())) {
    throw std::invalid_argument("alpha must lie in (0,1)");
  }
  const RunScoreConfig score = load_score_config(args.score_path);
  const InformativeSpec spec = parse_informative_json(read_file(args.spec_path));
  const bool classification = score.task == Task::kClassification;
  if ((spec.task() == Task::kClassification) != classification &&
      args.procedure != "jc") {
    throw std::invalid_argument("informative spec task does not match the score model task");
  }

  const auto calibration = load_labeled_csv(args.cal_csv, classification);
  const auto test_features = load_features_csv(args.test_csv);
  if (calibration.empty() || test_features.empty()) {
    throw std::invalid_argument("empty calibration or test sample");
  }
  const std::size_t d = calibration.front().features.size();
  for (const auto& x : test_features) {
    if (x.size() != d) throw std::invalid_argument("calibration/test feature dimensions differ");
  }

  SelectionOutcome outcome;
  if (classification) {
    std::vector<int> cal_labels;
    cal_labels.reserve(calibration.size());
    for (const auto& ex : calibration) {
      const int y = std::get<int>(ex.label);
      if (y > score.K) throw std::invalid_argument("calibration label exceeds the declared K");
      cal_labels.push_back(y);
    }

    ScoreMatrix matrix;
    if (score.pi_table) {
      matrix = matrix_from_pi_tables(score, calibration.size(), test_features.size());
    } else {
      std::vector<LabeledExample> train = calibration;
      if (!args.train_csv.empty()) train = load_labeled_csv(args.train_csv, true);
      const ScoreModel model = fit_gaussian_classifier(train, score.K);
      std::vector<std::vector<double>> all;
      all.reserve(calibration.size() + test_features.size());
      for (const auto& ex : calibration) all.push_back(ex.features);
      for (const auto& x : test_features) all.push_back(x);
      matrix = compute_score_matrix(model, all);
    }
    if (args.tie_break) apply_tiebreak(matrix, args.seed);

    const CalibrationScores cal = CalibrationScores::from_matrix(matrix, cal_labels);
    std::vector<std::size_t> test_rows;
    for (std::size_t i = 0; i < test_features.size(); ++i) test_rows.push_back(calibration.size() + i);

    const bool class_cal = args.pvalues == "class";
    const ClassPValues family = class_cal ? class_calibrated_family(cal, matrix, test_rows)
                                          : full_calibrated_family(cal, matrix, test_rows);
    if (!args.dump_pvalues.empty()) {
      std::string csv = "i,y,p\n";
      for (std::size_t i = 0; i < family.m(); ++i) {
        for (int k = 1; k <= family.K; ++k) {
          csv += std::to_string(i + 1) + "," + std::to_string(k) + "," +
                 family.at(i, k).to_string() + "\n";
        }
      }
      write_file(args.dump_pvalues, csv);
    }
    if (args.procedure == "naive") {
      outcome = naive(family, spec, alpha);
    } else if (args.procedure == "infosp") {
      outcome = infosp(family, spec, alpha);
    } else if (args.procedure == "infoscop") {
      const std::size_t r = args.split_r == 0 ? calibration.size() / 2 : args.split_r;
      InitialSelection init = InitialSelection::bh_on_q();
      if (args.init == "keepall") init = InitialSelection::keep_all();
      if (args.init == "nullclass") init = InitialSelection::bh_on_null_class(args.null_class);
      if (!args.init_level.empty()) init.level = parse_rational(args.init_level);
      outcome = infoscop(matrix, cal_labels, r, init, spec, alpha);
    } else if (args.procedure == "adapt-infosp" || args.procedure == "adapt_infosp") {
      std::vector<std::size_t> counts(static_cast<std::size_t>(score.K), 0);
      for (const int y : cal_labels) ++counts[static_cast<std::size_t>(y - 1)];
      const auto pi = calibration_estimator(counts, cal_labels.size());
      const std::vector<Rational> w(static_cast<std::size_t>(score.K), Rational(1, score.K));
      outcome = adapt_infosp(class_calibrated_family(cal, matrix, test_rows), pi, w, spec, alpha);
    } else if (args.procedure == "directional") {
      outcome = directional_fdr(class_calibrated_family(cal, matrix, test_rows), alpha);
    } else {
      throw std::invalid_argument("procedure '" + args.procedure + "' is not a classification procedure");
    }
  } else {
    if (!args.dump_pvalues.empty()) {
      throw std::invalid_argument(
          "--dump-pvalues is classification-only; regression families are lazy in y");
    }
    const ScoreModel& model = score.model;
    const CalibrationScores cal = CalibrationScores::from_regression(model, calibration);
    if (args.procedure == "naive") {
      outcome = naive(cal, model, test_features, spec, alpha);
    } else if (args.procedure == "infosp") {
      outcome = infosp(cal, model, test_features, spec, alpha);
    } else if (args.procedure == "infoscop") {
      const std::size_t r = args.split_r == 0 ? calibration.size() / 2 : args.split_r;
      InitialSelection init =
          args.init == "keepall" ? InitialSelection::keep_all() : InitialSelection::bh_on_q();
      if (!args.init_level.empty()) init.level = parse_rational(args.init_level);
      outcome = infoscop(model, calibration, test_features, r, init, spec, alpha);
    } else if (args.procedure == "jc") {
      outcome = jc_one_sided(cal, model, test_features, args.jc_y0, alpha);
    } else {
      throw std::invalid_argument("procedure '" + args.procedure + "' is not a regression procedure");
    }
  }

  write_file(args.out_path, outcome_to_json(outcome));
  std::cerr << "selected " << outcome.selected.size() << " of " << outcome.m_eff
            << " at adjusted level " << outcome.adjusted_level.to_string() << "\n";
  return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, int threads,
                 bool dry_run, const std::uint64_t* seed_override) {
  auto suite = load_experiment_suite(config_path);
  if (seed_override != nullptr) {
    for (auto& config : suite) config.master_seed = *seed_override;
  }
  if (dry_run) {
    std::cerr << "config ok: " << suite.size() << " experiment(s)\n";
    return kExitOk;
  }
  std::filesystem::create_directories(out_dir);

  std::string csv = report_csv_header() + "\n";
  for (const auto& config : suite) {
    std::cerr << "running " << config.name << " (B=" << config.B << ")\n";
    const ExperimentResult result = run_experiment(config, threads);
    for (const auto& report : result.reports) csv += report_csv_row(report) + "\n";
  }
  write_file(out_dir + "/report.csv", csv);
  write_file(out_dir + "/config_echo.json", echo_config_json(suite));
  std::cerr << "wrote " << out_dir << "/report.csv\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Informative selective conformal prediction with FCR control"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "apply a procedure to CSV calibration/test data");
  run->add_option("--cal", run_args.cal_csv, "calibration CSV (f1..fd,label)")->required();
  run->add_option("--test", run_args.test_csv, "test CSV (f1..fd)")->required();
  run->add_option("--score", run_args.score_path, "score model JSON")->required();
  run->add_option("--spec", run_args.spec_path, "informative spec JSON")->required();
  run->add_option("--procedure", run_args.procedure,
                  "naive|infosp|infoscop|adapt-infosp|directional|jc");
  run->add_option("--alpha", run_args.alpha, "FCR level, p/q or decimal");
  run->add_option("--seed", run_args.seed, "seed for the tie breaker");
  run->add_option("--pvalues", run_args.pvalues, "full|class (classification)");
  run->add_option("--init", run_args.init, "infoscop initial selection: bhq|nullclass|keepall");
  run->add_option("--init-level", run_args.init_level, "initial BH level (default 2*alpha)");
  run->add_option("--split-r", run_args.split_r, "infoscop calibration split (default n/2)");
  run->add_option("--null-class", run_args.null_class, "null class for the nullclass init");
  run->add_option("--y0", run_args.jc_y0, "threshold for the one-sided jc procedure");
  run->add_option("--train", run_args.train_csv, "training CSV for the built-in classifier");
  run->add_flag("--tie-break", run_args.tie_break, "jitter scores to break ties on discrete data");
  run->add_option("--out", run_args.out_path, "output JSON path");
  run->add_option("--dump-pvalues", run_args.dump_pvalues,
                  "write the i,y,p matrix to this CSV (classification)");

  std::string sim_config;
  std::string sim_out = "out";
  int threads = 0;
  bool dry_run = false;
  std::uint64_t seed_value = 0;
  auto* simulate = app.add_subcommand("simulate", "run a configured Monte-Carlo experiment suite");
  simulate->add_option("--config", sim_config, "experiment suite JSON")->required();
  simulate->add_option("--out", sim_out, "output directory");
  simulate->add_option("--threads", threads, "worker threads (0 = logical cores)");
  simulate->add_flag("--dry-run", dry_run, "validate only, write nothing");
  auto* seed_opt = simulate->add_option("--seed", seed_value, "override every master_seed");

  std::string val_config;
  auto* validate = app.add_subcommand("validate", "validate a config file");
  validate->add_option("--config", val_config, "experiment suite JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (simulate->parsed()) {
      return cmd_simulate(sim_config, sim_out, threads, dry_run,
                          seed_opt->count() > 0 ? &seed_value : nullptr);
    }
    load_experiment_suite(val_config);
    std::cerr << "config ok\n";
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
