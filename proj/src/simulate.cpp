#include "infocp/simulate.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <thread>

namespace infocp {

std::string ProcedureConfig::display_name() const {
  switch (tag) {
    case ProcedureTag::kNaive:
      return pvalues == PValueKind::kClass ? "naive_class" : "naive";
    case ProcedureTag::kInfoSP:
      return pvalues == PValueKind::kClass ? "infosp_class" : "infosp";
    case ProcedureTag::kInfoSCOP:
      switch (init) {
        case InitialSelection::Kind::kKeepAll: return "infoscop_keepall";
        case InitialSelection::Kind::kBhOnNullClass: return "infoscop_nullclass";
        default: return "infoscop";
      }
    case ProcedureTag::kAdaptInfoSP:
      return pi_source == "storey" ? "adapt_infosp_storey" : "adapt_infosp";
    case ProcedureTag::kDirectional: return "directional";
    case ProcedureTag::kJcOneSided: return "jc";
  }
  return "unknown";
}

namespace {

std::vector<std::array<double, 2>> mixture_centers(int K, double snr) {
  std::vector<std::array<double, 2>> centers = {{0.0, 0.0}, {snr, 0.0}};
  if (K == 3) centers.push_back({snr, snr});
  return centers;
}

std::vector<double> draw_mixture_point(const ClassificationScenario& sc,
                                       const std::vector<std::array<double, 2>>& centers,
                                       const std::array<double, 2>& centroid, int label, Rng& rng) {
  std::array<double, 2> c = centers[static_cast<std::size_t>(label - 1)];
  if (sc.common_component && rng.uniform() <= 0.5) c = centroid;
  return {c[0] + rng.normal(), c[1] + rng.normal()};
}

std::array<double, 2> centroid_of(const std::vector<std::array<double, 2>>& centers) {
  std::array<double, 2> c = {0.0, 0.0};
  for (const auto& p : centers) {
    c[0] += p[0];
    c[1] += p[1];
  }
  c[0] /= static_cast<double>(centers.size());
  c[1] /= static_cast<double>(centers.size());
  return c;
}

}  // namespace

std::vector<std::size_t> label_quotas(const std::vector<double>& probs, std::size_t total) {
  const std::size_t K = probs.size();
  std::vector<std::size_t> counts(K);
  std::vector<double> frac(K);
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < K; ++k) {
    const double target = probs[k] * static_cast<double>(total);
    counts[k] = static_cast<std::size_t>(std::floor(target));
    frac[k] = target - std::floor(target);
    assigned += counts[k];
  }
  std::vector<std::size_t> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t j = 0; assigned < total; ++j, ++assigned) counts[order[j % K]] += 1;
  return counts;
}

std::vector<LabeledExample> draw_mixture_iid(const ClassificationScenario& sc, std::size_t count,
                                             const std::vector<double>& probs, Rng& rng) {
  const auto centers = mixture_centers(sc.K, sc.snr);
  const auto centroid = centroid_of(centers);
  std::vector<LabeledExample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int label = static_cast<int>(rng.categorical(probs)) + 1;
    out.push_back({draw_mixture_point(sc, centers, centroid, label, rng), label});
  }
  return out;
}

std::vector<LabeledExample> draw_training(const ClassificationScenario& sc, Rng& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    auto sample = draw_mixture_iid(sc, sc.n_train, sc.probs_cal, rng);
    std::vector<std::size_t> counts(static_cast<std::size_t>(sc.K), 0);
    for (const auto& ex : sample) ++counts[static_cast<std::size_t>(std::get<int>(ex.label) - 1)];
    if (std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c >= 2; })) {
      return sample;
    }
  }
  throw std::runtime_error("could not draw a training sample with every class represented twice");
}

SplitDataset gen_mixture(const ClassificationScenario& sc, Rng& rng) {
  const auto centers = mixture_centers(sc.K, sc.snr);
  const auto centroid = centroid_of(centers);
  SplitDataset data;
  std::vector<Label> test_labels;

  if (sc.label_model == LabelModel::kIid) {
    data.calibration = draw_mixture_iid(sc, sc.n, sc.probs_cal, rng);
    test_labels.reserve(sc.m);
    data.test_features.reserve(sc.m);
    for (std::size_t i = 0; i < sc.m; ++i) {
      const int label = static_cast<int>(rng.categorical(sc.probs_cal)) + 1;
      test_labels.emplace_back(label);
      data.test_features.push_back(draw_mixture_point(sc, centers, centroid, label, rng));
    }
  } else {
    // Fixed label vectors: the same quotas in every replication, only the
    // covariates are resampled.
    const auto cal_counts = label_quotas(sc.probs_cal, sc.n);
    const auto test_counts = label_quotas(sc.probs_test, sc.m);
    for (int k = 1; k <= sc.K; ++k) {
      for (std::size_t c = 0; c < cal_counts[static_cast<std::size_t>(k - 1)]; ++c) {
        data.calibration.push_back({draw_mixture_point(sc, centers, centroid, k, rng), k});
      }
    }
    for (int k = 1; k <= sc.K; ++k) {
      for (std::size_t c = 0; c < test_counts[static_cast<std::size_t>(k - 1)]; ++c) {
        test_labels.emplace_back(k);
        data.test_features.push_back(draw_mixture_point(sc, centers, centroid, k, rng));
      }
    }
  }
  data.test_labels_hidden = std::move(test_labels);
  return data;
}

ScoreModel build_regression_model(const RegressionScenario& sc) {
  const BumpFn mu = sc.pred_mu;
  const BumpFn sigma = sc.pred_sigma;
  switch (sc.score) {
    case RegressionScore::kLocallyWeighted:
      return ScoreModel::locally_weighted([mu](const std::vector<double>& x) { return mu(x[0]); },
                                          [sigma](const std::vector<double>& x) { return sigma(x[0]); });
    case RegressionScore::kQuantileBased: {
      const double z = sc.quantile_z;
      return ScoreModel::quantile_based(
          [mu, sigma, z](const std::vector<double>& x) { return mu(x[0]) - z * sigma(x[0]); },
          [mu, sigma, z](const std::vector<double>& x) { return mu(x[0]) + z * sigma(x[0]); });
    }
    case RegressionScore::kMonotoneSigned:
      return ScoreModel::monotone_signed([mu](const std::vector<double>& x) { return mu(x[0]); },
                                         [sigma](const std::vector<double>& x) { return sigma(x[0]); });
  }
  throw std::logic_error("unreachable");
}

SplitDataset gen_regression(const RegressionScenario& sc, Rng& rng) {
  SplitDataset data;
  data.calibration.reserve(sc.n);
  for (std::size_t j = 0; j < sc.n; ++j) {
    const double x = rng.uniform(sc.x_lo, sc.x_hi);
    const double y = sc.true_mu(x) + sc.true_sigma(x) * rng.normal();
    data.calibration.push_back({{x}, y});
  }
  std::vector<Label> test_labels;
  test_labels.reserve(sc.m);
  data.test_features.reserve(sc.m);
  for (std::size_t i = 0; i < sc.m; ++i) {
    const double x = rng.uniform(sc.x_lo, sc.x_hi);
    const double y = sc.true_mu(x) + sc.true_sigma(x) * rng.normal();
    data.test_features.push_back({x});
    test_labels.emplace_back(y);
  }
  data.test_labels_hidden = std::move(test_labels);
  return data;
}

namespace {

int band_label(double z, double a, double b) { return z < a ? 1 : (z > b ? 3 : 2); }

InformativeSpec effective_spec(const ExperimentConfig& config, const ProcedureConfig& proc) {
  if (proc.tag == ProcedureTag::kJcOneSided) {
    return InformativeSpec::exclude_interval(-kInf, proc.jc_y0);
  }
  if (proc.tag == ProcedureTag::kDirectional) {
    return InformativeSpec::combine(
        {InformativeSpec::exclude_labels({2}), InformativeSpec::at_most_k(1)});
  }
  return config.informative;
}

std::vector<Rational> uniform_weights(int K) {
  return std::vector<Rational>(static_cast<std::size_t>(K), Rational(1, K));
}

// Shared classification context: score matrix over calibration + test rows,
// hidden truth, and lazily built p-value families.
struct ClassContext {
  ScoreMatrix matrix;
  std::vector<int> cal_labels;
  std::vector<std::size_t> test_rows;
  std::vector<Label> truth;
  std::vector<int> truth_bands;
  std::size_t n = 0;
  std::size_t m = 0;

  std::optional<CalibrationScores> cal;
  std::optional<ClassPValues> full_family;
  std::optional<ClassPValues> class_family;

  const CalibrationScores& calibration() {
    if (!cal) cal = CalibrationScores::from_matrix(matrix, cal_labels);
    return *cal;
  }
  const ClassPValues& family(PValueKind kind) {
    if (kind == PValueKind::kClass) {
      if (!class_family) class_family = class_calibrated_family(calibration(), matrix, test_rows);
      return *class_family;
    }
    if (!full_family) full_family = full_calibrated_family(calibration(), matrix, test_rows);
    return *full_family;
  }
};

ClassContext make_class_context(const ScoreModel& model, const SplitDataset& data) {
  ClassContext ctx;
  ctx.n = data.n();
  ctx.m = data.m();
  std::vector<std::vector<double>> all;
  all.reserve(ctx.n + ctx.m);
  for (const auto& ex : data.calibration) all.push_back(ex.features);
  for (const auto& x : data.test_features) all.push_back(x);
  ctx.matrix = compute_score_matrix(model, all);
  ctx.cal_labels.reserve(ctx.n);
  for (const auto& ex : data.calibration) ctx.cal_labels.push_back(std::get<int>(ex.label));
  for (std::size_t i = 0; i < ctx.m; ++i) ctx.test_rows.push_back(ctx.n + i);
  ctx.truth = *data.test_labels_hidden;
  return ctx;
}

ReplicationMetrics run_class_procedure(ClassContext& ctx, const ExperimentConfig& config,
                                       const ProcedureConfig& proc) {
  const InformativeSpec spec = effective_spec(config, proc);
  SelectionOutcome outcome;
  switch (proc.tag) {
    case ProcedureTag::kNaive:
      outcome = naive(ctx.family(proc.pvalues), spec, config.alpha);
      break;
    case ProcedureTag::kInfoSP:
      outcome = infosp(ctx.family(proc.pvalues), spec, config.alpha);
      break;
    case ProcedureTag::kInfoSCOP: {
      const std::size_t r = proc.split_r == 0 ? ctx.n / 2 : proc.split_r;
      InitialSelection init;
      init.kind = proc.init;
      init.level = proc.init_level;
      init.null_class = proc.null_class;
      outcome = infoscop(ctx.matrix, ctx.cal_labels, r, init, spec, config.alpha);
      break;
    }
    case ProcedureTag::kAdaptInfoSP: {
      const ClassPValues& fam = ctx.family(PValueKind::kClass);
      ClassProportionEstimate pi;
      if (proc.pi_source == "storey") {
        pi = storey_estimator_family(fam, proc.storey_lambda);
      } else {
        std::vector<std::size_t> counts(static_cast<std::size_t>(ctx.matrix.K), 0);
        for (const int y : ctx.cal_labels) ++counts[static_cast<std::size_t>(y - 1)];
        pi = calibration_estimator(counts, ctx.n);
      }
      const auto w = proc.weights.empty() ? uniform_weights(ctx.matrix.K) : proc.weights;
      outcome = adapt_infosp(fam, pi, w, spec, config.alpha);
      break;
    }
    case ProcedureTag::kDirectional:
      outcome = directional_fdr(ctx.family(PValueKind::kClass), config.alpha);
      return evaluate_directional(outcome, ctx.truth_bands, ctx.m);
    case ProcedureTag::kJcOneSided:
      throw std::invalid_argument("one-sided selection needs a regression scenario");
  }
  return evaluate_outcome(outcome, ctx.truth, spec, ctx.m);
}

std::vector<ReplicationMetrics> run_classification_replication(const ExperimentConfig& config,
                                                               const ClassificationScenario& sc,
                                                               std::size_t rep) {
  Rng rng = Rng::substream(config.master_seed, rep);
  const auto training = draw_training(sc, rng);
  const ScoreModel model = fit_gaussian_classifier(training, sc.K);
  const SplitDataset data = gen_mixture(sc, rng);
  ClassContext ctx = make_class_context(model, data);

  std::vector<ReplicationMetrics> metrics;
  metrics.reserve(config.procedures.size());
  for (const auto& proc : config.procedures) metrics.push_back(run_class_procedure(ctx, config, proc));
  return metrics;
}

std::vector<ReplicationMetrics> run_directional_replication(const ExperimentConfig& config,
                                                            const DirectionalScenario& sc,
                                                            std::size_t rep) {
  Rng rng = Rng::substream(config.master_seed, rep);

  auto draw_banded = [&](std::size_t count) {
    std::vector<LabeledExample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double x = rng.uniform(sc.x_lo, sc.x_hi);
      const double z = sc.z_mu(x) + sc.z_sigma(x) * rng.normal();
      out.push_back({{x}, band_label(z, sc.a, sc.b)});
    }
    return out;
  };

  std::vector<LabeledExample> training;
  for (int attempt = 0;; ++attempt) {
    training = draw_banded(sc.n_train);
    std::vector<std::size_t> counts(3, 0);
    for (const auto& ex : training) ++counts[static_cast<std::size_t>(std::get<int>(ex.label) - 1)];
    if (std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c >= 2; })) break;
    if (attempt > 1000) throw std::runtime_error("directional bands too narrow to train on");
  }
  const ScoreModel model = fit_gaussian_classifier(training, 3);

  SplitDataset data;
  data.calibration = draw_banded(sc.n);
  std::vector<Label> truth;
  for (std::size_t i = 0; i < sc.m; ++i) {
    const double x = rng.uniform(sc.x_lo, sc.x_hi);
    const double z = sc.z_mu(x) + sc.z_sigma(x) * rng.normal();
    data.test_features.push_back({x});
    truth.emplace_back(band_label(z, sc.a, sc.b));
  }
  data.test_labels_hidden = std::move(truth);

  ClassContext ctx = make_class_context(model, data);
  ctx.truth_bands.reserve(ctx.m);
  for (const auto& y : ctx.truth) ctx.truth_bands.push_back(std::get<int>(y));

  std::vector<ReplicationMetrics> metrics;
  metrics.reserve(config.procedures.size());
  for (const auto& proc : config.procedures) metrics.push_back(run_class_procedure(ctx, config, proc));
  return metrics;
}

std::vector<ReplicationMetrics> run_regression_replication(const ExperimentConfig& config,
                                                           const RegressionScenario& sc,
                                                           std::size_t rep) {
  Rng rng = Rng::substream(config.master_seed, rep);
  const ScoreModel model = build_regression_model(sc);
  const SplitDataset data = gen_regression(sc, rng);
  const CalibrationScores cal = CalibrationScores::from_regression(model, data.calibration);
  const auto& truth = *data.test_labels_hidden;

  std::vector<ReplicationMetrics> metrics;
  metrics.reserve(config.procedures.size());
  for (const auto& proc : config.procedures) {
    const InformativeSpec spec = effective_spec(config, proc);
    SelectionOutcome outcome;
    switch (proc.tag) {
      case ProcedureTag::kNaive:
        outcome = naive(cal, model, data.test_features, spec, config.alpha);
        break;
      case ProcedureTag::kInfoSP:
        outcome = infosp(cal, model, data.test_features, spec, config.alpha);
        break;
      case ProcedureTag::kInfoSCOP: {
        const std::size_t r = proc.split_r == 0 ? sc.n / 2 : proc.split_r;
        InitialSelection init;
        init.kind = proc.init;
        init.level = proc.init_level;
        outcome = infoscop(model, data.calibration, data.test_features, r, init, spec, config.alpha);
        break;
      }
      case ProcedureTag::kJcOneSided:
        outcome = jc_one_sided(cal, model, data.test_features, proc.jc_y0, config.alpha);
        break;
      default:
        throw std::invalid_argument("procedure not available in a regression scenario");
    }
    metrics.push_back(evaluate_outcome(outcome, truth, spec, sc.m));
  }
  return metrics;
}

}  // namespace

std::vector<ReplicationMetrics> run_replication(const ExperimentConfig& config,
                                                std::size_t rep_index) {
  if (const auto* sc = std::get_if<ClassificationScenario>(&config.scenario)) {
    return run_classification_replication(config, *sc, rep_index);
  }
  if (const auto* sc = std::get_if<RegressionScenario>(&config.scenario)) {
    return run_regression_replication(config, *sc, rep_index);
  }
  return run_directional_replication(config, std::get<DirectionalScenario>(config.scenario),
                                     rep_index);
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int workers = std::min<int>(threads, static_cast<int>(count));
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

void check_probs(const std::vector<double>& probs, int K, const std::string& what) {
  if (probs.size() != static_cast<std::size_t>(K)) {
    throw std::invalid_argument(what + ": expected " + std::to_string(K) + " probabilities");
  }
  double total = 0.0;
  for (const double p : probs) {
    if (p < 0.0) throw std::invalid_argument(what + ": negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument(what + ": probabilities must sum to 1");
}

void check_positive_on_range(const BumpFn& f, double lo, double hi, const std::string& what) {
  for (int i = 0; i <= 100; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / 100.0;
    if (!(f(x) > 0.0)) throw std::invalid_argument(what + ": must be positive on the x range");
  }
}

}  // namespace

void validate_config(const ExperimentConfig& config) {
  if (!(Rational::zero() < config.alpha && config.alpha < Rational::one())) {
    throw std::invalid_argument("alpha must lie in (0,1)");
  }
  if (config.B < 1) throw std::invalid_argument("B must be >= 1");
  if (config.procedures.empty()) throw std::invalid_argument("no procedures configured");

  if (const auto* sc = std::get_if<ClassificationScenario>(&config.scenario)) {
    if (sc->K != 2 && sc->K != 3) throw std::invalid_argument("mixture scenarios support K in {2,3}");
    check_probs(sc->probs_cal, sc->K, "probs_cal");
    check_probs(sc->probs_test, sc->K, "probs_test");
    if (sc->label_model == LabelModel::kIid && sc->probs_test != sc->probs_cal) {
      throw std::invalid_argument("iid model cannot carry label shift; probs_test must equal probs_cal");
    }
    if (sc->n < 2 || sc->m < 1) throw std::invalid_argument("need n >= 2 and m >= 1");
    if (sc->n_train < 2 * static_cast<std::size_t>(sc->K)) {
      throw std::invalid_argument("training sample too small to fit the classifier");
    }
  } else if (const auto* sc = std::get_if<RegressionScenario>(&config.scenario)) {
    if (!(sc->x_lo < sc->x_hi)) throw std::invalid_argument("empty x range");
    if (sc->n < 2 || sc->m < 1) throw std::invalid_argument("need n >= 2 and m >= 1");
    check_positive_on_range(sc->true_sigma, sc->x_lo, sc->x_hi, "true_sigma");
    if (config.informative.task() != Task::kRegression) {
      bool only_jc = true;
      for (const auto& p : config.procedures) only_jc &= p.tag == ProcedureTag::kJcOneSided;
      if (!only_jc) throw std::invalid_argument("classification informative spec on a regression scenario");
    }
  } else {
    const auto& dsc = std::get<DirectionalScenario>(config.scenario);
    if (!(dsc.a <= dsc.b)) throw std::invalid_argument("directional bands need a <= b");
    if (!(dsc.x_lo < dsc.x_hi)) throw std::invalid_argument("empty x range");
    check_positive_on_range(dsc.z_sigma, dsc.x_lo, dsc.x_hi, "z_sigma");
  }

  const bool classification = !std::holds_alternative<RegressionScenario>(config.scenario);
  for (const auto& proc : config.procedures) {
    if (proc.tag == ProcedureTag::kJcOneSided) {
      const auto* sc = std::get_if<RegressionScenario>(&config.scenario);
      if (sc == nullptr || sc->score != RegressionScore::kMonotoneSigned) {
        throw std::invalid_argument("jc needs a regression scenario with the monotone signed score");
      }
    }
    if (proc.tag == ProcedureTag::kDirectional &&
        !std::holds_alternative<DirectionalScenario>(config.scenario)) {
      throw std::invalid_argument("directional needs the banded scenario");
    }
    if (proc.tag == ProcedureTag::kAdaptInfoSP) {
      if (!classification) throw std::invalid_argument("adapt_infosp is classification-only");
      if (proc.pi_source != "calibration" && proc.pi_source != "storey") {
        throw std::invalid_argument("pi source must be calibration or storey");
      }
    }
    if (proc.tag == ProcedureTag::kInfoSCOP) {
      std::size_t n = 0;
      if (const auto* sc = std::get_if<ClassificationScenario>(&config.scenario)) n = sc->n;
      if (const auto* sc = std::get_if<RegressionScenario>(&config.scenario)) n = sc->n;
      if (const auto* sc = std::get_if<DirectionalScenario>(&config.scenario)) n = sc->n;
      if (proc.split_r != 0 && proc.split_r > n - 1) {
        throw std::invalid_argument("split_r must lie in 1..n-1");
      }
      if (proc.init == InitialSelection::Kind::kBhOnNullClass && !classification) {
        throw std::invalid_argument("null-class initial selection is classification-only");
      }
    }
  }
}

ExperimentResult run_experiment(const ExperimentConfig& config, int threads) {
  validate_config(config);
  const std::size_t P = config.procedures.size();
  std::vector<std::vector<ReplicationMetrics>> per_proc(P,
                                                        std::vector<ReplicationMetrics>(config.B));
  parallel_for(config.B, threads, [&](std::size_t b) {
    auto metrics = run_replication(config, b);
    for (std::size_t p = 0; p < P; ++p) per_proc[p][b] = metrics[p];
  });

  ExperimentResult result;
  result.reports.reserve(P);
  for (std::size_t p = 0; p < P; ++p) {
    AggregateReport report;
    if (config.B == 1) {
      const auto& r = per_proc[p][0];
      report.B = 1;
      report.fcr = {r.fcp, 0.0};
      report.fdr = {r.fdp, 0.0};
      report.power = {r.adjusted_power, 0.0};
      report.covered = {r.covered_fraction, 0.0};
      report.sel_rate = r.sel_rate;
      report.avg_size = r.avg_size;
    } else {
      report = aggregate(per_proc[p]);
    }
    report.scenario = config.name;
    report.procedure = config.procedures[p].display_name();
    result.reports.push_back(std::move(report));
  }
  return result;
}

}  // namespace infocp
