#include "infocp/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace infocp {

namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::invalid_argument("config: " + where + ": " + what);
}

Rational json_to_rational(const Json& j, const std::string& where) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>(), 1);
  if (j.is_number_float()) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), j.get<double>());
    return parse_rational(std::string(buf, res.ptr));
  }
  fail(where, "expected a rational (string \"p/q\", decimal string, or number)");
}

double json_to_bound(const Json& j, const std::string& where) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    fail(where, "expected a number or \"inf\"/\"-inf\"");
  }
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

InformativeSpec parse_informative(const Json& j, const std::string& where);

InformativeSpec parse_informative(const Json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("kind")) fail(where, "expected {\"kind\": ...}");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "nontrivial" || kind == "non_trivial") return InformativeSpec::non_trivial();
  if (kind == "exclude_labels") {
    return InformativeSpec::exclude_labels(j.at("labels").get<std::vector<int>>());
  }
  if (kind == "at_most_k") return InformativeSpec::at_most_k(j.at("k0").get<int>());
  if (kind == "exclude_interval") {
    const double a = j.contains("a") ? json_to_bound(j.at("a"), where + ".a") : -kInf;
    const double b = j.contains("b") ? json_to_bound(j.at("b"), where + ".b") : kInf;
    return InformativeSpec::exclude_interval(a, b);
  }
  if (kind == "length_at_most") {
    return InformativeSpec::length_at_most(j.at("two_lambda0").get<double>());
  }
  if (kind == "localizing") {
    std::vector<Interval> cells;
    for (const auto& cell : j.at("cells")) {
      if (!cell.is_array() || cell.size() != 2) fail(where, "localizing cells are [lo, hi] pairs");
      cells.push_back(Interval::make(json_to_bound(cell[0], where), json_to_bound(cell[1], where)));
    }
    return InformativeSpec::localizing(std::move(cells));
  }
  if (kind == "combine") {
    std::vector<InformativeSpec> parts;
    for (const auto& part : j.at("specs")) parts.push_back(parse_informative(part, where + ".specs"));
    return InformativeSpec::combine(std::move(parts));
  }
  fail(where, "unknown informative kind '" + kind + "'");
}

BumpFn parse_bump(const Json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected a function object");
  BumpFn f;
  f.intercept = j.value("intercept", 0.0);
  f.slope = j.value("slope", 0.0);
  f.bump_amp = j.value("bump_amp", 0.0);
  f.bump_center = j.value("bump_center", 0.0);
  f.bump_width = j.value("bump_width", 1.0);
  f.bump_scales = j.value("bump_scales", false);
  if (f.bump_amp != 0.0 && !(f.bump_width > 0.0)) fail(where, "bump_width must be positive");
  return f;
}

Scenario parse_scenario(const Json& j, const std::string& where) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "classification") {
    ClassificationScenario sc;
    sc.K = j.value("K", 3);
    sc.snr = j.at("snr").get<double>();
    sc.probs_cal = j.at("probs_cal").get<std::vector<double>>();
    sc.probs_test = j.contains("probs_test") ? j.at("probs_test").get<std::vector<double>>()
                                             : sc.probs_cal;
    sc.n = j.at("n").get<std::size_t>();
    sc.m = j.at("m").get<std::size_t>();
    sc.n_train = j.value("n_train", static_cast<std::size_t>(1000));
    sc.common_component = j.value("common_component", false);
    const std::string lm = j.value("label_model", std::string("iid"));
    if (lm == "iid") {
      sc.label_model = LabelModel::kIid;
    } else if (lm == "class_conditional") {
      sc.label_model = LabelModel::kClassConditional;
    } else {
      fail(where, "label_model must be iid or class_conditional");
    }
    return sc;
  }
  if (type == "regression") {
    RegressionScenario sc;
    sc.x_lo = j.value("x_lo", 0.0);
    sc.x_hi = j.value("x_hi", 1.0);
    sc.n = j.at("n").get<std::size_t>();
    sc.m = j.at("m").get<std::size_t>();
    sc.true_mu = parse_bump(j.at("true_mu"), where + ".true_mu");
    sc.true_sigma = parse_bump(j.at("true_sigma"), where + ".true_sigma");
    sc.pred_mu = j.contains("pred_mu") ? parse_bump(j.at("pred_mu"), where + ".pred_mu") : sc.true_mu;
    sc.pred_sigma =
        j.contains("pred_sigma") ? parse_bump(j.at("pred_sigma"), where + ".pred_sigma") : sc.true_sigma;
    const std::string score = j.value("score", std::string("locally_weighted"));
    if (score == "locally_weighted") {
      sc.score = RegressionScore::kLocallyWeighted;
    } else if (score == "quantile") {
      sc.score = RegressionScore::kQuantileBased;
    } else if (score == "monotone_signed") {
      sc.score = RegressionScore::kMonotoneSigned;
    } else {
      fail(where, "score must be locally_weighted, quantile, or monotone_signed");
    }
    sc.quantile_z = j.value("quantile_z", 1.0);
    return sc;
  }
  if (type == "directional") {
    DirectionalScenario sc;
    sc.a = j.at("a").get<double>();
    sc.b = j.at("b").get<double>();
    sc.x_lo = j.value("x_lo", 0.0);
    sc.x_hi = j.value("x_hi", 1.0);
    sc.n = j.at("n").get<std::size_t>();
    sc.m = j.at("m").get<std::size_t>();
    sc.n_train = j.value("n_train", static_cast<std::size_t>(1000));
    sc.z_mu = parse_bump(j.at("z_mu"), where + ".z_mu");
    sc.z_sigma = parse_bump(j.at("z_sigma"), where + ".z_sigma");
    return sc;
  }
  fail(where, "unknown scenario type '" + type + "'");
}

ProcedureTag parse_tag(const std::string& tag, const std::string& where) {
  if (tag == "naive") return ProcedureTag::kNaive;
  if (tag == "infosp") return ProcedureTag::kInfoSP;
  if (tag == "infoscop") return ProcedureTag::kInfoSCOP;
  if (tag == "adapt_infosp" || tag == "adapt-infosp") return ProcedureTag::kAdaptInfoSP;
  if (tag == "directional") return ProcedureTag::kDirectional;
  if (tag == "jc" || tag == "jc_one_sided") return ProcedureTag::kJcOneSided;
  fail(where, "unknown procedure tag '" + tag + "'");
}

ProcedureConfig parse_procedure(const Json& j, const std::string& where) {
  ProcedureConfig p;
  p.tag = parse_tag(j.at("tag").get<std::string>(), where);
  const std::string pv = j.value("pvalues", std::string("full"));
  if (pv == "full") {
    p.pvalues = PValueKind::kFull;
  } else if (pv == "class") {
    p.pvalues = PValueKind::kClass;
  } else {
    fail(where, "pvalues must be full or class");
  }
  const std::string init = j.value("init", std::string("bhq"));
  if (init == "bhq") {
    p.init = InitialSelection::Kind::kBhOnQ;
  } else if (init == "nullclass") {
    p.init = InitialSelection::Kind::kBhOnNullClass;
  } else if (init == "keepall") {
    p.init = InitialSelection::Kind::kKeepAll;
  } else {
    fail(where, "init must be bhq, nullclass, or keepall");
  }
  if (j.contains("init_level")) p.init_level = json_to_rational(j.at("init_level"), where + ".init_level");
  p.split_r = j.value("split_r", static_cast<std::size_t>(0));
  p.null_class = j.value("null_class", 1);
  p.pi_source = j.value("pi", std::string("calibration"));
  if (j.contains("lambda")) p.storey_lambda = json_to_rational(j.at("lambda"), where + ".lambda");
  if (j.contains("weights")) {
    for (const auto& w : j.at("weights")) {
      p.weights.push_back(json_to_rational(w, where + ".weights"));
    }
  }
  p.jc_y0 = j.value("y0", 0.0);
  return p;
}

ExperimentConfig parse_experiment(const Json& j, const std::string& where) {
  ExperimentConfig config;
  config.name = j.at("name").get<std::string>();
  config.alpha = json_to_rational(j.at("alpha"), where + ".alpha");
  config.B = j.at("B").get<std::size_t>();
  config.master_seed = j.at("master_seed").get<std::uint64_t>();
  config.scenario = parse_scenario(j.at("scenario"), where + ".scenario");
  if (j.contains("informative")) {
    config.informative = parse_informative(j.at("informative"), where + ".informative");
  }
  if (!j.contains("procedures") || !j.at("procedures").is_array() || j.at("procedures").empty()) {
    fail(where, "procedures must be a non-empty array");
  }
  std::size_t idx = 0;
  for (const auto& proc : j.at("procedures")) {
    config.procedures.push_back(parse_procedure(proc, where + ".procedures[" + std::to_string(idx++) + "]"));
  }
  validate_config(config);
  return config;
}

}  // namespace

std::vector<ExperimentConfig> parse_experiment_suite(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
  }
  std::vector<ExperimentConfig> suite;
  if (j.is_object() && j.contains("experiments")) {
    std::size_t idx = 0;
    for (const auto& e : j.at("experiments")) {
      suite.push_back(parse_experiment(e, "experiments[" + std::to_string(idx++) + "]"));
    }
  } else {
    suite.push_back(parse_experiment(j, "$"));
  }
  if (suite.empty()) throw std::invalid_argument("config: empty experiment list");
  return suite;
}

std::vector<ExperimentConfig> load_experiment_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_suite(buffer.str());
}

InformativeSpec parse_informative_json(const std::string& json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("spec: JSON parse error: ") + e.what());
  }
  return parse_informative(j, "$");
}

namespace {

OrderedJson bound_to_json(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

OrderedJson bump_to_json(const BumpFn& f) {
  OrderedJson j;
  j["intercept"] = f.intercept;
  j["slope"] = f.slope;
  j["bump_amp"] = f.bump_amp;
  j["bump_center"] = f.bump_center;
  j["bump_width"] = f.bump_width;
  j["bump_scales"] = f.bump_scales;
  return j;
}

OrderedJson informative_to_json(const InformativeSpec& spec) {
  OrderedJson j;
  const auto& v = spec.variant();
  if (const auto* ex = std::get_if<ExcludeLabelsSpec>(&v)) {
    j["kind"] = "exclude_labels";
    j["labels"] = ex->labels;
  } else if (std::holds_alternative<NonTrivialSpec>(v)) {
    j["kind"] = "nontrivial";
  } else if (const auto* am = std::get_if<AtMostKSpec>(&v)) {
    j["kind"] = "at_most_k";
    j["k0"] = am->k0;
  } else if (const auto* ei = std::get_if<ExcludeIntervalSpec>(&v)) {
    j["kind"] = "exclude_interval";
    j["a"] = bound_to_json(ei->a);
    j["b"] = bound_to_json(ei->b);
  } else if (const auto* lm = std::get_if<LengthAtMostSpec>(&v)) {
    j["kind"] = "length_at_most";
    j["two_lambda0"] = lm->two_lambda0;
  } else if (const auto* lc = std::get_if<LocalizingSpec>(&v)) {
    j["kind"] = "localizing";
    OrderedJson cells = OrderedJson::array();
    for (const auto& c : lc->cells) cells.push_back({bound_to_json(c.lo), bound_to_json(c.hi)});
    j["cells"] = cells;
  } else {
    const auto& combine = std::get<CombineSpec>(v);
    j["kind"] = "combine";
    OrderedJson parts = OrderedJson::array();
    for (const auto& part : combine.parts) parts.push_back(informative_to_json(part));
    j["specs"] = parts;
  }
  return j;
}

OrderedJson scenario_to_json(const Scenario& scenario) {
  OrderedJson j;
  if (const auto* sc = std::get_if<ClassificationScenario>(&scenario)) {
    j["type"] = "classification";
    j["K"] = sc->K;
    j["snr"] = sc->snr;
    j["probs_cal"] = sc->probs_cal;
    j["probs_test"] = sc->probs_test;
    j["n"] = sc->n;
    j["m"] = sc->m;
    j["n_train"] = sc->n_train;
    j["common_component"] = sc->common_component;
    j["label_model"] = sc->label_model == LabelModel::kIid ? "iid" : "class_conditional";
  } else if (const auto* sc = std::get_if<RegressionScenario>(&scenario)) {
    j["type"] = "regression";
    j["x_lo"] = sc->x_lo;
    j["x_hi"] = sc->x_hi;
    j["n"] = sc->n;
    j["m"] = sc->m;
    j["true_mu"] = bump_to_json(sc->true_mu);
    j["true_sigma"] = bump_to_json(sc->true_sigma);
    j["pred_mu"] = bump_to_json(sc->pred_mu);
    j["pred_sigma"] = bump_to_json(sc->pred_sigma);
    j["score"] = sc->score == RegressionScore::kLocallyWeighted
                     ? "locally_weighted"
                     : (sc->score == RegressionScore::kQuantileBased ? "quantile" : "monotone_signed");
    j["quantile_z"] = sc->quantile_z;
  } else {
    const auto& dsc = std::get<DirectionalScenario>(scenario);
    j["type"] = "directional";
    j["a"] = dsc.a;
    j["b"] = dsc.b;
    j["x_lo"] = dsc.x_lo;
    j["x_hi"] = dsc.x_hi;
    j["n"] = dsc.n;
    j["m"] = dsc.m;
    j["n_train"] = dsc.n_train;
    j["z_mu"] = bump_to_json(dsc.z_mu);
    j["z_sigma"] = bump_to_json(dsc.z_sigma);
  }
  return j;
}

OrderedJson procedure_to_json(const ProcedureConfig& p) {
  OrderedJson j;
  j["tag"] = procedure_tag_name(p.tag);
  j["pvalues"] = p.pvalues == PValueKind::kClass ? "class" : "full";
  if (p.tag == ProcedureTag::kInfoSCOP) {
    j["init"] = p.init == InitialSelection::Kind::kKeepAll
                    ? "keepall"
                    : (p.init == InitialSelection::Kind::kBhOnNullClass ? "nullclass" : "bhq");
    if (p.init_level != Rational::zero()) j["init_level"] = p.init_level.to_string();
    j["split_r"] = p.split_r;
    if (p.init == InitialSelection::Kind::kBhOnNullClass) j["null_class"] = p.null_class;
  }
  if (p.tag == ProcedureTag::kAdaptInfoSP) {
    j["pi"] = p.pi_source;
    j["lambda"] = p.storey_lambda.to_string();
    if (!p.weights.empty()) {
      OrderedJson w = OrderedJson::array();
      for (const auto& v : p.weights) w.push_back(v.to_string());
      j["weights"] = w;
    }
  }
  if (p.tag == ProcedureTag::kJcOneSided) j["y0"] = p.jc_y0;
  return j;
}

}  // namespace

std::string echo_config_json(const std::vector<ExperimentConfig>& suite) {
  OrderedJson root;
  OrderedJson experiments = OrderedJson::array();
  for (const auto& config : suite) {
    OrderedJson j;
    j["name"] = config.name;
    j["alpha"] = config.alpha.to_string();
    j["B"] = config.B;
    j["master_seed"] = config.master_seed;
    j["scenario"] = scenario_to_json(config.scenario);
    j["informative"] = informative_to_json(config.informative);
    OrderedJson procs = OrderedJson::array();
    for (const auto& p : config.procedures) procs.push_back(procedure_to_json(p));
    j["procedures"] = procs;
    experiments.push_back(j);
  }
  root["experiments"] = experiments;
  return root.dump(2) + "\n";
}

std::string outcome_to_json(const SelectionOutcome& outcome) {
  OrderedJson j;
  j["procedure"] = procedure_tag_name(outcome.tag);
  j["m_eff"] = outcome.m_eff;
  OrderedJson selected = OrderedJson::array();
  for (const auto i : outcome.selected) selected.push_back(i + 1);
  j["selected"] = selected;
  j["adjusted_level"] = outcome.adjusted_level.to_string();
  OrderedJson q = OrderedJson::array();
  for (const auto& v : outcome.q) q.push_back(v.to_string());
  j["q"] = q;
  OrderedJson q_index = OrderedJson::array();
  for (const auto i : outcome.q_test_index) q_index.push_back(i + 1);
  j["q_test_indices"] = q_index;
  OrderedJson regions = OrderedJson::array();
  for (std::size_t k = 0; k < outcome.regions.size(); ++k) {
    OrderedJson r;
    r["index"] = outcome.selected[k] + 1;
    const auto& region = outcome.regions[k];
    if (region.task == Task::kRegression) {
      r["kind"] = "interval";
      if (region.interval.empty) {
        r["empty"] = true;
      } else {
        r["lo"] = bound_to_json(region.interval.lo);
        r["hi"] = bound_to_json(region.interval.hi);
      }
    } else {
      r["kind"] = "labels";
      r["labels"] = region.labels.labels;
    }
    regions.push_back(r);
  }
  j["regions"] = regions;
  if (!outcome.decisions.empty()) j["decisions"] = outcome.decisions;
  return j.dump(2) + "\n";
}

RunScoreConfig load_score_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("score config: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  Json j;
  try {
    j = Json::parse(buffer.str());
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(std::string("score config: JSON parse error: ") + e.what());
  }

  RunScoreConfig out;
  const std::string task = j.at("task").get<std::string>();
  const std::string kind = j.at("kind").get<std::string>();
  if (task == "classification") {
    out.task = Task::kClassification;
    out.K = j.at("K").get<int>();
    if (out.K < 2) throw std::invalid_argument("score config: K must be >= 2");
    if (kind == "fit_gaussian") {
      out.fit_gaussian = true;
    } else if (kind == "pi_table") {
      out.pi_table = true;
      out.pi_cal_csv = j.at("pi_cal_csv").get<std::string>();
      out.pi_test_csv = j.at("pi_test_csv").get<std::string>();
    } else {
      throw std::invalid_argument("score config: classification kind must be fit_gaussian or pi_table");
    }
    return out;
  }
  if (task != "regression") throw std::invalid_argument("score config: task must be regression or classification");

  auto parse_fn = [](const Json& fj, const std::string& where) -> RealFn {
    const std::string fk = fj.at("kind").get<std::string>();
    if (fk == "constant") {
      const double v = fj.at("value").get<double>();
      return [v](const std::vector<double>&) { return v; };
    }
    if (fk == "linear") {
      const auto coef = fj.at("coef").get<std::vector<double>>();
      const double intercept = fj.value("intercept", 0.0);
      return [coef, intercept, where](const std::vector<double>& x) {
        if (x.size() != coef.size()) {
          throw std::invalid_argument(where + ": feature dimension does not match coef length");
        }
        double v = intercept;
        for (std::size_t i = 0; i < coef.size(); ++i) v += coef[i] * x[i];
        return v;
      };
    }
    throw std::invalid_argument(where + ": function kind must be constant or linear");
  };

  out.task = Task::kRegression;
  if (kind == "locally_weighted") {
    out.model = ScoreModel::locally_weighted(parse_fn(j.at("mu"), "mu"), parse_fn(j.at("sigma"), "sigma"));
  } else if (kind == "quantile" || kind == "quantile_based") {
    out.model = ScoreModel::quantile_based(parse_fn(j.at("q_lo"), "q_lo"), parse_fn(j.at("q_hi"), "q_hi"));
  } else if (kind == "monotone_signed") {
    out.model = ScoreModel::monotone_signed(parse_fn(j.at("mu"), "mu"), parse_fn(j.at("sigma"), "sigma"));
  } else {
    throw std::invalid_argument("score config: unknown regression kind '" + kind + "'");
  }
  return out;
}

std::vector<std::vector<double>> load_pi_table(const std::string& path, int K) {
  const auto rows = load_features_csv(path);
  for (const auto& row : rows) {
    if (row.size() != static_cast<std::size_t>(K)) {
      throw std::invalid_argument("pi table " + path + ": expected " + std::to_string(K) + " columns");
    }
    for (const double p : row) {
      if (p < 0.0 || p > 1.0) throw std::invalid_argument("pi table " + path + ": probabilities in [0,1]");
    }
  }
  return rows;
}

}  // namespace infocp
