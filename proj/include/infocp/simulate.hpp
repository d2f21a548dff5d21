#pragma once

#include <cmath>
#include <cstdint>
#include <variant>

#include "infocp/metrics.hpp"
#include "infocp/rng.hpp"

namespace infocp {

enum class LabelModel { kIid, kClassConditional };

// Bivariate Gaussian mixture with unit isotropic components at (0,0), (SNR,0)
// and, for K = 3, (SNR,SNR). The large-overlap variant mixes every class
// 50/50 with a shared component at the centroid of the class centers.
struct ClassificationScenario {
  int K = 3;
  double snr = 3.0;
  std::vector<double> probs_cal;
  std::vector<double> probs_test;
  std::size_t n = 500;
  std::size_t m = 500;
  std::size_t n_train = 1000;
  bool common_component = false;
  LabelModel label_model = LabelModel::kIid;
};

// Affine function of x with an optional Gaussian bump, either added to the
// base or scaling it. Covers the predictor error profiles of the regression
// scenarios (localized mean bias, localized variance over/under-estimation).
struct BumpFn {
  double intercept = 0.0;
  double slope = 0.0;
  double bump_amp = 0.0;
  double bump_center = 0.0;
  double bump_width = 1.0;
  bool bump_scales = false;

  double operator()(double x) const {
    const double base = intercept + slope * x;
    if (bump_amp == 0.0) return base;
    const double t = (x - bump_center) / bump_width;
    const double g = bump_amp * std::exp(-0.5 * t * t);
    return bump_scales ? base * (1.0 + g) : base + g;
  }
};

enum class RegressionScore { kLocallyWeighted, kQuantileBased, kMonotoneSigned };

struct RegressionScenario {
  double x_lo = 0.0;
  double x_hi = 1.0;
  std::size_t n = 1000;
  std::size_t m = 500;
  BumpFn true_mu;
  BumpFn true_sigma;
  BumpFn pred_mu;
  BumpFn pred_sigma;
  RegressionScore score = RegressionScore::kLocallyWeighted;
  double quantile_z = 1.0;  // q_lo/q_hi = pred_mu -/+ z * pred_sigma
};

// Real outcomes Z banded into three classes at [a, b]; the directional
// procedure then calls the side for the selected examples.
struct DirectionalScenario {
  double a = -0.5;
  double b = 0.5;
  double x_lo = 0.0;
  double x_hi = 1.0;
  std::size_t n = 500;
  std::size_t m = 500;
  std::size_t n_train = 1000;
  BumpFn z_mu;
  BumpFn z_sigma;
};

using Scenario = std::variant<ClassificationScenario, RegressionScenario, DirectionalScenario>;

struct ProcedureConfig {
  ProcedureTag tag = ProcedureTag::kInfoSP;
  PValueKind pvalues = PValueKind::kFull;  // infosp / naive
  InitialSelection::Kind init = InitialSelection::Kind::kBhOnQ;
  Rational init_level = Rational::zero();  // zero means 2*alpha
  std::size_t split_r = 0;                 // zero means n/2
  int null_class = 1;                      // null-class initial selection
  std::string pi_source = "calibration";   // adapt_infosp: calibration | storey
  Rational storey_lambda = Rational(1, 2);
  std::vector<Rational> weights;  // empty means uniform 1/K
  double jc_y0 = 0.0;

  std::string display_name() const;
};

struct ExperimentConfig {
  std::string name;
  Scenario scenario;
  InformativeSpec informative = InformativeSpec::non_trivial();
  Rational alpha = Rational(1, 10);
  std::size_t B = 100;
  std::uint64_t master_seed = 1;
  std::vector<ProcedureConfig> procedures;
};

// Data generators (hidden test labels are carried for the metrics module).
SplitDataset gen_mixture(const ClassificationScenario& scenario, Rng& rng);
SplitDataset gen_regression(const RegressionScenario& scenario, Rng& rng);
std::vector<LabeledExample> draw_mixture_iid(const ClassificationScenario& scenario,
                                             std::size_t count, const std::vector<double>& probs,
                                             Rng& rng);
ScoreModel build_regression_model(const RegressionScenario& scenario);

// Largest-remainder class quotas; fixed across replications in the
// class-conditional model.
std::vector<std::size_t> label_quotas(const std::vector<double>& probs, std::size_t total);

// Training sample for the built-in classifier, redrawn until every class has
// at least two points.
std::vector<LabeledExample> draw_training(const ClassificationScenario& scenario, Rng& rng);

struct ExperimentResult {
  std::vector<AggregateReport> reports;  // one per procedure, config order
};

// Runs B seeded replications (in parallel when threads != 1) and aggregates
// per procedure. Deterministic for a fixed (config, master_seed) regardless
// of the thread count.
ExperimentResult run_experiment(const ExperimentConfig& config, int threads = 1);

// One replication, exposed for the test suites.
std::vector<ReplicationMetrics> run_replication(const ExperimentConfig& config,
                                                std::size_t rep_index);

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

void validate_config(const ExperimentConfig& config);

}  // namespace infocp
