#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "infocp/data.hpp"
#include "infocp/region.hpp"

namespace infocp {

using RealFn = std::function<double(const std::vector<double>&)>;

// Non-conformity score models. Regression variants have interval level sets
// that invert in closed form; the classification variant scores 1 - pi_y(x).
//
//   LocallyWeighted   |y - mu(x)| / sigma(x)
//   QuantileBased     max(q_lo(x) - y, y - q_hi(x))
//   MonotoneSigned    (mu(x) - y) / sigma(x), nonincreasing in y
//   ClassResidual     1 - pi_y(x)
class ScoreModel {
 public:
  enum class Kind { kLocallyWeighted, kQuantileBased, kMonotoneSigned, kClassResidual };

  static ScoreModel locally_weighted(RealFn mu, RealFn sigma);
  static ScoreModel quantile_based(RealFn q_lo, RealFn q_hi);
  static ScoreModel monotone_signed(RealFn mu, RealFn sigma);
  static ScoreModel class_residual(std::function<std::vector<double>(const std::vector<double>&)> pi,
                                   int num_classes);

  Kind kind() const { return kind_; }
  Task task() const { return kind_ == Kind::kClassResidual ? Task::kClassification : Task::kRegression; }
  int num_classes() const { return num_classes_; }

  double score(const std::vector<double>& x, double y) const;
  double score(const std::vector<double>& x, int label) const;
  double score(const std::vector<double>& x, const Label& y) const;

  // All K class probabilities at x (classification only).
  std::vector<double> class_probs(const std::vector<double>& x) const;

  // {y : S_y(x) <= threshold} in closed form; threshold = +inf yields the full
  // label space / (-inf, +inf). Empty regions are legal returns.
  PredictionRegion level_set(const std::vector<double>& x, double threshold) const;

  // Accessors for the regression predictors (used by the q-value closed
  // forms). Throw on variant mismatch.
  double mu(const std::vector<double>& x) const;
  double sigma(const std::vector<double>& x) const;  // clamped below at 1e-9
  double q_lo(const std::vector<double>& x) const;
  double q_hi(const std::vector<double>& x) const;
  // Interval midpoint: mu(x) for the weighted scores, (q_lo+q_hi)/2 for the
  // quantile score.
  double center(const std::vector<double>& x) const;

 private:
  ScoreModel() = default;
  Kind kind_ = Kind::kLocallyWeighted;
  RealFn f1_, f2_;
  std::function<std::vector<double>(const std::vector<double>&)> pi_;
  int num_classes_ = 0;
};

// Class-conditional Gaussian classifier: per-class means, pooled diagonal
// covariance, empirical priors, combined by Bayes rule. Stands in for the
// probability estimators used with the classification score; any estimator
// works since scores are arbitrary. Throws if some class in 1..K has fewer
// than two examples.
ScoreModel fit_gaussian_classifier(const std::vector<LabeledExample>& data, int K);

// Scores for every point (rows) and every candidate label 1..K (columns).
// With a TieBreaker, jitter keyed by (row index, label) is added everywhere,
// so downstream ranks see tie-free scores consistently.
struct ScoreMatrix {
  std::vector<std::vector<double>> s;  // (#points) x K
  int K = 0;

  double at(std::size_t i, int label) const { return s[i][static_cast<std::size_t>(label - 1)]; }
  int argmin_label(std::size_t i) const;
};

ScoreMatrix compute_score_matrix(const ScoreModel& model,
                                 const std::vector<std::vector<double>>& points,
                                 const TieBreaker* tie_breaker = nullptr);

}  // namespace infocp
