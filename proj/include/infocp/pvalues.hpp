#pragma once

#include <map>
#include <optional>
#include <vector>

#include "infocp/rational.hpp"
#include "infocp/scores.hpp"

namespace infocp {

// True-label calibration scores, sorted ascending, with the per-class
// partition when class calibration is wanted.
class CalibrationScores {
 public:
  CalibrationScores() = default;
  explicit CalibrationScores(std::vector<double> scores);

  // Builds pooled (and per-class) scores from a classification score matrix
  // restricted to the given calibration rows.
  static CalibrationScores from_matrix(const ScoreMatrix& matrix, const std::vector<int>& labels);

  // Regression: scores the calibration sample under the model. Jitter, when
  // given, is keyed by (calibration index, outcome bits).
  static CalibrationScores from_regression(const ScoreModel& model,
                                           const std::vector<LabeledExample>& calibration,
                                           const TieBreaker* tie_breaker = nullptr);

  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& sorted() const { return sorted_; }
  bool has_by_class() const { return !by_class_.empty(); }
  const std::vector<double>& class_scores(int label) const;
  bool class_present(int label) const { return by_class_.count(label) > 0; }

  std::size_t count_geq(double s) const;  // #{j : S_j >= s}
  std::size_t count_gt(double s) const;   // #{j : S_j >  s}

 private:
  std::vector<double> sorted_;
  std::map<int, std::vector<double>> by_class_;
};

// (1 + #{j : S_cal_j >= test_score}) / (n + 1); empty calibration gives 1.
Rational full_calibrated_pvalue(const CalibrationScores& cal, double test_score);

// Class-calibrated analogue against the class-y scores; a class absent from
// the calibration sample gives 1.
Rational class_calibrated_pvalue(const CalibrationScores& cal, double test_score, int y);

// Score threshold s_alpha = S_(ceil((1-alpha)(n+1))), with S_(n+1) = +inf and
// the order-statistic index clamped to [1, n+1] (alpha = 1 maps to S_(1)).
double score_threshold(const CalibrationScores& cal, const Rational& alpha);
// The order-statistic index itself, for the exact index arithmetic.
std::size_t threshold_index(std::size_t n_cal, const Rational& alpha);

// Classical conformal prediction set: level_set at score_threshold; equals
// {y : p^(y) > alpha}.
PredictionRegion prediction_set(const ScoreModel& model, const std::vector<double>& x,
                                const CalibrationScores& cal, const Rational& alpha);

enum class PValueKind { kFull, kClass, kWeighted, kPreprocessed };

// Dense per-test-point, per-candidate-label conformal p-values for
// classification, alongside the raw test scores (needed for level sets and
// the empty-set post-processing).
struct ClassPValues {
  PValueKind kind = PValueKind::kFull;
  std::vector<std::vector<Rational>> values;   // m x K
  std::vector<std::vector<double>> test_scores;  // m x K
  int K = 0;

  std::size_t m() const { return values.size(); }
  const Rational& at(std::size_t i, int label) const {
    return values[i][static_cast<std::size_t>(label - 1)];
  }
  // {k : p_i^(k) > alpha}; exact dual of the score-threshold form.
  LabelSet region(std::size_t i, const Rational& alpha) const;
  int argmin_score_label(std::size_t i) const;
};

ClassPValues full_calibrated_family(const CalibrationScores& cal, const ScoreMatrix& matrix,
                                    const std::vector<std::size_t>& test_rows);
ClassPValues class_calibrated_family(const CalibrationScores& cal, const ScoreMatrix& matrix,
                                     const std::vector<std::size_t>& test_rows);

struct ClassProportionEstimate {
  std::vector<Rational> pi_hat;  // length K, each > 0
  std::string source;            // "calibration" or "storey(lambda)"
};

// pi_hat_k = (count_k + 1) / (n + 1).
ClassProportionEstimate calibration_estimator(const std::vector<std::size_t>& class_counts,
                                              std::size_t n);

// (1 + #{i : p_i > lambda}) / (m (1 - lambda)).
Rational storey_estimator(const std::vector<Rational>& p_column, const Rational& lambda);

ClassProportionEstimate storey_estimator_family(const ClassPValues& family, const Rational& lambda);

// p_adapt_i^(k) = min(1, (pi_hat_k / w_k) p_i^(k)); weights must be positive
// and sum to 1.
ClassPValues weighted_pvalues(const ClassPValues& family, const ClassProportionEstimate& pi_hat,
                              const std::vector<Rational>& weights);

// Lazy full-calibrated evaluator for regression: p_i^(y) on demand.
struct RegressionPValues {
  CalibrationScores cal;
  ScoreModel model;
  std::vector<std::vector<double>> test_features;

  std::size_t m() const { return test_features.size(); }
  Rational at(std::size_t i, double y) const {
    return full_calibrated_pvalue(cal, model.score(test_features[i], y));
  }
};

}  // namespace infocp
