#include "infocp/pvalues.hpp"

#include <algorithm>
#include <stdexcept>

namespace infocp {

CalibrationScores::CalibrationScores(std::vector<double> scores) : sorted_(std::move(scores)) {
  std::sort(sorted_.begin(), sorted_.end());
}

CalibrationScores CalibrationScores::from_matrix(const ScoreMatrix& matrix,
                                                 const std::vector<int>& labels) {
  CalibrationScores cal;
  cal.sorted_.reserve(labels.size());
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const double s = matrix.at(j, labels[j]);
    cal.sorted_.push_back(s);
    cal.by_class_[labels[j]].push_back(s);
  }
  std::sort(cal.sorted_.begin(), cal.sorted_.end());
  for (auto& [label, scores] : cal.by_class_) std::sort(scores.begin(), scores.end());
  return cal;
}

CalibrationScores CalibrationScores::from_regression(const ScoreModel& model,
                                                     const std::vector<LabeledExample>& calibration,
                                                     const TieBreaker* tie_breaker) {
  std::vector<double> scores;
  scores.reserve(calibration.size());
  for (std::size_t j = 0; j < calibration.size(); ++j) {
    double s = model.score(calibration[j].features, calibration[j].label);
    if (tie_breaker != nullptr) s = tie_breaker->apply(s, j, label_key(calibration[j].label));
    scores.push_back(s);
  }
  return CalibrationScores(std::move(scores));
}

const std::vector<double>& CalibrationScores::class_scores(int label) const {
  static const std::vector<double> kEmpty;
  const auto it = by_class_.find(label);
  return it == by_class_.end() ? kEmpty : it->second;
}

std::size_t CalibrationScores::count_geq(double s) const {
  return sorted_.size() -
         static_cast<std::size_t>(std::lower_bound(sorted_.begin(), sorted_.end(), s) - sorted_.begin());
}

std::size_t CalibrationScores::count_gt(double s) const {
  return sorted_.size() -
         static_cast<std::size_t>(std::upper_bound(sorted_.begin(), sorted_.end(), s) - sorted_.begin());
}

namespace {

Rational rank_pvalue(const std::vector<double>& sorted, double test_score) {
  const std::size_t geq =
      sorted.size() -
      static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), test_score) - sorted.begin());
  return Rational(static_cast<std::int64_t>(1 + geq), static_cast<std::int64_t>(sorted.size() + 1));
}

}  // namespace

Rational full_calibrated_pvalue(const CalibrationScores& cal, double test_score) {
  return rank_pvalue(cal.sorted(), test_score);
}

Rational class_calibrated_pvalue(const CalibrationScores& cal, double test_score, int y) {
  if (!cal.class_present(y)) return Rational::one();
  return rank_pvalue(cal.class_scores(y), test_score);
}

std::size_t threshold_index(std::size_t n_cal, const Rational& alpha) {
  // ceil((1 - alpha)(n+1)) in integer arithmetic, clamped to [1, n+1].
  const std::int64_t num = alpha.den() - alpha.num();  // 1 - alpha = num/den
  const std::int64_t n1 = static_cast<std::int64_t>(n_cal) + 1;
  std::int64_t k = (num * n1 + alpha.den() - 1) / alpha.den();
  if (k < 1) k = 1;
  if (k > n1) k = n1;
  return static_cast<std::size_t>(k);
}

double score_threshold(const CalibrationScores& cal, const Rational& alpha) {
  const std::size_t k = threshold_index(cal.size(), alpha);
  if (k == cal.size() + 1) return kInf;
  return cal.sorted()[k - 1];
}

PredictionRegion prediction_set(const ScoreModel& model, const std::vector<double>& x,
                                const CalibrationScores& cal, const Rational& alpha) {
  return model.level_set(x, score_threshold(cal, alpha));
}

LabelSet ClassPValues::region(std::size_t i, const Rational& alpha) const {
  LabelSet set;
  set.num_classes = K;
  for (int k = 1; k <= K; ++k) {
    if (at(i, k) > alpha) set.labels.push_back(k);
  }
  return set;
}

int ClassPValues::argmin_score_label(std::size_t i) const {
  const auto& row = test_scores[i];
  std::size_t best = 0;
  for (std::size_t k = 1; k < row.size(); ++k) {
    if (row[k] < row[best]) best = k;
  }
  return static_cast<int>(best + 1);
}

ClassPValues full_calibrated_family(const CalibrationScores& cal, const ScoreMatrix& matrix,
                                    const std::vector<std::size_t>& test_rows) {
  ClassPValues fam;
  fam.kind = PValueKind::kFull;
  fam.K = matrix.K;
  fam.values.resize(test_rows.size());
  fam.test_scores.resize(test_rows.size());
  for (std::size_t i = 0; i < test_rows.size(); ++i) {
    fam.test_scores[i] = matrix.s[test_rows[i]];
    fam.values[i].reserve(static_cast<std::size_t>(matrix.K));
    for (int k = 1; k <= matrix.K; ++k) {
      fam.values[i].push_back(full_calibrated_pvalue(cal, matrix.at(test_rows[i], k)));
    }
  }
  return fam;
}

ClassPValues class_calibrated_family(const CalibrationScores& cal, const ScoreMatrix& matrix,
                                     const std::vector<std::size_t>& test_rows) {
  ClassPValues fam;
  fam.kind = PValueKind::kClass;
  fam.K = matrix.K;
  fam.values.resize(test_rows.size());
  fam.test_scores.resize(test_rows.size());
  for (std::size_t i = 0; i < test_rows.size(); ++i) {
    fam.test_scores[i] = matrix.s[test_rows[i]];
    fam.values[i].reserve(static_cast<std::size_t>(matrix.K));
    for (int k = 1; k <= matrix.K; ++k) {
      fam.values[i].push_back(class_calibrated_pvalue(cal, matrix.at(test_rows[i], k), k));
    }
  }
  return fam;
}

ClassProportionEstimate calibration_estimator(const std::vector<std::size_t>& class_counts,
                                              std::size_t n) {
  std::size_t total = 0;
  for (const auto c : class_counts) total += c;
  if (total != n) throw std::invalid_argument("class counts do not sum to n");
  ClassProportionEstimate est;
  est.source = "calibration";
  est.pi_hat.reserve(class_counts.size());
  for (const auto c : class_counts) {
    est.pi_hat.emplace_back(static_cast<std::int64_t>(c + 1), static_cast<std::int64_t>(n + 1));
  }
  return est;
}

Rational storey_estimator(const std::vector<Rational>& p_column, const Rational& lambda) {
  if (!(Rational::zero() < lambda && lambda < Rational::one())) {
    throw std::invalid_argument("storey lambda must be in (0,1)");
  }
  std::int64_t above = 0;
  for (const auto& p : p_column) {
    if (p > lambda) ++above;
  }
  const auto m = static_cast<std::int64_t>(p_column.size());
  // (1 + #{p > lambda}) / (m (1 - lambda))
  const Rational one_minus = Rational::one() - lambda;
  return Rational(1 + above, m) * Rational(one_minus.den(), one_minus.num());
}

ClassProportionEstimate storey_estimator_family(const ClassPValues& family, const Rational& lambda) {
  ClassProportionEstimate est;
  est.source = "storey(" + lambda.to_string() + ")";
  for (int k = 1; k <= family.K; ++k) {
    std::vector<Rational> column;
    column.reserve(family.m());
    for (std::size_t i = 0; i < family.m(); ++i) column.push_back(family.at(i, k));
    est.pi_hat.push_back(storey_estimator(column, lambda));
  }
  return est;
}

ClassPValues weighted_pvalues(const ClassPValues& family, const ClassProportionEstimate& pi_hat,
                              const std::vector<Rational>& weights) {
  if (pi_hat.pi_hat.size() != static_cast<std::size_t>(family.K) ||
      weights.size() != static_cast<std::size_t>(family.K)) {
    throw std::invalid_argument("weight/proportion length mismatch");
  }
  Rational total = Rational::zero();
  for (const auto& w : weights) {
    if (!(Rational::zero() < w)) {
      throw std::invalid_argument("weights must be positive (p-values are never zero)");
    }
    total = total + w;
  }
  if (total != Rational::one()) throw std::invalid_argument("weights must sum to 1");

  ClassPValues out = family;
  out.kind = PValueKind::kWeighted;
  std::vector<Rational> ratio;
  ratio.reserve(weights.size());
  for (std::size_t k = 0; k < weights.size(); ++k) {
    ratio.push_back(pi_hat.pi_hat[k] * Rational(weights[k].den(), weights[k].num()));
  }
  for (auto& row : out.values) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      row[k] = (ratio[k] * row[k]).truncated_at_one();
    }
  }
  return out;
}

}  // namespace infocp
