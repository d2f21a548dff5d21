#include "infocp/informative.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace infocp {

namespace {

Task variant_task(const InformativeSpec::Variant& v) {
  if (std::holds_alternative<ExcludeLabelsSpec>(v) || std::holds_alternative<NonTrivialSpec>(v) ||
      std::holds_alternative<AtMostKSpec>(v)) {
    return Task::kClassification;
  }
  if (std::holds_alternative<CombineSpec>(v)) {
    return std::get<CombineSpec>(v).parts.front().task();
  }
  return Task::kRegression;
}

}  // namespace

Task InformativeSpec::task() const { return variant_task(*v_); }

// Factories validate what can be validated without knowing K / the score
// model; the rest is checked at evaluation time.
InformativeSpec InformativeSpec::exclude_labels(std::vector<int> labels) {
  if (labels.empty()) throw std::invalid_argument("exclude_labels: empty null set");
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  for (const int y : labels) {
    if (y < 1) throw std::invalid_argument("exclude_labels: labels are 1-based");
  }
  InformativeSpec s;
  s.v_ = std::make_shared<const Variant>(ExcludeLabelsSpec{std::move(labels)});
  return s;
}

InformativeSpec InformativeSpec::non_trivial() {
  InformativeSpec s;
  s.v_ = std::make_shared<const Variant>(NonTrivialSpec{});
  return s;
}

InformativeSpec InformativeSpec::at_most_k(int k0) {
  if (k0 < 1) throw std::invalid_argument("at_most_k: k0 must be >= 1");
  InformativeSpec s;
  s.v_ = std::make_shared<const Variant>(AtMostKSpec{k0});
  return s;
}

InformativeSpec InformativeSpec::exclude_interval(double a, double b) {
  if (std::isnan(a) || std::isnan(b) || a > b) throw std::invalid_argument("exclude_interval: need a <= b");
  if (a == -kInf && b == kInf) {
    throw std::invalid_argument("exclude_interval: (-inf, +inf) is uninformative everywhere");
  }
  if (a == kInf || b == -kInf) throw std::invalid_argument("exclude_interval: degenerate bounds");
  InformativeSpec s;
  s.v_ = std::make_shared<const Variant>(ExcludeIntervalSpec{a, b});
  return s;
}

InformativeSpec InformativeSpec::length_at_most(double two_lambda0) {
  if (!(two_lambda0 > 0.0)) throw std::invalid_argument("length_at_most: need a positive length bound");
  InformativeSpec s;
  s.v_ = std::make_shared<const Variant>(LengthAtMostSpec{two_lambda0});
  return s;
}

InformativeSpec InformativeSpec::localizing(std::vector<Interval> cells) {
  if (cells.empty()) throw std::invalid_argument("localizing: need at least one cell");
  for (const auto& c : cells) {
    if (c.empty || std::isnan(c.lo) || std::isnan(c.hi) || c.lo > c.hi) {
      throw std::invalid_argument("localizing: malformed cell");
    }
  }
  std::sort(cells.begin(), cells.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (std::size_t l = 0; l + 1 < cells.size(); ++l) {
    // Cells sharing an endpoint must be opened on one side by the caller.
    if (!(cells[l].hi < cells[l + 1].lo)) {
      throw std::invalid_argument("localizing: cells must be strictly disjoint");
    }
  }
  InformativeSpec s;
  s.v_ = std::make_shared<const Variant>(LocalizingSpec{std::move(cells)});
  return s;
}

InformativeSpec InformativeSpec::combine(std::vector<InformativeSpec> parts) {
  if (parts.empty()) throw std::invalid_argument("combine: empty part list");
  const Task task = parts.front().task();
  for (const auto& p : parts) {
    if (p.task() != task) throw std::invalid_argument("combine: mixed-task parts");
  }
  InformativeSpec s;
  s.v_ = std::make_shared<const Variant>(CombineSpec{std::move(parts)});
  return s;
}

bool is_informative(const PredictionRegion& region, const InformativeSpec& spec) {
  const auto& v = spec.variant();
  if (region.task != spec.task()) throw std::invalid_argument("region/spec task mismatch");

  if (const auto* ex = std::get_if<ExcludeLabelsSpec>(&v)) {
    for (const int y : ex->labels) {
      if (region.labels.contains(y)) return false;
    }
    return true;
  }
  if (std::holds_alternative<NonTrivialSpec>(v)) {
    return region.labels.size() <= static_cast<std::size_t>(region.labels.num_classes - 1);
  }
  if (const auto* am = std::get_if<AtMostKSpec>(&v)) {
    return region.labels.size() <= static_cast<std::size_t>(am->k0);
  }
  if (const auto* ei = std::get_if<ExcludeIntervalSpec>(&v)) {
    const auto& iv = region.interval;
    if (iv.empty) return true;
    return iv.hi < ei->a || iv.lo > ei->b;
  }
  if (const auto* lm = std::get_if<LengthAtMostSpec>(&v)) {
    const auto& iv = region.interval;
    if (iv.empty) return false;  // the collection holds nonempty intervals only
    return iv.length() <= lm->two_lambda0;
  }
  if (const auto* lc = std::get_if<LocalizingSpec>(&v)) {
    for (const auto& cell : lc->cells) {
      if (region.interval.subset_of(cell)) return true;
    }
    return false;
  }
  const auto& combine = std::get<CombineSpec>(v);
  for (const auto& part : combine.parts) {
    if (!is_informative(region, part)) return false;
  }
  return true;
}

std::vector<int> informative_singletons(const InformativeSpec& spec, int K) {
  std::vector<int> out;
  for (int k = 1; k <= K; ++k) {
    LabelSet s;
    s.num_classes = K;
    s.labels = {k};
    if (is_informative(PredictionRegion::from_labels(std::move(s)), spec)) out.push_back(k);
  }
  return out;
}

namespace {

Rational kth_smallest(std::vector<Rational> values, std::size_t k_one_based) {
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k_one_based - 1),
                   values.end());
  return values[k_one_based - 1];
}

// Smallest alpha with s_alpha <= t: the region stays inside a score budget t.
Rational level_for_threshold_leq(const CalibrationScores& cal, double t) {
  return Rational(static_cast<std::int64_t>(1 + cal.count_gt(t)),
                  static_cast<std::int64_t>(cal.size() + 1));
}

// Smallest alpha with s_alpha < t (strict), used when the region must lose
// the endpoint itself.
Rational level_for_threshold_lt(const CalibrationScores& cal, double t) {
  return Rational(static_cast<std::int64_t>(1 + cal.count_geq(t)),
                  static_cast<std::int64_t>(cal.size() + 1));
}

double infimum_score_over_interval(const ScoreModel& model, const std::vector<double>& x, double a,
                                   double b) {
  switch (model.kind()) {
    case ScoreModel::Kind::kLocallyWeighted:
    case ScoreModel::Kind::kQuantileBased: {
      const double c = model.center(x);
      const double y_star = std::min(std::max(c, a), b);
      return model.score(x, y_star);
    }
    case ScoreModel::Kind::kMonotoneSigned:
      // Nonincreasing in y, so the infimum over [a, b] sits at b.
      return b == kInf ? -kInf : model.score(x, b);
    default:
      throw std::invalid_argument("regression adjusted p-value on a classification model");
  }
}

// Smallest alpha at which C^alpha fits inside the cell, per model.
Rational localizing_cell_level(const CalibrationScores& cal, const ScoreModel& model,
                               const std::vector<double>& x, const Interval& cell) {
  switch (model.kind()) {
    case ScoreModel::Kind::kLocallyWeighted: {
      const double m = model.mu(x);
      const double s = model.sigma(x);
      const double budget = std::min((m - cell.lo) / s, (cell.hi - m) / s);
      return level_for_threshold_leq(cal, budget);
    }
    case ScoreModel::Kind::kQuantileBased: {
      const double lo = model.q_lo(x);
      const double hi = model.q_hi(x);
      const double budget = std::min(lo - cell.lo, cell.hi - hi);
      const Rational fit = level_for_threshold_leq(cal, budget);
      // The empty region is vacuously inside every cell.
      const Rational empty = level_for_threshold_lt(cal, -(hi - lo) / 2.0);
      return min(fit, empty);
    }
    case ScoreModel::Kind::kMonotoneSigned: {
      if (cell.hi != kInf) return Rational::one();
      const double budget = (model.mu(x) - cell.lo) / model.sigma(x);
      return level_for_threshold_leq(cal, budget);
    }
    default:
      throw std::invalid_argument("localizing on a classification model");
  }
}

}  // namespace

Rational adjusted_pvalue(const InformativeSpec& spec, const std::vector<Rational>& p_row) {
  const auto& v = spec.variant();
  const int K = static_cast<int>(p_row.size());

  if (const auto* ex = std::get_if<ExcludeLabelsSpec>(&v)) {
    if (static_cast<int>(ex->labels.size()) >= K) {
      throw std::invalid_argument("exclude_labels: null set covers every class");
    }
    Rational q = Rational::zero();
    for (const int y : ex->labels) {
      if (y > K) throw std::invalid_argument("exclude_labels: label beyond K");
      q = max(q, p_row[static_cast<std::size_t>(y - 1)]);
    }
    return q;
  }
  if (std::holds_alternative<NonTrivialSpec>(v)) {
    return *std::min_element(p_row.begin(), p_row.end());
  }
  if (const auto* am = std::get_if<AtMostKSpec>(&v)) {
    if (am->k0 > K - 1) throw std::invalid_argument("at_most_k: k0 must be <= K-1");
    return kth_smallest(p_row, static_cast<std::size_t>(K - am->k0));
  }
  if (const auto* combine = std::get_if<CombineSpec>(&v)) {
    Rational q = Rational::zero();
    for (const auto& part : combine->parts) q = max(q, adjusted_pvalue(part, p_row));
    return q;
  }
  throw std::invalid_argument("regression informative spec applied to a classification p-value row");
}

Rational adjusted_pvalue(const InformativeSpec& spec, const CalibrationScores& cal,
                         const ScoreModel& model, const std::vector<double>& x) {
  const auto& v = spec.variant();

  if (const auto* ei = std::get_if<ExcludeIntervalSpec>(&v)) {
    // q = sup_{y in [a,b]} p^(y), attained at the score infimum over [a,b].
    return full_calibrated_pvalue(cal, infimum_score_over_interval(model, x, ei->a, ei->b));
  }
  if (const auto* lm = std::get_if<LengthAtMostSpec>(&v)) {
    const double lambda0 = lm->two_lambda0 / 2.0;
    switch (model.kind()) {
      case ScoreModel::Kind::kLocallyWeighted:
        return level_for_threshold_leq(cal, lambda0 / model.sigma(x));
      case ScoreModel::Kind::kQuantileBased:
        return level_for_threshold_leq(cal, lambda0 - (model.q_hi(x) - model.q_lo(x)) / 2.0);
      case ScoreModel::Kind::kMonotoneSigned:
        return Rational::one();  // one-sided intervals are never length-bounded
      default:
        break;
    }
    throw std::invalid_argument("length_at_most on a classification model");
  }
  if (const auto* lc = std::get_if<LocalizingSpec>(&v)) {
    Rational q = Rational::one();
    for (const auto& cell : lc->cells) q = min(q, localizing_cell_level(cal, model, x, cell));
    return q;
  }
  if (const auto* combine = std::get_if<CombineSpec>(&v)) {
    Rational q = Rational::zero();
    for (const auto& part : combine->parts) q = max(q, adjusted_pvalue(part, cal, model, x));
    return q;
  }
  throw std::invalid_argument("classification informative spec applied to a regression instance");
}

Rational adjusted_pvalue_generic(const std::vector<Rational>& grid,
                                 const std::function<bool(const Rational&)>& informative_at) {
  Rational result = Rational::one();
  bool found = false;
  for (const auto& alpha : grid) {
    const bool ok = informative_at(alpha);
    if (found && !ok) {
      throw std::logic_error("informativeness indicator is not monotone in alpha");
    }
    if (ok && !found) {
      result = alpha;
      found = true;
    }
  }
  return found ? result : Rational::one();
}

std::vector<Rational> pvalue_grid(std::size_t n_cal) {
  std::vector<Rational> grid;
  grid.reserve(n_cal + 1);
  for (std::size_t k = 1; k <= n_cal + 1; ++k) {
    grid.emplace_back(static_cast<std::int64_t>(k), static_cast<std::int64_t>(n_cal + 1));
  }
  return grid;
}

std::vector<Rational> union_class_grid(const CalibrationScores& cal, int K) {
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  std::vector<Rational> grid;
  for (int k = 1; k <= K; ++k) {
    const std::size_t nk = cal.class_present(k) ? cal.class_scores(k).size() : 0;
    for (std::size_t j = 1; j <= nk + 1; ++j) {
      const Rational r(static_cast<std::int64_t>(j), static_cast<std::int64_t>(nk + 1));
      if (seen.insert({r.num(), r.den()}).second) grid.push_back(r);
    }
  }
  std::sort(grid.begin(), grid.end());
  return grid;
}

Rational adjusted_pvalue_generic(const InformativeSpec& spec, const ClassPValues& family,
                                 std::size_t i, const std::vector<Rational>& grid) {
  return adjusted_pvalue_generic(grid, [&](const Rational& alpha) {
    return is_informative(PredictionRegion::from_labels(family.region(i, alpha)), spec);
  });
}

Rational adjusted_pvalue_generic(const InformativeSpec& spec, const CalibrationScores& cal,
                                 const ScoreModel& model, const std::vector<double>& x) {
  return adjusted_pvalue_generic(pvalue_grid(cal.size()), [&](const Rational& alpha) {
    return is_informative(prediction_set(model, x, cal, alpha), spec);
  });
}

}  // namespace infocp
