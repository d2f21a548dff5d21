#pragma once

#include <functional>
#include <memory>
#include <variant>
#include <vector>

#include "infocp/pvalues.hpp"

namespace infocp {

// Declarative description of the collection of informative prediction
// regions. All variants are monotone: shrinking an informative region keeps
// it informative.
class InformativeSpec;

struct ExcludeLabelsSpec {
  std::vector<int> labels;  // null classes, 1-based
};
struct NonTrivialSpec {};
struct AtMostKSpec {
  int k0;
};
struct ExcludeIntervalSpec {
  double a;  // may be -inf
  double b;  // may be +inf (not both infinite)
};
struct LengthAtMostSpec {
  double two_lambda0;
};
struct LocalizingSpec {
  std::vector<Interval> cells;  // pairwise disjoint (strictly)
};
struct CombineSpec {
  std::vector<InformativeSpec> parts;
};

class InformativeSpec {
 public:
  using Variant = std::variant<ExcludeLabelsSpec, NonTrivialSpec, AtMostKSpec, ExcludeIntervalSpec,
                               LengthAtMostSpec, LocalizingSpec, CombineSpec>;

  static InformativeSpec exclude_labels(std::vector<int> labels);
  static InformativeSpec non_trivial();
  static InformativeSpec at_most_k(int k0);
  static InformativeSpec exclude_interval(double a, double b);
  static InformativeSpec length_at_most(double two_lambda0);
  static InformativeSpec localizing(std::vector<Interval> cells);
  static InformativeSpec combine(std::vector<InformativeSpec> parts);

  Task task() const;
  const Variant& variant() const { return *v_; }

 private:
  InformativeSpec() = default;
  std::shared_ptr<const Variant> v_;
};

// Membership test for the collection. Throws std::invalid_argument on a
// region/spec task mismatch.
bool is_informative(const PredictionRegion& region, const InformativeSpec& spec);

// Labels k with {k} informative; used by the classification post-processing
// so that replacing an empty region keeps the outcome informative.
std::vector<int> informative_singletons(const InformativeSpec& spec, int K);

// Closed-form I-adjusted p-value q_i = min{alpha : C^alpha in I} for a
// classification p-value row.
Rational adjusted_pvalue(const InformativeSpec& spec, const std::vector<Rational>& p_row);

// Closed forms for regression, per score-model variant.
Rational adjusted_pvalue(const InformativeSpec& spec, const CalibrationScores& cal,
                         const ScoreModel& model, const std::vector<double>& x);

// Generic fallback: smallest grid point where the indicator is true, 1 if
// none. The indicator must be nondecreasing on the grid; a detected
// true-to-false transition throws std::logic_error (broken spec/model pair).
Rational adjusted_pvalue_generic(const std::vector<Rational>& grid,
                                 const std::function<bool(const Rational&)>& informative_at);

// p-value grid {k/(n+1)} including 1.
std::vector<Rational> pvalue_grid(std::size_t n_cal);
// Union of the per-class grids of a class-calibrated family.
std::vector<Rational> union_class_grid(const CalibrationScores& cal, int K);

Rational adjusted_pvalue_generic(const InformativeSpec& spec, const ClassPValues& family,
                                 std::size_t i, const std::vector<Rational>& grid);
Rational adjusted_pvalue_generic(const InformativeSpec& spec, const CalibrationScores& cal,
                                 const ScoreModel& model, const std::vector<double>& x);

}  // namespace infocp
