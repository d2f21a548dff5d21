#pragma once

#include <functional>
#include <string>
#include <vector>

#include "infocp/informative.hpp"

namespace infocp {

enum class ProcedureTag { kNaive, kInfoSP, kInfoSCOP, kAdaptInfoSP, kDirectional, kJcOneSided };

std::string procedure_tag_name(ProcedureTag tag);

struct BhResult {
  std::vector<std::size_t> selected;  // indices into q, ascending
  std::size_t l_hat = 0;
  Rational threshold = Rational::zero();  // alpha * l_hat / m
};

// Step-up BH selection on exact rationals: l_hat = max{l : q_(l) <= alpha l/m},
// selected = {i : q_i <= alpha l_hat / m}. Ties share the threshold, so
// |selected| = l_hat.
BhResult bh(const std::vector<Rational>& q, const Rational& alpha);

// BH through the informativeness indicator alone, as the fixed point of
// S_t = {i in S_{t-1} : C^{alpha |S_{t-1}|/m} in I}. Equals bh(q, alpha)
// exactly via the duality q_i <= t iff C^t in I.
std::vector<std::size_t> bh_iterative(
    const std::function<bool(std::size_t, const Rational&)>& informative_at_level,
    const Rational& alpha, std::size_t m);

struct SelectionOutcome {
  ProcedureTag tag = ProcedureTag::kInfoSP;
  std::size_t m_eff = 0;                 // m for InfoSP; surviving test count for InfoSCOP
  std::vector<Rational> q;               // adjusted p-values over the effective test set
  std::vector<std::size_t> q_test_index; // original 0-based test index per q entry
  std::vector<std::size_t> selected;     // original 0-based test indices, ascending
  Rational adjusted_level = Rational::zero();
  std::vector<PredictionRegion> regions; // parallel to selected
  std::vector<int> decisions;            // directional procedure only
};

// Empty regions of selected classification examples are replaced by the
// lowest-score singleton among the labels whose singleton is informative,
// which keeps every reported region in the collection.
PredictionRegion postprocess_region(const PredictionRegion& region,
                                    const std::vector<double>& score_row,
                                    const std::vector<int>& informative_singles);
void postprocess_classification(SelectionOutcome& outcome, const ClassPValues& family,
                                const InformativeSpec& spec);

// InfoSP: S = BH(q) on the I-adjusted p-values, prediction sets at level
// alpha |S| / m. Classification outcomes are post-processed.
SelectionOutcome infosp(const ClassPValues& family, const InformativeSpec& spec,
                        const Rational& alpha);
SelectionOutcome infosp(const CalibrationScores& cal, const ScoreModel& model,
                        const std::vector<std::vector<double>>& test_features,
                        const InformativeSpec& spec, const Rational& alpha);

// Classical conformal sets at level alpha filtered down to the informative
// ones (step S_1 of the iterative recursion); the benchmark baseline.
SelectionOutcome naive(const ClassPValues& family, const InformativeSpec& spec,
                       const Rational& alpha);
SelectionOutcome naive(const CalibrationScores& cal, const ScoreModel& model,
                       const std::vector<std::vector<double>>& test_features,
                       const InformativeSpec& spec, const Rational& alpha);

struct InitialSelection {
  enum class Kind { kKeepAll, kBhOnQ, kBhOnNullClass };
  Kind kind = Kind::kBhOnQ;
  Rational level = Rational::zero();  // BhOnQ level; zero means "use 2*alpha"
  int null_class = 1;                 // BhOnNullClass

  static InitialSelection keep_all();
  static InitialSelection bh_on_q(const Rational& level = Rational::zero());
  static InitialSelection bh_on_null_class(int y0);
};

// InfoSCOP: split the calibration sample at r, run the initial selection on
// {r+1..n+m} with {1..r} as its calibration, then InfoSP with p-values
// conditional on the post-selection calibration subset. m_eff = 0 is a legal
// empty outcome.
SelectionOutcome infoscop(const ScoreMatrix& matrix, const std::vector<int>& cal_labels,
                          std::size_t r, const InitialSelection& init,
                          const InformativeSpec& spec, const Rational& alpha);
SelectionOutcome infoscop(const ScoreModel& model, const std::vector<LabeledExample>& calibration,
                          const std::vector<std::vector<double>>& test_features, std::size_t r,
                          const InitialSelection& init, const InformativeSpec& spec,
                          const Rational& alpha, const TieBreaker* tie_breaker = nullptr);

// Adapt-InfoSP: InfoSP on the weighted class-calibrated family.
SelectionOutcome adapt_infosp(const ClassPValues& class_family,
                              const ClassProportionEstimate& pi_hat,
                              const std::vector<Rational>& weights, const InformativeSpec& spec,
                              const Rational& alpha);

// Directional decision procedure for K = 3 with class 2 the null band:
// q_i = max(p2, min(p1, p3)), BH at alpha, decision 1 when S_1 >= S_3 else 3.
// Reported regions are the decision singletons.
SelectionOutcome directional_fdr(const ClassPValues& class_family, const Rational& alpha);

// One-sided selection for outcomes above y0 with a monotone score: q_i is the
// full-calibrated p-value at y0 and the reported intervals are
// [mu - s\sigma, +inf), which exclude y0 on the selection.
SelectionOutcome jc_one_sided(const CalibrationScores& cal, const ScoreModel& model,
                              const std::vector<std::vector<double>>& test_features, double y0,
                              const Rational& alpha);

// True for every reported region in the collection (the defining property of
// an informative procedure).
bool audit_informative(const SelectionOutcome& outcome, const InformativeSpec& spec);

}  // namespace infocp
