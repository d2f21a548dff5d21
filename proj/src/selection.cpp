#include "infocp/selection.hpp"

#include <algorithm>
#include <stdexcept>

namespace infocp {

std::string procedure_tag_name(ProcedureTag tag) {
  switch (tag) {
    case ProcedureTag::kNaive: return "naive";
    case ProcedureTag::kInfoSP: return "infosp";
    case ProcedureTag::kInfoSCOP: return "infoscop";
    case ProcedureTag::kAdaptInfoSP: return "adapt_infosp";
    case ProcedureTag::kDirectional: return "directional";
    case ProcedureTag::kJcOneSided: return "jc_one_sided";
  }
  return "unknown";
}

BhResult bh(const std::vector<Rational>& q, const Rational& alpha) {
  BhResult out;
  const std::size_t m = q.size();
  if (m == 0) return out;

  std::vector<Rational> sorted = q;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t l = m; l >= 1; --l) {
    if (sorted[l - 1] <= alpha * Rational(static_cast<std::int64_t>(l), static_cast<std::int64_t>(m))) {
      out.l_hat = l;
      break;
    }
  }
  if (out.l_hat == 0) return out;
  out.threshold =
      alpha * Rational(static_cast<std::int64_t>(out.l_hat), static_cast<std::int64_t>(m));
  for (std::size_t i = 0; i < m; ++i) {
    if (q[i] <= out.threshold) out.selected.push_back(i);
  }
  return out;
}

std::vector<std::size_t> bh_iterative(
    const std::function<bool(std::size_t, const Rational&)>& informative_at_level,
    const Rational& alpha, std::size_t m) {
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < m; ++i) {
    if (informative_at_level(i, alpha)) current.push_back(i);
  }
  while (true) {
    const Rational level =
        alpha * Rational(static_cast<std::int64_t>(current.size()), static_cast<std::int64_t>(m));
    std::vector<std::size_t> next;
    for (const std::size_t i : current) {
      if (informative_at_level(i, level)) next.push_back(i);
    }
    if (next.size() == current.size()) return next;
    current = std::move(next);
  }
}

PredictionRegion postprocess_region(const PredictionRegion& region,
                                    const std::vector<double>& score_row,
                                    const std::vector<int>& informative_singles) {
  if (!region.labels.labels.empty() || informative_singles.empty()) return region;
  int best = informative_singles.front();
  for (const int k : informative_singles) {
    if (score_row[static_cast<std::size_t>(k - 1)] < score_row[static_cast<std::size_t>(best - 1)]) {
      best = k;
    }
  }
  LabelSet s;
  s.num_classes = region.labels.num_classes;
  s.labels = {best};
  return PredictionRegion::from_labels(std::move(s));
}

void postprocess_classification(SelectionOutcome& outcome, const ClassPValues& family,
                                const InformativeSpec& spec) {
  const auto singles = informative_singletons(spec, family.K);
  for (std::size_t j = 0; j < outcome.selected.size(); ++j) {
    // selected indices are original test indices; locate the family row.
    std::size_t row = outcome.selected[j];
    if (!outcome.q_test_index.empty()) {
      const auto it =
          std::find(outcome.q_test_index.begin(), outcome.q_test_index.end(), outcome.selected[j]);
      row = static_cast<std::size_t>(it - outcome.q_test_index.begin());
    }
    outcome.regions[j] = postprocess_region(outcome.regions[j], family.test_scores[row], singles);
  }
}

namespace {

std::vector<std::size_t> iota_rows(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> rows;
  rows.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) rows.push_back(i);
  return rows;
}

SelectionOutcome run_bh_classification(const ClassPValues& family, const InformativeSpec& spec,
                                       const Rational& alpha, ProcedureTag tag,
                                       const std::vector<std::size_t>& test_index) {
  SelectionOutcome out;
  out.tag = tag;
  out.m_eff = family.m();
  out.q_test_index = test_index;
  out.q.reserve(family.m());
  for (std::size_t i = 0; i < family.m(); ++i) {
    out.q.push_back(adjusted_pvalue(spec, family.values[i]));
  }
  const BhResult sel = bh(out.q, alpha);
  out.adjusted_level = sel.threshold;
  const auto singles = informative_singletons(spec, family.K);
  for (const std::size_t i : sel.selected) {
    out.selected.push_back(test_index[i]);
    PredictionRegion region = PredictionRegion::from_labels(family.region(i, sel.threshold));
    out.regions.push_back(postprocess_region(region, family.test_scores[i], singles));
  }
  return out;
}

}  // namespace

SelectionOutcome infosp(const ClassPValues& family, const InformativeSpec& spec,
                        const Rational& alpha) {
  return run_bh_classification(family, spec, alpha, ProcedureTag::kInfoSP,
                               iota_rows(0, family.m()));
}

SelectionOutcome infosp(const CalibrationScores& cal, const ScoreModel& model,
                        const std::vector<std::vector<double>>& test_features,
                        const InformativeSpec& spec, const Rational& alpha) {
  SelectionOutcome out;
  out.tag = ProcedureTag::kInfoSP;
  out.m_eff = test_features.size();
  out.q_test_index = iota_rows(0, test_features.size());
  out.q.reserve(test_features.size());
  for (const auto& x : test_features) out.q.push_back(adjusted_pvalue(spec, cal, model, x));
  const BhResult sel = bh(out.q, alpha);
  out.adjusted_level = sel.threshold;
  if (sel.l_hat == 0) return out;
  const double threshold = score_threshold(cal, sel.threshold);
  for (const std::size_t i : sel.selected) {
    out.selected.push_back(i);
    out.regions.push_back(model.level_set(test_features[i], threshold));
  }
  return out;
}

SelectionOutcome naive(const ClassPValues& family, const InformativeSpec& spec,
                       const Rational& alpha) {
  SelectionOutcome out;
  out.tag = ProcedureTag::kNaive;
  out.m_eff = family.m();
  out.q_test_index = iota_rows(0, family.m());
  out.adjusted_level = alpha;
  const auto singles = informative_singletons(spec, family.K);
  for (std::size_t i = 0; i < family.m(); ++i) {
    out.q.push_back(adjusted_pvalue(spec, family.values[i]));
    PredictionRegion region = PredictionRegion::from_labels(family.region(i, alpha));
    if (!is_informative(region, spec)) continue;
    out.selected.push_back(i);
    out.regions.push_back(postprocess_region(region, family.test_scores[i], singles));
  }
  return out;
}

SelectionOutcome naive(const CalibrationScores& cal, const ScoreModel& model,
                       const std::vector<std::vector<double>>& test_features,
                       const InformativeSpec& spec, const Rational& alpha) {
  SelectionOutcome out;
  out.tag = ProcedureTag::kNaive;
  out.m_eff = test_features.size();
  out.q_test_index = iota_rows(0, test_features.size());
  out.adjusted_level = alpha;
  const double threshold = score_threshold(cal, alpha);
  for (std::size_t i = 0; i < test_features.size(); ++i) {
    out.q.push_back(adjusted_pvalue(spec, cal, model, test_features[i]));
    PredictionRegion region = model.level_set(test_features[i], threshold);
    if (!is_informative(region, spec)) continue;
    out.selected.push_back(i);
    out.regions.push_back(std::move(region));
  }
  return out;
}

InitialSelection InitialSelection::keep_all() {
  InitialSelection s;
  s.kind = Kind::kKeepAll;
  return s;
}

InitialSelection InitialSelection::bh_on_q(const Rational& level) {
  InitialSelection s;
  s.kind = Kind::kBhOnQ;
  s.level = level;
  return s;
}

InitialSelection InitialSelection::bh_on_null_class(int y0) {
  InitialSelection s;
  s.kind = Kind::kBhOnNullClass;
  s.null_class = y0;
  return s;
}

namespace {

Rational initial_level(const InitialSelection& init, const Rational& alpha) {
  if (init.level != Rational::zero()) return init.level;
  return (Rational(2, 1) * alpha).truncated_at_one();
}

CalibrationScores cal_from_rows(const ScoreMatrix& matrix, const std::vector<int>& cal_labels,
                                std::size_t begin, std::size_t end) {
  std::vector<int> labels(cal_labels.begin() + static_cast<std::ptrdiff_t>(begin),
                          cal_labels.begin() + static_cast<std::ptrdiff_t>(end));
  ScoreMatrix sub;
  sub.K = matrix.K;
  sub.s.assign(matrix.s.begin() + static_cast<std::ptrdiff_t>(begin),
               matrix.s.begin() + static_cast<std::ptrdiff_t>(end));
  return CalibrationScores::from_matrix(sub, labels);
}

}  // namespace

SelectionOutcome infoscop(const ScoreMatrix& matrix, const std::vector<int>& cal_labels,
                          std::size_t r, const InitialSelection& init,
                          const InformativeSpec& spec, const Rational& alpha) {
  const std::size_t n = cal_labels.size();
  const std::size_t total = matrix.s.size();
  if (total < n + 1) throw std::invalid_argument("infoscop: no test rows");
  if (r < 1 || r > n - 1) throw std::invalid_argument("infoscop: split r out of 1..n-1");

  const std::vector<std::size_t> pseudo_test = iota_rows(r, total);

  // Initial selection over {r+1..n+m} with {1..r} as its calibration.
  std::vector<std::size_t> s0;
  switch (init.kind) {
    case InitialSelection::Kind::kKeepAll:
      s0 = pseudo_test;
      break;
    case InitialSelection::Kind::kBhOnQ: {
      const CalibrationScores cal_a = cal_from_rows(matrix, cal_labels, 0, r);
      const ClassPValues fam = full_calibrated_family(cal_a, matrix, pseudo_test);
      std::vector<Rational> q;
      q.reserve(fam.m());
      for (std::size_t j = 0; j < fam.m(); ++j) q.push_back(adjusted_pvalue(spec, fam.values[j]));
      for (const std::size_t j : bh(q, initial_level(init, alpha)).selected) {
        s0.push_back(pseudo_test[j]);
      }
      break;
    }
    case InitialSelection::Kind::kBhOnNullClass: {
      const int y0 = init.null_class;
      if (y0 < 1 || y0 > matrix.K) throw std::invalid_argument("null class out of 1..K");
      const CalibrationScores cal_a = cal_from_rows(matrix, cal_labels, 0, r);
      std::size_t count_y0 = 0;
      for (std::size_t j = 0; j < r; ++j) {
        if (cal_labels[j] == y0) ++count_y0;
      }
      const Rational pi_hat(static_cast<std::int64_t>(count_y0 + 1), static_cast<std::int64_t>(r + 1));
      std::vector<Rational> p_adapt;
      p_adapt.reserve(pseudo_test.size());
      for (const std::size_t row : pseudo_test) {
        const Rational p = class_calibrated_pvalue(cal_a, matrix.at(row, y0), y0);
        p_adapt.push_back((pi_hat * p).truncated_at_one());
      }
      for (const std::size_t j : bh(p_adapt, alpha).selected) s0.push_back(pseudo_test[j]);
      break;
    }
  }

  // Post-selection calibration subset and surviving test rows.
  std::vector<std::size_t> cal_rows;
  std::vector<int> cal_sel_labels;
  std::vector<std::size_t> test_rows;
  for (const std::size_t row : s0) {
    if (row < n) {
      cal_rows.push_back(row);
      cal_sel_labels.push_back(cal_labels[row]);
    } else {
      test_rows.push_back(row);
    }
  }

  SelectionOutcome out;
  out.tag = ProcedureTag::kInfoSCOP;
  out.m_eff = test_rows.size();
  if (test_rows.empty()) return out;

  ScoreMatrix cal_sub;
  cal_sub.K = matrix.K;
  for (const std::size_t row : cal_rows) cal_sub.s.push_back(matrix.s[row]);
  const CalibrationScores cal_c = CalibrationScores::from_matrix(cal_sub, cal_sel_labels);

  ClassPValues fam0 = full_calibrated_family(cal_c, matrix, test_rows);
  fam0.kind = PValueKind::kPreprocessed;
  std::vector<std::size_t> test_index;
  test_index.reserve(test_rows.size());
  for (const std::size_t row : test_rows) test_index.push_back(row - n);

  SelectionOutcome inner =
      run_bh_classification(fam0, spec, alpha, ProcedureTag::kInfoSCOP, test_index);
  return inner;
}

SelectionOutcome infoscop(const ScoreModel& model, const std::vector<LabeledExample>& calibration,
                          const std::vector<std::vector<double>>& test_features, std::size_t r,
                          const InitialSelection& init, const InformativeSpec& spec,
                          const Rational& alpha, const TieBreaker* tie_breaker) {
  const std::size_t n = calibration.size();
  const std::size_t m = test_features.size();
  if (r < 1 || r > n - 1) throw std::invalid_argument("infoscop: split r out of 1..n-1");
  if (init.kind == InitialSelection::Kind::kBhOnNullClass) {
    throw std::invalid_argument("null-class initial selection is classification-only");
  }

  // Feature rows r..n+m-1 form the pseudo-test sample.
  std::vector<const std::vector<double>*> pseudo_x;
  for (std::size_t j = r; j < n; ++j) pseudo_x.push_back(&calibration[j].features);
  for (std::size_t i = 0; i < m; ++i) pseudo_x.push_back(&test_features[i]);

  std::vector<std::size_t> s0;  // offsets into pseudo_x
  if (init.kind == InitialSelection::Kind::kKeepAll) {
    s0 = iota_rows(0, pseudo_x.size());
  } else {
    std::vector<LabeledExample> cal_a(calibration.begin(),
                                      calibration.begin() + static_cast<std::ptrdiff_t>(r));
    const CalibrationScores cal_a_scores =
        CalibrationScores::from_regression(model, cal_a, tie_breaker);
    std::vector<Rational> q;
    q.reserve(pseudo_x.size());
    for (const auto* x : pseudo_x) q.push_back(adjusted_pvalue(spec, cal_a_scores, model, *x));
    s0 = bh(q, initial_level(init, alpha)).selected;
  }

  std::vector<LabeledExample> cal_c;
  std::vector<std::size_t> cal_c_index;
  std::vector<std::size_t> test_index;
  const std::size_t n_pseudo_cal = n - r;
  for (const std::size_t off : s0) {
    if (off < n_pseudo_cal) {
      cal_c.push_back(calibration[r + off]);
      cal_c_index.push_back(r + off);
    } else {
      test_index.push_back(off - n_pseudo_cal);
    }
  }

  SelectionOutcome out;
  out.tag = ProcedureTag::kInfoSCOP;
  out.m_eff = test_index.size();
  if (test_index.empty()) return out;

  // Jitter keys must stay tied to the original calibration indices.
  std::vector<double> cal_scores;
  cal_scores.reserve(cal_c.size());
  for (std::size_t j = 0; j < cal_c.size(); ++j) {
    double s = model.score(cal_c[j].features, cal_c[j].label);
    if (tie_breaker != nullptr) s = tie_breaker->apply(s, cal_c_index[j], label_key(cal_c[j].label));
    cal_scores.push_back(s);
  }
  const CalibrationScores cal_c_scores{std::move(cal_scores)};

  out.q_test_index = test_index;
  out.q.reserve(test_index.size());
  for (const std::size_t i : test_index) {
    out.q.push_back(adjusted_pvalue(spec, cal_c_scores, model, test_features[i]));
  }
  const BhResult sel = bh(out.q, alpha);
  out.adjusted_level = sel.threshold;
  if (sel.l_hat == 0) return out;
  const double threshold = score_threshold(cal_c_scores, sel.threshold);
  for (const std::size_t j : sel.selected) {
    out.selected.push_back(test_index[j]);
    out.regions.push_back(model.level_set(test_features[test_index[j]], threshold));
  }
  return out;
}

SelectionOutcome adapt_infosp(const ClassPValues& class_family,
                              const ClassProportionEstimate& pi_hat,
                              const std::vector<Rational>& weights, const InformativeSpec& spec,
                              const Rational& alpha) {
  if (class_family.kind != PValueKind::kClass) {
    throw std::invalid_argument("adapt_infosp needs the class-calibrated family");
  }
  const ClassPValues weighted = weighted_pvalues(class_family, pi_hat, weights);
  SelectionOutcome out = run_bh_classification(weighted, spec, alpha, ProcedureTag::kAdaptInfoSP,
                                               iota_rows(0, weighted.m()));
  return out;
}

SelectionOutcome directional_fdr(const ClassPValues& class_family, const Rational& alpha) {
  if (class_family.K != 3) throw std::invalid_argument("directional procedure needs K = 3");
  SelectionOutcome out;
  out.tag = ProcedureTag::kDirectional;
  out.m_eff = class_family.m();
  out.q_test_index = iota_rows(0, class_family.m());
  out.q.reserve(class_family.m());
  for (std::size_t i = 0; i < class_family.m(); ++i) {
    const Rational p1 = class_family.at(i, 1);
    const Rational p2 = class_family.at(i, 2);
    const Rational p3 = class_family.at(i, 3);
    out.q.push_back(max(p2, min(p1, p3)));
  }
  const BhResult sel = bh(out.q, alpha);
  out.adjusted_level = sel.threshold;
  for (const std::size_t i : sel.selected) {
    out.selected.push_back(i);
    // Call the plausible side: the smaller non-conformity score, ties to 1.
    const auto& scores = class_family.test_scores[i];
    const int decision = scores[0] <= scores[2] ? 1 : 3;
    out.decisions.push_back(decision);
    LabelSet s;
    s.num_classes = 3;
    s.labels = {decision};
    out.regions.push_back(PredictionRegion::from_labels(std::move(s)));
  }
  return out;
}

SelectionOutcome jc_one_sided(const CalibrationScores& cal, const ScoreModel& model,
                              const std::vector<std::vector<double>>& test_features, double y0,
                              const Rational& alpha) {
  if (model.kind() != ScoreModel::Kind::kMonotoneSigned) {
    throw std::invalid_argument("one-sided selection needs a monotone score");
  }
  SelectionOutcome out;
  out.tag = ProcedureTag::kJcOneSided;
  out.m_eff = test_features.size();
  out.q_test_index = iota_rows(0, test_features.size());
  out.q.reserve(test_features.size());
  for (const auto& x : test_features) {
    out.q.push_back(full_calibrated_pvalue(cal, model.score(x, y0)));
  }
  const BhResult sel = bh(out.q, alpha);
  out.adjusted_level = sel.threshold;
  if (sel.l_hat == 0) return out;
  const double threshold = score_threshold(cal, sel.threshold);
  for (const std::size_t i : sel.selected) {
    out.selected.push_back(i);
    // q_i <= threshold level forces mu - s*sigma > y0 on the selection.
    out.regions.push_back(model.level_set(test_features[i], threshold));
  }
  return out;
}

bool audit_informative(const SelectionOutcome& outcome, const InformativeSpec& spec) {
  for (const auto& region : outcome.regions) {
    if (!is_informative(region, spec)) return false;
  }
  return true;
}

}  // namespace infocp
