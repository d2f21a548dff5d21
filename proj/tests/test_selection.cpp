#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "infocp/metrics.hpp"
#include "infocp/rng.hpp"
#include "infocp/selection.hpp"

using namespace infocp;

namespace {

// Random classification instance: arbitrary fixed scores, labels drawn
// independently. Everything downstream treats the scores as given.
struct ClassInstance {
  ScoreMatrix matrix;
  std::vector<int> cal_labels;
  std::vector<Label> truth;
  CalibrationScores cal;
  std::vector<std::size_t> test_rows;
  std::size_t n = 0;
  std::size_t m = 0;
};

ClassInstance random_class_instance(Rng& rng, std::size_t n, std::size_t m, int K) {
  ClassInstance inst;
  inst.n = n;
  inst.m = m;
  inst.matrix.K = K;
  inst.matrix.s.resize(n + m);
  for (auto& row : inst.matrix.s) {
    row.resize(static_cast<std::size_t>(K));
    for (auto& v : row) v = rng.uniform();
  }
  for (std::size_t j = 0; j < n; ++j) {
    inst.cal_labels.push_back(1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(K)));
  }
  for (std::size_t i = 0; i < m; ++i) {
    inst.truth.emplace_back(1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(K)));
    inst.test_rows.push_back(n + i);
  }
  inst.cal = CalibrationScores::from_matrix(inst.matrix, inst.cal_labels);
  return inst;
}

Rational random_q(Rng& rng) {
  const std::int64_t den = 7 + static_cast<std::int64_t>(rng.next_u64() % 60);
  return Rational(1 + static_cast<std::int64_t>(rng.next_u64() % den), den);
}

}  // namespace

TEST_CASE("bh step-up matches the worked example") {
  const std::vector<Rational> q = {Rational(1, 100), Rational(2, 100), Rational(20, 100),
                                   Rational(90, 100)};
  const auto sel = bh(q, Rational(1, 10));
  CHECK(sel.l_hat == 2);
  CHECK(sel.selected == std::vector<std::size_t>{0, 1});
  CHECK(sel.threshold == Rational(1, 20));

  const std::vector<Rational> ones(5, Rational::one());
  CHECK(bh(ones, Rational(9, 10)).selected.empty());

  const std::vector<Rational> tiny(6, Rational(1, 100));
  CHECK(bh(tiny, Rational(1, 10)).selected.size() == 6);  // q <= alpha/m selects all
}

TEST_CASE("bh selects ties together and satisfies the step-up characterization") {
  Rng rng(71);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t m = 1 + rng.next_u64() % 24;
    std::vector<Rational> q;
    for (std::size_t i = 0; i < m; ++i) q.push_back(random_q(rng));
    if (rep % 3 == 0 && m > 2) q[1] = q[0];  // force ties
    const Rational alpha(1 + static_cast<std::int64_t>(rng.next_u64() % 30), 40);
    const auto sel = bh(q, alpha);
    CHECK(sel.selected.size() == sel.l_hat);
    for (std::size_t i = 0; i < m; ++i) {
      const bool in = std::binary_search(sel.selected.begin(), sel.selected.end(), i);
      CHECK(in == (sel.l_hat > 0 && q[i] <= sel.threshold));
    }
  }
}

TEST_CASE("bh equals its iterative fixed-point form") {
  Rng rng(73);
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t m = 1 + rng.next_u64() % 30;
    std::vector<Rational> q;
    for (std::size_t i = 0; i < m; ++i) q.push_back(random_q(rng));
    const Rational alpha(1 + static_cast<std::int64_t>(rng.next_u64() % 20), 21);
    const auto direct = bh(q, alpha).selected;
    const auto iterative = bh_iterative(
        [&](std::size_t i, const Rational& level) { return q[i] <= level; }, alpha, m);
    CHECK(direct == iterative);
  }
}

TEST_CASE("infosp selects at the boundary when m = 1 and q equals alpha") {
  ClassPValues fam;
  fam.kind = PValueKind::kFull;
  fam.K = 2;
  fam.values = {{Rational(1, 10), Rational(8, 10)}};
  fam.test_scores = {{0.9, 0.1}};
  const auto outcome = infosp(fam, InformativeSpec::non_trivial(), Rational(1, 10));
  CHECK(outcome.selected == std::vector<std::size_t>{0});
  CHECK(outcome.adjusted_level == Rational(1, 10));
  REQUIRE(outcome.regions.size() == 1);
  CHECK(outcome.regions[0].labels.labels == std::vector<int>{2});
}

TEST_CASE("post-processing replaces empty regions by the best informative singleton") {
  LabelSet empty;
  empty.num_classes = 3;
  const auto region = PredictionRegion::from_labels(empty);

  const std::vector<double> scores = {0.2, 0.5, 0.9};
  CHECK(postprocess_region(region, scores, {1, 2, 3}).labels.labels == std::vector<int>{1});

  // Null class has the smallest score: fall back to the best non-null label.
  CHECK(postprocess_region(region, scores, {2, 3}).labels.labels == std::vector<int>{2});

  LabelSet nonempty;
  nonempty.num_classes = 3;
  nonempty.labels = {3};
  const auto kept = postprocess_region(PredictionRegion::from_labels(nonempty), scores, {1, 2, 3});
  CHECK(kept.labels.labels == std::vector<int>{3});
}

TEST_CASE("post-processing never lowers the adjusted power") {
  Rng rng(79);
  const auto spec = InformativeSpec::exclude_labels({2});
  for (int rep = 0; rep < 200; ++rep) {
    auto inst = random_class_instance(rng, 20, 10, 3);
    const auto fam = full_calibrated_family(inst.cal, inst.matrix, inst.test_rows);
    SelectionOutcome raw;
    raw.tag = ProcedureTag::kInfoSP;
    raw.m_eff = inst.m;
    raw.q_test_index.resize(inst.m);
    std::iota(raw.q_test_index.begin(), raw.q_test_index.end(), 0);
    raw.q.assign(inst.m, Rational::one());
    const Rational level(1 + static_cast<std::int64_t>(rng.next_u64() % 8), 21);
    for (std::size_t i = 0; i < inst.m; ++i) {
      auto region = PredictionRegion::from_labels(fam.region(i, level));
      if (!is_informative(region, spec)) continue;
      raw.selected.push_back(i);
      raw.regions.push_back(region);
    }
    SelectionOutcome processed = raw;
    postprocess_classification(processed, fam, spec);
    const auto before = evaluate_outcome(raw, inst.truth, spec, inst.m);
    const auto after = evaluate_outcome(processed, inst.truth, spec, inst.m);
    CHECK(after.adjusted_power >= before.adjusted_power);
    CHECK(audit_informative(processed, spec));
  }
}

TEST_CASE("the naive selection contains the infosp selection at the same level") {
  Rng rng(83);
  for (int rep = 0; rep < 300; ++rep) {
    auto inst = random_class_instance(rng, 25, 15, 3);
    const auto fam = full_calibrated_family(inst.cal, inst.matrix, inst.test_rows);
    const auto spec = rep % 2 == 0 ? InformativeSpec::non_trivial() : InformativeSpec::exclude_labels({1});
    const Rational alpha(1, 5);
    const auto base = naive(fam, spec, alpha);
    const auto info = infosp(fam, spec, alpha);
    CHECK(std::includes(base.selected.begin(), base.selected.end(), info.selected.begin(),
                        info.selected.end()));
  }
}

TEST_CASE("every selected region is informative and FDP stays below FCP") {
  Rng rng(89);
  for (int rep = 0; rep < 300; ++rep) {
    auto inst = random_class_instance(rng, 30, 20, 3);
    const auto spec = rep % 2 == 0 ? InformativeSpec::exclude_labels({3})
                                   : InformativeSpec::at_most_k(2);
    const bool class_cal = rep % 3 == 0;
    const auto fam = class_cal ? class_calibrated_family(inst.cal, inst.matrix, inst.test_rows)
                               : full_calibrated_family(inst.cal, inst.matrix, inst.test_rows);
    for (const auto& outcome :
         {naive(fam, spec, Rational(1, 5)), infosp(fam, spec, Rational(1, 5)),
          infoscop(inst.matrix, inst.cal_labels, inst.n / 2,
                   InitialSelection::bh_on_q(), spec, Rational(1, 5))}) {
      CHECK(audit_informative(outcome, spec));
      const auto metrics = evaluate_outcome(outcome, inst.truth, spec, inst.m);
      CHECK(metrics.fdp <= metrics.fcp + 1e-15);
      if (outcome.tag != ProcedureTag::kNaive && outcome.m_eff > 0) {
        // adjusted_level = alpha |S| / m_eff exactly
        CHECK(outcome.adjusted_level ==
              Rational(1, 5) * Rational(static_cast<std::int64_t>(outcome.selected.size()),
                                        static_cast<std::int64_t>(outcome.m_eff)));
      }
    }
  }
}

TEST_CASE("infoscop with keep-all reduces to infosp on the retained calibration") {
  Rng rng(97);
  for (const std::size_t r : {std::size_t{1}, std::size_t{19}}) {
    auto inst = random_class_instance(rng, 20, 12, 3);
    const auto spec = InformativeSpec::non_trivial();
    const auto scop =
        infoscop(inst.matrix, inst.cal_labels, r, InitialSelection::keep_all(), spec, Rational(1, 5));

    // Same selection from infosp on calibration rows r..n-1 directly.
    ScoreMatrix reduced;
    reduced.K = inst.matrix.K;
    std::vector<int> labels;
    for (std::size_t j = r; j < inst.n; ++j) {
      reduced.s.push_back(inst.matrix.s[j]);
      labels.push_back(inst.cal_labels[j]);
    }
    for (const auto row : inst.test_rows) reduced.s.push_back(inst.matrix.s[row]);
    const CalibrationScores cal = CalibrationScores::from_matrix(reduced, labels);
    std::vector<std::size_t> test_rows;
    for (std::size_t i = 0; i < inst.m; ++i) test_rows.push_back(labels.size() + i);
    const auto fam = full_calibrated_family(cal, reduced, test_rows);
    const auto direct = infosp(fam, spec, Rational(1, 5));

    CHECK(scop.selected == direct.selected);
    CHECK(scop.q == direct.q);
    CHECK(scop.adjusted_level == direct.adjusted_level);
    CHECK(scop.m_eff == direct.m_eff);
  }
}

TEST_CASE("infoscop yields a legal empty outcome when the initial selection removes every test point") {
  // Null-class scores far below everything make the class-1 p-values all 1,
  // so the null-class initial BH keeps nothing.
  Rng rng(101);
  auto inst = random_class_instance(rng, 10, 5, 3);
  for (auto& row : inst.matrix.s) row[0] = -10.0 + rng.uniform();
  inst.cal = CalibrationScores::from_matrix(inst.matrix, inst.cal_labels);
  const auto spec = InformativeSpec::exclude_labels({1});
  const auto outcome = infoscop(inst.matrix, inst.cal_labels, 5,
                                InitialSelection::bh_on_null_class(1), spec, Rational(1, 10));
  CHECK(outcome.m_eff == 0);
  CHECK(outcome.selected.empty());
  const auto metrics = evaluate_outcome(outcome, inst.truth, spec, inst.m);
  CHECK(metrics.fcp == 0.0);
}

TEST_CASE("infoscop split bounds are validated") {
  Rng rng(103);
  auto inst = random_class_instance(rng, 10, 4, 2);
  const auto spec = InformativeSpec::non_trivial();
  CHECK_THROWS_AS(infoscop(inst.matrix, inst.cal_labels, 0, InitialSelection::keep_all(), spec,
                           Rational(1, 10)),
                  std::invalid_argument);
  CHECK_THROWS_AS(infoscop(inst.matrix, inst.cal_labels, 10, InitialSelection::keep_all(), spec,
                           Rational(1, 10)),
                  std::invalid_argument);
}

TEST_CASE("the default bhq initial level is twice alpha") {
  Rng rng(105);
  auto inst = random_class_instance(rng, 20, 12, 3);
  const auto spec = InformativeSpec::exclude_labels({1});
  const auto implicit = infoscop(inst.matrix, inst.cal_labels, 10, InitialSelection::bh_on_q(),
                                 spec, Rational(1, 10));
  const auto explicit_level = infoscop(inst.matrix, inst.cal_labels, 10,
                                       InitialSelection::bh_on_q(Rational(1, 5)), spec,
                                       Rational(1, 10));
  CHECK(implicit.selected == explicit_level.selected);
  CHECK(implicit.q == explicit_level.q);
  CHECK(implicit.m_eff == explicit_level.m_eff);
}

TEST_CASE("a bhq initial level of one keeps every pseudo-test point") {
  Rng rng(106);
  auto inst = random_class_instance(rng, 20, 12, 3);
  const auto spec = InformativeSpec::non_trivial();
  const auto all = infoscop(inst.matrix, inst.cal_labels, 10,
                            InitialSelection::bh_on_q(Rational::one()), spec, Rational(1, 10));
  const auto keep = infoscop(inst.matrix, inst.cal_labels, 10, InitialSelection::keep_all(), spec,
                             Rational(1, 10));
  CHECK(all.m_eff == keep.m_eff);
  CHECK(all.selected == keep.selected);
  CHECK(all.q == keep.q);
}

TEST_CASE("a null class absent from the first split shrinks every adaptive p-value") {
  // p-adapt = pi_hat * 1 = 1/(r+1) <= alpha for every pseudo-test point, so
  // the initial BH keeps everything.
  Rng rng(108);
  auto inst = random_class_instance(rng, 20, 12, 3);
  for (std::size_t j = 0; j < 10; ++j) inst.cal_labels[j] = 1 + static_cast<int>(j % 2);  // no class 3
  inst.cal = CalibrationScores::from_matrix(inst.matrix, inst.cal_labels);
  const auto spec = InformativeSpec::exclude_labels({3});
  const auto nullclass = infoscop(inst.matrix, inst.cal_labels, 10,
                                  InitialSelection::bh_on_null_class(3), spec, Rational(1, 10));
  const auto keep = infoscop(inst.matrix, inst.cal_labels, 10, InitialSelection::keep_all(), spec,
                             Rational(1, 10));
  CHECK(nullclass.m_eff == keep.m_eff);
  CHECK(nullclass.selected == keep.selected);
}

TEST_CASE("initial selections are permutation preserving") {
  Rng rng(107);
  const auto spec = InformativeSpec::exclude_labels({1});
  for (int shuffle = 0; shuffle < 50; ++shuffle) {
    auto inst = random_class_instance(rng, 16, 10, 3);
    const std::size_t r = 8;
    const auto base = infoscop(inst.matrix, inst.cal_labels, r,
                               InitialSelection::bh_on_null_class(1), spec, Rational(1, 5));

    // Permute the test block; the selection must map through the permutation.
    std::vector<std::size_t> perm(inst.m);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = inst.m - 1; i > 0; --i) {
      std::swap(perm[i], perm[rng.next_u64() % (i + 1)]);
    }
    ClassInstance shuffled = inst;
    for (std::size_t i = 0; i < inst.m; ++i) {
      shuffled.matrix.s[inst.n + perm[i]] = inst.matrix.s[inst.n + i];
    }
    const auto permuted = infoscop(shuffled.matrix, shuffled.cal_labels, r,
                                   InitialSelection::bh_on_null_class(1), spec, Rational(1, 5));
    std::vector<std::size_t> expected;
    for (const auto i : base.selected) expected.push_back(perm[i]);
    std::sort(expected.begin(), expected.end());
    CHECK(permuted.selected == expected);
  }
}

TEST_CASE("directional procedure follows the corollary formulas") {
  ClassPValues fam;
  fam.kind = PValueKind::kClass;
  fam.K = 3;
  fam.values = {{Rational(1, 100), Rational(2, 100), Rational(50, 100)},
                {Rational(1, 100), Rational::one(), Rational(1, 100)},
                {Rational(2, 100), Rational(1, 100), Rational(3, 100)}};
  fam.test_scores = {{0.5, 0.9, 0.4}, {0.2, 0.9, 0.3}, {0.3, 0.8, 0.3}};
  const auto outcome = directional_fdr(fam, Rational(1, 10));
  REQUIRE(outcome.q.size() == 3);
  CHECK(outcome.q[0] == Rational(1, 50));       // max(0.02, min(0.01, 0.5))
  CHECK(outcome.q[1] == Rational::one());       // null band plausible: never selected
  CHECK(outcome.q[2] == Rational(1, 50));       // max(0.01, min(0.02, 0.03))
  CHECK(outcome.selected == std::vector<std::size_t>{0, 2});
  CHECK(outcome.decisions[0] == 3);             // S_3 < S_1
  CHECK(outcome.decisions[1] == 1);             // tie resolves to class 1
  for (const auto& region : outcome.regions) CHECK(region.labels.size() == 1);

  ClassPValues two_class = fam;
  two_class.K = 2;
  CHECK_THROWS_AS(directional_fdr(two_class, Rational(1, 10)), std::invalid_argument);
}

TEST_CASE("one-sided selection: q is the p-value at y0 and intervals exclude it") {
  const auto ms = ScoreModel::monotone_signed([](const std::vector<double>& x) { return 2.0 * x[0]; },
                                              [](const std::vector<double>&) { return 1.0; });
  const double y0 = 0.8;
  std::size_t violations = 0;
  double fdp_sum = 0.0;
  const int B = 400;
  for (int b = 0; b < B; ++b) {
    Rng rep = Rng::substream(2222, static_cast<std::uint64_t>(b));
    std::vector<LabeledExample> cal_data;
    for (int j = 0; j < 80; ++j) {
      const double x = rep.uniform(0.0, 1.0);
      cal_data.push_back({{x}, 2.0 * x + rep.normal()});
    }
    std::vector<std::vector<double>> test;
    std::vector<Label> truth;
    for (int i = 0; i < 40; ++i) {
      const double x = rep.uniform(0.0, 1.0);
      test.push_back({x});
      truth.emplace_back(2.0 * x + rep.normal());
    }
    const CalibrationScores cal = CalibrationScores::from_regression(ms, cal_data);
    const auto outcome = jc_one_sided(cal, ms, test, y0, Rational(1, 10));
    for (std::size_t i = 0; i < outcome.q.size(); ++i) {
      CHECK(outcome.q[i] == full_calibrated_pvalue(cal, ms.score(test[i], y0)));
    }
    std::size_t false_sel = 0;
    for (std::size_t j = 0; j < outcome.selected.size(); ++j) {
      if (!(outcome.regions[j].interval.lo > y0)) ++violations;
      if (std::get<double>(truth[outcome.selected[j]]) <= y0) ++false_sel;
    }
    fdp_sum += outcome.selected.empty()
                   ? 0.0
                   : static_cast<double>(false_sel) / static_cast<double>(outcome.selected.size());
  }
  CHECK(violations == 0);
  CHECK(fdp_sum / B < 0.1 + 0.05);  // FDR of {Y <= y0} on the selection

  const auto lw = ScoreModel::locally_weighted([](const std::vector<double>&) { return 0.0; },
                                               [](const std::vector<double>&) { return 1.0; });
  const CalibrationScores cal({1.0, 2.0});
  CHECK_THROWS_AS(jc_one_sided(cal, lw, {{0.0}}, 0.0, Rational(1, 10)), std::invalid_argument);
}

TEST_CASE("regression procedures stay informative on random instances") {
  Rng rng(113);
  const auto model = ScoreModel::locally_weighted([](const std::vector<double>& x) { return 3.0 * x[0]; },
                                                  [](const std::vector<double>&) { return 0.7; });
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<LabeledExample> cal_data;
    for (int j = 0; j < 60; ++j) {
      const double x = rng.uniform(-1.0, 1.0);
      cal_data.push_back({{x}, 3.0 * x + 0.7 * rng.normal()});
    }
    std::vector<std::vector<double>> test;
    std::vector<Label> truth;
    for (int i = 0; i < 30; ++i) {
      const double x = rng.uniform(-1.0, 1.0);
      test.push_back({x});
      truth.emplace_back(3.0 * x + 0.7 * rng.normal());
    }
    const CalibrationScores cal = CalibrationScores::from_regression(model, cal_data);
    const auto spec = rep % 2 == 0 ? InformativeSpec::exclude_interval(-0.5, 0.5)
                                   : InformativeSpec::length_at_most(3.0);
    for (const auto& outcome : {infosp(cal, model, test, spec, Rational(1, 10)),
                                naive(cal, model, test, spec, Rational(1, 10)),
                                infoscop(model, cal_data, test, 30, InitialSelection::bh_on_q(), spec,
                                         Rational(1, 10))}) {
      CHECK(audit_informative(outcome, spec));
      const auto metrics = evaluate_outcome(outcome, truth, spec, test.size());
      CHECK(metrics.fdp <= metrics.fcp + 1e-15);
    }
  }
}
