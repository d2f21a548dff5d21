#include <cmath>

#include "doctest.h"
#include "infocp/metrics.hpp"
#include "infocp/rng.hpp"

using namespace infocp;

namespace {

SelectionOutcome labels_outcome(std::vector<std::size_t> selected,
                                std::vector<std::vector<int>> regions, int K) {
  SelectionOutcome out;
  out.tag = ProcedureTag::kInfoSP;
  out.m_eff = 10;
  out.selected = std::move(selected);
  for (auto& labels : regions) {
    LabelSet s;
    s.num_classes = K;
    s.labels = std::move(labels);
    out.regions.push_back(PredictionRegion::from_labels(std::move(s)));
  }
  return out;
}

}  // namespace

TEST_CASE("fcp counts uncovered selections over 1 v |S|") {
  const std::vector<Label> truth = {Label{1}, Label{2}, Label{3}, Label{1}};
  const auto spec = InformativeSpec::non_trivial();

  auto outcome = labels_outcome({0, 1, 2}, {{2}, {2}, {3}}, 3);
  const auto metrics = evaluate_outcome(outcome, truth, spec, 4);
  CHECK(metrics.fcp == doctest::Approx(1.0 / 3.0));
  CHECK(metrics.covered_fraction == doctest::Approx(2.0 / 3.0));
  CHECK(metrics.n_selected == 3);
  CHECK(metrics.sel_rate == doctest::Approx(0.75));

  const auto empty = evaluate_outcome(labels_outcome({}, {}, 3), truth, spec, 4);
  CHECK(empty.fcp == 0.0);
  CHECK(std::isnan(empty.avg_size));
}

TEST_CASE("fdp counts selections whose truth lies outside the collection union") {
  const std::vector<Label> truth = {Label{1}, Label{2}, Label{3}};
  auto outcome = labels_outcome({0, 1, 2}, {{2}, {2}, {1, 2}}, 3);

  const auto excl = evaluate_outcome(outcome, truth, InformativeSpec::exclude_labels({1}), 3);
  CHECK(excl.fdp == doctest::Approx(1.0 / 3.0));  // only the class-1 truth is null

  const auto nt = evaluate_outcome(outcome, truth, InformativeSpec::non_trivial(), 3);
  CHECK(nt.fdp == 0.0);  // the union is the whole label space
}

TEST_CASE("adjusted power weighs coverage by the region size") {
  const std::vector<Label> truth = {Label{1}, Label{2}};
  auto outcome = labels_outcome({0, 1}, {{1, 3}, {2}}, 3);
  const auto metrics = evaluate_outcome(outcome, truth, InformativeSpec::non_trivial(), 2);
  CHECK(metrics.adjusted_power == doctest::Approx(0.5 + 1.0));
  CHECK(metrics.avg_size == doctest::Approx(1.5));

  // Unbounded intervals contribute zero power even when they cover.
  SelectionOutcome reg;
  reg.tag = ProcedureTag::kJcOneSided;
  reg.m_eff = 1;
  reg.selected = {0};
  reg.regions.push_back(PredictionRegion::from_interval(Interval::make(0.5, kInf)));
  const std::vector<Label> ytruth = {Label{2.0}};
  const auto one_sided =
      evaluate_outcome(reg, ytruth, InformativeSpec::exclude_interval(-kInf, 0.0), 1);
  CHECK(one_sided.adjusted_power == 0.0);
  CHECK(one_sided.fcp == 0.0);
}

TEST_CASE("directional metrics count wrong band calls") {
  SelectionOutcome out;
  out.tag = ProcedureTag::kDirectional;
  out.m_eff = 4;
  out.selected = {0, 2, 3};
  out.decisions = {1, 3, 3};
  for (const int d : out.decisions) {
    LabelSet s;
    s.num_classes = 3;
    s.labels = {d};
    out.regions.push_back(PredictionRegion::from_labels(std::move(s)));
  }
  const std::vector<int> bands = {1, 2, 1, 3};
  const auto metrics = evaluate_directional(out, bands, 4);
  CHECK(metrics.fcp == doctest::Approx(1.0 / 3.0));
  CHECK(metrics.adjusted_power == doctest::Approx(2.0));
}

TEST_CASE("aggregate reports means and standard errors") {
  std::vector<ReplicationMetrics> reps(10);
  for (auto& r : reps) r.fcp = 0.1;
  auto report = aggregate(reps);
  CHECK(report.fcr.mean == doctest::Approx(0.1));
  CHECK(report.fcr.se == doctest::Approx(0.0));

  for (std::size_t i = 0; i < reps.size(); ++i) reps[i].fcp = i % 2 == 0 ? 0.0 : 0.2;
  report = aggregate(reps);
  CHECK(report.fcr.mean == doctest::Approx(0.1));
  CHECK(report.fcr.se > 0.0);

  CHECK_THROWS_AS(aggregate(std::vector<ReplicationMetrics>(1)), std::invalid_argument);
}

TEST_CASE("standard errors shrink like the square root of B") {
  auto stream_se = [](std::size_t B) {
    Rng rng(515);
    std::vector<ReplicationMetrics> reps(B);
    for (auto& r : reps) r.fcp = rng.uniform();
    return aggregate(reps).fcr.se;
  };
  const double se100 = stream_se(100);
  const double se400 = stream_se(400);
  CHECK(se400 < se100);
  CHECK(se100 / se400 == doctest::Approx(2.0).epsilon(0.35));
}

TEST_CASE("report CSV rows are stable and complete") {
  AggregateReport r;
  r.scenario = "demo";
  r.procedure = "infosp";
  r.B = 7;
  r.fcr = {0.125, 0.01};
  r.fdr = {0.0, 0.0};
  r.power = {12.5, 0.25};
  r.covered = {0.9, 0.005};
  r.sel_rate = 0.4;
  r.avg_size = 1.75;
  CHECK(report_csv_header() ==
        "scenario,procedure,fcr,fcr_se,fdr,fdr_se,power,power_se,sel_rate,avg_size,covered_frac,B");
  CHECK(report_csv_row(r) == "demo,infosp,0.125,0.01,0,0,12.5,0.25,0.4,1.75,0.9,7");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(kInf) == "inf");
}
