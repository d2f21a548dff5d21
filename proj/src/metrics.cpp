#include "infocp/metrics.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace infocp {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kZeroLengthCap = 1e9;  // 1/epsilon for zero-length nonempty intervals

bool region_covers(const PredictionRegion& region, const Label& y) {
  if (region.task == Task::kClassification) return region.labels.contains(std::get<int>(y));
  return region.interval.contains(std::get<double>(y));
}

// y lies in the union of the collection iff the singleton region at y is
// informative (monotonicity).
bool in_union(const Label& y, const InformativeSpec& spec, int K) {
  if (spec.task() == Task::kClassification) {
    LabelSet s;
    s.num_classes = K;
    s.labels = {std::get<int>(y)};
    return is_informative(PredictionRegion::from_labels(std::move(s)), spec);
  }
  const double v = std::get<double>(y);
  return is_informative(PredictionRegion::from_interval(Interval::make(v, v)), spec);
}

double power_contribution(const PredictionRegion& region) {
  const double size = region.size();
  if (std::isinf(size)) return 0.0;
  if (size <= 0.0 && !region.is_empty()) return kZeroLengthCap;
  return size > 0.0 ? 1.0 / size : 0.0;
}

}  // namespace

ReplicationMetrics evaluate_outcome(const SelectionOutcome& outcome,
                                    const std::vector<Label>& true_labels,
                                    const InformativeSpec& spec, std::size_t m_total) {
  ReplicationMetrics rm;
  rm.n_selected = outcome.selected.size();
  rm.sel_rate = m_total == 0 ? 0.0 : static_cast<double>(rm.n_selected) / static_cast<double>(m_total);
  if (outcome.selected.empty()) {
    rm.avg_size = kNan;
    return rm;
  }

  int K = 0;
  if (!outcome.regions.empty() && outcome.regions.front().task == Task::kClassification) {
    K = outcome.regions.front().labels.num_classes;
  }
  std::size_t not_covered = 0;
  std::size_t nulls = 0;
  double power = 0.0;
  double size_sum = 0.0;
  for (std::size_t j = 0; j < outcome.selected.size(); ++j) {
    const Label& y = true_labels.at(outcome.selected[j]);
    const PredictionRegion& region = outcome.regions[j];
    const bool covered = region_covers(region, y);
    if (!covered) ++not_covered;
    if (!in_union(y, spec, K)) ++nulls;
    if (covered) power += power_contribution(region);
    size_sum += region.size();
  }
  const double denom = static_cast<double>(outcome.selected.size());
  rm.fcp = static_cast<double>(not_covered) / denom;
  rm.fdp = static_cast<double>(nulls) / denom;
  rm.adjusted_power = power;
  rm.covered_fraction = (denom - static_cast<double>(not_covered)) / denom;
  rm.avg_size = size_sum / denom;
  return rm;
}

ReplicationMetrics evaluate_directional(const SelectionOutcome& outcome,
                                        const std::vector<int>& true_bands, std::size_t m_total) {
  ReplicationMetrics rm;
  rm.n_selected = outcome.selected.size();
  rm.sel_rate = m_total == 0 ? 0.0 : static_cast<double>(rm.n_selected) / static_cast<double>(m_total);
  if (outcome.selected.empty()) {
    rm.avg_size = kNan;
    return rm;
  }
  std::size_t wrong = 0;
  for (std::size_t j = 0; j < outcome.selected.size(); ++j) {
    if (outcome.decisions[j] != true_bands.at(outcome.selected[j])) ++wrong;
  }
  const double denom = static_cast<double>(outcome.selected.size());
  rm.fcp = static_cast<double>(wrong) / denom;  // directional FDP
  rm.fdp = rm.fcp;
  rm.covered_fraction = 1.0 - rm.fcp;
  rm.adjusted_power = denom - static_cast<double>(wrong);  // singleton regions
  rm.avg_size = 1.0;
  return rm;
}

namespace {

Aggregate summarize(const std::vector<double>& values) {
  Aggregate a;
  const double b = static_cast<double>(values.size());
  for (const double v : values) a.mean += v;
  a.mean /= b;
  double ss = 0.0;
  for (const double v : values) ss += (v - a.mean) * (v - a.mean);
  a.se = std::sqrt(ss / (b - 1.0)) / std::sqrt(b);
  return a;
}

}  // namespace

AggregateReport aggregate(const std::vector<ReplicationMetrics>& reps) {
  if (reps.size() < 2) throw std::invalid_argument("aggregate needs B >= 2 replications");
  AggregateReport report;
  report.B = reps.size();
  std::vector<double> fcp, fdp, power, covered;
  fcp.reserve(reps.size());
  double sel_sum = 0.0;
  double size_sum = 0.0;
  std::size_t size_count = 0;
  for (const auto& r : reps) {
    fcp.push_back(r.fcp);
    fdp.push_back(r.fdp);
    power.push_back(r.adjusted_power);
    covered.push_back(r.covered_fraction);
    sel_sum += r.sel_rate;
    if (!std::isnan(r.avg_size)) {
      size_sum += r.avg_size;
      ++size_count;
    }
  }
  report.fcr = summarize(fcp);
  report.fdr = summarize(fdp);
  report.power = summarize(power);
  report.covered = summarize(covered);
  report.sel_rate = sel_sum / static_cast<double>(reps.size());
  report.avg_size = size_count == 0 ? kNan : size_sum / static_cast<double>(size_count);
  return report;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string report_csv_header() {
  return "scenario,procedure,fcr,fcr_se,fdr,fdr_se,power,power_se,sel_rate,avg_size,covered_frac,B";
}

std::string report_csv_row(const AggregateReport& r) {
  std::string row = r.scenario + "," + r.procedure;
  row += "," + format_double(r.fcr.mean) + "," + format_double(r.fcr.se);
  row += "," + format_double(r.fdr.mean) + "," + format_double(r.fdr.se);
  row += "," + format_double(r.power.mean) + "," + format_double(r.power.se);
  row += "," + format_double(r.sel_rate);
  row += "," + format_double(r.avg_size);
  row += "," + format_double(r.covered.mean);
  row += "," + std::to_string(r.B);
  return row;
}

}  // namespace infocp
