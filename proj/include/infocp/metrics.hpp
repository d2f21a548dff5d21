#pragma once

#include <string>
#include <vector>

#include "infocp/selection.hpp"

namespace infocp {

struct ReplicationMetrics {
  double fcp = 0.0;
  double fdp = 0.0;
  double adjusted_power = 0.0;
  double covered_fraction = 0.0;
  std::size_t n_selected = 0;
  double sel_rate = 0.0;  // |S| / m over the original test sample
  double avg_size = 0.0;  // NaN when nothing is selected
};

// Evaluates one replication against the hidden truth. FCP counts selected
// regions missing the true outcome; FDP counts selected examples whose truth
// lies outside the union of the collection; adjusted power sums
// 1{covered}/|C| (an unbounded interval contributes 0).
ReplicationMetrics evaluate_outcome(const SelectionOutcome& outcome,
                                    const std::vector<Label>& true_labels,
                                    const InformativeSpec& spec, std::size_t m_total);

// For the directional procedure the error is a wrong band call.
ReplicationMetrics evaluate_directional(const SelectionOutcome& outcome,
                                        const std::vector<int>& true_bands, std::size_t m_total);

struct Aggregate {
  double mean = 0.0;
  double se = 0.0;  // sample sd / sqrt(B)
};

struct AggregateReport {
  std::string scenario;
  std::string procedure;
  std::size_t B = 0;
  Aggregate fcr;
  Aggregate fdr;
  Aggregate power;
  Aggregate covered;
  double sel_rate = 0.0;
  double avg_size = 0.0;  // mean over replications with a nonempty selection
};

// Means and Monte-Carlo standard errors over B >= 2 replications.
AggregateReport aggregate(const std::vector<ReplicationMetrics>& reps);

// Shortest-round-trip decimal text; used everywhere a report must be
// byte-stable across runs.
std::string format_double(double v);

std::string report_csv_header();
std::string report_csv_row(const AggregateReport& report);

}  // namespace infocp
