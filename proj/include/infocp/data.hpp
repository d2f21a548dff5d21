#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "infocp/region.hpp"

namespace infocp {

// Label is a class index in 1..K (classification) or a real outcome
// (regression).
using Label = std::variant<int, double>;

struct LabeledExample {
  std::vector<double> features;
  Label label;
};

// Calibration sample with labels plus unlabeled test features. Hidden test
// labels are for the metrics module only; procedures never read them.
struct SplitDataset {
  std::vector<LabeledExample> calibration;
  std::vector<std::vector<double>> test_features;
  std::optional<std::vector<Label>> test_labels_hidden;

  std::size_t n() const { return calibration.size(); }
  std::size_t m() const { return test_features.size(); }
};

// Deterministic jitter keyed by (example index, label), used to enforce the
// no-ties assumption on discrete data.
struct TieBreaker {
  std::uint64_t seed = 0;
  double magnitude = 1e-12;

  double jitter(std::uint64_t index, std::uint64_t label_key) const;
  double apply(double score, std::uint64_t index, std::uint64_t label_key) const {
    return score + jitter(index, label_key);
  }
};

std::uint64_t label_key(const Label& y);

// CSV with header f1..fd,label. Classification labels are 1-based integers;
// set `classification` accordingly. Throws std::runtime_error with the line
// number on malformed input.
std::vector<LabeledExample> load_labeled_csv(const std::string& path, bool classification);

// CSV with header f1..fd (no label column).
std::vector<std::vector<double>> load_features_csv(const std::string& path);

}  // namespace infocp
