#pragma once

#include <algorithm>
#include <limits>
#include <vector>

namespace infocp {

enum class Task { kClassification, kRegression };

constexpr double kInf = std::numeric_limits<double>::infinity();

// Closed interval [lo, hi], possibly unbounded on either side, or empty.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty = false;

  static Interval make(double lo, double hi) {
    Interval iv;
    if (lo > hi) {
      iv.empty = true;
    } else {
      iv.lo = lo;
      iv.hi = hi;
    }
    return iv;
  }
  static Interval whole() { return make(-kInf, kInf); }
  static Interval none() { return make(1.0, 0.0); }

  bool contains(double y) const { return !empty && lo <= y && y <= hi; }
  bool subset_of(const Interval& o) const {
    if (empty) return true;
    if (o.empty) return false;
    return o.lo <= lo && hi <= o.hi;
  }
  // Lebesgue length; +inf when unbounded.
  double length() const { return empty ? 0.0 : hi - lo; }
};

// Subset of {1..K}, kept sorted.
struct LabelSet {
  std::vector<int> labels;
  int num_classes = 0;

  static LabelSet full(int K) {
    LabelSet s;
    s.num_classes = K;
    s.labels.resize(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) s.labels[static_cast<std::size_t>(k)] = k + 1;
    return s;
  }

  bool contains(int y) const { return std::binary_search(labels.begin(), labels.end(), y); }
  std::size_t size() const { return labels.size(); }
};

struct PredictionRegion {
  Task task;
  Interval interval;  // regression
  LabelSet labels;    // classification

  static PredictionRegion from_interval(Interval iv) {
    PredictionRegion r;
    r.task = Task::kRegression;
    r.interval = iv;
    return r;
  }
  static PredictionRegion from_labels(LabelSet s) {
    PredictionRegion r;
    r.task = Task::kClassification;
    r.labels = std::move(s);
    return r;
  }

  // Cardinality for label sets, Lebesgue length for intervals.
  double size() const {
    return task == Task::kClassification ? static_cast<double>(labels.size())
                                         : interval.length();
  }
  bool is_empty() const {
    return task == Task::kClassification ? labels.labels.empty() : interval.empty;
  }
};

}  // namespace infocp
