#include "infocp/scores.hpp"

#include <cmath>
#include <stdexcept>

namespace infocp {

namespace {
constexpr double kSigmaFloor = 1e-9;
}

ScoreModel ScoreModel::locally_weighted(RealFn mu, RealFn sigma) {
  ScoreModel m;
  m.kind_ = Kind::kLocallyWeighted;
  m.f1_ = std::move(mu);
  m.f2_ = std::move(sigma);
  return m;
}

ScoreModel ScoreModel::quantile_based(RealFn q_lo, RealFn q_hi) {
  ScoreModel m;
  m.kind_ = Kind::kQuantileBased;
  m.f1_ = std::move(q_lo);
  m.f2_ = std::move(q_hi);
  return m;
}

ScoreModel ScoreModel::monotone_signed(RealFn mu, RealFn sigma) {
  ScoreModel m;
  m.kind_ = Kind::kMonotoneSigned;
  m.f1_ = std::move(mu);
  m.f2_ = std::move(sigma);
  return m;
}

ScoreModel ScoreModel::class_residual(std::function<std::vector<double>(const std::vector<double>&)> pi,
                                      int num_classes) {
  if (num_classes < 2) throw std::invalid_argument("class_residual needs K >= 2");
  ScoreModel m;
  m.kind_ = Kind::kClassResidual;
  m.pi_ = std::move(pi);
  m.num_classes_ = num_classes;
  return m;
}

double ScoreModel::mu(const std::vector<double>& x) const {
  switch (kind_) {
    case Kind::kLocallyWeighted:
    case Kind::kMonotoneSigned:
      return f1_(x);
    case Kind::kQuantileBased:
      return center(x);
    default:
      throw std::logic_error("mu() on a classification score model");
  }
}

double ScoreModel::sigma(const std::vector<double>& x) const {
  if (kind_ != Kind::kLocallyWeighted && kind_ != Kind::kMonotoneSigned) {
    throw std::logic_error("sigma() on a model without a sigma predictor");
  }
  const double s = f2_(x);
  return s < kSigmaFloor ? kSigmaFloor : s;
}

double ScoreModel::q_lo(const std::vector<double>& x) const {
  if (kind_ != Kind::kQuantileBased) throw std::logic_error("q_lo() on a non-quantile model");
  const double lo = f1_(x);
  const double hi = f2_(x);
  if (lo > hi) throw std::invalid_argument("quantile model with q_lo(x) > q_hi(x)");
  return lo;
}

double ScoreModel::q_hi(const std::vector<double>& x) const {
  if (kind_ != Kind::kQuantileBased) throw std::logic_error("q_hi() on a non-quantile model");
  const double lo = f1_(x);
  const double hi = f2_(x);
  if (lo > hi) throw std::invalid_argument("quantile model with q_lo(x) > q_hi(x)");
  return hi;
}

double ScoreModel::center(const std::vector<double>& x) const {
  if (kind_ == Kind::kQuantileBased) return 0.5 * (q_lo(x) + q_hi(x));
  return mu(x);
}

double ScoreModel::score(const std::vector<double>& x, double y) const {
  switch (kind_) {
    case Kind::kLocallyWeighted:
      return std::abs(y - f1_(x)) / sigma(x);
    case Kind::kQuantileBased: {
      const double lo = q_lo(x);
      const double hi = f2_(x);
      return std::max(lo - y, y - hi);
    }
    case Kind::kMonotoneSigned:
      return (f1_(x) - y) / sigma(x);
    case Kind::kClassResidual:
      throw std::logic_error("real-valued y on a classification score model");
  }
  return 0.0;
}

double ScoreModel::score(const std::vector<double>& x, int label) const {
  if (kind_ != Kind::kClassResidual) throw std::logic_error("class label on a regression score model");
  if (label < 1 || label > num_classes_) throw std::invalid_argument("label out of range");
  return 1.0 - pi_(x)[static_cast<std::size_t>(label - 1)];
}

double ScoreModel::score(const std::vector<double>& x, const Label& y) const {
  if (std::holds_alternative<int>(y)) return score(x, std::get<int>(y));
  return score(x, std::get<double>(y));
}

std::vector<double> ScoreModel::class_probs(const std::vector<double>& x) const {
  if (kind_ != Kind::kClassResidual) throw std::logic_error("class_probs() on a regression model");
  return pi_(x);
}

PredictionRegion ScoreModel::level_set(const std::vector<double>& x, double threshold) const {
  switch (kind_) {
    case Kind::kLocallyWeighted: {
      if (threshold == kInf) return PredictionRegion::from_interval(Interval::whole());
      const double m = f1_(x);
      const double s = sigma(x);
      return PredictionRegion::from_interval(Interval::make(m - threshold * s, m + threshold * s));
    }
    case Kind::kQuantileBased: {
      if (threshold == kInf) return PredictionRegion::from_interval(Interval::whole());
      return PredictionRegion::from_interval(Interval::make(q_lo(x) - threshold, q_hi(x) + threshold));
    }
    case Kind::kMonotoneSigned: {
      if (threshold == kInf) return PredictionRegion::from_interval(Interval::whole());
      return PredictionRegion::from_interval(Interval::make(f1_(x) - threshold * sigma(x), kInf));
    }
    case Kind::kClassResidual: {
      LabelSet set;
      set.num_classes = num_classes_;
      if (threshold == kInf) return PredictionRegion::from_labels(LabelSet::full(num_classes_));
      const auto probs = pi_(x);
      for (int k = 1; k <= num_classes_; ++k) {
        if (1.0 - probs[static_cast<std::size_t>(k - 1)] <= threshold) set.labels.push_back(k);
      }
      return PredictionRegion::from_labels(std::move(set));
    }
  }
  return PredictionRegion::from_interval(Interval::none());
}

namespace {

struct GaussianClassifier {
  std::vector<std::vector<double>> means;  // K x d
  std::vector<double> var;                 // pooled diagonal, length d
  std::vector<double> log_prior;           // length K

  std::vector<double> probs(const std::vector<double>& x) const {
    const std::size_t K = means.size();
    std::vector<double> logp(K);
    double best = -kInf;
    for (std::size_t k = 0; k < K; ++k) {
      double ll = log_prior[k];
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double dev = x[j] - means[k][j];
        ll -= 0.5 * dev * dev / var[j];
      }
      logp[k] = ll;
      best = std::max(best, ll);
    }
    double total = 0.0;
    for (auto& v : logp) {
      v = std::exp(v - best);
      total += v;
    }
    for (auto& v : logp) v /= total;
    return logp;
  }
};

}  // namespace

ScoreModel fit_gaussian_classifier(const std::vector<LabeledExample>& data, int K) {
  if (data.empty()) throw std::invalid_argument("empty training data");
  const std::size_t d = data[0].features.size();
  std::vector<std::size_t> counts(static_cast<std::size_t>(K), 0);
  auto gc = std::make_shared<GaussianClassifier>();
  gc->means.assign(static_cast<std::size_t>(K), std::vector<double>(d, 0.0));
  gc->var.assign(d, 0.0);
  gc->log_prior.assign(static_cast<std::size_t>(K), 0.0);

  for (const auto& ex : data) {
    if (ex.features.size() != d) throw std::invalid_argument("inconsistent feature dimension");
    const int y = std::get<int>(ex.label);
    if (y < 1 || y > K) throw std::invalid_argument("training label out of 1..K");
    const std::size_t k = static_cast<std::size_t>(y - 1);
    ++counts[k];
    for (std::size_t j = 0; j < d; ++j) gc->means[k][j] += ex.features[j];
  }
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < 2) {
      throw std::invalid_argument("class " + std::to_string(k + 1) + " has fewer than 2 training examples");
    }
    for (auto& v : gc->means[k]) v /= static_cast<double>(counts[k]);
    gc->log_prior[k] = std::log(static_cast<double>(counts[k]) / static_cast<double>(data.size()));
  }
  for (const auto& ex : data) {
    const std::size_t k = static_cast<std::size_t>(std::get<int>(ex.label) - 1);
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = ex.features[j] - gc->means[k][j];
      gc->var[j] += dev * dev;
    }
  }
  const double dof = static_cast<double>(data.size() - static_cast<std::size_t>(K));
  for (auto& v : gc->var) v = std::max(v / dof, 1e-12);

  return ScoreModel::class_residual(
      [gc](const std::vector<double>& x) { return gc->probs(x); }, K);
}

int ScoreMatrix::argmin_label(std::size_t i) const {
  const auto& row = s[i];
  std::size_t best = 0;
  for (std::size_t k = 1; k < row.size(); ++k) {
    if (row[k] < row[best]) best = k;
  }
  return static_cast<int>(best + 1);
}

ScoreMatrix compute_score_matrix(const ScoreModel& model,
                                 const std::vector<std::vector<double>>& points,
                                 const TieBreaker* tie_breaker) {
  if (model.task() != Task::kClassification) {
    throw std::logic_error("score matrix is for classification models");
  }
  ScoreMatrix out;
  out.K = model.num_classes();
  out.s.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto probs = model.class_probs(points[i]);
    auto& row = out.s[i];
    row.resize(static_cast<std::size_t>(out.K));
    for (int k = 1; k <= out.K; ++k) {
      double v = 1.0 - probs[static_cast<std::size_t>(k - 1)];
      if (tie_breaker != nullptr) {
        v = tie_breaker->apply(v, i, static_cast<std::uint64_t>(k));
      }
      row[static_cast<std::size_t>(k - 1)] = v;
    }
  }
  return out;
}

}  // namespace infocp
