#include "prb/metrics.hpp"

#include <cmath>
#include <string>

namespace prb {

namespace {

template <class A, class B>
void require_same_length(std::span<A> a, std::span<B> b, const char* op) {
  if (a.size() != b.size()) {
    throw MetricsError(std::string(op) + ": length mismatch " + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()));
  }
  if (a.empty()) throw MetricsError(std::string(op) + ": empty input");
}

}  // namespace

PointErrors point_errors(std::span<const double> truth, std::span<const double> pred) {
  require_same_length(truth, pred, "point_errors");
  double se = 0.0, ae = 0.0, ape = 0.0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if (truth[t] == 0.0) {
      throw MetricsError("point_errors: MAPE undefined, truth is zero at index " + std::to_string(t));
    }
    const double e = truth[t] - pred[t];
    se += e * e;
    ae += std::abs(e);
    ape += std::abs(e) / truth[t];
  }
  const double n = static_cast<double>(truth.size());
  return PointErrors{se / n, ae / n, 100.0 * ape / n};
}

double normalized_deviation(std::span<const double> truth, std::span<const double> pred) {
  require_same_length(truth, pred, "normalized_deviation");
  double num = 0.0, den = 0.0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    num += std::abs(truth[t] - pred[t]);
    den += std::abs(truth[t]);
  }
  if (den == 0.0) throw MetricsError("normalized_deviation: truth is all zero");
  return num / den;
}

double quantile_loss(std::span<const double> truth, std::span<const double> qpred, double q) {
  if (!(q > 0.0 && q < 1.0)) throw MetricsError("quantile_loss: level must lie in (0, 1)");
  require_same_length(truth, qpred, "quantile_loss");
  double acc = 0.0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    const double e = truth[t] - qpred[t];
    acc += e > 0.0 ? q * e : (1.0 - q) * -e;
  }
  return 2.0 * acc / static_cast<double>(truth.size());
}

double coverage(std::span<const double> truth, std::span<const double> qpred) {
  require_same_length(truth, qpred, "coverage");
  std::size_t hit = 0;
  for (std::size_t t = 0; t < truth.size(); ++t) hit += truth[t] <= qpred[t];
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

Provisioning provisioning(std::span<const double> truth, std::span<const int> alloc) {
  require_same_length(truth, alloc, "provisioning");
  std::size_t over = 0;
  for (std::size_t t = 0; t < truth.size(); ++t) over += alloc[t] >= truth[t];
  const double n = static_cast<double>(truth.size());
  return Provisioning{100.0 * static_cast<double>(over) / n,
                      100.0 * static_cast<double>(truth.size() - over) / n};
}

}  // namespace prb
