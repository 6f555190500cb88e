#include "prb/likelihoods.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "prb/special.hpp"

namespace prb {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

double positive(double x) { return std::max(x, std::numeric_limits<double>::min()); }

void require_same_shape(const char* op, const nn::Tensor& a, const nn::Tensor& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw nn::ShapeError(std::string(op) + ": incompatible shapes " + a.shape_str() + " and " +
                         b.shape_str());
  }
}

}  // namespace

StudentTParams project_studentt(double raw0, double raw1, double raw2, double nu_floor) {
  return StudentTParams{raw0, positive(nn::kernels::softplus(raw1)),
                        nu_floor + positive(nn::kernels::softplus(raw2))};
}

GaussianParams project_gaussian(double raw0, double raw1) {
  return GaussianParams{raw0, positive(nn::kernels::softplus(raw1))};
}

double studentt_logpdf(double y, const StudentTParams& p) {
  const double z = (y - p.mu) / p.sigma;
  return special::log_gamma(0.5 * (p.nu + 1.0)) - special::log_gamma(0.5 * p.nu) -
         std::log(p.sigma) - 0.5 * std::log(p.nu * std::numbers::pi) -
         0.5 * (p.nu + 1.0) * std::log1p(z * z / p.nu);
}

double gaussian_logpdf(double y, const GaussianParams& p) {
  const double z = (y - p.mu) / p.sigma;
  return -kHalfLog2Pi - std::log(p.sigma) - 0.5 * z * z;
}

double logpdf(double y, const LikelihoodParams& p) {
  return std::visit(
      [y](const auto& d) {
        if constexpr (std::is_same_v<std::decay_t<decltype(d)>, StudentTParams>) {
          return studentt_logpdf(y, d);
        } else {
          return gaussian_logpdf(y, d);
        }
      },
      p);
}

double draw(const StudentTParams& p, Rng& rng) {
  const double z = rng.normal();
  const double v = rng.chi_squared(p.nu);
  return p.mu + p.sigma * (z / std::sqrt(v / p.nu));
}

double draw(const GaussianParams& p, Rng& rng) { return p.mu + p.sigma * rng.normal(); }

std::vector<double> sample(const LikelihoodParams& dist, Rng& rng, std::size_t n) {
  if (n == 0) throw std::invalid_argument("sample: n must be at least 1");
  std::vector<double> out(n);
  std::visit(
      [&](const auto& d) {
        for (double& x : out) x = draw(d, rng);
      },
      dist);
  return out;
}

double nll_loss(std::span<const double> targets, std::span<const LikelihoodParams> params) {
  if (targets.size() != params.size()) {
    throw std::invalid_argument("nll_loss: " + std::to_string(targets.size()) + " targets but " +
                                std::to_string(params.size()) + " parameter sets");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < targets.size(); ++t) total -= logpdf(targets[t], params[t]);
  return total;
}

nn::Var studentt_nll(nn::Graph& g, nn::Var y, nn::Var mu, nn::Var sigma, nn::Var nu) {
  const nn::Tensor& ty = g.value(y);
  const nn::Tensor& tm = g.value(mu);
  const nn::Tensor& ts = g.value(sigma);
  const nn::Tensor& tn = g.value(nu);
  require_same_shape("studentt_nll(y,mu)", ty, tm);
  require_same_shape("studentt_nll(y,sigma)", ty, ts);
  require_same_shape("studentt_nll(y,nu)", ty, tn);

  const std::size_t n = ty.size();
  // Per-element partials of the negative log-density: d/dy, d/dmu, d/dsigma, d/dnu.
  std::vector<double> dy(n), dmu(n), dsigma(n), dnu(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = ts[i];
    const double v = tn[i];
    const double z = (ty[i] - tm[i]) / s;
    const double a = 1.0 + z * z / v;
    total -= studentt_logpdf(ty[i], StudentTParams{tm[i], s, v});
    const double dl_dmu = (v + 1.0) * z / (v * s * a);
    const double dl_dsigma = -1.0 / s + (v + 1.0) * z * z / (v * s * a);
    const double dl_dnu = 0.5 * special::digamma(0.5 * (v + 1.0)) - 0.5 * special::digamma(0.5 * v) -
                          0.5 / v - 0.5 * std::log1p(z * z / v) +
                          0.5 * (v + 1.0) * z * z / (v * v * a);
    dy[i] = dl_dmu;
    dmu[i] = -dl_dmu;
    dsigma[i] = -dl_dsigma;
    dnu[i] = -dl_dnu;
  }
  return g.custom({y, mu, sigma, nu}, nn::Tensor::scalar(total),
                  [dy = std::move(dy), dmu = std::move(dmu), dsigma = std::move(dsigma),
                   dnu = std::move(dnu)](const nn::Tensor& out, std::span<nn::Tensor* const> gi) {
                    const double s = out[0];
                    const std::vector<double>* parts[4] = {&dy, &dmu, &dsigma, &dnu};
                    for (std::size_t k = 0; k < 4; ++k) {
                      if (!gi[k]) continue;
                      for (std::size_t i = 0; i < parts[k]->size(); ++i) {
                        (*gi[k])[i] += s * (*parts[k])[i];
                      }
                    }
                  });
}

nn::Var gaussian_nll(nn::Graph& g, nn::Var y, nn::Var mu, nn::Var sigma) {
  const nn::Tensor& ty = g.value(y);
  const nn::Tensor& tm = g.value(mu);
  const nn::Tensor& ts = g.value(sigma);
  require_same_shape("gaussian_nll(y,mu)", ty, tm);
  require_same_shape("gaussian_nll(y,sigma)", ty, ts);

  const std::size_t n = ty.size();
  std::vector<double> dy(n), dmu(n), dsigma(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = ts[i];
    const double r = ty[i] - tm[i];
    total -= gaussian_logpdf(ty[i], GaussianParams{tm[i], s});
    dy[i] = r / (s * s);
    dmu[i] = -r / (s * s);
    dsigma[i] = 1.0 / s - r * r / (s * s * s);
  }
  return g.custom({y, mu, sigma}, nn::Tensor::scalar(total),
                  [dy = std::move(dy), dmu = std::move(dmu), dsigma = std::move(dsigma)](
                      const nn::Tensor& out, std::span<nn::Tensor* const> gi) {
                    const double s = out[0];
                    const std::vector<double>* parts[3] = {&dy, &dmu, &dsigma};
                    for (std::size_t k = 0; k < 3; ++k) {
                      if (!gi[k]) continue;
                      for (std::size_t i = 0; i < parts[k]->size(); ++i) {
                        (*gi[k])[i] += s * (*parts[k])[i];
                      }
                    }
                  });
}

}  // namespace prb
