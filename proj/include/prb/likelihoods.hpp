#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "prb/nn/graph.hpp"
#include "prb/random.hpp"

namespace prb {

// Location-scale Student-t. sigma > 0, nu > 0.
struct StudentTParams {
  double mu = 0.0;
  double sigma = 1.0;
  double nu = 1.0;
};

struct GaussianParams {
  double mu = 0.0;
  double sigma = 1.0;
};

using LikelihoodParams = std::variant<StudentTParams, GaussianParams>;

// Lower bound for the Student-t degrees of freedom used by the trained models,
// so the predictive variance exists.
inline constexpr double kStudentTNuFloor = 2.0;

// mu = raw0, sigma = softplus(raw1), nu = nu_floor + softplus(raw2).
// sigma and nu never collapse to exactly zero for finite input.
StudentTParams project_studentt(double raw0, double raw1, double raw2, double nu_floor = 0.0);
GaussianParams project_gaussian(double raw0, double raw1);

double studentt_logpdf(double y, const StudentTParams& p);
double gaussian_logpdf(double y, const GaussianParams& p);
double logpdf(double y, const LikelihoodParams& p);

double draw(const StudentTParams& p, Rng& rng);
double draw(const GaussianParams& p, Rng& rng);
std::vector<double> sample(const LikelihoodParams& dist, Rng& rng, std::size_t n);

// -sum_t log l(y_t | params_t).
double nll_loss(std::span<const double> targets, std::span<const LikelihoodParams> params);

// Differentiable negative log-likelihoods on a Graph. All inputs share one shape;
// the result is the scalar sum over elements.
nn::Var studentt_nll(nn::Graph& g, nn::Var y, nn::Var mu, nn::Var sigma, nn::Var nu);
nn::Var gaussian_nll(nn::Graph& g, nn::Var y, nn::Var mu, nn::Var sigma);

}  // namespace prb
