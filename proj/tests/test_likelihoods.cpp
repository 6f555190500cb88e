#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "oracles.hpp"
#include "prb/likelihoods.hpp"
#include "prb/special.hpp"

using namespace prb;

using prb::testing::simpson;

TEST_CASE("log_gamma agrees with std::lgamma over (0, 1e4)") {
  double worst = 0.0;
  for (double x = 1e-3; x < 1e4; x *= 1.07) {
    worst = std::max(worst, std::abs(special::log_gamma(x) - std::lgamma(x)));
  }
  CHECK(worst < 1e-10);
  CHECK(special::log_gamma(1.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(special::log_gamma(0.5) == doctest::Approx(0.5 * std::log(std::numbers::pi)));
  CHECK_THROWS(special::log_gamma(0.0));
}

TEST_CASE("digamma matches the derivative of log_gamma") {
  for (double x : {0.05, 0.5, 1.0, 2.5, 7.0, 40.0, 3000.0}) {
    const double h = 1e-5 * x;
    const double fd = (special::log_gamma(x + h) - special::log_gamma(x - h)) / (2 * h);
    CHECK(special::digamma(x) == doctest::Approx(fd).epsilon(1e-6));
  }
  // psi(1) = -Euler-Mascheroni
  CHECK(special::digamma(1.0) == doctest::Approx(-0.57721566490153286).epsilon(1e-13));
}

TEST_CASE("project_studentt applies softplus to scale and degrees of freedom") {
  const auto p = project_studentt(5.0, 0.0, 0.0);
  CHECK(p.mu == 5.0);
  CHECK(p.sigma == doctest::Approx(std::numbers::ln2).epsilon(1e-15));
  CHECK(p.nu == doctest::Approx(std::numbers::ln2).epsilon(1e-15));
  CHECK(project_studentt(0.0, 10.0, 10.0).sigma == doctest::Approx(10.0000453989).epsilon(1e-10));
  CHECK(project_studentt(0.0, -1e6, -1e6).sigma > 0.0);
  CHECK(project_studentt(0.0, 0.0, -1e6).nu > 0.0);
  CHECK(project_studentt(0.0, 0.0, 0.0, kStudentTNuFloor).nu ==
        doctest::Approx(2.0 + std::numbers::ln2));
}

TEST_CASE("project_gaussian keeps mu and makes sigma positive") {
  const auto p = project_gaussian(3.0, 0.0);
  CHECK(p.mu == 3.0);
  CHECK(p.sigma == doctest::Approx(std::numbers::ln2));
  const auto tiny = project_gaussian(0.0, -100.0);
  CHECK(tiny.sigma > 0.0);
  CHECK(tiny.sigma == doctest::Approx(std::exp(-100.0)).epsilon(1e-12));
  for (double raw : {-1e3, -7.5, 0.0, 42.0, 1e9}) CHECK(project_gaussian(raw, 1.0).mu == raw);
}

TEST_CASE("log-densities match closed forms at the mode") {
  CHECK(std::abs(studentt_logpdf(0.0, {0.0, 1.0, 1.0}) - std::log(1.0 / std::numbers::pi)) < 1e-10);
  CHECK(std::abs(gaussian_logpdf(0.0, {0.0, 1.0}) + 0.918938533204673) < 1e-10);
  CHECK(std::abs(std::exp(gaussian_logpdf(4.0, {4.0, 2.0})) -
                 1.0 / (2.0 * std::sqrt(2.0 * std::numbers::pi))) < 1e-10);
}

TEST_CASE("Student-t density integrates to one") {
  for (double nu : {1.0, 3.0, 30.0}) {
    for (double sigma : {0.5, 2.0}) {
      CAPTURE(nu);
      CAPTURE(sigma);
      CHECK(std::abs(prb::testing::studentt_mass({1.5, sigma, nu}) - 1.0) < 1e-6);
    }
  }
  // Over the truncated range [-50 sigma, 50 sigma] the missing mass is exactly the
  // t tail mass; for nu = 30 it is negligible.
  const StudentTParams p{0.0, 2.0, 30.0};
  const double mass = simpson([&](double y) { return std::exp(studentt_logpdf(y, p)); }, -100.0,
                              100.0, 200000);
  CHECK(std::abs(mass - 1.0) < 1e-6);
}

TEST_CASE("Gaussian density integrates to one") {
  CHECK(std::abs(prb::testing::gaussian_mass({-3.0, 1.7}) - 1.0) < 1e-9);
}

TEST_CASE("densities are symmetric, peak at mu, and Student-t tends to Gaussian") {
  const StudentTParams t{2.0, 1.5, 4.0};
  for (double d : {0.1, 1.0, 7.0}) {
    CHECK(studentt_logpdf(t.mu + d, t) == doctest::Approx(studentt_logpdf(t.mu - d, t)));
    CHECK(studentt_logpdf(t.mu + d, t) < studentt_logpdf(t.mu, t));
    CHECK(gaussian_logpdf(d, {0.0, 1.0}) < gaussian_logpdf(0.0, {0.0, 1.0}));
  }
  // The gap between the two log-densities is about z^4 / (4 nu) for large nu.
  const StudentTParams wide{0.0, 2.0, 1e6};
  for (double y = -8.0; y <= 8.0; y += 0.5) {
    CHECK(std::abs(studentt_logpdf(y, wide) - gaussian_logpdf(y, {0.0, 2.0})) < 1e-4);
  }
  const StudentTParams wider{0.0, 2.0, 1e7};
  for (double y = -10.0; y <= 10.0; y += 0.5) {
    CHECK(std::abs(studentt_logpdf(y, wider) - gaussian_logpdf(y, {0.0, 2.0})) < 1e-4);
  }
}

TEST_CASE("sampling: degenerate scale, moments, determinism, equivariance") {
  Rng rng(1);
  for (double v : sample(GaussianParams{7.0, 1e-12}, rng, 1000)) CHECK(std::abs(v - 7.0) < 1e-9);
  for (double v : sample(StudentTParams{7.0, 1e-12, 3.0}, rng, 1000)) CHECK(std::abs(v - 7.0) < 1e-9);

  Rng big(2024);
  const auto xs = sample(GaussianParams{0.0, 1.0}, big, 100000);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / (xs.size() - 1));
  CHECK(std::abs(mean) < 0.02);
  CHECK(sd > 0.99);
  CHECK(sd < 1.01);

  for (const LikelihoodParams& unit :
       {LikelihoodParams{GaussianParams{0.0, 1.0}}, LikelihoodParams{StudentTParams{0.0, 1.0, 3.5}}}) {
    Rng a(77), b(77), c(77);
    const auto s1 = sample(unit, a, 200);
    CHECK(s1 == sample(unit, b, 200));
    LikelihoodParams shifted = unit;
    std::visit(
        [](auto& d) {
          d.mu = 12.5;
          d.sigma = 3.25;
        },
        shifted);
    const auto s2 = sample(shifted, c, 200);
    for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s2[i] == 12.5 + 3.25 * s1[i]);
  }
  CHECK_THROWS(sample(GaussianParams{}, rng, 0));
}

TEST_CASE("Student-t sampling reproduces the distribution quantiles") {
  // Empirical CDF at a few points against quadrature of the density.
  const StudentTParams p{0.0, 1.0, 4.0};
  Rng rng(5);
  const auto xs = sample(p, rng, 200000);
  for (double x : {-2.0, -0.5, 0.0, 1.0, 3.0}) {
    const double cdf =
        simpson([&](double y) { return std::exp(studentt_logpdf(y, p)); }, -400.0, x, 400000) ;
    double emp = 0.0;
    for (double v : xs) emp += v <= x ? 1.0 : 0.0;
    emp /= xs.size();
    CHECK(std::abs(emp - cdf) < 0.005);
  }
}

TEST_CASE("nll_loss: negated log-density, additive, monotone") {
  const std::vector<double> y = {5.0};
  const std::vector<LikelihoodParams> p = {GaussianParams{5.0, 1.0}};
  CHECK(nll_loss(y, p) == doctest::Approx(0.918938533204673));

  const std::vector<double> ya = {1.0, 2.0};
  const std::vector<LikelihoodParams> pa = {GaussianParams{0.0, 1.0}, StudentTParams{1.0, 2.0, 3.0}};
  const std::vector<double> yb = {4.0};
  const std::vector<LikelihoodParams> pb = {StudentTParams{3.0, 0.5, 5.0}};
  std::vector<double> yab = ya;
  yab.insert(yab.end(), yb.begin(), yb.end());
  std::vector<LikelihoodParams> pab = pa;
  pab.insert(pab.end(), pb.begin(), pb.end());
  CHECK(nll_loss(yab, pab) == doctest::Approx(nll_loss(ya, pa) + nll_loss(yb, pb)));

  double prev = 1e300;
  for (double gap : {4.0, 2.0, 1.0, 0.5, 0.0}) {
    const std::vector<double> yy = {10.0 + gap};
    const std::vector<LikelihoodParams> pp = {GaussianParams{10.0, 1.0}};
    const double v = nll_loss(yy, pp);
    CHECK(v < prev);
    prev = v;
  }
  CHECK_THROWS_AS(nll_loss(ya, pb), std::invalid_argument);
}

TEST_CASE("graph NLL ops agree with scalar nll_loss and pass gradient checks") {
  using namespace prb::nn;
  Rng rng(13);
  ParameterSet params;
  auto random_row = [&](double lo, double hi) {
    Tensor t(1, 5);
    for (double& x : t.data()) x = rng.uniform(lo, hi);
    return t;
  };
  ParamId y = params.add("y", random_row(-3, 3));
  ParamId mu = params.add("mu", random_row(-3, 3));
  ParamId sigma = params.add("sigma", random_row(0.3, 2.0));
  ParamId nu = params.add("nu", random_row(1.0, 12.0));

  {
    Graph g(false);
    Var t = studentt_nll(g, g.parameter(params, y), g.parameter(params, mu),
                         g.parameter(params, sigma), g.parameter(params, nu));
    std::vector<double> ys;
    std::vector<LikelihoodParams> ps;
    for (std::size_t i = 0; i < 5; ++i) {
      ys.push_back(params[y].value[i]);
      ps.push_back(StudentTParams{params[mu].value[i], params[sigma].value[i], params[nu].value[i]});
    }
    CHECK(g.value(t).item() == doctest::Approx(nll_loss(ys, ps)).epsilon(1e-14));
  }

  const auto rt = prb::testing::gradcheck(
      [&](Graph& g, ParameterSet& p) {
        return studentt_nll(g, g.parameter(p, y), g.parameter(p, mu), g.parameter(p, sigma),
                            g.parameter(p, nu));
      },
      params);
  CAPTURE(rt.worst_param);
  CHECK(rt.worst_rel_error < 1e-4);
  const auto rg = prb::testing::gradcheck(
      [&](Graph& g, ParameterSet& p) {
        return gaussian_nll(g, g.parameter(p, y), g.parameter(p, mu), g.parameter(p, sigma));
      },
      params);
  CAPTURE(rg.worst_param);
  CHECK(rg.worst_rel_error < 1e-4);
}
