#include <doctest.h>

#include "ehrcsd/error.hpp"
#include "ehrcsd/logistic.hpp"
#include "ehrcsd/rng.hpp"

#include <cmath>

using namespace ehrcsd;

namespace {

// 2x2 table: x = 1 has s1 successes out of n1, x = 0 has s0 out of n0.
BinomialCells two_by_two(double s1, double f1, double s0, double f0) {
  BinomialCells c;
  c.design.resize(2, 2);
  c.design << 1, 0, 1, 1;
  c.trials.resize(2);
  c.trials << s0 + f0, s1 + f1;
  c.successes.resize(2);
  c.successes << s0, s1;
  return c;
}

BinomialCells random_cells(Rng& rng, Eigen::Index rows, Eigen::Index params) {
  BinomialCells c;
  c.design = Eigen::MatrixXd::Zero(rows, params);
  c.trials.resize(rows);
  c.successes.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    c.design(r, 0) = 1.0;
    for (Eigen::Index k = 1; k < params; ++k) c.design(r, k) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    c.trials[r] = 5.0 + static_cast<double>(rng.index(50));
    c.successes[r] = static_cast<double>(rng.index(static_cast<std::uint64_t>(c.trials[r]) + 1));
  }
  return c;
}

} // namespace

TEST_CASE("2x2 table recovers the log odds ratio") {
  const auto cells = two_by_two(30, 10, 20, 40);
  const auto fit = fit_binomial_logistic(cells);
  REQUIRE(fit.converged);
  CHECK(fit.beta[1] == doctest::Approx(std::log(6.0)).epsilon(1e-9));
  CHECK(fit.beta[0] == doctest::Approx(std::log(0.5)).epsilon(1e-9));
  CHECK(std::abs(fit.beta[1] - std::log(6.0)) < 1e-6);
  CHECK(binomial_gradient(cells, fit.beta).norm() < 1e-6);
}

TEST_CASE("several 2x2 tables") {
  const double tables[][4] = {{5, 5, 5, 5}, {1, 99, 50, 50}, {70, 3, 12, 400}, {2, 1, 1, 2}};
  for (const auto& t : tables) {
    const auto fit = fit_binomial_logistic(two_by_two(t[0], t[1], t[2], t[3]));
    const double lor = std::log((t[0] * t[3]) / (t[1] * t[2]));
    CHECK(std::abs(fit.beta[1] - lor) < 1e-6);
    CHECK(std::abs(fit.beta[0] - std::log(t[2] / t[3])) < 1e-6);
  }
}

TEST_CASE("log-likelihood of the saturated 2x2 fit") {
  const auto cells = two_by_two(30, 10, 20, 40);
  const auto fit = fit_binomial_logistic(cells);
  const double expected = 30 * std::log(0.75) + 10 * std::log(0.25) + 20 * std::log(1.0 / 3) + 40 * std::log(2.0 / 3);
  CHECK(fit.loglik == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const auto cells = random_cells(rng, 8, 4);
    Eigen::VectorXd beta(4);
    for (Eigen::Index k = 0; k < 4; ++k) beta[k] = 4.0 * rng.uniform() - 2.0;
    const auto g = binomial_gradient(cells, beta);
    const double h = 1e-5;
    for (Eigen::Index k = 0; k < 4; ++k) {
      Eigen::VectorXd up = beta, down = beta;
      up[k] += h;
      down[k] -= h;
      const double numeric = (binomial_loglik(cells, up) - binomial_loglik(cells, down)) / (2 * h);
      CHECK(std::abs(numeric - g[k]) <= 1e-4 * std::max(1.0, std::abs(g[k])));
    }
  }
}

TEST_CASE("information is the negated Hessian") {
  Rng rng(7);
  const auto cells = random_cells(rng, 6, 3);
  const Eigen::VectorXd beta = Eigen::VectorXd::Constant(3, 0.3);
  const auto info = binomial_information(cells, beta);
  const double h = 1e-5;
  for (Eigen::Index k = 0; k < 3; ++k) {
    Eigen::VectorXd up = beta, down = beta;
    up[k] += h;
    down[k] -= h;
    const Eigen::VectorXd col = (binomial_gradient(cells, up) - binomial_gradient(cells, down)) / (2 * h);
    for (Eigen::Index r = 0; r < 3; ++r) CHECK(-col[r] == doctest::Approx(info(r, k)).epsilon(1e-5));
  }
}

TEST_CASE("gradient vanishes at unclamped optima") {
  Rng rng(99);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto cells = random_cells(rng, 16, 4);
    const auto fit = fit_binomial_logistic(cells);
    bool clamped = false;
    for (bool b : fit.at_cap) clamped = clamped || b;
    if (clamped) continue;
    ++checked;
    CHECK(fit.converged);
    CHECK(binomial_gradient(cells, fit.beta).norm() < 1e-6);
  }
  CHECK(checked > 25);
}

TEST_CASE("separated data is held at the cap") {
  // Every x = 1 row is a success: the slope diverges.
  const auto cells = two_by_two(20, 0, 5, 15);
  const auto fit = fit_binomial_logistic(cells);
  CHECK(fit.at_cap[1]);
  CHECK(fit.beta[1] == doctest::Approx(15.0));
  CHECK(std::isfinite(fit.loglik));
  CHECK(fit.loglik <= 0.0);
  // The intercept stays free and fits the x = 0 rate.
  CHECK(!fit.at_cap[0]);
  CHECK(fit.beta[0] == doctest::Approx(std::log(5.0 / 15.0)).epsilon(1e-4));
}

TEST_CASE("intercept-only model fits the base rate") {
  BinomialCells c;
  c.design = Eigen::MatrixXd::Ones(1, 1);
  c.trials = Eigen::VectorXd::Constant(1, 200);
  c.successes = Eigen::VectorXd::Constant(1, 30);
  const auto fit = fit_binomial_logistic(c);
  CHECK(fit.beta[0] == doctest::Approx(std::log(30.0 / 170.0)));
  CHECK(fit.loglik == doctest::Approx(30 * std::log(0.15) + 170 * std::log(0.85)));
}

TEST_CASE("stable log-likelihood at extreme linear predictors") {
  BinomialCells c = two_by_two(1, 1, 1, 1);
  Eigen::VectorXd beta(2);
  beta << 800.0, -1600.0;
  CHECK(std::isfinite(binomial_loglik(c, beta)));
}

TEST_CASE("shape errors") {
  auto c = two_by_two(1, 1, 1, 1);
  CHECK_THROWS_AS(binomial_loglik(c, Eigen::VectorXd::Zero(3)), DataError);
  c.design.resize(2, 0);
  CHECK_THROWS_AS(fit_binomial_logistic(c), DataError);
}
