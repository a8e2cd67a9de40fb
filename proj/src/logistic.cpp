#include "ehrcsd/logistic.hpp"

#include "ehrcsd/error.hpp"

#include <algorithm>
#include <cmath>

namespace ehrcsd {

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_shape(const BinomialCells& cells, const Eigen::VectorXd& beta) {
  if (cells.trials.size() != cells.n_rows() || cells.successes.size() != cells.n_rows() ||
      beta.size() != cells.n_params()) {
    throw DataError("binomial cells and coefficient vector have inconsistent shapes");
  }
}

} // namespace

double binomial_loglik(const BinomialCells& cells, const Eigen::VectorXd& beta) {
  check_shape(cells, beta);
  const Eigen::VectorXd eta = cells.design * beta;
  double ll = 0.0;
  for (Eigen::Index r = 0; r < eta.size(); ++r) {
    const double y = cells.successes[r];
    const double failures = cells.trials[r] - y;
    if (y > 0.0) ll -= y * softplus(-eta[r]);
    if (failures > 0.0) ll -= failures * softplus(eta[r]);
  }
  return ll;
}

Eigen::VectorXd binomial_gradient(const BinomialCells& cells, const Eigen::VectorXd& beta) {
  check_shape(cells, beta);
  const Eigen::VectorXd eta = cells.design * beta;
  Eigen::VectorXd residual(eta.size());
  for (Eigen::Index r = 0; r < eta.size(); ++r) {
    residual[r] = cells.successes[r] - cells.trials[r] * sigmoid(eta[r]);
  }
  return cells.design.transpose() * residual;
}

Eigen::MatrixXd binomial_information(const BinomialCells& cells, const Eigen::VectorXd& beta) {
  check_shape(cells, beta);
  const Eigen::VectorXd eta = cells.design * beta;
  Eigen::VectorXd weight(eta.size());
  for (Eigen::Index r = 0; r < eta.size(); ++r) {
    const double p = sigmoid(eta[r]);
    weight[r] = cells.trials[r] * p * (1.0 - p);
  }
  return cells.design.transpose() * weight.asDiagonal() * cells.design;
}

LogisticFit fit_binomial_logistic(const BinomialCells& cells, const LogisticOptions& options) {
  const auto k = cells.n_params();
  if (k == 0) {
    throw DataError("logistic model without parameters");
  }
  const double cap = options.coefficient_cap;
  auto clamp = [cap](Eigen::VectorXd& b) {
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = std::clamp(b[i], -cap, cap);
  };

  LogisticFit fit;
  fit.beta = Eigen::VectorXd::Zero(k);
  const double n = cells.total_trials();
  if (n > 0.0) {
    const double rate = std::clamp(cells.successes.sum() / n, 1e-300, 1.0 - 1e-16);
    fit.beta[0] = std::log(rate) - std::log1p(-rate);
  }
  clamp(fit.beta);
  fit.loglik = binomial_loglik(cells, fit.beta);

  std::vector<Eigen::Index> free;
  free.reserve(static_cast<std::size_t>(k));
  for (fit.iterations = 0; fit.iterations < options.max_iterations;) {
    const Eigen::VectorXd gradient = binomial_gradient(cells, fit.beta);
    free.clear();
    for (Eigen::Index i = 0; i < k; ++i) {
      const bool pinned_high = fit.beta[i] >= cap && gradient[i] > 0.0;
      const bool pinned_low = fit.beta[i] <= -cap && gradient[i] < 0.0;
      if (!pinned_high && !pinned_low) free.push_back(i);
    }
    if (free.empty()) {
      fit.converged = true;
      break;
    }
    const Eigen::MatrixXd information = binomial_information(cells, fit.beta);
    const auto f = static_cast<Eigen::Index>(free.size());
    Eigen::MatrixXd sub(f, f);
    Eigen::VectorXd rhs(f);
    for (Eigen::Index a = 0; a < f; ++a) {
      rhs[a] = gradient[free[a]];
      for (Eigen::Index b = 0; b < f; ++b) sub(a, b) = information(free[a], free[b]);
    }
    // Tiny ridge keeps the solve defined when a free direction has no support.
    const double ridge = 1e-12 * std::max(1.0, sub.diagonal().maxCoeff());
    sub.diagonal().array() += ridge;
    const Eigen::VectorXd direction = sub.ldlt().solve(rhs);

    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd candidate(k);
    double candidate_ll = 0.0;
    for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
      candidate = fit.beta;
      for (Eigen::Index a = 0; a < f; ++a) candidate[free[a]] += step * direction[a];
      clamp(candidate);
      candidate_ll = binomial_loglik(cells, candidate);
      if (candidate_ll >= fit.loglik) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      fit.converged = true;
      break;
    }
    const double improvement = candidate_ll - fit.loglik;
    fit.beta = candidate;
    fit.loglik = candidate_ll;
    ++fit.iterations;
    if (improvement < options.tolerance) {
      fit.converged = true;
      break;
    }
  }

  fit.at_cap.assign(static_cast<std::size_t>(k), false);
  for (Eigen::Index i = 0; i < k; ++i) {
    fit.at_cap[static_cast<std::size_t>(i)] = std::abs(fit.beta[i]) >= cap;
  }
  return fit;
}

} // namespace ehrcsd
