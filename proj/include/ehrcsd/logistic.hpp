#pragma once

#include <Eigen/Dense>

#include <vector>

namespace ehrcsd {

/// Grouped binomial data for logistic regression: row r has `trials[r]`
/// observations sharing the predictor row `design.row(r)`, of which
/// `successes[r]` had outcome 1. Column 0 of the design is the intercept.
struct BinomialCells {
  Eigen::MatrixXd design;
  Eigen::VectorXd trials;
  Eigen::VectorXd successes;

  Eigen::Index n_rows() const { return design.rows(); }
  Eigen::Index n_params() const { return design.cols(); }
  double total_trials() const { return trials.sum(); }
};

struct LogisticOptions {
  /// Every coefficient, intercept included, is kept within [-cap, cap].
  double coefficient_cap = 15.0;
  int max_iterations = 50;
  /// Stop once an iteration improves the log-likelihood by less than this.
  double tolerance = 1e-8;
};

struct LogisticFit {
  Eigen::VectorXd beta;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  /// beta[k] sits on the cap.
  std::vector<bool> at_cap;
};

/// Natural-log likelihood; numerically stable for large |eta|.
double binomial_loglik(const BinomialCells& cells, const Eigen::VectorXd& beta);
Eigen::VectorXd binomial_gradient(const BinomialCells& cells, const Eigen::VectorXd& beta);
/// Fisher information X' diag(n p (1-p)) X (the negated Hessian).
Eigen::MatrixXd binomial_information(const BinomialCells& cells, const Eigen::VectorXd& beta);

/// Maximum likelihood by damped, box-constrained Newton iterations.
///
/// Coordinates on the cap whose gradient points outward are held fixed; the
/// Newton step is solved over the remaining free coordinates and halved until
/// the log-likelihood does not decrease.
LogisticFit fit_binomial_logistic(const BinomialCells& cells, const LogisticOptions& options = {});

} // namespace ehrcsd
