#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace truckloc {

/// Residual vector and its Jacobian at x.
struct LeastSquaresProblem {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residuals;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
};

struct LevenbergMarquardtOptions {
  int max_iterations = 200;
  double step_tolerance = 1e-10;
  double initial_lambda = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 10.0;
  double max_lambda = 1e12;
};

struct LevenbergMarquardtSummary {
  Eigen::VectorXd x;
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;  // 0.5 * |r|^2
  bool converged = false;
};

/// Minimizes 0.5 |r(x)|^2 over the parameters listed in `active`; the others stay at x0.
LevenbergMarquardtSummary levenberg_marquardt(const LeastSquaresProblem& problem, const Eigen::VectorXd& x0,
                                              const std::vector<int>& active,
                                              const LevenbergMarquardtOptions& options = {});

/// Names of parameters the Jacobian leaves unconstrained (column-scaled SVD test).
std::vector<std::string> unconstrained_parameters(const Eigen::MatrixXd& jacobian,
                                                  const std::vector<std::string>& names,
                                                  double rank_tolerance = 1e-8);

/// Central finite-difference Jacobian, used to check analytic derivatives.
Eigen::MatrixXd numeric_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double step = 1e-6);

}  // namespace truckloc
