#include "truckloc/least_squares.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <cmath>

namespace truckloc {

LevenbergMarquardtSummary levenberg_marquardt(const LeastSquaresProblem& problem, const Eigen::VectorXd& x0,
                                              const std::vector<int>& active,
                                              const LevenbergMarquardtOptions& options) {
  LevenbergMarquardtSummary summary;
  summary.x = x0;
  Eigen::VectorXd r = problem.residuals(summary.x);
  double cost = 0.5 * r.squaredNorm();
  summary.initial_cost = cost;
  summary.final_cost = cost;
  if (active.empty()) {
    summary.converged = true;
    return summary;
  }

  const auto p = static_cast<Eigen::Index>(active.size());
  double lambda = options.initial_lambda;
  Eigen::MatrixXd jac = problem.jacobian(summary.x);
  bool fresh_jacobian = true;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    summary.iterations = iter + 1;
    if (!fresh_jacobian) jac = problem.jacobian(summary.x);
    fresh_jacobian = true;

    Eigen::MatrixXd ja(jac.rows(), p);
    for (Eigen::Index j = 0; j < p; ++j) ja.col(j) = jac.col(active[static_cast<std::size_t>(j)]);
    const Eigen::MatrixXd h = ja.transpose() * ja;
    const Eigen::VectorXd g = ja.transpose() * r;

    Eigen::MatrixXd damped = h;
    for (Eigen::Index j = 0; j < p; ++j) damped(j, j) += lambda * std::max(h(j, j), 1e-12);
    const Eigen::VectorXd step = damped.ldlt().solve(-g);

    if (!step.allFinite()) {
      lambda *= options.lambda_up;
      if (lambda > options.max_lambda) break;
      continue;
    }

    Eigen::VectorXd candidate = summary.x;
    for (Eigen::Index j = 0; j < p; ++j) candidate[active[static_cast<std::size_t>(j)]] += step[j];
    const Eigen::VectorXd r_new = problem.residuals(candidate);
    const double cost_new = 0.5 * r_new.squaredNorm();

    if (cost_new <= cost) {
      summary.x = candidate;
      r = r_new;
      cost = cost_new;
      lambda = std::max(lambda / options.lambda_down, 1e-15);
      fresh_jacobian = false;
      if (step.norm() < options.step_tolerance) {
        summary.converged = true;
        break;
      }
    } else {
      if (step.norm() < options.step_tolerance) {
        summary.converged = true;
        break;
      }
      lambda *= options.lambda_up;
      if (lambda > options.max_lambda) {
        // No descent direction left at machine precision.
        summary.converged = true;
        break;
      }
    }
  }
  summary.final_cost = cost;
  return summary;
}

std::vector<std::string> unconstrained_parameters(const Eigen::MatrixXd& jacobian,
                                                  const std::vector<std::string>& names,
                                                  double rank_tolerance) {
  std::vector<std::string> out;
  const Eigen::Index cols = jacobian.cols();
  if (cols == 0) return out;

  Eigen::VectorXd norms = jacobian.colwise().norm().transpose();
  const double max_norm = norms.maxCoeff();
  std::vector<bool> flagged(static_cast<std::size_t>(cols), false);
  Eigen::MatrixXd scaled = jacobian;
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (!(norms[j] > 1e-12 * std::max(max_norm, 1e-300))) {
      flagged[static_cast<std::size_t>(j)] = true;
      scaled.col(j).setZero();
    } else {
      scaled.col(j) /= norms[j];
    }
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv[k] > rank_tolerance * smax && smax > 0.0) continue;
    const Eigen::VectorXd v = svd.matrixV().col(k);
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (std::abs(v[j]) > 0.25) flagged[static_cast<std::size_t>(j)] = true;
    }
  }
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (flagged[static_cast<std::size_t>(j)]) out.push_back(names[static_cast<std::size_t>(j)]);
  }
  return out;
}

Eigen::MatrixXd numeric_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double step) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd jac(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xp = x, xm = x;
    xp[j] += step;
    xm[j] -= step;
    jac.col(j) = (f(xp) - f(xm)) / (2.0 * step);
  }
  return jac;
}

}  // namespace truckloc
