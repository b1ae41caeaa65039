#pragma once

#include <Eigen/Dense>

namespace fdsm {

// min 0.5 x'Hx + c'x  s.t.  A x <= b,  E x = e.
struct QpProblem {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd linear;
  Eigen::MatrixXd inequality;
  Eigen::VectorXd inequality_rhs;
  Eigen::MatrixXd equality;
  Eigen::VectorXd equality_rhs;
};

struct QpOptions {
  double tolerance = 1e-10;
  int max_iterations = 100;
};

struct QpResult {
  bool converged = false;
  int iterations = 0;
  Eigen::VectorXd x;
  Eigen::VectorXd inequality_duals;
  Eigen::VectorXd equality_duals;
  double objective = 0.0;
};

// Mehrotra predictor-corrector primal-dual interior point method on dense data.
QpResult solve_qp(const QpProblem& problem, const QpOptions& options = {});

}  // namespace fdsm
