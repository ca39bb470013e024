// Dense strictly convex QP solver (Goldfarb-Idnani dual active set):
//
//   minimize 1/2 x^T G x + a^T x   subject to   C x >= b
//
// G must be symmetric positive definite. Sized for a handful of variables
// and up to a few thousand inequality rows.
#pragma once

#include <Eigen/Dense>
#include <vector>

namespace pkm {

struct QpProblem {
  Eigen::MatrixXd G;
  Eigen::VectorXd a;
  Eigen::MatrixXd C;  // m x n, one constraint per row
  Eigen::VectorXd b;
};

enum class QpStatus { optimal, infeasible, not_convex, max_iterations };

struct QpResult {
  QpStatus status = QpStatus::optimal;
  Eigen::VectorXd x;
  Eigen::VectorXd multipliers;  // size m, zero for inactive rows
  double objective = 0.0;
  int iterations = 0;
  std::vector<int> active;
};

QpResult solve_qp(const QpProblem& problem, double feas_tol = 1e-10, int max_iterations = 0);

}  // namespace pkm
