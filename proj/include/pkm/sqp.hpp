// Sequential quadratic programming for small box-bounded NLPs
//
//   minimize f(x)   subject to   c(x) >= 0,   lower <= x <= upper
//
// Variables are scaled to the unit box. The Hessian of the Lagrangian is a
// damped BFGS approximation; gradients are forward differences; globalization
// is an l1 merit function with backtracking. When the linearized constraints
// are inconsistent, the violated rows are relaxed by a fraction delta that
// the subproblem penalizes heavily.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace pkm {

struct NlpEval {
  double f = 0.0;
  Eigen::VectorXd c;      // >= 0 is feasible
  std::vector<int> locks;  // branch choices the evaluation made (see NlpProblem)
};

struct NlpProblem {
  Eigen::VectorXd lower, upper;
  /// Evaluates at x. When `locks` is non-null, the evaluation reuses those
  /// branch choices (used for finite differences around a base point).
  std::function<NlpEval(const Eigen::VectorXd& x, const std::vector<int>* locks)> evaluate;
};

struct SqpOptions {
  int max_iterations = 150;
  double feas_tol = 1e-6;        // max constraint violation (scaled units)
  double opt_tol = 1e-6;         // KKT measure, relative to 1 + |f|
  double fd_step = 1e-6;         // in unit-box variables
  double constraint_margin = 1e-5;  // constraints are enforced as c >= margin
  double objective_scale = 0.0;  // 0: use max(1, |f(x0)|)
};

enum class SqpStatus { converged, infeasible, max_iter };

std::string to_string(SqpStatus s);

struct IterateLog {
  int iteration = 0;
  double objective = 0.0;      // unscaled f at the accepted iterate
  double max_violation = 0.0;
  double step_norm = 0.0;      // inf-norm of the accepted step (unit-box units)
  double merit = 0.0;          // merit at the accepted iterate
  double merit_previous = 0.0; // merit at the previous iterate, same penalty
  double penalty = 0.0;
  double alpha = 0.0;
};

struct SqpResult {
  Eigen::VectorXd x;
  NlpEval eval;
  SqpStatus status = SqpStatus::max_iter;
  std::vector<IterateLog> log;
  Eigen::VectorXd multipliers;
  Eigen::VectorXd gradient;  // of the scaled objective w.r.t. unit-box variables
  double objective_scale = 1.0;
  double kkt = 0.0;
  int evaluations = 0;
  std::string message;
};

/// Forward-difference gradient of the scaled objective and Jacobian of the
/// constraints w.r.t. unit-box variables y, locks frozen at the base point.
void fd_derivatives(const NlpProblem& problem, const Eigen::VectorXd& y, const NlpEval& base,
                    double step, double objective_scale, Eigen::VectorXd& grad,
                    Eigen::MatrixXd& jac, int* evaluations = nullptr);

SqpResult sqp_minimize(const NlpProblem& problem, const Eigen::VectorXd& x0,
                       const SqpOptions& opts = {});

}  // namespace pkm
