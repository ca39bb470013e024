#include "pkm/sqp.hpp"

#include <algorithm>
#include <cmath>

#include "pkm/qp.hpp"

namespace pkm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string to_string(SqpStatus s) {
  switch (s) {
    case SqpStatus::converged: return "converged";
    case SqpStatus::infeasible: return "infeasible";
    case SqpStatus::max_iter: return "max-iter";
  }
  return "?";
}

namespace {

// Cost of relaxing the linearized constraints; fixed so that the multipliers,
// and with them the merit penalty, stay bounded.
constexpr double kRelaxWeight = 1e6;

struct Scaled {
  const NlpProblem& pb;
  VectorXd span;

  explicit Scaled(const NlpProblem& p) : pb(p), span(p.upper - p.lower) {}

  VectorXd to_x(const VectorXd& y) const { return pb.lower + span.cwiseProduct(y); }
  VectorXd to_y(const VectorXd& x) const {
    return ((x - pb.lower).cwiseQuotient(span)).cwiseMax(0.0).cwiseMin(1.0);
  }
};

double violation_sum(const VectorXd& c) { return (-c).cwiseMax(0.0).sum(); }
double violation_max(const VectorXd& c) {
  return c.size() == 0 ? 0.0 : std::max(0.0, -c.minCoeff());
}

}  // namespace

void fd_derivatives(const NlpProblem& problem, const VectorXd& y, const NlpEval& base,
                    double step, double objective_scale, VectorXd& grad, MatrixXd& jac,
                    int* evaluations) {
  const Scaled sc(problem);
  const int n = static_cast<int>(y.size());
  const int m = static_cast<int>(base.c.size());
  grad.resize(n);
  jac.resize(m, n);
  for (int i = 0; i < n; ++i) {
    VectorXd yp = y;
    const double h = y(i) + step <= 1.0 ? step : -step;
    yp(i) += h;
    const NlpEval e = problem.evaluate(sc.to_x(yp), &base.locks);
    if (evaluations) ++*evaluations;
    grad(i) = (e.f - base.f) / (h * objective_scale);
    jac.col(i) = (e.c - base.c) / h;
  }
}

SqpResult sqp_minimize(const NlpProblem& problem, const VectorXd& x0, const SqpOptions& opts) {
  const Scaled sc(problem);
  const int n = static_cast<int>(x0.size());

  SqpResult res;
  VectorXd y = sc.to_y(x0);
  NlpEval ev = problem.evaluate(sc.to_x(y), nullptr);
  res.evaluations = 1;
  const int m = static_cast<int>(ev.c.size());
  const double fscale =
      opts.objective_scale > 0.0 ? opts.objective_scale : std::max(1.0, std::abs(ev.f));
  res.objective_scale = fscale;

  auto shifted = [&](const NlpEval& e) { return VectorXd(e.c.array() - opts.constraint_margin); };

  VectorXd g;
  MatrixXd A;
  fd_derivatives(problem, y, ev, opts.fd_step, fscale, g, A, &res.evaluations);

  MatrixXd B = MatrixXd::Identity(n, n);
  bool fresh_hessian = true;
  double rho = 1.0;
  VectorXd lambda = VectorXd::Zero(m);
  bool converged = false;
  bool stalled = false;
  double kkt = 0.0;

  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    const VectorXd c = shifted(ev);
    const double viol0 = violation_sum(c);
    const double maxviol = violation_max(c);
    const double fs = ev.f / fscale;

    // Subproblem in (d, delta).
    const double big = kRelaxWeight;
    QpProblem qp;
    qp.G = MatrixXd::Zero(n + 1, n + 1);
    qp.G.topLeftCorner(n, n) = B;
    qp.G(n, n) = big;
    qp.a = VectorXd::Zero(n + 1);
    qp.a.head(n) = g;
    qp.a(n) = big;
    const int rows = m + 2 * n + 2;
    qp.C = MatrixXd::Zero(rows, n + 1);
    qp.b = VectorXd::Zero(rows);
    qp.C.topLeftCorner(m, n) = A;
    for (int j = 0; j < m; ++j) {
      qp.C(j, n) = -std::min(c(j), 0.0);
      qp.b(j) = -c(j);
    }
    for (int i = 0; i < n; ++i) {
      qp.C(m + 2 * i, i) = 1.0;
      qp.b(m + 2 * i) = -y(i);
      qp.C(m + 2 * i + 1, i) = -1.0;
      qp.b(m + 2 * i + 1) = y(i) - 1.0;
    }
    qp.C(m + 2 * n, n) = 1.0;
    qp.b(m + 2 * n) = 0.0;
    qp.C(m + 2 * n + 1, n) = -1.0;
    qp.b(m + 2 * n + 1) = -1.0;

    QpResult sub = solve_qp(qp);
    if (sub.status != QpStatus::optimal) {
      if (!fresh_hessian) {
        B.setIdentity();
        fresh_hessian = true;
        --iter;
        continue;
      }
      res.message = "QP subproblem failed";
      stalled = true;
      break;
    }
    const VectorXd d = sub.x.head(n);
    lambda = sub.multipliers.head(m);

    kkt = std::abs(g.dot(d)) + (lambda.array() * c.array().abs()).sum();
    if (maxviol <= opts.feas_tol &&
        (kkt <= opts.opt_tol * (1.0 + std::abs(fs)) || d.lpNorm<Eigen::Infinity>() <= 1e-12)) {
      converged = true;
      break;
    }

    if (m > 0) rho = std::max(rho, 1.2 * lambda.lpNorm<Eigen::Infinity>() + 1e-3);
    const double viol_lin = violation_sum(c + A * d);
    const double gd = g.dot(d);
    double D = gd + rho * (viol_lin - viol0);
    if (D >= 0.0 && viol0 - viol_lin > 0.0) {
      rho = std::max(rho, (gd + 0.5 * d.dot(B * d)) / (0.7 * (viol0 - viol_lin)));
      D = gd + rho * (viol_lin - viol0);
    }
    if (!(D < 0.0)) {
      if (!fresh_hessian) {
        B.setIdentity();
        fresh_hessian = true;
        --iter;
        continue;
      }
      res.message = "no descent direction for the merit function";
      stalled = true;
      break;
    }

    const double merit0 = fs + rho * viol0;
    double alpha = 1.0;
    bool accepted = false;
    VectorXd y_new;
    NlpEval ev_new;
    double merit_new = 0.0;
    for (int ls = 0; ls < 40; ++ls) {
      y_new = (y + alpha * d).cwiseMax(0.0).cwiseMin(1.0);
      ev_new = problem.evaluate(sc.to_x(y_new), nullptr);
      ++res.evaluations;
      merit_new = ev_new.f / fscale + rho * violation_sum(shifted(ev_new));
      if (merit_new <= merit0 + 1e-4 * alpha * D) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (!fresh_hessian) {
        B.setIdentity();
        fresh_hessian = true;
        --iter;
        continue;
      }
      res.message = "line search failed";
      stalled = true;
      break;
    }

    VectorXd g_new;
    MatrixXd A_new;
    fd_derivatives(problem, y_new, ev_new, opts.fd_step, fscale, g_new, A_new, &res.evaluations);

    // Damped BFGS on the Lagrangian gradient.
    const VectorXd s = y_new - y;
    VectorXd r = (g_new - A_new.transpose() * lambda) - (g - A.transpose() * lambda);
    const VectorXd Bs = B * s;
    const double sBs = s.dot(Bs);
    if (sBs > 1e-300) {
      const double sr = s.dot(r);
      if (sr < 0.2 * sBs) {
        const double theta = 0.8 * sBs / (sBs - sr);
        r = theta * r + (1.0 - theta) * Bs;
      }
      B += (r * r.transpose()) / s.dot(r) - (Bs * Bs.transpose()) / sBs;
      fresh_hessian = false;
    }

    IterateLog log;
    log.iteration = iter;
    log.objective = ev_new.f;
    log.max_violation = violation_max(shifted(ev_new));
    log.step_norm = s.lpNorm<Eigen::Infinity>();
    log.merit = merit_new;
    log.merit_previous = merit0;
    log.penalty = rho;
    log.alpha = alpha;
    res.log.push_back(log);

    y = y_new;
    ev = std::move(ev_new);
    g = std::move(g_new);
    A = std::move(A_new);
  }

  const VectorXd c = shifted(ev);
  const double maxviol = violation_max(c);
  if (converged) {
    res.status = SqpStatus::converged;
  } else if (maxviol > opts.feas_tol) {
    res.status = SqpStatus::infeasible;
  } else if (stalled && kkt <= 100.0 * opts.opt_tol * (1.0 + std::abs(ev.f / fscale))) {
    // Stalled at the finite-difference noise floor of a feasible point.
    res.status = SqpStatus::converged;
  } else {
    res.status = SqpStatus::max_iter;
  }
  if (res.message.empty()) res.message = to_string(res.status);
  res.x = sc.to_x(y);
  res.eval = ev;
  res.multipliers = lambda;
  res.gradient = g;
  res.kkt = kkt;
  return res;
}

}  // namespace pkm
