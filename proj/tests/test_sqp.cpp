#include <cmath>

#include "doctest.h"
#include "pkm/sqp.hpp"

using namespace pkm;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

NlpProblem box(VectorXd lo, VectorXd hi) {
  NlpProblem p;
  p.lower = std::move(lo);
  p.upper = std::move(hi);
  return p;
}

double rosenbrock(double x, double y) { return (1 - x) * (1 - x) + 100 * (y - x * x) * (y - x * x); }

NlpProblem rosenbrock_below_line() {
  NlpProblem p = box(VectorXd::Constant(2, -1.5), VectorXd::Constant(2, 1.5));
  p.evaluate = [](const VectorXd& x, const std::vector<int>*) {
    NlpEval e;
    e.f = rosenbrock(x(0), x(1));
    e.c = VectorXd::Constant(1, 1.0 - x(0) - x(1));
    return e;
  };
  return p;
}

}  // namespace

TEST_SUITE("sqp") {
  TEST_CASE("quadratic with an active inequality") {
    NlpProblem p = box(VectorXd::Constant(1, -5.0), VectorXd::Constant(1, 5.0));
    p.evaluate = [](const VectorXd& x, const std::vector<int>*) {
      NlpEval e;
      e.f = (x(0) - 1) * (x(0) - 1);
      e.c = VectorXd::Constant(1, x(0) - 2.0);
      return e;
    };
    SqpOptions o;
    o.constraint_margin = 0.0;
    const SqpResult r = sqp_minimize(p, VectorXd::Constant(1, 4.0), o);
    CHECK(r.status == SqpStatus::converged);
    CHECK(r.x(0) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(r.eval.f == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("Rosenbrock below a line agrees with a dense line search") {
    // The unconstrained minimum (1, 1) is cut off, so the optimum lies on
    // x + y = 1: scan that segment finely, then refine by golden section.
    auto g = [](double x) { return rosenbrock(x, 1.0 - x); };
    double best = -1.5;
    for (int k = 0; k <= 300000; ++k) {
      const double x = -1.5 + 3.0 * k / 300000.0;
      if (g(x) < g(best)) best = x;
    }
    double a = best - 1e-5, b = best + 1e-5;
    const double phi = (std::sqrt(5.0) - 1) / 2;
    for (int it = 0; it < 100; ++it) {
      const double c = b - phi * (b - a), d = a + phi * (b - a);
      (g(c) < g(d) ? b : a) = g(c) < g(d) ? d : c;
    }
    const double xo = 0.5 * (a + b);

    const SqpResult r = sqp_minimize(rosenbrock_below_line(), VectorXd::Constant(2, -1.0));
    CHECK(r.status == SqpStatus::converged);
    CHECK(std::abs(r.x(0) - xo) < 1e-4);
    CHECK(std::abs(r.x(1) - (1.0 - xo)) < 1e-4);
    CHECK(r.eval.c(0) >= 0.0);
  }

  TEST_CASE("merit never increases along accepted steps") {
    const SqpResult r = sqp_minimize(rosenbrock_below_line(), VectorXd::Constant(2, -1.0));
    REQUIRE_FALSE(r.log.empty());
    for (const IterateLog& it : r.log) CHECK(it.merit <= it.merit_previous + 1e-12);
  }

  TEST_CASE("starting infeasible reaches the feasible set") {
    NlpProblem p = box(VectorXd::Constant(2, -2.0), VectorXd::Constant(2, 2.0));
    p.evaluate = [](const VectorXd& x, const std::vector<int>*) {
      NlpEval e;
      e.f = x(0) + x(1);
      e.c = VectorXd::Constant(1, x.squaredNorm() - 1.0);  // outside the unit disc
      e.c.conservativeResize(2);
      e.c(1) = 1.5 - x.squaredNorm();                       // inside radius sqrt(1.5)
      return e;
    };
    const SqpResult r = sqp_minimize(p, (VectorXd(2) << 0.1, -0.3).finished());
    CHECK(r.status == SqpStatus::converged);
    CHECK(r.x(0) == doctest::Approx(-std::sqrt(0.75)).epsilon(1e-4));
    CHECK(r.x(1) == doctest::Approx(-std::sqrt(0.75)).epsilon(1e-4));
  }

  TEST_CASE("incompatible constraints end infeasible") {
    NlpProblem p = box(VectorXd::Constant(1, -1.0), VectorXd::Constant(1, 1.0));
    p.evaluate = [](const VectorXd& x, const std::vector<int>*) {
      NlpEval e;
      e.f = x(0) * x(0);
      e.c = VectorXd::Constant(1, x(0) - 2.0);
      return e;
    };
    CHECK(sqp_minimize(p, VectorXd::Zero(1)).status == SqpStatus::infeasible);
  }

  TEST_CASE("finite differences in unit-box variables") {
    NlpProblem p = box(VectorXd::Constant(2, -1.0), VectorXd::Constant(2, 3.0));
    p.evaluate = [](const VectorXd& x, const std::vector<int>*) {
      NlpEval e;
      e.f = x(0) * x(0) + 3 * x(1);
      e.c = VectorXd::Constant(1, x(0) - 2 * x(1));
      return e;
    };
    const VectorXd x(VectorXd::Constant(2, 1.0));
    const VectorXd y = (x - p.lower).cwiseQuotient(p.upper - p.lower);
    const NlpEval base = p.evaluate(x, nullptr);
    VectorXd grad;
    MatrixXd jac;
    int evals = 0;
    fd_derivatives(p, y, base, 1e-6, 2.0, grad, jac, &evals);
    CHECK(evals == 2);
    // d/dy = span * d/dx, objective divided by its scale.
    CHECK(grad(0) == doctest::Approx(4.0 * 2.0 / 2.0).epsilon(1e-5));
    CHECK(grad(1) == doctest::Approx(4.0 * 3.0 / 2.0).epsilon(1e-5));
    CHECK(jac(0, 0) == doctest::Approx(4.0).epsilon(1e-8));
    CHECK(jac(0, 1) == doctest::Approx(-8.0).epsilon(1e-8));

    // At the upper bound the step goes backwards and stays inside the box.
    const VectorXd y1 = VectorXd::Constant(2, 1.0);
    std::vector<double> seen;
    p.evaluate = [&](const VectorXd& xx, const std::vector<int>*) {
      seen.push_back(xx.maxCoeff());
      return NlpEval{xx(0), VectorXd::Zero(0), {}};
    };
    fd_derivatives(p, y1, p.evaluate(p.upper, nullptr), 1e-6, 1.0, grad, jac);
    for (double v : seen) CHECK(v <= 3.0);
    CHECK(grad(0) == doctest::Approx(4.0).epsilon(1e-6));
  }

  TEST_CASE("locks from the base point are passed to the perturbed evaluations") {
    NlpProblem p = box(VectorXd::Constant(1, 0.0), VectorXd::Constant(1, 1.0));
    int with_locks = 0;
    p.evaluate = [&](const VectorXd& x, const std::vector<int>* locks) {
      if (locks && locks->size() == 1 && (*locks)[0] == 42) ++with_locks;
      return NlpEval{x(0), VectorXd::Zero(0), {42}};
    };
    const NlpEval base = p.evaluate(VectorXd::Constant(1, 0.5), nullptr);
    VectorXd grad;
    MatrixXd jac;
    fd_derivatives(p, VectorXd::Constant(1, 0.5), base, 1e-6, 1.0, grad, jac);
    CHECK(with_locks == 1);
  }
}
