#include "pkm/qp.hpp"

#include <cmath>
#include <limits>

namespace pkm {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Givens {
  double c = 1.0, s = 0.0;
  // Chosen so that [c s; -s c] (x, y) = (h, 0).
  static Givens zeroing(double x, double y, double& h) {
    h = std::hypot(x, y);
    if (h == 0.0) return {};
    return {x / h, y / h};
  }
};

// Rotates columns (i, j) of J by the transpose of the row rotation applied
// to the factor, keeping J^T N = [R; 0].
void rotate_columns(MatrixXd& J, int i, int j, const Givens& g) {
  for (int k = 0; k < J.rows(); ++k) {
    const double a = J(k, i), b = J(k, j);
    J(k, i) = g.c * a + g.s * b;
    J(k, j) = -g.s * a + g.c * b;
  }
}

class ActiveSetFactor {
 public:
  ActiveSetFactor(MatrixXd j_init, int n) : J(std::move(j_init)), R(MatrixXd::Zero(n, n)), n_(n) {}

  MatrixXd J;
  MatrixXd R;  // upper triangular, leading q x q block used
  int q = 0;

  // Direction in primal space and dual step for adding normal np.
  void directions(const VectorXd& np, VectorXd& z, VectorXd& r, VectorXd& d) const {
    d = J.transpose() * np;
    z = J.rightCols(n_ - q) * d.tail(n_ - q);
    r.resize(q);
    for (int i = q - 1; i >= 0; --i) {
      double sum = d(i);
      for (int k = i + 1; k < q; ++k) sum -= R(i, k) * r(k);
      r(i) = sum / R(i, i);
    }
  }

  bool add(VectorXd d) {
    for (int j = n_ - 1; j > q; --j) {
      double h = 0.0;
      const Givens g = Givens::zeroing(d(j - 1), d(j), h);
      if (g.s == 0.0 && g.c == 1.0) continue;
      d(j - 1) = h;
      d(j) = 0.0;
      rotate_columns(J, j - 1, j, g);
    }
    if (std::abs(d(q)) <= std::numeric_limits<double>::epsilon() * d.norm()) return false;
    R.col(q).head(q + 1) = d.head(q + 1);
    ++q;
    return true;
  }

  void drop(int l) {
    for (int j = l; j < q - 1; ++j) R.col(j) = R.col(j + 1);
    R.col(q - 1).setZero();
    for (int j = l; j < q - 1; ++j) {
      double h = 0.0;
      const Givens g = Givens::zeroing(R(j, j), R(j + 1, j), h);
      for (int k = j; k < q - 1; ++k) {
        const double a = R(j, k), b = R(j + 1, k);
        R(j, k) = g.c * a + g.s * b;
        R(j + 1, k) = -g.s * a + g.c * b;
      }
      R(j + 1, j) = 0.0;
      rotate_columns(J, j, j + 1, g);
    }
    --q;
  }

 private:
  int n_;
};

}  // namespace

QpResult solve_qp(const QpProblem& pb, double feas_tol, int max_iterations) {
  const int n = static_cast<int>(pb.G.rows());
  const int m = static_cast<int>(pb.C.rows());
  if (max_iterations <= 0) max_iterations = 10 * (n + m) + 50;
  QpResult res;
  res.multipliers = VectorXd::Zero(m);

  const Eigen::LLT<MatrixXd> llt(pb.G);
  if (llt.info() != Eigen::Success) {
    res.status = QpStatus::not_convex;
    res.x = VectorXd::Zero(n);
    return res;
  }
  const MatrixXd L = llt.matrixL();
  // J = L^{-T}, so that J J^T = G^{-1}.
  MatrixXd J = L.transpose().triangularView<Eigen::Upper>().solve(MatrixXd::Identity(n, n));
  ActiveSetFactor fac(std::move(J), n);

  VectorXd x = -llt.solve(pb.a);

  std::vector<int> active;
  VectorXd u(0);
  VectorXd row_norm(m);
  for (int j = 0; j < m; ++j) row_norm(j) = std::max(pb.C.row(j).norm(), 1e-300);

  int iter = 0;
  while (true) {
    // Most violated constraint, measured in distance units.
    int p = -1;
    double worst = 0.0;
    for (int j = 0; j < m; ++j) {
      const double s = (pb.C.row(j).dot(x) - pb.b(j)) / row_norm(j);
      if (s < -feas_tol * (1.0 + std::abs(pb.b(j)) / row_norm(j)) && s < worst) {
        worst = s;
        p = j;
      }
    }
    if (p < 0) break;

    const VectorXd np = pb.C.row(p).transpose();
    VectorXd u_plus(active.size() + 1);
    u_plus.head(active.size()) = u;
    u_plus(active.size()) = 0.0;

    bool added = false;
    while (!added) {
      if (++iter > max_iterations) {
        res.status = QpStatus::max_iterations;
        res.x = x;
        res.iterations = iter;
        return res;
      }
      VectorXd z, r, d;
      fac.directions(np, z, r, d);

      double t1 = kInf;
      int l = -1;
      for (int k = 0; k < fac.q; ++k) {
        if (r(k) > 0.0) {
          const double ratio = u_plus(k) / r(k);
          if (ratio < t1) {
            t1 = ratio;
            l = k;
          }
        }
      }
      const double slack = np.dot(x) - pb.b(p);
      const double zn = z.dot(np);
      const double t2 = (z.norm() > 1e-14 * np.norm() && zn > 0.0) ? -slack / zn : kInf;

      if (t1 == kInf && t2 == kInf) {
        res.status = QpStatus::infeasible;
        res.x = x;
        res.iterations = iter;
        return res;
      }

      if (t2 == kInf) {
        // Dual-only step, then drop the blocking constraint.
        for (int k = 0; k < fac.q; ++k) u_plus(k) -= t1 * r(k);
        u_plus(fac.q) += t1;
        fac.drop(l);
        active.erase(active.begin() + l);
        for (int k = l; k < u_plus.size() - 1; ++k) u_plus(k) = u_plus(k + 1);
        u_plus.conservativeResize(u_plus.size() - 1);
        continue;
      }

      const double t = std::min(t1, t2);
      x += t * z;
      for (int k = 0; k < fac.q; ++k) u_plus(k) -= t * r(k);
      u_plus(fac.q) += t;

      if (t2 <= t1) {
        if (!fac.add(d)) {
          // Normal linearly dependent on the active set at a full step.
          res.status = QpStatus::infeasible;
          res.x = x;
          res.iterations = iter;
          return res;
        }
        active.push_back(p);
        u = u_plus;
        added = true;
      } else {
        fac.drop(l);
        active.erase(active.begin() + l);
        for (int k = l; k < u_plus.size() - 1; ++k) u_plus(k) = u_plus(k + 1);
        u_plus.conservativeResize(u_plus.size() - 1);
      }
    }
  }

  res.status = QpStatus::optimal;
  res.x = x;
  res.objective = 0.5 * x.dot(pb.G * x) + pb.a.dot(x);
  res.iterations = iter;
  res.active = active;
  for (std::size_t k = 0; k < active.size(); ++k) res.multipliers(active[k]) = u(k);
  return res;
}

}  // namespace pkm
