#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "llmag/linsolve.hpp"

namespace llmag {

void GmresConfig::validate() const {
  require(restart >= 1, "gmres: restart must be >= 1");
  require(max_iter >= 1, "gmres: max_iter must be >= 1");
  require(rel_tol > 0.0 && rel_tol < 1.0, "gmres: rel_tol must lie in (0, 1)");
  require(abs_tol >= 0.0, "gmres: abs_tol must be >= 0");
}

namespace {

// Plane rotation zeroing b in (a, b).
void givens(double a, double b, double& c, double& s) {
  if (b == 0.0) {
    c = 1.0;
    s = 0.0;
  } else if (std::abs(b) > std::abs(a)) {
    const double t = a / b;
    s = 1.0 / std::sqrt(1.0 + t * t);
    c = t * s;
  } else {
    const double t = b / a;
    c = 1.0 / std::sqrt(1.0 + t * t);
    s = t * c;
  }
}

}  // namespace

GmresResult gmres_solve(const LinearOperator& apply, const VectorField3& rhs, const GmresConfig& cfg,
                        const VectorField3* x0, const LinearOperator& precond) {
  cfg.validate();
  const GridSpec& grid = rhs.grid();
  GmresResult res;
  res.x = x0 ? *x0 : VectorField3(grid);

  const double bnorm = l2_norm(rhs);
  if (bnorm == 0.0) {
    res.x = VectorField3(grid);
    res.converged = true;
    return res;
  }
  const double target = std::max(cfg.rel_tol * bnorm, cfg.abs_tol);
  const int m = cfg.restart;

  VectorField3 r(grid), w(grid), z(grid);
  std::vector<VectorField3> basis(static_cast<std::size_t>(m + 1), VectorField3(grid));
  std::vector<VectorField3> zbasis;
  if (precond) zbasis.assign(static_cast<std::size_t>(m), VectorField3(grid));
  std::vector<double> hess(static_cast<std::size_t>((m + 1) * m), 0.0);
  std::vector<double> cs(static_cast<std::size_t>(m)), sn(static_cast<std::size_t>(m)),
      gvec(static_cast<std::size_t>(m + 1));
  auto H = [&](int i, int j) -> double& { return hess[static_cast<std::size_t>(i * m + j)]; };

  while (true) {
    // r = b - A x
    apply(res.x, w);
    lincomb(1.0, rhs, -1.0, w, r);
    double beta = l2_norm(r);
    res.rel_residual = beta / bnorm;
    if (beta <= target) {
      res.converged = true;
      return res;
    }
    if (res.iters >= cfg.max_iter) {
      res.diagnostic = "gmres: max_iter reached";
      return res;
    }

    basis[0] = r;
    scale(1.0 / beta, basis[0]);
    std::fill(gvec.begin(), gvec.end(), 0.0);
    gvec[0] = beta;

    int j = 0;
    bool breakdown = false;
    for (; j < m && res.iters < cfg.max_iter; ++j) {
      ++res.iters;
      const auto uj = static_cast<std::size_t>(j);
      if (precond) {
        precond(basis[uj], zbasis[uj]);
        apply(zbasis[uj], w);
      } else {
        apply(basis[uj], w);
      }
      for (int i = 0; i <= j; ++i) {
        H(i, j) = inner_product(w, basis[static_cast<std::size_t>(i)]);
        axpy(-H(i, j), basis[static_cast<std::size_t>(i)], w);
      }
      const double hn = l2_norm(w);
      H(j + 1, j) = hn;

      for (int i = 0; i < j; ++i) {
        const double a = H(i, j), b = H(i + 1, j);
        H(i, j) = cs[static_cast<std::size_t>(i)] * a + sn[static_cast<std::size_t>(i)] * b;
        H(i + 1, j) = -sn[static_cast<std::size_t>(i)] * a + cs[static_cast<std::size_t>(i)] * b;
      }
      givens(H(j, j), H(j + 1, j), cs[uj], sn[uj]);
      H(j, j) = cs[uj] * H(j, j) + sn[uj] * H(j + 1, j);
      H(j + 1, j) = 0.0;
      gvec[uj + 1] = -sn[uj] * gvec[uj];
      gvec[uj] = cs[uj] * gvec[uj];

      const double est = std::abs(gvec[uj + 1]);
      if (hn <= 1e-14 * beta) {
        breakdown = est > target;
        ++j;
        break;
      }
      basis[uj + 1] = w;
      scale(1.0 / hn, basis[uj + 1]);
      if (est <= target) {
        ++j;
        break;
      }
    }

    // Back substitution for the least-squares coefficients.
    std::vector<double> y(static_cast<std::size_t>(j), 0.0);
    for (int i = j - 1; i >= 0; --i) {
      double s = gvec[static_cast<std::size_t>(i)];
      for (int l = i + 1; l < j; ++l) s -= H(i, l) * y[static_cast<std::size_t>(l)];
      y[static_cast<std::size_t>(i)] = s / H(i, i);
    }
    for (int i = 0; i < j; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      axpy(y[ui], precond ? zbasis[ui] : basis[ui], res.x);
    }

    if (breakdown) {
      apply(res.x, w);
      lincomb(1.0, rhs, -1.0, w, r);
      res.rel_residual = l2_norm(r) / bnorm;
      res.converged = res.rel_residual * bnorm <= target;
      if (!res.converged) res.diagnostic = "gmres: breakdown (zero Arnoldi norm) before convergence";
      return res;
    }
  }
}

}  // namespace llmag
