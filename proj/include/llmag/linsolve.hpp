#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "llmag/grid.hpp"

namespace llmag {

/// Diagonalized solver for (I - lambda * Lap_h) x = b under the mirrored-ghost
/// Neumann rule. The cell-centered Neumann Laplacian is diagonal in the
/// type-II cosine basis with eigenvalues
///   mu_k = sum_axis (2 / h^2) (cos(pi k_axis / n_axis) - 1),
/// so a solve is a forward DCT-II, a per-mode division by 1 - lambda mu_k and
/// an inverse transform. Immutable after construction; concurrent solves are
/// safe since each call uses its own workspace.
class HelmholtzPlan {
 public:
  HelmholtzPlan(const GridSpec& grid, double lambda);
  ~HelmholtzPlan();
  HelmholtzPlan(HelmholtzPlan&&) noexcept;
  HelmholtzPlan& operator=(HelmholtzPlan&&) noexcept;
  HelmholtzPlan(const HelmholtzPlan&) = delete;
  HelmholtzPlan& operator=(const HelmholtzPlan&) = delete;

  const GridSpec& grid() const;
  double lambda() const;
  /// Neumann Laplacian eigenvalues, x-fastest mode ordering.
  std::span<const double> eigenvalues() const;
  /// 1 - lambda * mu_k, each >= 1.
  std::span<const double> denominators() const;

  /// Solves every component; fills the ghosts of `x`.
  void solve(const VectorField3& rhs, VectorField3& x) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

HelmholtzPlan helmholtz_plan(const GridSpec& grid, double lambda);
VectorField3 helmholtz_solve(const HelmholtzPlan& plan, const VectorField3& rhs);

struct GmresConfig {
  int restart = 30;
  int max_iter = 500;
  double rel_tol = 1e-9;
  double abs_tol = 0.0;  ///< stop once ||r|| <= max(rel_tol ||b||, abs_tol)
  void validate() const;
  friend bool operator==(const GmresConfig&, const GmresConfig&) = default;
};

struct GmresResult {
  VectorField3 x;
  int iters = 0;
  bool converged = false;
  double rel_residual = 0.0;
  std::string diagnostic;
};

using LinearOperator = std::function<void(const VectorField3& in, VectorField3& out)>;

/// Restarted GMRES with modified Gram-Schmidt and Givens rotations. Stops
/// when ||b - A x|| <= rel_tol * ||b||. `precond`, when set, is applied on
/// the right (x = M^{-1} y), so the monitored residual is the true one.
GmresResult gmres_solve(const LinearOperator& apply, const VectorField3& rhs, const GmresConfig& cfg,
                        const VectorField3* x0 = nullptr, const LinearOperator& precond = {});

/// Dense LU solve of (I - lambda Lap_h) x = b with the ghost rule folded into
/// the matrix. Test oracle; refuses grids above 4096 cells.
VectorField3 dense_oracle_solve(const GridSpec& grid, double lambda, const VectorField3& rhs);

/// Row-major dense matrix of the scalar Neumann Laplacian on `grid`
/// (cells x cells, x-fastest ordering). Same size guard as above.
std::vector<double> assemble_neumann_laplacian(const GridSpec& grid);

}  // namespace llmag
