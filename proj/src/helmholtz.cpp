#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "llmag/linsolve.hpp"

namespace llmag {

namespace {
// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct HelmholtzPlan::Impl {
  GridSpec grid;
  double lambda = 0.0;
  std::vector<double> eig;
  std::vector<double> denom;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  double norm = 1.0;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
  }
};

HelmholtzPlan::HelmholtzPlan(const GridSpec& grid, double lambda) : impl_(std::make_unique<Impl>()) {
  grid.validate();
  require(lambda >= 0.0, "helmholtz_plan: lambda must be >= 0");
  impl_->grid = grid;
  impl_->lambda = lambda;

  const std::size_t ncell = grid.cells();
  impl_->eig.resize(ncell);
  impl_->denom.resize(ncell);
  const int nx = grid.n[0], ny = grid.n[1], nz = grid.n[2];
  auto axis_eig = [&](int axis, int k) {
    if (!grid.active(axis)) return 0.0;
    const double h = grid.h[static_cast<std::size_t>(axis)];
    const int n = grid.n[static_cast<std::size_t>(axis)];
    return 2.0 / (h * h) * (std::cos(std::numbers::pi * k / n) - 1.0);
  };
  std::size_t q = 0;
  for (int kz = 0; kz < nz; ++kz)
    for (int ky = 0; ky < ny; ++ky)
      for (int kx = 0; kx < nx; ++kx, ++q) {
        const double mu = axis_eig(0, kx) + axis_eig(1, ky) + axis_eig(2, kz);
        impl_->eig[q] = mu;
        impl_->denom[q] = 1.0 - lambda * mu;
      }

  int dims[3];
  int rank = 0;
  if (grid.dim == 1) {
    dims[rank++] = nx;
  } else {
    dims[rank++] = nz;
    dims[rank++] = ny;
    dims[rank++] = nx;
  }
  std::vector<fftw_r2r_kind> fwd(static_cast<std::size_t>(rank), FFTW_REDFT10);
  std::vector<fftw_r2r_kind> inv(static_cast<std::size_t>(rank), FFTW_REDFT01);
  impl_->norm = 1.0;
  for (int r = 0; r < rank; ++r) impl_->norm *= 2.0 * dims[r];

  std::vector<double> a(ncell), b(ncell);
  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  impl_->forward = fftw_plan_r2r(rank, dims, a.data(), b.data(), fwd.data(), flags);
  impl_->inverse = fftw_plan_r2r(rank, dims, b.data(), a.data(), inv.data(), flags);
  if (!impl_->forward || !impl_->inverse) throw NumericalError("helmholtz_plan: FFTW planning failed");
}

HelmholtzPlan::~HelmholtzPlan() = default;
HelmholtzPlan::HelmholtzPlan(HelmholtzPlan&&) noexcept = default;
HelmholtzPlan& HelmholtzPlan::operator=(HelmholtzPlan&&) noexcept = default;

const GridSpec& HelmholtzPlan::grid() const { return impl_->grid; }
double HelmholtzPlan::lambda() const { return impl_->lambda; }
std::span<const double> HelmholtzPlan::eigenvalues() const { return impl_->eig; }
std::span<const double> HelmholtzPlan::denominators() const { return impl_->denom; }

void HelmholtzPlan::solve(const VectorField3& rhs, VectorField3& x) const {
  const GridSpec& g = impl_->grid;
  require(rhs.grid() == g, "helmholtz_solve: grid mismatch");
  if (!(x.grid() == g)) x = VectorField3(g);
  if (impl_->lambda == 0.0) {
    if (&x != &rhs) x = rhs;
    fill_ghosts(x);
    return;
  }
  const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
  const std::size_t ncell = g.cells();
  const double scale = 1.0 / impl_->norm;

#pragma omp parallel for schedule(static)
  for (int c = 0; c < 3; ++c) {
    std::vector<double> buf(ncell), spec(ncell);
    std::size_t q = 0;
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) buf[q++] = rhs(c, i, j, k);
    fftw_execute_r2r(impl_->forward, buf.data(), spec.data());
    for (std::size_t m = 0; m < ncell; ++m) spec[m] *= scale / impl_->denom[m];
    fftw_execute_r2r(impl_->inverse, spec.data(), buf.data());
    q = 0;
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) x(c, i, j, k) = buf[q++];
  }
  fill_ghosts(x);
}

HelmholtzPlan helmholtz_plan(const GridSpec& grid, double lambda) { return HelmholtzPlan(grid, lambda); }

VectorField3 helmholtz_solve(const HelmholtzPlan& plan, const VectorField3& rhs) {
  VectorField3 x(plan.grid());
  plan.solve(rhs, x);
  return x;
}

}  // namespace llmag
