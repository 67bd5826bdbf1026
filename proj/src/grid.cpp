#include "llmag/grid.hpp"

#include <algorithm>
#include <string>

namespace llmag {

GridSpec GridSpec::line(int nx, double length) {
  GridSpec g;
  g.dim = 1;
  g.n = {nx, 1, 1};
  g.h = {length / nx, 1.0, 1.0};
  g.extent = {length, 1.0, 1.0};
  g.validate();
  return g;
}

GridSpec GridSpec::box(int nx, int ny, int nz, double lx, double ly, double lz) {
  GridSpec g;
  g.dim = 3;
  g.n = {nx, ny, nz};
  g.h = {lx / nx, ly / ny, lz / nz};
  g.extent = {lx, ly, lz};
  g.validate();
  return g;
}

GridSpec GridSpec::unit_cube(int n) { return box(n, n, n, 1.0, 1.0, 1.0); }

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= h[static_cast<std::size_t>(a)];
  return v;
}

void GridSpec::validate() const {
  require(dim == 1 || dim == 3, "grid: dim must be 1 or 3, got " + std::to_string(dim));
  for (int a = 0; a < 3; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    if (!active(a)) {
      require(n[ua] == 1, "grid: inactive axis must have one cell");
      continue;
    }
    require(n[ua] >= 1, "grid: cell count must be positive on axis " + std::to_string(a));
    require(h[ua] > 0.0 && extent[ua] > 0.0, "grid: spacing and extent must be positive");
    const double rel = std::abs(h[ua] * n[ua] - extent[ua]) / extent[ua];
    require(rel <= 1e-12, "grid: h * n must equal extent on axis " + std::to_string(a));
  }
}

VectorField3::VectorField3(const GridSpec& grid) : grid_(grid) {
  grid_.validate();
  gx_ = ghost(0);
  gy_ = ghost(1);
  gz_ = ghost(2);
  for (int a = 0; a < 3; ++a) pad_[static_cast<std::size_t>(a)] = grid_.n[static_cast<std::size_t>(a)] + 2 * ghost(a);
  data_.assign(3 * static_cast<std::size_t>(pad_[0]) * static_cast<std::size_t>(pad_[1]) *
                   static_cast<std::size_t>(pad_[2]),
               0.0);
}

void VectorField3::fill(const Vec3& v) {
  for (int k = 0; k < grid_.n[2]; ++k)
    for (int j = 0; j < grid_.n[1]; ++j)
      for (int i = 0; i < grid_.n[0]; ++i) set(i, j, k, v);
}

}  // namespace llmag
