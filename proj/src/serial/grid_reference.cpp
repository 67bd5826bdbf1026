// Single-threaded reference versions of the grid kernels. They are written
// with the element accessors rather than raw strides and are the baseline
// for the OpenMP kernels in tests and benchmarks.

#include <algorithm>
#include <cmath>

#include "llmag/grid.hpp"

namespace llmag::serial {

void fill_ghosts(VectorField3& f) {
  const auto& g = f.grid();
  const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j) {
      f.set(-1, j, k, f.get(0, j, k));
      f.set(nx, j, k, f.get(nx - 1, j, k));
    }
  if (g.dim == 1) return;
  for (int k = 0; k < nz; ++k)
    for (int i = 0; i < nx; ++i) {
      f.set(i, -1, k, f.get(i, 0, k));
      f.set(i, ny, k, f.get(i, ny - 1, k));
    }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      f.set(i, j, -1, f.get(i, j, 0));
      f.set(i, j, nz, f.get(i, j, nz - 1));
    }
}

void laplacian(const VectorField3& f, VectorField3& out) {
  const auto& g = f.grid();
  if (!(out.grid() == g)) out = VectorField3(g);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i)
        for (int c = 0; c < 3; ++c) {
          double acc = 0.0;
          const double w0 = (1.0 / g.h[0]) * (1.0 / g.h[0]);
          acc += (f(c, i + 1, j, k) - 2.0 * f(c, i, j, k) + f(c, i - 1, j, k)) * w0;
          if (g.dim == 3) {
            const double w1 = (1.0 / g.h[1]) * (1.0 / g.h[1]);
            const double w2 = (1.0 / g.h[2]) * (1.0 / g.h[2]);
            acc += (f(c, i, j + 1, k) - 2.0 * f(c, i, j, k) + f(c, i, j - 1, k)) * w1;
            acc += (f(c, i, j, k + 1) - 2.0 * f(c, i, j, k) + f(c, i, j, k - 1)) * w2;
          }
          out(c, i, j, k) = acc;
        }
}

TensorField gradient(const VectorField3& f) {
  const auto& g = f.grid();
  TensorField t(g);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i)
        for (int a = 0; a < g.dim; ++a) {
          const int di = a == 0, dj = a == 1, dk = a == 2;
          const double w = 0.5 * (1.0 / g.h[static_cast<std::size_t>(a)]);
          for (int c = 0; c < 3; ++c) t(a, c, i, j, k) = (f(c, i + di, j + dj, k + dk) - f(c, i - di, j - dj, k - dk)) * w;
        }
  return t;
}

TensorField face_gradient(const VectorField3& f) {
  const auto& g = f.grid();
  TensorField t(g);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i)
        for (int a = 0; a < g.dim; ++a) {
          const int idx[3] = {i, j, k};
          if (idx[a] == g.n[static_cast<std::size_t>(a)] - 1) continue;
          const int di = a == 0, dj = a == 1, dk = a == 2;
          const double w = 1.0 / g.h[static_cast<std::size_t>(a)];
          for (int c = 0; c < 3; ++c) t(a, c, i, j, k) = (f(c, i + di, j + dj, k + dk) - f(c, i, j, k)) * w;
        }
  return t;
}

TensorField avg_gradient(const VectorField3& f) {
  // First pass: half-cell averages on the interior, ghosts mirrored.
  const auto& g = f.grid();
  VectorField3 avg(g);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i)
        for (int c = 0; c < 3; ++c) {
          double lower = f(c, i, j, k);
          if (c < g.dim) lower = f(c, i - (c == 0), j - (c == 1), k - (c == 2));
          avg(c, i, j, k) = 0.5 * (f(c, i, j, k) + lower);
        }
  serial::fill_ghosts(avg);
  // Second pass: centered gradient.
  return serial::gradient(avg);
}

double inner_product(const VectorField3& f, const VectorField3& g) {
  const auto& gr = f.grid();
  double sum = 0.0;
  for (int k = 0; k < gr.n[2]; ++k)
    for (int j = 0; j < gr.n[1]; ++j) {
      double row = 0.0;
      for (int i = 0; i < gr.n[0]; ++i)
        for (int c = 0; c < 3; ++c) row += f(c, i, j, k) * g(c, i, j, k);
      sum += row;
    }
  return gr.cell_volume() * sum;
}

double linf_norm(const VectorField3& f) {
  const auto& gr = f.grid();
  double m = 0.0;
  for (int k = 0; k < gr.n[2]; ++k)
    for (int j = 0; j < gr.n[1]; ++j)
      for (int i = 0; i < gr.n[0]; ++i)
        for (int c = 0; c < 3; ++c) {
          const double v = std::abs(f(c, i, j, k));
          if (v > m || v != v) m = v;
        }
  return m;
}

}  // namespace llmag::serial
