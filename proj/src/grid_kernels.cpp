// OpenMP kernels for the cell-centered operators. Parallel loops run over
// (j, k) rows; reductions accumulate one partial per row and then sum the
// rows in a fixed order, so results do not depend on the thread count.

#include <algorithm>
#include <cmath>
#include <string>

#include "llmag/grid.hpp"

namespace llmag {

namespace {

void check_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw ValidationError(std::string(what) + ": grid mismatch");
}

int rows(const GridSpec& g) { return g.n[1] * g.n[2]; }

// Interior cell count along an axis and whether differencing applies.
double inv_h(const GridSpec& g, int axis) { return 1.0 / g.h[static_cast<std::size_t>(axis)]; }

}  // namespace

void fill_ghosts(VectorField3& f) {
  const GridSpec& g = f.grid();
  const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
  double* d = f.raw().data();

  // x faces
#pragma omp parallel for collapse(2) schedule(static)
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      double* lo = d + f.offset(-1, j, k);
      const double* lo_src = d + f.offset(0, j, k);
      double* hi = d + f.offset(nx, j, k);
      const double* hi_src = d + f.offset(nx - 1, j, k);
      for (int c = 0; c < 3; ++c) {
        lo[c] = lo_src[c];
        hi[c] = hi_src[c];
      }
    }
  }
  if (g.dim == 1) return;

  // y faces
#pragma omp parallel for collapse(2) schedule(static)
  for (int k = 0; k < nz; ++k) {
    for (int i = 0; i < nx; ++i) {
      double* lo = d + f.offset(i, -1, k);
      const double* lo_src = d + f.offset(i, 0, k);
      double* hi = d + f.offset(i, ny, k);
      const double* hi_src = d + f.offset(i, ny - 1, k);
      for (int c = 0; c < 3; ++c) {
        lo[c] = lo_src[c];
        hi[c] = hi_src[c];
      }
    }
  }

  // z faces
#pragma omp parallel for collapse(2) schedule(static)
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      double* lo = d + f.offset(i, j, -1);
      const double* lo_src = d + f.offset(i, j, 0);
      double* hi = d + f.offset(i, j, nz);
      const double* hi_src = d + f.offset(i, j, nz - 1);
      for (int c = 0; c < 3; ++c) {
        lo[c] = lo_src[c];
        hi[c] = hi_src[c];
      }
    }
  }
}

void laplacian(const VectorField3& f, VectorField3& out) {
  const GridSpec& g = f.grid();
  if (!(out.grid() == g)) out = VectorField3(g);
  const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
  const double* d = f.raw().data();
  double* o = out.raw().data();
  const int naxes = g.dim;
  std::ptrdiff_t s[3];
  double w[3];
  for (int a = 0; a < 3; ++a) {
    s[a] = f.stride(a);
    w[a] = g.active(a) ? inv_h(g, a) * inv_h(g, a) : 0.0;
  }

#pragma omp parallel for collapse(2) schedule(static)
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      const std::size_t base = f.offset(0, j, k);
      for (int i = 0; i < nx; ++i) {
        const double* p = d + base + 3 * static_cast<std::size_t>(i);
        double* q = o + base + 3 * static_cast<std::size_t>(i);
        for (int c = 0; c < 3; ++c) {
          double acc = 0.0;
          for (int a = 0; a < naxes; ++a) acc += (p[c + s[a]] - 2.0 * p[c] + p[c - s[a]]) * w[a];
          q[c] = acc;
        }
      }
    }
  }
}

VectorField3 laplacian(const VectorField3& f) {
  VectorField3 out(f.grid());
  laplacian(f, out);
  return out;
}

TensorField gradient(const VectorField3& f) {
  const GridSpec& g = f.grid();
  TensorField t(g);
  const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
  const double* d = f.raw().data();
  double* o = t.raw().data();
  const int naxes = g.dim;

#pragma omp parallel for collapse(2) schedule(static)
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const double* p = d + f.offset(i, j, k);
        double* q = o + 9 * t.cell(i, j, k);
        for (int a = 0; a < naxes; ++a) {
          const std::ptrdiff_t s = f.stride(a);
          const double w = 0.5 * inv_h(g, a);
          for (int c = 0; c < 3; ++c) q[3 * a + c] = (p[c + s] - p[c - s]) * w;
        }
      }
    }
  }
  return t;
}

TensorField face_gradient(const VectorField3& f) {
  const GridSpec& g = f.grid();
  TensorField t(g);
  const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
  const double* d = f.raw().data();
  double* o = t.raw().data();
  const int naxes = g.dim;

#pragma omp parallel for collapse(2) schedule(static)
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const int idx[3] = {i, j, k};
        const double* p = d + f.offset(i, j, k);
        double* q = o + 9 * t.cell(i, j, k);
        for (int a = 0; a < naxes; ++a) {
          // The upper boundary face has zero flux.
          if (idx[a] == g.n[static_cast<std::size_t>(a)] - 1) continue;
          const std::ptrdiff_t s = f.stride(a);
          const double w = inv_h(g, a);
          for (int c = 0; c < 3; ++c) q[3 * a + c] = (p[c + s] - p[c]) * w;
        }
      }
    }
  }
  return t;
}

TensorField avg_gradient(const VectorField3& f) {
  const GridSpec& g = f.grid();
  TensorField t(g);
  const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
  const int naxes = g.dim;

  // Component c averaged with its lower neighbour along axis c; an index one
  // past the interior is mirrored back, which is the ghost rule applied to
  // the averaged field.
  auto averaged = [&](int c, int i, int j, int k) {
    int idx[3] = {i, j, k};
    for (int a = 0; a < naxes; ++a) {
      const int n = g.n[static_cast<std::size_t>(a)];
      if (idx[a] < 0) idx[a] = 0;
      if (idx[a] >= n) idx[a] = n - 1;
    }
    double lower = 0.0;
    if (c < naxes) {
      int low[3] = {idx[0], idx[1], idx[2]};
      low[c] -= 1;
      lower = f(c, low[0], low[1], low[2]);
    } else {
      lower = f(c, idx[0], idx[1], idx[2]);
    }
    return 0.5 * (f(c, idx[0], idx[1], idx[2]) + lower);
  };

#pragma omp parallel for collapse(2) schedule(static)
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        double* q = t.raw().data() + 9 * t.cell(i, j, k);
        for (int a = 0; a < naxes; ++a) {
          const double w = 0.5 * inv_h(g, a);
          const int di = a == 0, dj = a == 1, dk = a == 2;
          for (int c = 0; c < 3; ++c) {
            q[3 * a + c] = (averaged(c, i + di, j + dj, k + dk) - averaged(c, i - di, j - dj, k - dk)) * w;
          }
        }
      }
    }
  }
  return t;
}

void gradient_sq(const VectorField3& f, std::span<double> out) {
  const GridSpec& g = f.grid();
  require(out.size() == g.cells(), "gradient_sq: output size mismatch");
  const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
  const double* d = f.raw().data();
  const int naxes = g.dim;

#pragma omp parallel for collapse(2) schedule(static)
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const double* p = d + f.offset(i, j, k);
        double acc = 0.0;
        for (int a = 0; a < naxes; ++a) {
          const std::ptrdiff_t s = f.stride(a);
          const double w = 0.5 * inv_h(g, a);
          for (int c = 0; c < 3; ++c) {
            const double v = (p[c + s] - p[c - s]) * w;
            acc += v * v;
          }
        }
        out[(static_cast<std::size_t>(k) * static_cast<std::size_t>(ny) + static_cast<std::size_t>(j)) *
                static_cast<std::size_t>(nx) +
            static_cast<std::size_t>(i)] = acc;
      }
    }
  }
}

double inner_product(const VectorField3& f, const VectorField3& g) {
  check_same_grid(f.grid(), g.grid(), "inner_product");
  const GridSpec& gr = f.grid();
  const int nx = gr.n[0], ny = gr.n[1];
  const int nrows = rows(gr);
  std::vector<double> partial(static_cast<std::size_t>(nrows));
  const double* a = f.raw().data();
  const double* b = g.raw().data();

#pragma omp parallel for schedule(static)
  for (int r = 0; r < nrows; ++r) {
    const std::size_t base = f.offset(0, r % ny, r / ny);
    double acc = 0.0;
    for (std::size_t q = base; q < base + 3 * static_cast<std::size_t>(nx); ++q) acc += a[q] * b[q];
    partial[static_cast<std::size_t>(r)] = acc;
  }
  double sum = 0.0;
  for (double p : partial) sum += p;
  return gr.cell_volume() * sum;
}

double inner_product(const TensorField& f, const TensorField& g) {
  check_same_grid(f.grid(), g.grid(), "inner_product");
  const GridSpec& gr = f.grid();
  const std::size_t row_len = 9 * static_cast<std::size_t>(gr.n[0]);
  const int nrows = rows(gr);
  std::vector<double> partial(static_cast<std::size_t>(nrows));
  const double* a = f.raw().data();
  const double* b = g.raw().data();

#pragma omp parallel for schedule(static)
  for (int r = 0; r < nrows; ++r) {
    const std::size_t base = static_cast<std::size_t>(r) * row_len;
    double acc = 0.0;
    for (std::size_t q = base; q < base + row_len; ++q) acc += a[q] * b[q];
    partial[static_cast<std::size_t>(r)] = acc;
  }
  double sum = 0.0;
  for (double p : partial) sum += p;
  return gr.cell_volume() * sum;
}

double l2_norm(const VectorField3& f) { return std::sqrt(inner_product(f, f)); }

double linf_norm(const VectorField3& f) {
  const GridSpec& gr = f.grid();
  const int nx = gr.n[0], ny = gr.n[1];
  const int nrows = rows(gr);
  std::vector<double> partial(static_cast<std::size_t>(nrows));
  const double* a = f.raw().data();

#pragma omp parallel for schedule(static)
  for (int r = 0; r < nrows; ++r) {
    const std::size_t base = f.offset(0, r % ny, r / ny);
    double m = 0.0;
    for (std::size_t q = base; q < base + 3 * static_cast<std::size_t>(nx); ++q) {
      const double v = std::abs(a[q]);
      if (v > m || v != v) m = v;  // NaN sticks
    }
    partial[static_cast<std::size_t>(r)] = m;
  }
  double m = 0.0;
  for (double p : partial)
    if (p > m || p != p) m = p;
  return m;
}

double lp_norm(const VectorField3& f, double p) {
  require(p >= 1.0, "lp_norm: p must be >= 1");
  const GridSpec& gr = f.grid();
  const int nx = gr.n[0], ny = gr.n[1];
  const int nrows = rows(gr);
  std::vector<double> partial(static_cast<std::size_t>(nrows));

#pragma omp parallel for schedule(static)
  for (int r = 0; r < nrows; ++r) {
    double acc = 0.0;
    for (int i = 0; i < nx; ++i) acc += std::pow(norm(f.get(i, r % ny, r / ny)), p);
    partial[static_cast<std::size_t>(r)] = acc;
  }
  double sum = 0.0;
  for (double q : partial) sum += q;
  return std::pow(gr.cell_volume() * sum, 1.0 / p);
}

Norms norms(const VectorField3& f) {
  VectorField3 work = f;
  fill_ghosts(work);
  Norms n;
  n.linf = linf_norm(work);
  const double l2sq = inner_product(work, work);
  n.l2 = std::sqrt(l2sq);
  const TensorField gc = gradient(work);
  const TensorField gf = face_gradient(work);
  n.h1 = std::sqrt(l2sq + inner_product(gc, gc));
  n.h1_face = std::sqrt(l2sq + inner_product(gf, gf));
  return n;
}

void axpy(double a, const VectorField3& x, VectorField3& y) {
  const auto xs = x.raw();
  auto ys = y.raw();
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(ys.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t q = 0; q < n; ++q) ys[static_cast<std::size_t>(q)] += a * xs[static_cast<std::size_t>(q)];
}

void scale(double a, VectorField3& x) {
  auto xs = x.raw();
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(xs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t q = 0; q < n; ++q) xs[static_cast<std::size_t>(q)] *= a;
}

void lincomb(double a, const VectorField3& x, double b, const VectorField3& y, VectorField3& out) {
  if (!(out.grid() == x.grid())) out = VectorField3(x.grid());
  const auto xs = x.raw();
  const auto ys = y.raw();
  auto os = out.raw();
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(os.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t q = 0; q < n; ++q) {
    const auto u = static_cast<std::size_t>(q);
    os[u] = a * xs[u] + b * ys[u];
  }
}

}  // namespace llmag
