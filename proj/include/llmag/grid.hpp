#pragma once

// Cell-centered grids with one ghost layer, the discrete differential
// operators used by the Landau-Lifshitz solvers, and discrete norms.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "llmag/error.hpp"

namespace llmag {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double& operator[](int c) { return c == 0 ? x : (c == 1 ? y : z); }
  double operator[](int c) const { return c == 0 ? x : (c == 1 ? y : z); }

  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  Vec3& operator*=(double a) { x *= a; y *= a; z *= a; return *this; }

  friend Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend Vec3 operator*(Vec3 a, double s) { return a *= s; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Uniform cell-centered grid. Only the first `dim` axes are active; inactive
/// axes have one cell and no ghost layer.
struct GridSpec {
  int dim = 1;
  std::array<int, 3> n{1, 1, 1};
  std::array<double, 3> h{1.0, 1.0, 1.0};
  std::array<double, 3> extent{1.0, 1.0, 1.0};

  static GridSpec line(int nx, double length = 1.0);
  static GridSpec box(int nx, int ny, int nz, double lx, double ly, double lz);
  static GridSpec unit_cube(int n);

  bool active(int axis) const { return axis < dim; }
  std::size_t cells() const {
    return static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(n[1]) *
           static_cast<std::size_t>(n[2]);
  }
  /// h^d over the active axes.
  double cell_volume() const;
  /// Cell center coordinate along `axis` for interior index i (0-based).
  double center(int axis, int i) const { return (i + 0.5) * h[static_cast<std::size_t>(axis)]; }

  void validate() const;
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Three-component field on the cell centers plus one ghost layer on every
/// active face. Storage is x-fastest and component-interleaved.
class VectorField3 {
 public:
  VectorField3() = default;
  explicit VectorField3(const GridSpec& grid);

  const GridSpec& grid() const { return grid_; }
  std::span<double> raw() { return data_; }
  std::span<const double> raw() const { return data_; }
  std::size_t size() const { return data_.size(); }

  int padded(int axis) const { return pad_[static_cast<std::size_t>(axis)]; }
  int ghost(int axis) const { return grid_.active(axis) ? 1 : 0; }

  /// Offset of component 0 for interior coordinates (i, j, k); ghost cells
  /// are addressed with -1 and n along an active axis.
  std::size_t offset(int i, int j, int k) const {
    const auto pi = static_cast<std::size_t>(i + gx_);
    const auto pj = static_cast<std::size_t>(j + gy_);
    const auto pk = static_cast<std::size_t>(k + gz_);
    return 3 * ((pk * static_cast<std::size_t>(pad_[1]) + pj) * static_cast<std::size_t>(pad_[0]) + pi);
  }
  /// Distance in doubles between neighbouring cells along `axis`.
  std::ptrdiff_t stride(int axis) const {
    if (axis == 0) return 3;
    if (axis == 1) return 3 * static_cast<std::ptrdiff_t>(pad_[0]);
    return 3 * static_cast<std::ptrdiff_t>(pad_[0]) * pad_[1];
  }

  Vec3 get(int i, int j, int k) const {
    const double* p = data_.data() + offset(i, j, k);
    return {p[0], p[1], p[2]};
  }
  void set(int i, int j, int k, const Vec3& v) {
    double* p = data_.data() + offset(i, j, k);
    p[0] = v.x; p[1] = v.y; p[2] = v.z;
  }
  double& operator()(int c, int i, int j, int k) { return data_[offset(i, j, k) + static_cast<std::size_t>(c)]; }
  double operator()(int c, int i, int j, int k) const { return data_[offset(i, j, k) + static_cast<std::size_t>(c)]; }

  /// Sets every interior cell (ghosts untouched).
  void fill(const Vec3& v);

  friend bool operator==(const VectorField3&, const VectorField3&) = default;

 private:
  GridSpec grid_{};
  std::array<int, 3> pad_{1, 1, 1};
  int gx_ = 0, gy_ = 0, gz_ = 0;
  std::vector<double> data_;
};

/// Nine values per interior cell: entry (axis, comp) is the derivative of
/// component `comp` along `axis`.
class TensorField {
 public:
  TensorField() = default;
  explicit TensorField(const GridSpec& grid) : grid_(grid), data_(9 * grid.cells(), 0.0) {}

  const GridSpec& grid() const { return grid_; }
  std::span<double> raw() { return data_; }
  std::span<const double> raw() const { return data_; }

  std::size_t cell(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * static_cast<std::size_t>(grid_.n[1]) + static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(grid_.n[0]) +
           static_cast<std::size_t>(i);
  }
  double& operator()(int axis, int comp, int i, int j, int k) {
    return data_[9 * cell(i, j, k) + static_cast<std::size_t>(3 * axis + comp)];
  }
  double operator()(int axis, int comp, int i, int j, int k) const {
    return data_[9 * cell(i, j, k) + static_cast<std::size_t>(3 * axis + comp)];
  }

 private:
  GridSpec grid_{};
  std::vector<double> data_;
};

struct Norms {
  double linf = 0.0;
  double l2 = 0.0;
  double h1 = 0.0;       ///< with the centered gradient
  double h1_face = 0.0;  ///< with the face-difference gradient
};

// Data-parallel kernels. Every kernel's output is bitwise independent of the
// number of OpenMP threads.

/// Mirrors every face-adjacent interior cell into its ghost cell.
void fill_ghosts(VectorField3& field);
/// Sum over active axes of (m[+1] - 2 m + m[-1]) / h^2. Requires filled ghosts.
void laplacian(const VectorField3& field, VectorField3& out);
VectorField3 laplacian(const VectorField3& field);
/// Centered two-cell gradient (m[+1] - m[-1]) / 2h. Requires filled ghosts.
TensorField gradient(const VectorField3& field);
/// Forward face difference (m[+1] - m) / h stored at the lower cell; the
/// boundary face carries zero flux through the mirrored ghost.
TensorField face_gradient(const VectorField3& field);
/// Centered gradient of the half-cell averaged field: component c is averaged
/// with its lower neighbour along axis c before differencing.
TensorField avg_gradient(const VectorField3& field);
/// Pointwise |grad m|^2 with the centered gradient, written into a scalar
/// buffer of length grid.cells().
void gradient_sq(const VectorField3& field, std::span<double> out);

double inner_product(const VectorField3& f, const VectorField3& g);
double inner_product(const TensorField& f, const TensorField& g);
double l2_norm(const VectorField3& f);
double linf_norm(const VectorField3& f);
/// (h^d sum |f_I|^p)^(1/p) with |.| the Euclidean length of the cell vector.
double lp_norm(const VectorField3& f, double p);
/// Fills a copy's ghosts before differencing, so `f` needs no ghost setup.
Norms norms(const VectorField3& f);

// Whole-buffer linear algebra (ghosts included).
void axpy(double a, const VectorField3& x, VectorField3& y);
void scale(double a, VectorField3& x);
/// out = a * x + b * y
void lincomb(double a, const VectorField3& x, double b, const VectorField3& y, VectorField3& out);

namespace serial {
// Straight-line single-threaded reference kernels kept for testing and for
// the benchmark comparison.
void fill_ghosts(VectorField3& field);
void laplacian(const VectorField3& field, VectorField3& out);
TensorField gradient(const VectorField3& field);
TensorField face_gradient(const VectorField3& field);
TensorField avg_gradient(const VectorField3& field);
double inner_product(const VectorField3& f, const VectorField3& g);
double linf_norm(const VectorField3& f);
}  // namespace serial

}  // namespace llmag
