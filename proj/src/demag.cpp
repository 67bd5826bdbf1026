// Stray field by zero-padded FFT convolution with the cell-averaged
// demagnetizing tensor of Newell, Williams and Dunlop (1993).

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <vector>

#include "llmag/physics.hpp"

namespace llmag {

namespace {

using Real = long double;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Doubly compensated summation after ordering by decreasing magnitude.
Real accurate_sum(Real* arr, int n) {
  std::sort(arr, arr + n, [](Real a, Real b) { return std::fabs(a) > std::fabs(b); });
  Real sum = arr[0], corr = 0;
  for (int i = 1; i < n; ++i) {
    const Real x = arr[i];
    const Real y = corr + x;
    const Real u = x - (y - corr);
    const Real t = y + sum;
    const Real v = y - (t - sum);
    const Real z = u + v;
    sum = t + z;
    corr = z - (sum - t);
  }
  return sum;
}

Real self_demag_nx(Real x, Real y, Real z) {
  if (x <= 0 || y <= 0 || z <= 0) return 0;
  if (x == y && y == z) return Real(1) / 3;
  const Real xsq = x * x, ysq = y * y, zsq = z * z;
  const Real diag = std::sqrt(xsq + ysq + zsq);
  const Real mpxy = (x - y) * (x + y);
  const Real mpxz = (x - z) * (x + z);
  Real arr[15];
  arr[0] = -4 * (2 * xsq * x - ysq * y - zsq * z);
  arr[1] = 4 * (xsq + mpxy) * std::sqrt(xsq + ysq);
  arr[2] = 4 * (xsq + mpxz) * std::sqrt(xsq + zsq);
  arr[3] = -4 * (ysq + zsq) * std::sqrt(ysq + zsq);
  arr[4] = -4 * diag * (mpxy + mpxz);
  arr[5] = 24 * x * y * z * std::atan(y * z / (x * diag));
  arr[6] = 12 * (z + y) * xsq * std::log(x);
  arr[7] = 12 * z * ysq * std::log((std::sqrt(ysq + zsq) + z) / y);
  arr[8] = -12 * z * xsq * std::log(std::sqrt(xsq + zsq) + z);
  arr[9] = 12 * z * mpxy * std::log(diag + z);
  arr[10] = -6 * z * mpxy * std::log(xsq + ysq);
  arr[11] = 12 * y * zsq * std::log((std::sqrt(ysq + zsq) + y) / z);
  arr[12] = -12 * y * xsq * std::log(std::sqrt(xsq + ysq) + y);
  arr[13] = 12 * y * mpxz * std::log(diag + y);
  arr[14] = -6 * y * mpxz * std::log(xsq + zsq);
  return accurate_sum(arr, 15) / (12 * std::numbers::pi_v<Real> * x * y * z);
}

Real newell_f(Real x, Real y, Real z) {
  x = std::fabs(x);
  y = std::fabs(y);
  z = std::fabs(z);
  const Real xsq = x * x, ysq = y * y, zsq = z * z;
  Real R = xsq + ysq + zsq;
  if (R <= 0) return 0;
  R = std::sqrt(R);
  Real piece[8];
  int n = 0;
  if (z > 0) {
    piece[n++] = 2 * (2 * xsq - ysq - zsq) * R;
    if (x * y * z > 0) piece[n++] = -12 * x * y * z * std::atan2(y * z, x * R);
    if (y > 0 && xsq + zsq > 0) {
      const Real l = std::log(((y + R) * (y + R)) / (xsq + zsq));
      piece[n++] = 3 * y * zsq * l;
      piece[n++] = -3 * y * xsq * l;
    }
    if (xsq + ysq > 0) {
      const Real l = std::log(((z + R) * (z + R)) / (xsq + ysq));
      piece[n++] = 3 * z * ysq * l;
      piece[n++] = -3 * z * xsq * l;
    }
  } else if (x == y) {
    const Real k = 2 * std::sqrt(Real(2)) - 6 * std::log(1 + std::sqrt(Real(2)));
    piece[n++] = k * xsq * x;
  } else {
    piece[n++] = 2 * (2 * xsq - ysq) * R;
    if (y > 0 && x > 0) piece[n++] = -6 * y * xsq * std::log((y + R) / x);
  }
  return accurate_sum(piece, n) / 12;
}

Real newell_g(Real x, Real y, Real z) {
  Real sign = 1;
  if (x < 0) sign = -sign;
  if (y < 0) sign = -sign;
  x = std::fabs(x);
  y = std::fabs(y);
  z = std::fabs(z);
  const Real xsq = x * x, ysq = y * y, zsq = z * z;
  Real R = xsq + ysq + zsq;
  if (R <= 0) return 0;
  R = std::sqrt(R);
  Real piece[7];
  int n = 0;
  piece[n++] = -2 * x * y * R;
  if (z > 0) {
    piece[n++] = -z * zsq * std::atan2(x * y, z * R);
    piece[n++] = -3 * z * ysq * std::atan2(x * z, y * R);
    piece[n++] = -3 * z * xsq * std::atan2(y * z, x * R);
    if (xsq + ysq > 0) piece[n++] = 6 * x * y * z * std::log((z + R) / std::sqrt(xsq + ysq));
    if (ysq + zsq > 0) piece[n++] = y * (3 * zsq - ysq) * std::log((x + R) / std::sqrt(ysq + zsq));
    if (xsq + zsq > 0) piece[n++] = x * (3 * zsq - xsq) * std::log((y + R) / std::sqrt(xsq + zsq));
  } else {
    if (y > 0) piece[n++] = -y * ysq * std::log((x + R) / y);
    if (x > 0) piece[n++] = -x * xsq * std::log((y + R) / x);
  }
  return sign * accurate_sum(piece, n) / 6;
}

// Second differences of f (diagonal) and g (off-diagonal) over the 27
// combinations of +-d, 0. Returns 4 pi dx dy dz N.
Real sda00(Real x, Real y, Real z, Real dx, Real dy, Real dz) {
  Real a[27];
  a[0] = -newell_f(x + dx, y + dy, z + dz);
  a[1] = -newell_f(x + dx, y - dy, z + dz);
  a[2] = -newell_f(x + dx, y - dy, z - dz);
  a[3] = -newell_f(x + dx, y + dy, z - dz);
  a[4] = -newell_f(x - dx, y + dy, z - dz);
  a[5] = -newell_f(x - dx, y + dy, z + dz);
  a[6] = -newell_f(x - dx, y - dy, z + dz);
  a[7] = -newell_f(x - dx, y - dy, z - dz);
  a[8] = 2 * newell_f(x, y - dy, z - dz);
  a[9] = 2 * newell_f(x, y - dy, z + dz);
  a[10] = 2 * newell_f(x, y + dy, z + dz);
  a[11] = 2 * newell_f(x, y + dy, z - dz);
  a[12] = 2 * newell_f(x + dx, y + dy, z);
  a[13] = 2 * newell_f(x + dx, y, z + dz);
  a[14] = 2 * newell_f(x + dx, y, z - dz);
  a[15] = 2 * newell_f(x + dx, y - dy, z);
  a[16] = 2 * newell_f(x - dx, y - dy, z);
  a[17] = 2 * newell_f(x - dx, y, z + dz);
  a[18] = 2 * newell_f(x - dx, y, z - dz);
  a[19] = 2 * newell_f(x - dx, y + dy, z);
  a[20] = -4 * newell_f(x, y - dy, z);
  a[21] = -4 * newell_f(x, y + dy, z);
  a[22] = -4 * newell_f(x, y, z - dz);
  a[23] = -4 * newell_f(x, y, z + dz);
  a[24] = -4 * newell_f(x + dx, y, z);
  a[25] = -4 * newell_f(x - dx, y, z);
  a[26] = 8 * newell_f(x, y, z);
  return accurate_sum(a, 27);
}

Real sda01(Real x, Real y, Real z, Real l, Real h, Real e) {
  Real a[27];
  a[0] = -newell_g(x - l, y - h, z - e);
  a[1] = -newell_g(x - l, y - h, z + e);
  a[2] = -newell_g(x + l, y - h, z + e);
  a[3] = -newell_g(x + l, y - h, z - e);
  a[4] = -newell_g(x + l, y + h, z - e);
  a[5] = -newell_g(x + l, y + h, z + e);
  a[6] = -newell_g(x - l, y + h, z + e);
  a[7] = -newell_g(x - l, y + h, z - e);
  a[8] = 2 * newell_g(x, y + h, z - e);
  a[9] = 2 * newell_g(x, y + h, z + e);
  a[10] = 2 * newell_g(x, y - h, z + e);
  a[11] = 2 * newell_g(x, y - h, z - e);
  a[12] = 2 * newell_g(x - l, y - h, z);
  a[13] = 2 * newell_g(x - l, y + h, z);
  a[14] = 2 * newell_g(x - l, y, z - e);
  a[15] = 2 * newell_g(x - l, y, z + e);
  a[16] = 2 * newell_g(x + l, y, z + e);
  a[17] = 2 * newell_g(x + l, y, z - e);
  a[18] = 2 * newell_g(x + l, y - h, z);
  a[19] = 2 * newell_g(x + l, y + h, z);
  a[20] = -4 * newell_g(x - l, y, z);
  a[21] = -4 * newell_g(x + l, y, z);
  a[22] = -4 * newell_g(x, y, z + e);
  a[23] = -4 * newell_g(x, y, z - e);
  a[24] = -4 * newell_g(x, y - h, z);
  a[25] = -4 * newell_g(x, y + h, z);
  a[26] = 8 * newell_g(x, y, z);
  return accurate_sum(a, 27);
}

}  // namespace

Sym3 prism_self_demag(double a, double b, double c) {
  require(a > 0 && b > 0 && c > 0, "prism_self_demag: edges must be positive");
  Sym3 n;
  n.xx = static_cast<double>(self_demag_nx(a, b, c));
  n.yy = static_cast<double>(self_demag_nx(b, c, a));
  n.zz = static_cast<double>(self_demag_nx(c, a, b));
  return n;
}

Sym3 newell_tensor(double x, double y, double z, double dx, double dy, double dz) {
  require(dx > 0 && dy > 0 && dz > 0, "newell_tensor: cell edges must be positive");
  if (x == 0.0 && y == 0.0 && z == 0.0) return prism_self_demag(dx, dy, dz);
  // Work in units of the largest edge; the tensor is scale invariant.
  const Real s = std::max({dx, dy, dz});
  const Real X = x / s, Y = y / s, Z = z / s, DX = dx / s, DY = dy / s, DZ = dz / s;
  const Real norm = 4 * std::numbers::pi_v<Real> * DX * DY * DZ;
  Sym3 n;
  n.xx = static_cast<double>(sda00(X, Y, Z, DX, DY, DZ) / norm);
  n.yy = static_cast<double>(sda00(Y, X, Z, DY, DX, DZ) / norm);
  n.zz = static_cast<double>(sda00(Z, Y, X, DZ, DY, DX) / norm);
  n.xy = static_cast<double>(sda01(X, Y, Z, DX, DY, DZ) / norm);
  n.xz = static_cast<double>(sda01(X, Z, Y, DX, DZ, DY) / norm);
  n.yz = static_cast<double>(sda01(Y, Z, X, DY, DZ, DX) / norm);
  return n;
}

struct DemagTensor::Impl {
  GridSpec grid;
  std::array<int, 3> pad{1, 1, 1};
  std::size_t nreal = 0, ncomplex = 0;
  // Spectral kernel components xx, yy, zz, xy, xz, yz.
  std::array<std::vector<double>, 6> khat;
  double imag_ratio = 0.0;
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
  }

  std::size_t real_index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * static_cast<std::size_t>(pad[1]) + static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(pad[0]) +
           static_cast<std::size_t>(i);
  }
};

DemagTensor::DemagTensor(const GridSpec& grid) : impl_(std::make_unique<Impl>()) {
  grid.validate();
  require(grid.dim == 3, "build_demag_tensor: grid must be three-dimensional");
  Impl& im = *impl_;
  im.grid = grid;
  for (int a = 0; a < 3; ++a) {
    const int n = grid.n[static_cast<std::size_t>(a)];
    im.pad[static_cast<std::size_t>(a)] = n == 1 ? 1 : 2 * n;
  }
  const int px = im.pad[0], py = im.pad[1], pz = im.pad[2];
  im.nreal = static_cast<std::size_t>(px) * static_cast<std::size_t>(py) * static_cast<std::size_t>(pz);
  im.ncomplex = static_cast<std::size_t>(px / 2 + 1) * static_cast<std::size_t>(py) * static_cast<std::size_t>(pz);

  std::array<std::vector<double>, 6> kreal;
  for (auto& v : kreal) v.assign(im.nreal, 0.0);
  const int nx = grid.n[0], ny = grid.n[1], nz = grid.n[2];
  auto wrap = [](int d, int p) { return d < 0 ? d + p : d; };

  // First octant, then the parity of each component fills the rest:
  // diagonal terms are even in every offset, N_ab is odd in a and b.
  for (int dk = 0; dk < nz; ++dk)
    for (int dj = 0; dj < ny; ++dj)
      for (int di = 0; di < nx; ++di) {
        const Sym3 t = real_space(di, dj, dk);
        for (int sk : {1, -1}) {
          if (sk < 0 && dk == 0) continue;
          for (int sj : {1, -1}) {
            if (sj < 0 && dj == 0) continue;
            for (int si : {1, -1}) {
              if (si < 0 && di == 0) continue;
              const std::size_t q = im.real_index(wrap(si * di, px), wrap(sj * dj, py), wrap(sk * dk, pz));
              kreal[0][q] = t.xx;
              kreal[1][q] = t.yy;
              kreal[2][q] = t.zz;
              kreal[3][q] = si * sj * t.xy;
              kreal[4][q] = si * sk * t.xz;
              kreal[5][q] = sj * sk * t.yz;
            }
          }
        }
      }

  std::vector<std::complex<double>> spec(im.ncomplex);
  {
    std::lock_guard lock(planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    im.r2c = fftw_plan_dft_r2c_3d(pz, py, px, kreal[0].data(), reinterpret_cast<fftw_complex*>(spec.data()), flags);
    im.c2r = fftw_plan_dft_c2r_3d(pz, py, px, reinterpret_cast<fftw_complex*>(spec.data()), kreal[0].data(),
                                  flags | FFTW_DESTROY_INPUT);
    if (!im.r2c || !im.c2r) throw NumericalError("build_demag_tensor: FFTW planning failed");
  }
  double max_real = 0.0, max_imag = 0.0;
  for (int c = 0; c < 6; ++c) {
    fftw_execute_dft_r2c(im.r2c, kreal[static_cast<std::size_t>(c)].data(),
                         reinterpret_cast<fftw_complex*>(spec.data()));
    auto& out = im.khat[static_cast<std::size_t>(c)];
    out.resize(im.ncomplex);
    for (std::size_t q = 0; q < im.ncomplex; ++q) {
      out[q] = spec[q].real();
      max_real = std::max(max_real, std::abs(spec[q].real()));
      max_imag = std::max(max_imag, std::abs(spec[q].imag()));
    }
  }
  im.imag_ratio = max_real > 0 ? max_imag / max_real : 0.0;
}

DemagTensor::~DemagTensor() = default;
DemagTensor::DemagTensor(DemagTensor&&) noexcept = default;
DemagTensor& DemagTensor::operator=(DemagTensor&&) noexcept = default;

const GridSpec& DemagTensor::grid() const { return impl_->grid; }
std::array<int, 3> DemagTensor::padded() const { return impl_->pad; }
double DemagTensor::kernel_imag_ratio() const { return impl_->imag_ratio; }

Sym3 DemagTensor::real_space(int di, int dj, int dk) const {
  const GridSpec& g = impl_->grid;
  return newell_tensor(di * g.h[0], dj * g.h[1], dk * g.h[2], g.h[0], g.h[1], g.h[2]);
}

void DemagTensor::apply(const VectorField3& m, VectorField3& h) const {
  const Impl& im = *impl_;
  const GridSpec& g = im.grid;
  require(m.grid() == g, "stray_field: grid mismatch");
  if (!(h.grid() == g)) h = VectorField3(g);
  const int nx = g.n[0], ny = g.n[1], nz = g.n[2];

  std::array<std::vector<std::complex<double>>, 3> mhat;
  std::vector<double> buf(im.nreal);
  for (int c = 0; c < 3; ++c) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) buf[im.real_index(i, j, k)] = m(c, i, j, k);
    auto& out = mhat[static_cast<std::size_t>(c)];
    out.resize(im.ncomplex);
    fftw_execute_dft_r2c(im.r2c, buf.data(), reinterpret_cast<fftw_complex*>(out.data()));
  }

  const auto& K = im.khat;
  std::array<std::vector<std::complex<double>>, 3> hhat;
  for (auto& v : hhat) v.resize(im.ncomplex);
  for (std::size_t q = 0; q < im.ncomplex; ++q) {
    const std::complex<double> mx = mhat[0][q], my = mhat[1][q], mz = mhat[2][q];
    hhat[0][q] = -(K[0][q] * mx + K[3][q] * my + K[4][q] * mz);
    hhat[1][q] = -(K[3][q] * mx + K[1][q] * my + K[5][q] * mz);
    hhat[2][q] = -(K[4][q] * mx + K[5][q] * my + K[2][q] * mz);
  }

  const double scale = 1.0 / static_cast<double>(im.nreal);
  for (int c = 0; c < 3; ++c) {
    fftw_execute_dft_c2r(im.c2r, reinterpret_cast<fftw_complex*>(hhat[static_cast<std::size_t>(c)].data()),
                         buf.data());
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) h(c, i, j, k) = buf[im.real_index(i, j, k)] * scale;
  }
  fill_ghosts(h);
}

DemagTensor build_demag_tensor(const GridSpec& grid) { return DemagTensor(grid); }

VectorField3 stray_field(const DemagTensor& tensor, const VectorField3& m) {
  VectorField3 h(tensor.grid());
  tensor.apply(m, h);
  return h;
}

}  // namespace llmag
