#pragma once

// Effective field, stray field, free energy and the explicit right-hand
// sides of the Landau-Lifshitz equation in dimensionless form:
//   m_t = -m x h_eff - alpha m x (m x h_eff),
//   h_eff = eps Lap m - Q (m2 e2 + m3 e3) + h_s + h_e.
// Lengths are in units of L, fields in units of Ms, time in units of
// 1 / (gamma mu0 Ms).

#include <array>
#include <functional>
#include <memory>

#include "llmag/grid.hpp"

namespace llmag {

/// Gyromagnetic ratio, rad / (s T).
inline constexpr double kGyromagneticRatio = 1.76086e11;
inline constexpr double kMu0 = 4.0e-7 * 3.14159265358979323846;

struct MaterialParams {
  double eps = 1.0;     ///< C_ex / (mu0 Ms^2 L^2)
  double Q = 0.0;       ///< K_u / (mu0 Ms^2)
  double alpha = 0.01;  ///< damping
  double beta = 5.0;    ///< artificial damping, in units of eps (the stiff term is beta eps Lap m)
  // Physical constants the dimensionless values were derived from (SI).
  double Ms = 8.0e5;
  double mu0 = kMu0;
  double Cex = 1.3e-11;
  double Ku = 1.0e2;
  double L = 1.0;

  static MaterialParams from_physical(double Ms, double Cex, double Ku, double mu0, double L, double alpha,
                                      double beta);
  /// Ni80Fe20 constants: Ku = 1e2 J/m^3, Cex = 1.3e-11 J/m, Ms = 8e5 A/m.
  static MaterialParams permalloy(double L, double alpha, double beta);

  /// mu0 Ms in tesla; divides an applied field in tesla to make it dimensionless.
  double field_unit_tesla() const { return mu0 * Ms; }
  double time_unit_seconds() const { return 1.0 / (kGyromagneticRatio * mu0 * Ms); }
  /// mu0 Ms^2 / 2 in J/m^3, the prefactor of the free energy density.
  double energy_density_unit() const { return 0.5 * mu0 * Ms * Ms; }
  void validate() const;
};

struct Sym3 {
  double xx = 0, yy = 0, zz = 0, xy = 0, xz = 0, yz = 0;
  Vec3 apply(const Vec3& m) const {
    return {xx * m.x + xy * m.y + xz * m.z, xy * m.x + yy * m.y + yz * m.z, xz * m.x + yz * m.y + zz * m.z};
  }
  double trace() const { return xx + yy + zz; }
};

/// Demagnetizing factors of a uniformly magnetized rectangular prism with
/// edges (a, b, c), so that H = -N M inside on average. Trace is 1.
Sym3 prism_self_demag(double a, double b, double c);

/// Cell-averaged interaction tensor between two cells of size (dx, dy, dz)
/// whose centers are separated by (x, y, z): the average field in the target
/// cell is -N m_source. Evaluated in extended precision from the analytic
/// prism formulas.
Sym3 newell_tensor(double x, double y, double z, double dx, double dy, double dz);

/// Spectral demag kernel on the zero-padded grid. Immutable once built and
/// shareable across concurrent evaluations.
class DemagTensor {
 public:
  explicit DemagTensor(const GridSpec& grid);
  ~DemagTensor();
  DemagTensor(DemagTensor&&) noexcept;
  DemagTensor& operator=(DemagTensor&&) noexcept;

  const GridSpec& grid() const;
  std::array<int, 3> padded() const;
  /// Real-space tensor for the cell offset (di, dj, dk).
  Sym3 real_space(int di, int dj, int dk) const;
  /// Largest |imag| / max|real| seen when transforming the kernel; the
  /// exact transform is real by the kernel's parity.
  double kernel_imag_ratio() const;

  void apply(const VectorField3& m, VectorField3& h) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

DemagTensor build_demag_tensor(const GridSpec& grid);
VectorField3 stray_field(const DemagTensor& tensor, const VectorField3& m);

using ForcingFn = std::function<Vec3(double x, double y, double z, double t)>;

struct FieldTerms {
  bool exchange = true;
  bool anisotropy = false;
  bool demag = false;
  bool zeeman = false;
  bool forcing = false;
  Vec3 h_ext{};  ///< dimensionless applied field
  ForcingFn forcing_fn;
  std::shared_ptr<const DemagTensor> demag_tensor;

  void validate() const;
};

/// f = -Q (m2 e2 + m3 e3) + h_s + h_e, each term gated by its toggle. The
/// manufactured forcing is not part of f.
void assemble_f(const VectorField3& m, const MaterialParams& p, const FieldTerms& terms, double t,
                VectorField3& out);
VectorField3 assemble_f(const VectorField3& m, const MaterialParams& p, const FieldTerms& terms, double t);

/// eps Lap_h m + f. Requires filled ghosts.
VectorField3 effective_field(const VectorField3& m, const MaterialParams& p, const FieldTerms& terms, double t);

/// Explicit part of the artificially damped split:
///   -m x (eps Lap m + f) - alpha m x (m x (eps Lap m + f)) - beta eps Lap m [+ forcing].
void rhs_full(double t, const VectorField3& m, const MaterialParams& p, const FieldTerms& terms,
              VectorField3& out);
VectorField3 rhs_full(double t, const VectorField3& m, const MaterialParams& p, const FieldTerms& terms);

/// Unit-length equivalent form
///   alpha (eps Lap m + f) + alpha (eps |grad m|^2 - m.f) m - m x (eps Lap m + f) [+ forcing],
/// with the centered gradient. No artificial damping term.
void rhs_equivalent_form(double t, const VectorField3& m, const MaterialParams& p, const FieldTerms& terms,
                         VectorField3& out);
VectorField3 rhs_equivalent_form(double t, const VectorField3& m, const MaterialParams& p,
                                 const FieldTerms& terms);

/// Damping-only model with beta = alpha eps:
///   beta |A_h grad_h m|^2 m - alpha m x (m x f).
VectorField3 rhs_simplified(const VectorField3& m, const MaterialParams& p, const Vec3& f_static);

struct EnergyBreakdown {
  double exchange = 0, anisotropy = 0, demag = 0, zeeman = 0;
  double total() const { return exchange + anisotropy + demag + zeeman; }
};

/// Dimensionless free energy h^d sum(eps |grad m|^2 + Q (m2^2 + m3^2) - h_s.m - 2 h_e.m),
/// i.e. the physical energy divided by mu0 Ms^2 / 2 and by L^d. The exchange
/// term uses the face-difference gradient, whose variation is exactly
/// -2 eps Lap_h m. Fills the ghosts of a copy of m.
EnergyBreakdown total_energy(const VectorField3& m, const MaterialParams& p, const FieldTerms& terms);

/// out = -m x H - alpha m x (m x H), pointwise.
void ll_torque(const VectorField3& m, const VectorField3& heff, double alpha, VectorField3& out);
/// Mean of m over the interior cells.
Vec3 mean_magnetization(const VectorField3& m);

namespace serial {
void ll_torque(const VectorField3& m, const VectorField3& heff, double alpha, VectorField3& out);
}

}  // namespace llmag
