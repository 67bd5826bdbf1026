#pragma once

// Time integrators for m_t = L m + N(t, m) with L = beta eps Lap_h: a generic
// diagonally implicit IMEX Runge-Kutta driver, the three built-in tableaux,
// and the two BDF2 schemes with pointwise projection.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "llmag/linsolve.hpp"
#include "llmag/physics.hpp"

namespace llmag {

enum class SchemeId { IMEXRK2, IMEXRK3, SSPIMEXRK2, BDF2, BDF2LD };

std::string scheme_name(SchemeId id);
/// Accepts imexrk2|rk2, imexrk3|rk3, sspimexrk2|ssp, bdf2, bdf2ld|bdf2-ld.
SchemeId parse_scheme(const std::string& name);
inline bool is_imex(SchemeId id) { return id != SchemeId::BDF2 && id != SchemeId::BDF2LD; }

/// Paired implicit/explicit tableaux; matrices are row-major s x s.
struct ButcherPair {
  int s = 0;
  std::vector<double> c;
  std::vector<double> A_im, b_im;
  std::vector<double> A_ex, b_ex;

  double aim(int i, int j) const { return A_im[static_cast<std::size_t>(i * s + j)]; }
  double aex(int i, int j) const { return A_ex[static_cast<std::size_t>(i * s + j)]; }
  /// Last implicit row equals b_im, so the final implicit combination is the
  /// last stage value.
  bool last_row_is_bim() const;
  void validate() const;
};

ButcherPair builtin_tableau(SchemeId id);

/// The stiff linear part of the split.
class ImplicitOperator {
 public:
  virtual ~ImplicitOperator() = default;
  /// out = L in; `in` must have filled ghosts.
  virtual void apply(const VectorField3& in, VectorField3& out) const = 0;
  /// Solves (I - coeff L) x = rhs and fills the ghosts of x.
  virtual void solve(double coeff, const VectorField3& rhs, VectorField3& x) = 0;
};

/// L = c Lap_h, c = beta eps from the stepper. Keeps one Helmholtz plan per distinct coefficient.
class DiffusionOperator final : public ImplicitOperator {
 public:
  DiffusionOperator(const GridSpec& grid, double beta);
  void apply(const VectorField3& in, VectorField3& out) const override;
  void solve(double coeff, const VectorField3& rhs, VectorField3& x) override;
  double beta() const { return beta_; }
  std::size_t cached_plans() const { return plans_.size(); }

 private:
  GridSpec grid_;
  double beta_;
  std::map<double, HelmholtzPlan> plans_;
};

/// L = lambda I, for scalar amplification-factor checks.
class ScalarOperator final : public ImplicitOperator {
 public:
  explicit ScalarOperator(double lambda) : lambda_(lambda) {}
  void apply(const VectorField3& in, VectorField3& out) const override;
  void solve(double coeff, const VectorField3& rhs, VectorField3& x) override;

 private:
  double lambda_;
};

/// N(t, m) written into `out`; `m` has filled ghosts.
using ExplicitFn = std::function<void(double t, const VectorField3& m, VectorField3& out)>;

/// One step of the tableau-driven IMEX loop from (t, m). Stage i solves
///   (I - k a_ii L) m_i = m + k sum_{j<i} (A_im[i][j] L m_j + A_ex[i][j] N(t + c_j k, m_j)).
/// When `stages` is non-null it receives the stage values.
VectorField3 imex_step(const ButcherPair& tab, double t, double k, const VectorField3& m, ImplicitOperator& L,
                       const ExplicitFn& N, std::vector<VectorField3>* stages = nullptr);

/// Pointwise m / |m|. Throws NumericalError naming the cell when |m| < 1e-8.
void project(VectorField3& m);
VectorField3 projected(const VectorField3& m);

/// Which explicit right-hand side the IMEX schemes use.
enum class RhsForm { CrossProduct, Equivalent };

struct StepperConfig {
  SchemeId scheme = SchemeId::IMEXRK2;
  double k = 1e-3;
  bool project = true;  ///< IMEX schemes only; the BDF2 schemes always project
  RhsForm form = RhsForm::CrossProduct;
  GmresConfig gmres{};
  void validate() const;
};

struct StepState {
  VectorField3 m_curr;
  std::optional<VectorField3> m_prev;  ///< multistep history
  VectorField3 f_prev, f_curr;         ///< lower-order field terms at the two levels
  double t = 0.0;
  double k = 0.0;
  long steps = 0;
};

struct StepStats {
  long gmres_iters = 0;
  long gmres_solves = 0;
  double max_gmres_residual = 0.0;  ///< largest ||b - A x|| / ||b|| of the full BDF2 system
};

/// Owns the operators and scratch for one simulation. Not thread-safe;
/// independent simulations use independent instances.
class Stepper {
 public:
  Stepper(const GridSpec& grid, const MaterialParams& p, const FieldTerms& terms, const StepperConfig& cfg);

  /// Initial state at t0. BDF2 variants take one IMEX-RK2 step of size k to
  /// build the second level; IMEX schemes pass m0 through.
  StepState startup(const VectorField3& m0, double t0);
  void step(StepState& s);

  const StepperConfig& config() const { return cfg_; }
  const MaterialParams& params() const { return p_; }
  const FieldTerms& terms() const { return terms_; }
  FieldTerms& mutable_terms() { return terms_; }
  const StepStats& stats() const { return stats_; }
  /// N(t, m) as used by the IMEX schemes.
  void explicit_part(double t, const VectorField3& m, VectorField3& out) const;

 private:
  void imex(StepState& s, const ButcherPair& tab, bool do_project);
  void bdf2(StepState& s);
  void bdf2_ld(StepState& s);

  GridSpec grid_;
  MaterialParams p_;
  FieldTerms terms_;
  StepperConfig cfg_;
  DiffusionOperator diffusion_;
  std::optional<ButcherPair> tab_;
  std::optional<HelmholtzPlan> ld_plan_;
  StepStats stats_;
};

}  // namespace llmag
