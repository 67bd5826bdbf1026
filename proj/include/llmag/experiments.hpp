#pragma once

// Drivers for the convergence, stability, relaxation, hysteresis and
// efficiency studies.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "llmag/steppers.hpp"

namespace llmag {

// ---------------------------------------------------------------- manufactured

struct ManufacturedValue {
  Vec3 m;  ///< exact solution
  Vec3 f;  ///< forcing that makes it solve the unit-length form with eps = 1, f = 0
};

/// m_e = (cos P sin t, sin P sin t, cos t) with P = X (1-D) or X Y Z (3-D),
/// X = x^2 (1 - x)^2.
ManufacturedValue manufactured_solution(int dim, double x, double y, double z, double t, double alpha);
/// Exact field sampled at the cell centers (ghosts filled).
VectorField3 manufactured_field(const GridSpec& grid, double t);
/// Exchange only, eps = 1, forcing enabled.
FieldTerms manufactured_terms(int dim, double alpha);
MaterialParams manufactured_params(double alpha, double beta);

// ---------------------------------------------------------------- convergence

enum class SweepAxis { Temporal, Spatial, Coupled };
std::string axis_name(SweepAxis a);

struct ErrorSample {
  double k = 0, h = 0;
  double linf = 0, l2 = 0, h1 = 0;
  double h1_face = 0;  ///< H1 error with the face-difference gradient
  double seconds = 0;
  long steps = 0;
};

struct ErrorReport {
  SchemeId scheme = SchemeId::IMEXRK2;
  SweepAxis axis = SweepAxis::Temporal;
  int dim = 1;
  std::vector<ErrorSample> samples;
  double order_linf = 0, order_l2 = 0, order_h1 = 0;
  /// Successive-pair orders (linf, l2, h1) between samples i and i+1.
  std::vector<std::array<double, 3>> pairwise;
  /// Largest relative gap between the centered and face-difference H1 errors.
  double h1_variant_gap = 0;
};

/// Least-squares slope of log(err) against log(param). Needs >= 3 strictly
/// monotone positive parameters and positive errors.
double fit_order(const std::vector<double>& param, const std::vector<double>& err);

struct ManufacturedRun {
  SchemeId scheme = SchemeId::IMEXRK2;
  int dim = 1;
  double h = 0.01;
  double k = 1e-3;
  double T = 1.0;
  double alpha = 0.01;
  double beta = 5.0;
  bool project = false;
  RhsForm form = RhsForm::Equivalent;
  GmresConfig gmres{};
};

/// Integrates the manufactured problem to T (T / k rounded to an integer
/// number of steps, which must match to 1e-9) and measures the error.
ErrorSample run_manufactured(const ManufacturedRun& run);

struct ConvergenceSpec {
  ManufacturedRun base;
  SweepAxis axis = SweepAxis::Temporal;
  /// One (k, h) pair per sample; the fitted parameter is h for spatial
  /// sweeps and k otherwise.
  std::vector<std::pair<double, double>> kh;
};

ErrorReport convergence_study(const ConvergenceSpec& spec);
/// Fills orders and pairwise ratios from the samples.
void fit_report(ErrorReport& r);

/// Coupled sweep helper: k = c h^(2/3) for each h.
std::vector<std::pair<double, double>> coupled_pairs(double c, const std::vector<double>& hs);

// ---------------------------------------------------------------- beta sweep

struct BetaSweepEntry {
  double beta = 0, alpha = 0;
  ErrorSample sample;
};

/// Runs `base` once per (beta, alpha) pair.
std::vector<BetaSweepEntry> beta_sweep(const ManufacturedRun& base, const std::vector<double>& betas,
                                       const std::vector<double>& alphas);
/// Largest pairwise relative gap of the linf errors.
double beta_sweep_spread(const std::vector<BetaSweepEntry>& entries);

// ---------------------------------------------------------------- stability

struct StabilitySpec {
  GridSpec grid = GridSpec::unit_cube(8);
  double beta = 5.0;
  std::vector<double> k_over_h2{0.1, 1.0, 10.0, 100.0};
  int n_steps = 50;
  int trials = 100;
  unsigned long seed = 12345;
  double tol = 1e-10;
};

struct StabilityReport {
  long checks = 0;
  long per_step_violations = 0;
  double worst_per_step = -1e300;  ///< max of the per-step left side
  long cumulative_violations = 0;  ///< ||m_N|| + (beta/12 k sum ||grad m_j||^2)^(1/2) <= ||m_0||
  double worst_cumulative = -1e300;
  long cumulative_sq_violations = 0;  ///< ||m_N||^2 + beta/12 k sum ||grad m_j||^2 <= ||m_0||^2
  double worst_cumulative_sq = -1e300;
  long norm_increases = 0;  ///< steps where ||m||^2 grew by more than tol
  std::string first_violation;
};

/// Pure diffusion (N = 0) with the SSP scheme from uniform random fields in
/// [-1, 1]^3. Gradient norms use the face-difference gradient.
StabilityReport stability_probe(const StabilitySpec& spec);

// ---------------------------------------------------------------- relaxation

enum class InitialState { Landau, CState, SState, Uniform };
std::string initial_state_name(InitialState s);
InitialState parse_initial_state(const std::string& s);
VectorField3 initial_state(const GridSpec& grid, InitialState kind, const Vec3& uniform_dir = {0, 1, 0});

struct EnergyRecord {
  long step = 0;
  double t = 0;
  EnergyBreakdown e;
};

struct SimConfig {
  GridSpec grid = GridSpec::box(32, 64, 1, 0.5, 1.0, 0.01);
  MaterialParams params = MaterialParams::permalloy(2.0e-6, 0.1, 3.0);
  SchemeId scheme = SchemeId::IMEXRK2;
  double k = 1e-12;  ///< seconds when k_physical, else dimensionless
  bool k_physical = true;
  bool project = true;
  bool anisotropy = true;
  double steady_tol = 1e-9;
  long min_steps = 10;
  long max_steps = 200000;
  long record_every = 10;
  long nan_check_every = 100;

  double k_dimless() const { return k_physical ? k / params.time_unit_seconds() : k; }
};

/// Relative per-step energy change test with the near-zero guard.
bool energy_converged(double e_prev, double e_next, double tol);

struct RelaxResult {
  VectorField3 m;
  std::vector<EnergyRecord> trace;
  long steps = 0;
  bool converged = false;
  double final_energy = 0;
};

/// Steps until the relative energy change per step drops below steady_tol.
/// The demag tensor may be shared between runs on the same grid.
RelaxResult relax(const SimConfig& cfg, const VectorField3& m0, const Vec3& h_ext = {},
                  std::shared_ptr<const DemagTensor> tensor = nullptr);

/// Monotonicity of a trace after the first `skip_fraction` of records:
/// returns the largest energy increase between consecutive records.
double max_energy_increase(const std::vector<EnergyRecord>& trace, double skip_fraction);

// ---------------------------------------------------------------- hysteresis

enum class LoopAxis { X, Y };

struct LoopConfig {
  LoopAxis field_axis = LoopAxis::Y;
  double canting_deg = 1.0;
  double h_max_mT = 50.0;
  int n_steps = 200;  ///< field intervals per sweep
  double steady_tol = 1e-9;
  long max_steps_per_field = 20000;
  void validate() const;
};

struct LoopSample {
  double H_mT = 0;
  Vec3 mean;
  long steps = 0;
  bool converged = false;
};

struct LoopResult {
  std::vector<LoopSample> descending, ascending;
  Vec3 remanence_desc, remanence_asc;
  double coercive_desc_mT = 0, coercive_asc_mT = 0;
  long unconverged_fields = 0;
  double coercivity() const { return 0.5 * (coercive_desc_mT + coercive_asc_mT); }
};

/// Unit field direction for the loop axis, canted in the film plane.
Vec3 loop_direction(const LoopConfig& cfg);
/// |H| at the first sign change of the loop-axis mean component, by linear
/// interpolation; NaN when the component never changes sign.
double coercive_field(const std::vector<LoopSample>& branch, LoopAxis axis);
/// Mean magnetization at H = 0, interpolated between bracketing samples.
Vec3 remanence(const std::vector<LoopSample>& branch);

using LoopProgress = std::function<void(const LoopSample&, bool descending)>;
LoopResult hysteresis(const LoopConfig& loop, const SimConfig& sim, const LoopProgress& progress = {});

// ---------------------------------------------------------------- efficiency

struct EfficiencyCurve {
  SchemeId scheme = SchemeId::IMEXRK2;
  std::vector<ErrorSample> samples;
  /// Wall time at the given linf error, log-log interpolated; nullopt when
  /// the samples do not bracket it.
  std::optional<double> time_at_error(double err) const;
};

struct EfficiencySpec {
  std::vector<SchemeId> schemes{SchemeId::IMEXRK2, SchemeId::BDF2};
  int dim = 1;
  double h = 1.0 / 200.0;
  std::vector<double> ks;
  double T = 1.0;
  double alpha = 0.01;
  double beta = 5.0;
  GmresConfig gmres{};
  int repeats = 1;  ///< best-of timing
};

std::vector<EfficiencyCurve> efficiency_bench(const EfficiencySpec& spec);

}  // namespace llmag
