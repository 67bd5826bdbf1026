// Relaxation to steady states and the field-sweep hysteresis protocol.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "llmag/experiments.hpp"

namespace llmag {

std::string initial_state_name(InitialState s) {
  switch (s) {
    case InitialState::Landau: return "landau";
    case InitialState::CState: return "c_state";
    case InitialState::SState: return "s_state";
    case InitialState::Uniform: return "uniform";
  }
  return "?";
}

InitialState parse_initial_state(const std::string& s) {
  if (s == "landau") return InitialState::Landau;
  if (s == "c_state" || s == "c" || s == "cstate") return InitialState::CState;
  if (s == "s_state" || s == "s" || s == "sstate") return InitialState::SState;
  if (s == "uniform") return InitialState::Uniform;
  throw ValidationError("unknown initial state '" + s + "' (expected landau, c_state, s_state, uniform)");
}

VectorField3 initial_state(const GridSpec& g, InitialState kind, const Vec3& uniform_dir) {
  require(g.dim == 3, "initial_state: grid must be three-dimensional");
  VectorField3 m(g);
  // Long axis is y when ly >= lx; the end domains tilt along the short axis.
  const double lx = g.extent[0], ly = g.extent[1];
  const bool y_long = ly >= lx;
  const double theta0 = std::numbers::pi / 3.0;
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const double u = 2.0 * g.center(0, i) / lx - 1.0;  // [-1, 1] across x
        const double v = 2.0 * g.center(1, j) / ly - 1.0;  // [-1, 1] across y
        const double s = y_long ? v : u;                    // along the long axis
        Vec3 val;
        switch (kind) {
          case InitialState::Uniform: val = uniform_dir; break;
          case InitialState::CState:
          case InitialState::SState: {
            // C: the two ends tilt to opposite sides; S: to the same side.
            const double th = kind == InitialState::CState ? theta0 * s : theta0 * std::abs(s);
            val = y_long ? Vec3{std::sin(th), std::cos(th), 0.0} : Vec3{std::cos(th), std::sin(th), 0.0};
            break;
          }
          case InitialState::Landau: {
            // Flux closure: edge-parallel domains split along the diagonals,
            // counter-clockwise, with a soft out-of-plane core.
            const double ax = std::abs(u) * lx, ay = std::abs(v) * ly;
            if (ax >= ay)
              val = {0.0, u >= 0 ? 1.0 : -1.0, 0.0};
            else
              val = {v >= 0 ? -1.0 : 1.0, 0.0, 0.0};
            const double r2 = (u * lx * 0.5) * (u * lx * 0.5) + (v * ly * 0.5) * (v * ly * 0.5);
            const double rc = 2.0 * std::max(g.h[0], g.h[1]);
            val.z = 2.0 * std::exp(-r2 / (rc * rc));
            break;
          }
        }
        const double n = norm(val);
        require(n > 0, "initial_state: zero direction");
        m.set(i, j, k, (1.0 / n) * val);
      }
  fill_ghosts(m);
  return m;
}

bool energy_converged(double e_prev, double e_next, double tol) {
  const double d = std::abs(e_next - e_prev);
  if (std::abs(e_prev) < 1e-12) return d < 1e-15;
  return d / std::abs(e_prev) < tol;
}

namespace {

void check_finite(const VectorField3& m, long step) {
  for (double v : m.raw())
    if (!std::isfinite(v)) throw NumericalError("relax: non-finite magnetization at step " + std::to_string(step));
}

}  // namespace

RelaxResult relax(const SimConfig& cfg, const VectorField3& m0, const Vec3& h_ext,
                  std::shared_ptr<const DemagTensor> tensor) {
  require(cfg.grid.dim == 3, "relax: grid must be three-dimensional");
  require(m0.grid() == cfg.grid, "relax: initial state grid mismatch");
  require(cfg.steady_tol > 0, "relax: steady_tol must be > 0");
  require(cfg.max_steps >= 1 && cfg.record_every >= 1 && cfg.nan_check_every >= 1, "relax: step counts must be >= 1");
  if (!tensor) tensor = std::make_shared<DemagTensor>(cfg.grid);
  FieldTerms terms;
  terms.exchange = true;
  terms.anisotropy = cfg.anisotropy;
  terms.demag = true;
  terms.demag_tensor = tensor;
  terms.zeeman = true;
  terms.h_ext = h_ext;

  StepperConfig sc;
  sc.scheme = cfg.scheme;
  sc.k = cfg.k_dimless();
  sc.project = cfg.project;
  Stepper stepper(cfg.grid, cfg.params, terms, sc);
  StepState s = stepper.startup(m0, 0.0);

  RelaxResult r;
  double e_prev = total_energy(s.m_curr, cfg.params, terms).total();
  r.trace.push_back({s.steps, s.t, total_energy(s.m_curr, cfg.params, terms)});
  while (s.steps < cfg.max_steps) {
    stepper.step(s);
    const EnergyBreakdown e = total_energy(s.m_curr, cfg.params, terms);
    if (s.steps % cfg.nan_check_every == 0 || !std::isfinite(e.total())) check_finite(s.m_curr, s.steps);
    if (s.steps % cfg.record_every == 0) r.trace.push_back({s.steps, s.t, e});
    const bool done = s.steps >= cfg.min_steps && energy_converged(e_prev, e.total(), cfg.steady_tol);
    e_prev = e.total();
    if (done) {
      r.converged = true;
      if (r.trace.back().step != s.steps) r.trace.push_back({s.steps, s.t, e});
      break;
    }
  }
  check_finite(s.m_curr, s.steps);
  r.steps = s.steps;
  r.final_energy = e_prev;
  r.m = std::move(s.m_curr);
  return r;
}

double max_energy_increase(const std::vector<EnergyRecord>& trace, double skip_fraction) {
  if (trace.size() < 2) return 0.0;
  const long last = trace.back().step;
  const auto skip = static_cast<long>(std::ceil(skip_fraction * static_cast<double>(last)));
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i - 1].step < skip) continue;
    worst = std::max(worst, trace[i].e.total() - trace[i - 1].e.total());
  }
  return worst;
}

void LoopConfig::validate() const {
  require(n_steps >= 2, "loop: n_steps must be >= 2");
  require(steady_tol > 0, "loop: steady_tol must be > 0");
  require(h_max_mT > 0, "loop: h_max_mT must be > 0");
  require(max_steps_per_field >= 1, "loop: max_steps_per_field must be >= 1");
}

Vec3 loop_direction(const LoopConfig& cfg) {
  const double a = cfg.canting_deg * std::numbers::pi / 180.0;
  if (cfg.field_axis == LoopAxis::X) return {std::cos(a), std::sin(a), 0.0};
  return {std::sin(a), std::cos(a), 0.0};
}

double coercive_field(const std::vector<LoopSample>& b, LoopAxis axis) {
  const int c = axis == LoopAxis::X ? 0 : 1;
  for (std::size_t i = 1; i < b.size(); ++i) {
    const double m0 = b[i - 1].mean[c], m1 = b[i].mean[c];
    if (m0 == 0.0) return std::abs(b[i - 1].H_mT);
    if ((m0 > 0) != (m1 > 0) || m1 == 0.0) {
      const double w = m0 / (m0 - m1);
      return std::abs(b[i - 1].H_mT + w * (b[i].H_mT - b[i - 1].H_mT));
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

Vec3 remanence(const std::vector<LoopSample>& b) {
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (b[i].H_mT == 0.0) return b[i].mean;
    if (i > 0 && (b[i - 1].H_mT > 0) != (b[i].H_mT > 0)) {
      const double w = b[i - 1].H_mT / (b[i - 1].H_mT - b[i].H_mT);
      return b[i - 1].mean + w * (b[i].mean - b[i - 1].mean);
    }
  }
  return {std::numeric_limits<double>::quiet_NaN(), 0, 0};
}

LoopResult hysteresis(const LoopConfig& loop, const SimConfig& sim, const LoopProgress& progress) {
  loop.validate();
  require(sim.grid.dim == 3, "hysteresis: grid must be three-dimensional");
  const Vec3 dir = loop_direction(loop);
  auto tensor = std::make_shared<const DemagTensor>(sim.grid);
  SimConfig cfg = sim;
  cfg.steady_tol = loop.steady_tol;
  cfg.max_steps = loop.max_steps_per_field;
  const double unit_mT = sim.params.field_unit_tesla() * 1e3;

  LoopResult res;
  VectorField3 m = initial_state(sim.grid, InitialState::Uniform, dir);
  const double dH = 2.0 * loop.h_max_mT / loop.n_steps;
  for (int pass = 0; pass < 2; ++pass) {
    const bool desc = pass == 0;
    auto& branch = desc ? res.descending : res.ascending;
    for (int i = 0; i <= loop.n_steps; ++i) {
      double H = desc ? loop.h_max_mT - i * dH : -loop.h_max_mT + i * dH;
      if (std::abs(H) < 1e-12 * loop.h_max_mT) H = 0.0;
      RelaxResult r = relax(cfg, m, (H / unit_mT) * dir, tensor);
      m = std::move(r.m);
      LoopSample smp{H, mean_magnetization(m), r.steps, r.converged};
      if (!r.converged) ++res.unconverged_fields;
      branch.push_back(smp);
      if (progress) progress(smp, desc);
    }
  }
  res.coercive_desc_mT = coercive_field(res.descending, loop.field_axis);
  res.coercive_asc_mT = coercive_field(res.ascending, loop.field_axis);
  res.remanence_desc = remanence(res.descending);
  res.remanence_asc = remanence(res.ascending);
  return res;
}

}  // namespace llmag
