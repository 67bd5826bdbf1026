#include "llmag/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace llmag {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// X = x^2 (1 - x)^2 and its first two derivatives.
struct Bump {
  double v, d1, d2;
};

Bump bump(double x) {
  const double y = 1.0 - x;
  return {x * x * y * y, 2.0 * x - 6.0 * x * x + 4.0 * x * x * x, 2.0 - 12.0 * x + 12.0 * x * x};
}

int cells_for(double h) {
  const double n = 1.0 / h;
  const long r = std::lround(n);
  require(r >= 1 && std::abs(n - static_cast<double>(r)) <= 1e-9 * n, "manufactured run: 1/h must be an integer");
  return static_cast<int>(r);
}

}  // namespace

ManufacturedValue manufactured_solution(int dim, double x, double y, double z, double t, double alpha) {
  require(dim == 1 || dim == 3, "manufactured_solution: dim must be 1 or 3");
  double P, lapP, gradP2;
  if (dim == 1) {
    const Bump bx = bump(x);
    P = bx.v;
    lapP = bx.d2;
    gradP2 = bx.d1 * bx.d1;
  } else {
    const Bump bx = bump(x), by = bump(y), bz = bump(z);
    P = bx.v * by.v * bz.v;
    const double px = bx.d1 * by.v * bz.v, py = bx.v * by.d1 * bz.v, pz = bx.v * by.v * bz.d1;
    lapP = bx.d2 * by.v * bz.v + bx.v * by.d2 * bz.v + bx.v * by.v * bz.d2;
    gradP2 = px * px + py * py + pz * pz;
  }
  const double cp = std::cos(P), sp = std::sin(P), st = std::sin(t), ct = std::cos(t);
  ManufacturedValue r;
  r.m = {cp * st, sp * st, ct};
  const Vec3 mt{cp * ct, sp * ct, -st};
  const Vec3 lap = (lapP * st) * Vec3{-sp, cp, 0.0} + (gradP2 * st) * Vec3{-cp, -sp, 0.0};
  const double grad2 = gradP2 * st * st;
  // m_t = alpha Lap m + alpha |grad m|^2 m - m x Lap m + f
  r.f = mt - alpha * lap - (alpha * grad2) * r.m + cross(r.m, lap);
  return r;
}

VectorField3 manufactured_field(const GridSpec& g, double t) {
  VectorField3 m(g);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const double x = g.center(0, i);
        const double y = g.active(1) ? g.center(1, j) : 0.0;
        const double z = g.active(2) ? g.center(2, k) : 0.0;
        m.set(i, j, k, manufactured_solution(g.dim, x, y, z, t, 0.0).m);
      }
  fill_ghosts(m);
  return m;
}

FieldTerms manufactured_terms(int dim, double alpha) {
  FieldTerms terms;
  terms.exchange = true;
  terms.forcing = true;
  terms.forcing_fn = [dim, alpha](double x, double y, double z, double t) {
    return manufactured_solution(dim, x, y, z, t, alpha).f;
  };
  return terms;
}

MaterialParams manufactured_params(double alpha, double beta) {
  MaterialParams p;
  p.eps = 1.0;
  p.Q = 0.0;
  p.alpha = alpha;
  p.beta = beta;
  p.validate();
  return p;
}

std::string axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::Temporal: return "temporal";
    case SweepAxis::Spatial: return "spatial";
    case SweepAxis::Coupled: return "coupled";
  }
  return "?";
}

double fit_order(const std::vector<double>& param, const std::vector<double>& err) {
  require(param.size() == err.size(), "fit_order: size mismatch");
  require(param.size() >= 3, "fit_order: at least 3 samples required");
  bool inc = true, dec = true;
  for (std::size_t i = 1; i < param.size(); ++i) {
    inc = inc && param[i] > param[i - 1];
    dec = dec && param[i] < param[i - 1];
  }
  require(inc || dec, "fit_order: refinement parameters must be strictly monotone");
  const auto n = static_cast<double>(param.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < param.size(); ++i) {
    require(param[i] > 0 && err[i] > 0, "fit_order: parameters and errors must be positive");
    const double x = std::log(param[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ErrorSample run_manufactured(const ManufacturedRun& run) {
  const int n = cells_for(run.h);
  const GridSpec g = run.dim == 1 ? GridSpec::line(n) : GridSpec::unit_cube(n);
  require(run.dim == 1 || run.dim == 3, "manufactured run: dim must be 1 or 3");
  require(run.T > 0, "manufactured run: T must be > 0");
  const double nsd = run.T / run.k;
  const long nsteps = std::lround(nsd);
  require(nsteps >= 1 && std::abs(nsd - static_cast<double>(nsteps)) <= 1e-9 * nsd,
          "manufactured run: T / k must be an integer");

  StepperConfig sc;
  sc.scheme = run.scheme;
  sc.k = run.k;
  sc.project = run.project;
  sc.form = run.form;
  sc.gmres = run.gmres;
  const auto t0 = Clock::now();
  Stepper stepper(g, manufactured_params(run.alpha, run.beta), manufactured_terms(run.dim, run.alpha), sc);
  StepState s = stepper.startup(manufactured_field(g, 0.0), 0.0);
  while (s.steps < nsteps) stepper.step(s);
  const double secs = seconds_since(t0);

  VectorField3 e = s.m_curr;
  axpy(-1.0, manufactured_field(g, static_cast<double>(nsteps) * run.k), e);
  const Norms nm = norms(e);
  ErrorSample out;
  out.k = run.k;
  out.h = run.h;
  out.linf = nm.linf;
  out.l2 = nm.l2;
  out.h1 = nm.h1;
  out.h1_face = nm.h1_face;
  out.seconds = secs;
  out.steps = nsteps;
  if (!std::isfinite(out.linf) || !std::isfinite(out.l2) || !std::isfinite(out.h1)) throw NumericalError("manufactured run: non-finite error (scheme unstable?)");
  return out;
}

void fit_report(ErrorReport& r) {
  std::vector<double> par, el, e2, eh;
  for (const auto& s : r.samples) {
    par.push_back(r.axis == SweepAxis::Spatial ? s.h : s.k);
    el.push_back(s.linf);
    e2.push_back(s.l2);
    eh.push_back(s.h1);
    if (s.h1 > 0) r.h1_variant_gap = std::max(r.h1_variant_gap, std::abs(s.h1 - s.h1_face) / s.h1);
  }
  r.pairwise.clear();
  for (std::size_t i = 1; i < par.size(); ++i) {
    const double lp = std::log(par[i] / par[i - 1]);
    r.pairwise.push_back({std::log(el[i] / el[i - 1]) / lp, std::log(e2[i] / e2[i - 1]) / lp,
                          std::log(eh[i] / eh[i - 1]) / lp});
  }
  if (par.size() >= 3) {
    r.order_linf = fit_order(par, el);
    r.order_l2 = fit_order(par, e2);
    r.order_h1 = fit_order(par, eh);
  }
}

ErrorReport convergence_study(const ConvergenceSpec& spec) {
  require(!spec.kh.empty(), "convergence_study: empty refinement list");
  ErrorReport r;
  r.scheme = spec.base.scheme;
  r.axis = spec.axis;
  r.dim = spec.base.dim;
  for (const auto& [k, h] : spec.kh) {
    ManufacturedRun run = spec.base;
    run.k = k;
    run.h = h;
    r.samples.push_back(run_manufactured(run));
  }
  fit_report(r);
  return r;
}

std::vector<std::pair<double, double>> coupled_pairs(double c, const std::vector<double>& hs) {
  std::vector<std::pair<double, double>> out;
  for (double h : hs) {
    // Round to a step that divides T = 1.
    const double k = 1.0 / std::round(1.0 / (c * std::cbrt(h * h)));
    out.emplace_back(k, h);
  }
  return out;
}

std::vector<BetaSweepEntry> beta_sweep(const ManufacturedRun& base, const std::vector<double>& betas,
                                       const std::vector<double>& alphas) {
  require(!betas.empty(), "beta_sweep: beta list is empty");
  require(!alphas.empty(), "beta_sweep: alpha list is empty");
  std::vector<BetaSweepEntry> out;
  for (double b : betas)
    for (double a : alphas) {
      ManufacturedRun run = base;
      run.beta = b;
      run.alpha = a;
      out.push_back({b, a, run_manufactured(run)});
    }
  return out;
}

double beta_sweep_spread(const std::vector<BetaSweepEntry>& entries) {
  double worst = 0.0;
  for (std::size_t i = 0; i < entries.size(); ++i)
    for (std::size_t j = i + 1; j < entries.size(); ++j) {
      const double a = entries[i].sample.linf, b = entries[j].sample.linf;
      worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), std::abs(b)));
    }
  return worst;
}

StabilityReport stability_probe(const StabilitySpec& spec) {
  spec.grid.validate();
  require(spec.beta > 0, "stability_probe: beta must be > 0");
  require(spec.n_steps >= 1 && spec.trials >= 1, "stability_probe: need at least one step and one trial");
  const GridSpec& g = spec.grid;
  const ButcherPair tab = builtin_tableau(SchemeId::SSPIMEXRK2);
  const ExplicitFn zero = [](double, const VectorField3& m, VectorField3& out) { out = VectorField3(m.grid()); };
  const double hmin = *std::min_element(g.h.begin(), g.h.begin() + g.dim);
  const double beta = spec.beta;

  auto grad_sq = [](const VectorField3& f) {
    const TensorField fg = face_gradient(f);
    return inner_product(fg, fg);
  };

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  StabilityReport rep;
  for (double ratio : spec.k_over_h2) {
    const double k = ratio * hmin * hmin;
    DiffusionOperator L(g, beta);
    for (int trial = 0; trial < spec.trials; ++trial) {
      VectorField3 m(g);
      for (int kk = 0; kk < g.n[2]; ++kk)
        for (int j = 0; j < g.n[1]; ++j)
          for (int i = 0; i < g.n[0]; ++i) m.set(i, j, kk, {uni(rng), uni(rng), uni(rng)});
      fill_ghosts(m);
      const double n0 = l2_norm(m);
      double prev_sq = n0 * n0;
      double dissipated = 0.0;
      std::vector<VectorField3> st;
      for (int step = 0; step < spec.n_steps; ++step) {
        VectorField3 next = imex_step(tab, 0.0, k, m, L, zero, &st);
        const double nsq = inner_product(next, next);
        const double gn = grad_sq(next);
        const double lhs = nsq - prev_sq + beta / 36.0 * k * grad_sq(st[1]) + beta / 6.0 * k * grad_sq(st[2]) +
                           beta / 12.0 * k * gn;
        ++rep.checks;
        rep.worst_per_step = std::max(rep.worst_per_step, lhs);
        if (nsq > prev_sq + spec.tol) ++rep.norm_increases;
        if (lhs > spec.tol) {
          ++rep.per_step_violations;
          if (rep.first_violation.empty()) {
            std::ostringstream os;
            os << "per-step inequality violated: k/h^2=" << ratio << " trial=" << trial << " step=" << step
               << " lhs=" << lhs;
            rep.first_violation = os.str();
          }
        }
        dissipated += beta / 12.0 * k * gn;
        prev_sq = nsq;
        m = std::move(next);
      }
      const double cum = std::sqrt(prev_sq) + std::sqrt(dissipated) - n0;
      const double cum_sq = prev_sq + dissipated - n0 * n0;
      rep.worst_cumulative = std::max(rep.worst_cumulative, cum);
      rep.worst_cumulative_sq = std::max(rep.worst_cumulative_sq, cum_sq);
      if (cum > spec.tol) {
        ++rep.cumulative_violations;
        if (rep.first_violation.empty()) {
          std::ostringstream os;
          os << "cumulative bound violated: k/h^2=" << ratio << " trial=" << trial << " excess=" << cum;
          rep.first_violation = os.str();
        }
      }
      if (cum_sq > spec.tol) ++rep.cumulative_sq_violations;
    }
  }
  return rep;
}

std::optional<double> EfficiencyCurve::time_at_error(double err) const {
  std::vector<ErrorSample> s = samples;
  std::sort(s.begin(), s.end(), [](const ErrorSample& a, const ErrorSample& b) { return a.linf > b.linf; });
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double e0 = s[i - 1].linf, e1 = s[i].linf;
    if (e0 >= err && e1 <= err) {
      if (e0 == e1) return s[i].seconds;
      const double w = std::log(err / e0) / std::log(e1 / e0);
      return std::exp(std::log(s[i - 1].seconds) + w * (std::log(s[i].seconds) - std::log(s[i - 1].seconds)));
    }
  }
  return std::nullopt;
}

std::vector<EfficiencyCurve> efficiency_bench(const EfficiencySpec& spec) {
  require(!spec.schemes.empty(), "efficiency_bench: no schemes");
  require(!spec.ks.empty(), "efficiency_bench: no step sizes");
  std::vector<EfficiencyCurve> out;
  for (SchemeId id : spec.schemes) {
    EfficiencyCurve c;
    c.scheme = id;
    for (double k : spec.ks) {
      ManufacturedRun run;
      run.scheme = id;
      run.dim = spec.dim;
      run.h = spec.h;
      run.k = k;
      run.T = spec.T;
      run.alpha = spec.alpha;
      run.beta = spec.beta;
      run.gmres = spec.gmres;
      ErrorSample best = run_manufactured(run);
      for (int r = 1; r < spec.repeats; ++r) {
        const ErrorSample again = run_manufactured(run);
        best.seconds = std::min(best.seconds, again.seconds);
      }
      c.samples.push_back(best);
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace llmag
