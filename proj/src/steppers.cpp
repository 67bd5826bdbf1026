#include "llmag/steppers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace llmag {

std::string scheme_name(SchemeId id) {
  switch (id) {
    case SchemeId::IMEXRK2: return "imexrk2";
    case SchemeId::IMEXRK3: return "imexrk3";
    case SchemeId::SSPIMEXRK2: return "sspimexrk2";
    case SchemeId::BDF2: return "bdf2";
    case SchemeId::BDF2LD: return "bdf2ld";
  }
  return "?";
}

SchemeId parse_scheme(const std::string& raw) {
  std::string s;
  for (char ch : raw)
    if (ch != '-' && ch != '_') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  if (s == "imexrk2" || s == "rk2") return SchemeId::IMEXRK2;
  if (s == "imexrk3" || s == "rk3") return SchemeId::IMEXRK3;
  if (s == "sspimexrk2" || s == "ssp") return SchemeId::SSPIMEXRK2;
  if (s == "bdf2") return SchemeId::BDF2;
  if (s == "bdf2ld") return SchemeId::BDF2LD;
  throw ValidationError("unknown scheme '" + raw + "' (expected imexrk2, imexrk3, ssp, bdf2, bdf2ld)");
}

bool ButcherPair::last_row_is_bim() const {
  for (int j = 0; j < s; ++j)
    if (aim(s - 1, j) != b_im[static_cast<std::size_t>(j)]) return false;
  return true;
}

void ButcherPair::validate() const {
  const auto ss = static_cast<std::size_t>(s);
  require(s >= 1, "tableau: no stages");
  require(c.size() == ss && b_im.size() == ss && b_ex.size() == ss, "tableau: weight vector size");
  require(A_im.size() == ss * ss && A_ex.size() == ss * ss, "tableau: matrix size");
  for (int i = 0; i < s; ++i) {
    double rim = 0.0, rex = 0.0;
    for (int j = 0; j < s; ++j) {
      if (j > i) require(aim(i, j) == 0.0, "tableau: implicit matrix must be lower triangular");
      if (j >= i) require(aex(i, j) == 0.0, "tableau: explicit matrix must be strictly lower triangular");
      rim += aim(i, j);
      rex += aex(i, j);
    }
    require(rim <= 1.0 + 1e-12 && rex <= 1.0 + 1e-12, "tableau: row sum exceeds 1");
    require(aim(i, i) >= 0.0, "tableau: negative diagonal coefficient");
  }
}

ButcherPair builtin_tableau(SchemeId id) {
  ButcherPair t;
  switch (id) {
    case SchemeId::IMEXRK2:
      t.s = 3;
      t.c = {0.0, 0.5, 1.0};
      t.A_im = {0.0, 0.0, 0.0,  //
                0.0, 0.5, 0.0,  //
                0.5, 0.0, 0.5};
      t.b_im = {0.5, 0.0, 0.5};
      t.A_ex = {0.0, 0.0, 0.0,  //
                0.5, 0.0, 0.0,  //
                0.0, 1.0, 0.0};
      t.b_ex = {0.0, 1.0, 0.0};
      break;
    case SchemeId::IMEXRK3:
      t.s = 5;
      t.c = {0.0, 0.5, 2.0 / 3.0, 0.5, 1.0};
      t.A_im = {0.0, 0.0,       0.0,        0.0, 0.0,  //
                0.0, 0.5,       0.0,        0.0, 0.0,  //
                0.0, 1.0 / 6.0, 0.5,        0.0, 0.0,  //
                0.0, -0.5,      0.5,        0.5, 0.0,  //
                0.0, 1.5,       -1.5,       0.5, 0.5};
      t.b_im = {0.0, 1.5, -1.5, 0.5, 0.5};
      t.A_ex = {0.0,         0.0,        0.0,  0.0,   0.0,  //
                0.5,         0.0,        0.0,  0.0,   0.0,  //
                11.0 / 18.0, 1.0 / 18.0, 0.0,  0.0,   0.0,  //
                5.0 / 6.0,   -5.0 / 6.0, 0.5,  0.0,   0.0,  //
                0.25,        1.75,       0.75, -1.75, 0.0};
      t.b_ex = {0.25, 1.75, 0.75, -1.75, 0.0};
      break;
    case SchemeId::SSPIMEXRK2:
      t.s = 4;
      // Stage times from the explicit row sums.
      t.c = {0.0, 0.0, 0.5, 1.0};
      t.A_im = {0.0, 0.0,       0.0,       0.0,  //
                0.0, 0.25,      0.0,       0.0,  //
                0.0, 0.0,       0.25,      0.0,  //
                0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
      t.b_im = {0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
      t.A_ex = {0.0, 0.0, 0.0, 0.0,  //
                0.0, 0.0, 0.0, 0.0,  //
                0.0, 0.5, 0.0, 0.0,  //
                0.0, 0.5, 0.5, 0.0};
      t.b_ex = {0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
      break;
    default:
      throw ValidationError("builtin_tableau: " + scheme_name(id) + " is not an IMEX scheme");
  }
  return t;
}

// ---------------------------------------------------------------------------

DiffusionOperator::DiffusionOperator(const GridSpec& grid, double beta) : grid_(grid), beta_(beta) {
  require(beta >= 0.0, "diffusion operator: beta must be >= 0");
}

void DiffusionOperator::apply(const VectorField3& in, VectorField3& out) const {
  laplacian(in, out);
  scale(beta_, out);
}

void DiffusionOperator::solve(double coeff, const VectorField3& rhs, VectorField3& x) {
  const double lambda = coeff * beta_;
  if (lambda == 0.0) {
    x = rhs;
    fill_ghosts(x);
    return;
  }
  auto it = plans_.find(lambda);
  if (it == plans_.end()) it = plans_.emplace(lambda, HelmholtzPlan(grid_, lambda)).first;
  it->second.solve(rhs, x);
}

void ScalarOperator::apply(const VectorField3& in, VectorField3& out) const {
  out = in;
  scale(lambda_, out);
}

void ScalarOperator::solve(double coeff, const VectorField3& rhs, VectorField3& x) {
  x = rhs;
  scale(1.0 / (1.0 - coeff * lambda_), x);
}

VectorField3 imex_step(const ButcherPair& tab, double t, double k, const VectorField3& m, ImplicitOperator& L,
                       const ExplicitFn& N, std::vector<VectorField3>* stages) {
  const int s = tab.s;
  const GridSpec& g = m.grid();
  if (k == 0.0) {
    VectorField3 out = m;
    fill_ghosts(out);
    if (stages) stages->assign(static_cast<std::size_t>(s), out);
    return out;
  }
  std::vector<VectorField3> mt(static_cast<std::size_t>(s));
  std::vector<VectorField3> Lm(static_cast<std::size_t>(s)), Nm(static_cast<std::size_t>(s));

  // Which stage evaluations are ever consumed.
  auto needs_L = [&](int j) {
    for (int i = j + 1; i < s; ++i)
      if (tab.aim(i, j) != 0.0) return true;
    return !tab.last_row_is_bim() && tab.b_im[static_cast<std::size_t>(j)] != 0.0;
  };
  auto needs_N = [&](int j) {
    for (int i = j + 1; i < s; ++i)
      if (tab.aex(i, j) != 0.0) return true;
    return tab.b_ex[static_cast<std::size_t>(j)] != 0.0;
  };

  VectorField3 rhs(g);
  for (int i = 0; i < s; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    rhs = m;
    for (int j = 0; j < i; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      if (tab.aim(i, j) != 0.0) axpy(k * tab.aim(i, j), Lm[uj], rhs);
      if (tab.aex(i, j) != 0.0) axpy(k * tab.aex(i, j), Nm[uj], rhs);
    }
    const double aii = tab.aim(i, i);
    if (aii != 0.0) {
      L.solve(k * aii, rhs, mt[ui]);
    } else {
      mt[ui] = rhs;
      fill_ghosts(mt[ui]);
    }
    if (needs_L(i)) L.apply(mt[ui], Lm[ui]);
    if (needs_N(i)) {
      if (!(Nm[ui].grid() == g) || Nm[ui].size() == 0) Nm[ui] = VectorField3(g);
      N(t + tab.c[ui] * k, mt[ui], Nm[ui]);
    }
  }

  VectorField3 out;
  if (tab.last_row_is_bim()) {
    out = mt[static_cast<std::size_t>(s - 1)];
    for (int j = 0; j < s; ++j) {
      const double w = tab.b_ex[static_cast<std::size_t>(j)] - tab.aex(s - 1, j);
      if (w != 0.0) axpy(k * w, Nm[static_cast<std::size_t>(j)], out);
    }
  } else {
    out = m;
    for (int j = 0; j < s; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      if (tab.b_im[uj] != 0.0) axpy(k * tab.b_im[uj], Lm[uj], out);
      if (tab.b_ex[uj] != 0.0) axpy(k * tab.b_ex[uj], Nm[uj], out);
    }
  }
  fill_ghosts(out);
  if (stages) *stages = std::move(mt);
  return out;
}

void project(VectorField3& m) {
  const GridSpec& g = m.grid();
  const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
  long bad = -1;
#pragma omp parallel for collapse(2) schedule(static) reduction(max : bad)
  for (int kk = 0; kk < nz; ++kk)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const Vec3 v = m.get(i, j, kk);
        const double len = norm(v);
        if (!(len >= 1e-8)) {
          bad = std::max(bad, (static_cast<long>(kk) * ny + j) * nx + i);
          continue;
        }
        m.set(i, j, kk, (1.0 / len) * v);
      }
  if (bad >= 0) {
    std::ostringstream os;
    os << "project: near-zero or non-finite magnetization at cell (" << bad % nx << ", " << (bad / nx) % ny << ", "
       << bad / (static_cast<long>(nx) * ny) << ")";
    throw NumericalError(os.str());
  }
  fill_ghosts(m);
}

VectorField3 projected(const VectorField3& m) {
  VectorField3 out = m;
  project(out);
  return out;
}

// ---------------------------------------------------------------------------

void StepperConfig::validate() const {
  require(std::isfinite(k) && k > 0.0, "scheme: k must be > 0");
  gmres.validate();
}

Stepper::Stepper(const GridSpec& grid, const MaterialParams& p, const FieldTerms& terms, const StepperConfig& cfg)
    : grid_(grid), p_(p), terms_(terms), cfg_(cfg), diffusion_(grid, p.beta * p.eps) {
  grid.validate();
  p.validate();
  terms.validate();
  cfg.validate();
  if (is_imex(cfg.scheme)) {
    tab_ = builtin_tableau(cfg.scheme);
  } else {
    tab_ = builtin_tableau(SchemeId::IMEXRK2);  // startup
    if (cfg.scheme == SchemeId::BDF2LD) ld_plan_.emplace(grid, 2.0 / 3.0 * p.alpha * p.eps * cfg.k);
  }
}

void Stepper::explicit_part(double t, const VectorField3& m, VectorField3& out) const {
  if (cfg_.form == RhsForm::Equivalent) {
    rhs_equivalent_form(t, m, p_, terms_, out);
    VectorField3 lap(grid_);
    laplacian(m, lap);
    axpy(-p_.beta * p_.eps, lap, out);
  } else {
    rhs_full(t, m, p_, terms_, out);
  }
}

StepState Stepper::startup(const VectorField3& m0, double t0) {
  require(m0.grid() == grid_, "startup: grid mismatch");
  StepState s;
  s.m_curr = m0;
  fill_ghosts(s.m_curr);
  s.t = t0;
  s.k = cfg_.k;
  if (is_imex(cfg_.scheme)) return s;

  s.f_prev = assemble_f(s.m_curr, p_, terms_, t0);
  StepState tmp = s;
  imex(tmp, *tab_, true);
  s.m_prev = std::move(s.m_curr);
  s.m_curr = std::move(tmp.m_curr);
  s.t = tmp.t;
  s.steps = 1;
  s.f_curr = assemble_f(s.m_curr, p_, terms_, s.t);
  return s;
}

void Stepper::step(StepState& s) {
  switch (cfg_.scheme) {
    case SchemeId::BDF2: bdf2(s); break;
    case SchemeId::BDF2LD: bdf2_ld(s); break;
    default: imex(s, *tab_, cfg_.project); break;
  }
}

void Stepper::imex(StepState& s, const ButcherPair& tab, bool do_project) {
  ExplicitFn N = [this](double t, const VectorField3& m, VectorField3& out) { explicit_part(t, m, out); };
  s.m_curr = imex_step(tab, s.t, cfg_.k, s.m_curr, diffusion_, N);
  if (do_project) project(s.m_curr);
  s.t += cfg_.k;
  ++s.steps;
}

namespace {

void add_forcing_at(const FieldTerms& terms, double t, double k, VectorField3& b) {
  if (!terms.forcing) return;
  const GridSpec& g = b.grid();
  for (int kk = 0; kk < g.n[2]; ++kk)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const double x = g.center(0, i);
        const double y = g.active(1) ? g.center(1, j) : 0.0;
        const double z = g.active(2) ? g.center(2, kk) : 0.0;
        b.set(i, j, kk, b.get(i, j, kk) + k * terms.forcing_fn(x, y, z, t));
      }
}

void require_history(const StepState& s) {
  if (!s.m_prev) throw ValidationError("BDF2 step: missing history level (call startup first)");
}

}  // namespace

void Stepper::bdf2(StepState& s) {
  require_history(s);
  const double k = cfg_.k, eps = p_.eps, alpha = p_.alpha;
  const GridSpec& g = grid_;
  VectorField3 mhat(g), fhat(g);
  lincomb(2.0, s.m_curr, -1.0, *s.m_prev, mhat);
  lincomb(2.0, s.f_curr, -1.0, s.f_prev, fhat);
  fill_ghosts(mhat);

  // b = 2 m_{n+1} - m_n / 2 - k (mh x fh + alpha mh x (mh x fh)) + k forcing(t_{n+2})
  VectorField3 b(g);
  lincomb(2.0, s.m_curr, -0.5, *s.m_prev, b);
  const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
#pragma omp parallel for collapse(2) schedule(static)
  for (int kk = 0; kk < nz; ++kk)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const Vec3 mh = mhat.get(i, j, kk);
        const Vec3 mxf = cross(mh, fhat.get(i, j, kk));
        b.set(i, j, kk, b.get(i, j, kk) - k * (mxf + alpha * cross(mh, mxf)));
      }
  const double t_new = s.t + k;
  add_forcing_at(terms_, t_new, k, b);

  const double ke = k * eps;
  VectorField3 xg(g), lap(g);
  LinearOperator A = [&](const VectorField3& x, VectorField3& out) {
    xg = x;
    fill_ghosts(xg);
    laplacian(xg, lap);
    if (!(out.grid() == g)) out = VectorField3(g);
#pragma omp parallel for collapse(2) schedule(static)
    for (int kk = 0; kk < nz; ++kk)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          const Vec3 mh = mhat.get(i, j, kk);
          const Vec3 mxl = cross(mh, lap.get(i, j, kk));
          out.set(i, j, kk, 1.5 * xg.get(i, j, kk) + ke * (mxl + alpha * cross(mh, mxl)));
        }
  };

  // Solve for the correction to the extrapolated state so the tolerance
  // applies to the part GMRES actually has to find.
  VectorField3 r(g), am(g);
  A(mhat, am);
  lincomb(1.0, b, -1.0, am, r);
  // Near convergence r sits at roundoff; floor the target against b.
  GmresConfig gc = cfg_.gmres;
  gc.abs_tol = std::max(gc.abs_tol, 1e-12 * l2_norm(b));
  GmresResult res = gmres_solve(A, r, gc);
  stats_.gmres_iters += res.iters;
  ++stats_.gmres_solves;
  // reported against the full right-hand side, not the correction's
  const double bn = l2_norm(b);
  const double full_rel = bn > 0 ? res.rel_residual * l2_norm(r) / bn : 0.0;
  stats_.max_gmres_residual = std::max(stats_.max_gmres_residual, full_rel);
  if (!res.converged)
    throw NumericalError("BDF2: GMRES did not converge (" + res.diagnostic + ", rel residual " +
                         std::to_string(res.rel_residual) + ")");
  VectorField3 mt = mhat;
  axpy(1.0, res.x, mt);
  project(mt);

  s.m_prev = std::move(s.m_curr);
  s.m_curr = std::move(mt);
  s.f_prev = std::move(s.f_curr);
  s.t = t_new;
  ++s.steps;
  s.f_curr = assemble_f(s.m_curr, p_, terms_, s.t);
}

void Stepper::bdf2_ld(StepState& s) {
  require_history(s);
  const double k = cfg_.k, eps = p_.eps, alpha = p_.alpha;
  const GridSpec& g = grid_;
  VectorField3 mhat(g), fhat(g), lap(g);
  lincomb(2.0, s.m_curr, -1.0, *s.m_prev, mhat);
  lincomb(2.0, s.f_curr, -1.0, s.f_prev, fhat);
  fill_ghosts(mhat);
  laplacian(mhat, lap);
  std::vector<double> gsq(g.cells());
  gradient_sq(mhat, gsq);

  VectorField3 b(g);
  lincomb(2.0, s.m_curr, -0.5, *s.m_prev, b);
  const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
#pragma omp parallel for collapse(2) schedule(static)
  for (int kk = 0; kk < nz; ++kk)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const std::size_t q = (static_cast<std::size_t>(kk) * static_cast<std::size_t>(ny) +
                               static_cast<std::size_t>(j)) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
        const Vec3 mh = mhat.get(i, j, kk);
        const Vec3 fh = fhat.get(i, j, kk);
        const Vec3 h = eps * lap.get(i, j, kk) + fh;
        const Vec3 expl = -cross(mh, h) + alpha * fh + (alpha * (eps * gsq[q] - dot(mh, fh))) * mh;
        b.set(i, j, kk, b.get(i, j, kk) + k * expl);
      }
  const double t_new = s.t + k;
  add_forcing_at(terms_, t_new, k, b);
  scale(2.0 / 3.0, b);

  VectorField3 mt(g);
  ld_plan_->solve(b, mt);
  project(mt);

  s.m_prev = std::move(s.m_curr);
  s.m_curr = std::move(mt);
  s.f_prev = std::move(s.f_curr);
  s.t = t_new;
  ++s.steps;
  s.f_curr = assemble_f(s.m_curr, p_, terms_, s.t);
}

}  // namespace llmag
