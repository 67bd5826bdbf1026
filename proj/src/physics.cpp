#include <cmath>
#include <string>
#include <vector>

#include "llmag/physics.hpp"

namespace llmag {

MaterialParams MaterialParams::from_physical(double Ms, double Cex, double Ku, double mu0, double L, double alpha,
                                             double beta) {
  require(Ms > 0, "material: Ms must be positive");
  require(Cex >= 0, "material: Cex must be >= 0");
  require(Ku >= 0, "material: Ku must be >= 0");
  require(mu0 > 0, "material: mu0 must be positive");
  require(L > 0, "material: L must be positive");
  MaterialParams p;
  p.Ms = Ms;
  p.Cex = Cex;
  p.Ku = Ku;
  p.mu0 = mu0;
  p.L = L;
  p.alpha = alpha;
  p.beta = beta;
  p.eps = Cex / (mu0 * Ms * Ms * L * L);
  p.Q = Ku / (mu0 * Ms * Ms);
  p.validate();
  return p;
}

MaterialParams MaterialParams::permalloy(double L, double alpha, double beta) {
  return from_physical(8.0e5, 1.3e-11, 1.0e2, kMu0, L, alpha, beta);
}

void MaterialParams::validate() const {
  require(std::isfinite(eps) && eps >= 0, "material: eps must be finite and >= 0");
  require(std::isfinite(Q) && Q >= 0, "material: Q must be finite and >= 0");
  require(std::isfinite(alpha) && alpha > 0, "material: alpha must be > 0");
  require(std::isfinite(beta) && beta >= 0, "material: beta must be >= 0");
}

void FieldTerms::validate() const {
  require(!(forcing && demag), "field terms: forcing and demag are mutually exclusive");
  require(!forcing || static_cast<bool>(forcing_fn), "field terms: forcing enabled without a forcing function");
  require(!demag || demag_tensor != nullptr, "field terms: demag enabled without a demag tensor");
}

namespace {

// Pointwise loop over interior cells; parallel over (j, k) rows.
template <class F>
void for_cells(const GridSpec& g, F&& body) {
  const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
#pragma omp parallel for collapse(2) schedule(static)
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) body(i, j, k);
}

Vec3 cell_center(const GridSpec& g, int i, int j, int k) {
  return {g.center(0, i), g.active(1) ? g.center(1, j) : 0.0, g.active(2) ? g.center(2, k) : 0.0};
}

void add_forcing(const FieldTerms& terms, double t, VectorField3& out) {
  if (!terms.forcing) return;
  const GridSpec& g = out.grid();
  const ForcingFn& fn = terms.forcing_fn;
  for_cells(g, [&](int i, int j, int k) {
    const Vec3 x = cell_center(g, i, j, k);
    out.set(i, j, k, out.get(i, j, k) + fn(x.x, x.y, x.z, t));
  });
}

// eps Lap m + f; `lap` receives Lap m.
void field_and_laplacian(const VectorField3& m, const MaterialParams& p, const FieldTerms& terms, double t,
                         VectorField3& h, VectorField3& lap) {
  laplacian(m, lap);
  assemble_f(m, p, terms, t, h);
  if (terms.exchange) axpy(p.eps, lap, h);
}

}  // namespace

void assemble_f(const VectorField3& m, const MaterialParams& p, const FieldTerms& terms, double t,
                VectorField3& out) {
  (void)t;
  terms.validate();
  const GridSpec& g = m.grid();
  if (terms.demag) {
    require(terms.demag_tensor->grid() == g, "assemble_f: demag tensor grid mismatch");
    terms.demag_tensor->apply(m, out);
  } else {
    out = VectorField3(g);
  }
  if (!terms.anisotropy && !terms.zeeman) return;
  const double q = terms.anisotropy ? p.Q : 0.0;
  const Vec3 he = terms.zeeman ? terms.h_ext : Vec3{};
  for_cells(g, [&](int i, int j, int k) {
    const Vec3 mv = m.get(i, j, k);
    out.set(i, j, k, out.get(i, j, k) + Vec3{0.0, -q * mv.y, -q * mv.z} + he);
  });
  fill_ghosts(out);
}

VectorField3 assemble_f(const VectorField3& m, const MaterialParams& p, const FieldTerms& terms, double t) {
  VectorField3 out(m.grid());
  assemble_f(m, p, terms, t, out);
  return out;
}

VectorField3 effective_field(const VectorField3& m, const MaterialParams& p, const FieldTerms& terms, double t) {
  VectorField3 h(m.grid()), lap(m.grid());
  field_and_laplacian(m, p, terms, t, h, lap);
  return h;
}

void rhs_full(double t, const VectorField3& m, const MaterialParams& p, const FieldTerms& terms,
              VectorField3& out) {
  const GridSpec& g = m.grid();
  VectorField3 h(g), lap(g);
  field_and_laplacian(m, p, terms, t, h, lap);
  if (!(out.grid() == g)) out = VectorField3(g);
  const double alpha = p.alpha, beta = p.beta * p.eps;
  for_cells(g, [&](int i, int j, int k) {
    const Vec3 mv = m.get(i, j, k);
    const Vec3 hv = h.get(i, j, k);
    const Vec3 mxh = cross(mv, hv);
    out.set(i, j, k, -mxh - alpha * cross(mv, mxh) - beta * lap.get(i, j, k));
  });
  add_forcing(terms, t, out);
}

VectorField3 rhs_full(double t, const VectorField3& m, const MaterialParams& p, const FieldTerms& terms) {
  VectorField3 out(m.grid());
  rhs_full(t, m, p, terms, out);
  return out;
}

void rhs_equivalent_form(double t, const VectorField3& m, const MaterialParams& p, const FieldTerms& terms,
                         VectorField3& out) {
  const GridSpec& g = m.grid();
  VectorField3 f(g), lap(g);
  laplacian(m, lap);
  assemble_f(m, p, terms, t, f);
  VectorField3 h = f;
  if (terms.exchange) axpy(p.eps, lap, h);
  std::vector<double> gsq(g.cells(), 0.0);
  if (terms.exchange) gradient_sq(m, gsq);
  if (!(out.grid() == g)) out = VectorField3(g);
  const double alpha = p.alpha, eps = terms.exchange ? p.eps : 0.0;
  const int nx = g.n[0], ny = g.n[1];
  for_cells(g, [&](int i, int j, int k) {
    const Vec3 mv = m.get(i, j, k);
    const Vec3 hv = h.get(i, j, k);
    const std::size_t q = (static_cast<std::size_t>(k) * static_cast<std::size_t>(ny) + static_cast<std::size_t>(j)) *
                              static_cast<std::size_t>(nx) +
                          static_cast<std::size_t>(i);
    const double s = eps * gsq[q] - dot(mv, f.get(i, j, k));
    out.set(i, j, k, alpha * hv + (alpha * s) * mv - cross(mv, hv));
  });
  add_forcing(terms, t, out);
}

VectorField3 rhs_equivalent_form(double t, const VectorField3& m, const MaterialParams& p,
                                 const FieldTerms& terms) {
  VectorField3 out(m.grid());
  rhs_equivalent_form(t, m, p, terms, out);
  return out;
}

VectorField3 rhs_simplified(const VectorField3& m, const MaterialParams& p, const Vec3& f_static) {
  const GridSpec& g = m.grid();
  const TensorField ag = avg_gradient(m);
  VectorField3 out(g);
  const double alpha = p.alpha, beta = p.beta;
  for_cells(g, [&](int i, int j, int k) {
    const double* a = ag.raw().data() + 9 * ag.cell(i, j, k);
    double s = 0.0;
    for (int q = 0; q < 9; ++q) s += a[q] * a[q];
    const Vec3 mv = m.get(i, j, k);
    out.set(i, j, k, (beta * s) * mv - alpha * cross(mv, cross(mv, f_static)));
  });
  return out;
}

EnergyBreakdown total_energy(const VectorField3& m_in, const MaterialParams& p, const FieldTerms& terms) {
  terms.validate();
  VectorField3 m = m_in;
  fill_ghosts(m);
  const GridSpec& g = m.grid();
  const double vol = g.cell_volume();
  EnergyBreakdown e;
  if (terms.exchange) {
    const TensorField fg = face_gradient(m);
    e.exchange = p.eps * inner_product(fg, fg);
  }
  VectorField3 hs;
  if (terms.demag) hs = stray_field(*terms.demag_tensor, m);
  double an = 0.0, dm = 0.0, ze = 0.0;
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const Vec3 mv = m.get(i, j, k);
        an += mv.y * mv.y + mv.z * mv.z;
        if (terms.demag) dm -= dot(hs.get(i, j, k), mv);
        ze -= 2.0 * dot(terms.h_ext, mv);
      }
  if (terms.anisotropy) e.anisotropy = p.Q * vol * an;
  if (terms.demag) e.demag = vol * dm;
  if (terms.zeeman) e.zeeman = vol * ze;
  return e;
}

void ll_torque(const VectorField3& m, const VectorField3& heff, double alpha, VectorField3& out) {
  const GridSpec& g = m.grid();
  require(heff.grid() == g, "ll_torque: grid mismatch");
  if (!(out.grid() == g)) out = VectorField3(g);
  for_cells(g, [&](int i, int j, int k) {
    const Vec3 mv = m.get(i, j, k);
    const Vec3 mxh = cross(mv, heff.get(i, j, k));
    out.set(i, j, k, -mxh - alpha * cross(mv, mxh));
  });
}

Vec3 mean_magnetization(const VectorField3& m) {
  const GridSpec& g = m.grid();
  Vec3 s;
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) s += m.get(i, j, k);
  return (1.0 / static_cast<double>(g.cells())) * s;
}

namespace serial {

void ll_torque(const VectorField3& m, const VectorField3& heff, double alpha, VectorField3& out) {
  const GridSpec& g = m.grid();
  require(heff.grid() == g, "ll_torque: grid mismatch");
  if (!(out.grid() == g)) out = VectorField3(g);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const Vec3 mv = m.get(i, j, k);
        const Vec3 mxh = cross(mv, heff.get(i, j, k));
        out.set(i, j, k, -mxh - alpha * cross(mv, mxh));
      }
}

}  // namespace serial

}  // namespace llmag
