#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <memory>

#include "llmag/physics.hpp"
#include "test_util.hpp"

using namespace llmag;
using testutil::max_diff;
using testutil::random_field;
using testutil::random_unit_field;

namespace {

// O(n^2) real-space stray field from the analytic cell-pair tensor.
VectorField3 direct_stray(const VectorField3& m) {
  const auto& g = m.grid();
  VectorField3 h(g);
  for (int k = 0; k < g.n[2]; ++k)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        Vec3 acc;
        for (int kk = 0; kk < g.n[2]; ++kk)
          for (int jj = 0; jj < g.n[1]; ++jj)
            for (int ii = 0; ii < g.n[0]; ++ii) {
              const Sym3 N = newell_tensor((i - ii) * g.h[0], (j - jj) * g.h[1], (k - kk) * g.h[2], g.h[0], g.h[1],
                                           g.h[2]);
              acc -= N.apply(m.get(ii, jj, kk));
            }
        h.set(i, j, k, acc);
      }
  return h;
}

FieldTerms exchange_only() {
  FieldTerms t;
  t.exchange = true;
  return t;
}

}  // namespace

TEST_CASE("self demag factors") {
  const Sym3 cube = prism_self_demag(1, 1, 1);
  CHECK(cube.xx == doctest::Approx(1.0 / 3).epsilon(1e-13));
  CHECK(cube.yy == doctest::Approx(1.0 / 3).epsilon(1e-13));
  CHECK(cube.zz == doctest::Approx(1.0 / 3).epsilon(1e-13));
  for (auto [a, b, c] : {std::array{1.0, 2.0, 0.1}, {5.0, 0.3, 0.3}, {0.02, 1.0, 1.0}, {2.0, 2.0, 2.0}}) {
    const Sym3 N = prism_self_demag(a, b, c);
    CHECK(N.trace() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(N.xy) <= 1e-14);
  }
  const Sym3 film = prism_self_demag(1, 1, 0.01);
  CHECK(film.zz > film.xx);
  CHECK(film.xx == doctest::Approx(film.yy));
  const Sym3 self = newell_tensor(0, 0, 0, 1, 1, 1);
  CHECK(self.xx == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("demag tensor: symmetry and self term") {
  const auto g = GridSpec::box(3, 4, 2, 0.3, 0.4, 0.1);
  const DemagTensor T(g);
  const Sym3 s = T.real_space(0, 0, 0);
  const Sym3 ref = prism_self_demag(g.h[0], g.h[1], g.h[2]);
  CHECK(s.xx == doctest::Approx(ref.xx).epsilon(1e-12));
  CHECK(s.zz == doctest::Approx(ref.zz).epsilon(1e-12));
  const Sym3 a = T.real_space(1, 2, 1), b = T.real_space(-1, -2, -1);
  CHECK(a.xy == doctest::Approx(b.xy));
  CHECK(a.xx == doctest::Approx(b.xx));
  CHECK(T.kernel_imag_ratio() <= 1e-10);
}

TEST_CASE("stray field: zero and single cell") {
  const auto g = GridSpec::box(4, 3, 2, 1.0, 0.75, 0.5);
  const auto T = build_demag_tensor(g);
  CHECK(testutil::max_abs(stray_field(T, VectorField3(g))) == 0.0);
  VectorField3 m(g);
  const Vec3 v{0.3, -0.5, 0.8};
  m.set(2, 1, 1, v);
  const auto h = stray_field(T, m);
  const Vec3 expect = -T.real_space(0, 0, 0).apply(v);
  const Vec3 got = h.get(2, 1, 1);
  CHECK(got.x == doctest::Approx(expect.x).epsilon(1e-12));
  CHECK(got.y == doctest::Approx(expect.y).epsilon(1e-12));
  CHECK(got.z == doctest::Approx(expect.z).epsilon(1e-12));
}

TEST_CASE("stray field: 4x4x2 direct sum") {
  const auto g = GridSpec::box(4, 4, 2, 1.0, 1.0, 0.5);
  const auto m = random_field(g, 21);
  const auto h = stray_field(build_demag_tensor(g), m);
  CHECK(max_diff(h, direct_stray(m)) <= 1e-10);
}

TEST_CASE("stray field: 4x4x1 film of cubes, m along z") {
  const auto g = GridSpec::box(4, 4, 1, 4.0, 4.0, 1.0);
  VectorField3 m(g);
  m.fill({0, 0, 1});
  const auto h = stray_field(build_demag_tensor(g), m);
  const auto ref = direct_stray(m);
  CHECK(max_diff(h, ref) <= 1e-12);
  const Vec3 c = h.get(1, 1, 0);
  // centre cells sit deeper in the film than the average cell
  CHECK(c.z == doctest::Approx(-0.7648).epsilon(1e-3));
  CHECK(mean_magnetization(h).z == doctest::Approx(-prism_self_demag(4, 4, 1).zz).epsilon(1e-12));
  CHECK(std::abs(c.x) <= 0.1);
  CHECK(h.get(2, 2, 0).z == doctest::Approx(c.z).epsilon(1e-12));
}

TEST_CASE("stray field is self-adjoint") {
  const auto g = GridSpec::box(6, 5, 3, 0.6, 0.5, 0.3);
  const auto T = build_demag_tensor(g);
  const auto a = random_field(g, 1), b = random_field(g, 2);
  const double x = inner_product(stray_field(T, a), b), y = inner_product(stray_field(T, b), a);
  CHECK(x == doctest::Approx(y).epsilon(1e-12));
  CHECK(inner_product(stray_field(T, a), a) <= 0.0);
}

TEST_CASE("material constants") {
  const auto p = MaterialParams::permalloy(2e-6, 0.1, 3.0);
  CHECK(p.Q == doctest::Approx(100.0 / (4e-7 * M_PI * 8e5 * 8e5)).epsilon(1e-12));
  CHECK(p.Q == doctest::Approx(1.2434e-4).epsilon(1e-4));
  CHECK(p.eps == doctest::Approx(1.3e-11 / (4e-7 * M_PI * 6.4e11 * 4e-12)).epsilon(1e-12));
  CHECK(p.field_unit_tesla() == doctest::Approx(1.00531).epsilon(1e-5));
  CHECK(0.050 / p.field_unit_tesla() == doctest::Approx(0.049736).epsilon(1e-5));
  CHECK_THROWS_AS(MaterialParams::from_physical(-1, 1, 1, 1, 1, 0.1, 1), ValidationError);
  MaterialParams bad;
  bad.beta = -1;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("assemble_f") {
  const auto g = GridSpec::unit_cube(3);
  VectorField3 m(g);
  m.fill({0, 1, 0});
  fill_ghosts(m);
  MaterialParams p;
  p.Q = 0.1;
  FieldTerms off;
  off.exchange = false;
  CHECK(testutil::max_abs(assemble_f(m, p, off, 0.0)) == 0.0);
  FieldTerms an = off;
  an.anisotropy = true;
  const auto f = assemble_f(m, p, an, 0.0);
  CHECK(f.get(1, 1, 1).x == 0.0);
  CHECK(f.get(1, 1, 1).y == doctest::Approx(-0.1));
  CHECK(f.get(1, 1, 1).z == 0.0);
  FieldTerms ze = off;
  ze.zeeman = true;
  ze.h_ext = {0.01, 0.02, 0.03};
  CHECK(assemble_f(m, p, ze, 0.0).get(2, 0, 1) == Vec3{0.01, 0.02, 0.03});
  FieldTerms bad = off;
  bad.demag = true;
  CHECK_THROWS_AS(assemble_f(m, p, bad, 0.0), ValidationError);
}

TEST_CASE("effective field") {
  const auto g = GridSpec::unit_cube(5);
  VectorField3 c(g);
  c.fill({0.6, 0.8, 0});
  fill_ghosts(c);
  MaterialParams p;
  p.eps = 0.7;
  CHECK(testutil::max_abs(effective_field(c, p, exchange_only(), 0.0)) <= 1e-12);

  const auto m = random_field(g, 3);
  VectorField3 expect = laplacian(m);
  scale(p.eps, expect);
  CHECK(max_diff(effective_field(m, p, exchange_only(), 0.0), expect) <= 1e-13);

  // linear in m without the Zeeman term
  FieldTerms t = exchange_only();
  t.anisotropy = true;
  t.demag = true;
  t.demag_tensor = std::make_shared<DemagTensor>(g);
  p.Q = 0.3;
  VectorField3 m2 = m;
  scale(-2.5, m2);
  VectorField3 h1 = effective_field(m, p, t, 0.0);
  scale(-2.5, h1);
  CHECK(max_diff(effective_field(m2, p, t, 0.0), h1) <= 1e-12);
}

TEST_CASE("rhs_full") {
  const auto g = GridSpec::box(5, 4, 3, 1.0, 0.8, 0.6);
  MaterialParams p;
  p.eps = 0.4;
  p.alpha = 0.2;
  p.beta = 2.0;
  p.Q = 0.05;
  FieldTerms t = exchange_only();
  t.anisotropy = true;
  t.zeeman = true;
  t.h_ext = {0.1, -0.2, 0.05};

  VectorField3 c(g);
  c.fill({0, 0, 1});
  fill_ghosts(c);
  FieldTerms plain = exchange_only();
  CHECK(testutil::max_abs(rhs_full(0.0, c, p, plain)) == 0.0);

  // independent straight-line evaluation
  const auto m = random_unit_field(g, 4);
  const auto N = rhs_full(0.0, m, p, t);
  double worst = 0;
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 5; ++i) {
        Vec3 lap;
        for (int cmp = 0; cmp < 3; ++cmp) {
          double s = 0;
          s += (m(cmp, i + 1, j, k) - 2 * m(cmp, i, j, k) + m(cmp, i - 1, j, k)) / (g.h[0] * g.h[0]);
          s += (m(cmp, i, j + 1, k) - 2 * m(cmp, i, j, k) + m(cmp, i, j - 1, k)) / (g.h[1] * g.h[1]);
          s += (m(cmp, i, j, k + 1) - 2 * m(cmp, i, j, k) + m(cmp, i, j, k - 1)) / (g.h[2] * g.h[2]);
          lap[cmp] = s;
        }
        const Vec3 mv = m.get(i, j, k);
        const Vec3 H = p.eps * lap + Vec3{0, -p.Q * mv.y, -p.Q * mv.z} + t.h_ext;
        const Vec3 ref = -cross(mv, H) - p.alpha * cross(mv, cross(mv, H)) - (p.beta * p.eps) * lap;
        worst = std::max(worst, norm(ref - N.get(i, j, k)));
      }
  CHECK(worst <= 1e-11);

  // pure precession plus damping torque is orthogonal to m
  p.beta = 0;
  const auto P = rhs_full(0.0, m, p, t);
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 5; ++i) CHECK(std::abs(dot(m.get(i, j, k), P.get(i, j, k))) <= 1e-13 * 1e3);
}

TEST_CASE("equivalent form approaches the cross-product form under refinement") {
  MaterialParams p;
  p.alpha = 0.1;
  p.beta = 0.0;
  std::vector<double> gaps;
  for (int n : {16, 32, 64}) {
    const auto g = GridSpec::line(n);
    VectorField3 m(g);
    for (int i = 0; i < n; ++i) {
      const double x = g.center(0, i), P = x * x * (1 - x) * (1 - x);
      m.set(i, 0, 0, {std::cos(P) * std::sin(0.7), std::sin(P) * std::sin(0.7), std::cos(0.7)});
    }
    fill_ghosts(m);
    const auto a = rhs_full(0.0, m, p, exchange_only());
    const auto b = rhs_equivalent_form(0.0, m, p, exchange_only());
    gaps.push_back(testutil::max_diff(a, b));
  }
  CHECK(gaps[1] < gaps[0] / 3.0);
  CHECK(gaps[2] < gaps[1] / 3.0);

  const auto g = GridSpec::unit_cube(4);
  VectorField3 c(g);
  c.fill({1, 0, 0});
  fill_ghosts(c);
  CHECK(testutil::max_abs(rhs_equivalent_form(0.0, c, p, exchange_only())) == 0.0);
}

TEST_CASE("rhs_simplified") {
  const auto g = GridSpec::unit_cube(3);
  MaterialParams p;
  p.alpha = 0.3;
  p.beta = 0.3;
  VectorField3 c(g);
  c.fill({0, 0, 1});
  fill_ghosts(c);
  CHECK(testutil::max_abs(rhs_simplified(c, p, {})) == 0.0);
  const auto r = rhs_simplified(c, p, {1, 0, 0});
  CHECK(r.get(1, 1, 1).x == doctest::Approx(0.3));
  CHECK(r.get(1, 1, 1).y == 0.0);
  CHECK(r.get(1, 1, 1).z == 0.0);

  const auto m = random_unit_field(g, 8);
  const Vec3 f{0.2, 0.5, -0.1};
  const auto got = rhs_simplified(m, p, f);
  const auto ag = avg_gradient(m);
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) {
        double s = 0;
        for (int a = 0; a < 3; ++a)
          for (int q = 0; q < 3; ++q) s += ag(a, q, i, j, k) * ag(a, q, i, j, k);
        const Vec3 mv = m.get(i, j, k);
        const Vec3 ref = p.beta * s * mv - p.alpha * cross(mv, cross(mv, f));
        CHECK(norm(ref - got.get(i, j, k)) <= 1e-13 * std::max(1.0, s));
      }
}

TEST_CASE("total energy") {
  const auto g = GridSpec::box(4, 4, 2, 1.0, 1.0, 0.5);
  MaterialParams p;
  p.Q = 0.2;
  FieldTerms t = exchange_only();
  t.anisotropy = true;
  VectorField3 m(g);
  m.fill({1, 0, 0});
  CHECK(total_energy(m, p, t).total() == 0.0);
  m.fill({0, 1, 0});
  const auto e = total_energy(m, p, t);
  CHECK(e.anisotropy == doctest::Approx(0.2 * 0.5));
  CHECK(e.exchange == 0.0);

  // Zeeman: -2 h.m per unit volume
  FieldTerms z;
  z.exchange = false;
  z.zeeman = true;
  z.h_ext = {0, 0.5, 0};
  CHECK(total_energy(m, p, z).zeeman == doctest::Approx(-2 * 0.5 * 0.5));

  // exchange variation is -2 eps Lap m
  const auto r = random_unit_field(g, 9), d = random_field(g, 10);
  p.eps = 0.3;
  const double s = 1e-6;
  VectorField3 rp = r, rm = r;
  axpy(s, d, rp);
  axpy(-s, d, rm);
  const double fd = (total_energy(rp, p, exchange_only()).exchange - total_energy(rm, p, exchange_only()).exchange) /
                    (2 * s);
  const double an = -2 * p.eps * inner_product(laplacian(r), d);
  CHECK(fd == doctest::Approx(an).epsilon(1e-6));
}

TEST_CASE("ll_torque and mean magnetization match serial") {
  const auto g = GridSpec::unit_cube(5);
  const auto m = random_unit_field(g, 11), h = random_field(g, 12);
  VectorField3 a(g), b(g);
  ll_torque(m, h, 0.3, a);
  serial::ll_torque(m, h, 0.3, b);
  CHECK(max_diff(a, b) == 0.0);
  VectorField3 u(g);
  u.fill({0.1, 0.2, 0.3});
  const Vec3 mm = mean_magnetization(u);
  CHECK(mm.x == doctest::Approx(0.1));
  CHECK(mm.z == doctest::Approx(0.3));
}
