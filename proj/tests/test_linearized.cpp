#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "adm/families.hpp"
#include "adm/linearized.hpp"

using namespace adm;

namespace {

Vec pt(double a, double b, double c) {
  Vec x = vzero();
  x[0] = a;
  x[1] = b;
  x[2] = c;
  return x;
}

bool throws_code(const std::function<void()>& f, const std::string& code) {
  try {
    f();
  } catch (const error& e) {
    return e.code() == code;
  }
  return false;
}

// scalar constant field with closures
Field const_scalar(const Chart& c, double v) {
  return Field::analytic_full(
      c, Rank{0, 0}, {[v](const Vec&) { return v; }}, {[](const Vec&) { return vzero(); }},
      {[](const Vec&) { return std::array<Vec, kMaxDim>{vzero(), vzero(), vzero(), vzero()}; }});
}

Field const_vector(const Chart& c, const Vec& b) {
  std::vector<Field::ValueFn> v(c.n);
  std::vector<Field::GradFn> g(c.n);
  std::vector<Field::HessFn> h(c.n);
  for (int i = 0; i < c.n; ++i) {
    const double bi = b[i];
    v[i] = [bi](const Vec&) { return bi; };
    g[i] = [](const Vec&) { return vzero(); };
    h[i] = [](const Vec&) { return std::array<Vec, kMaxDim>{vzero(), vzero(), vzero(), vzero()}; };
  }
  return Field::analytic_full(c, Rank{0, 1}, std::move(v), std::move(g), std::move(h));
}

// h_ij = x1^2 delta_ij with exact jets
Field x1sq_delta(const Chart& c) {
  const int n = c.n;
  std::vector<Field::ValueFn> v(n * n);
  std::vector<Field::GradFn> g(n * n);
  std::vector<Field::HessFn> h(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const bool diag = (i == j);
      v[i + n * j] = [diag](const Vec& x) { return diag ? x[0] * x[0] : 0.0; };
      g[i + n * j] = [diag](const Vec& x) {
        Vec out = vzero();
        if (diag) out[0] = 2.0 * x[0];
        return out;
      };
      h[i + n * j] = [diag](const Vec&) {
        std::array<Vec, kMaxDim> out{vzero(), vzero(), vzero(), vzero()};
        if (diag) out[0][0] = 2.0;
        return out;
      };
    }
  return Field::analytic_full(c, Rank{2, 0}, std::move(v), std::move(g), std::move(h),
                              Symmetry::none);
}

double sup_comps(const Field& f, const std::vector<Vec>& pts) {
  double m = 0.0;
  for (const Vec& x : pts)
    for (int c = 0; c < f.comps(); ++c) m = std::max(m, std::abs(f.value(c, x)));
  return m;
}

}  // namespace

TEST_CASE("linearization: flat closed form and linearity") {
  const Chart c = make_chart(3, 1, 8, 33, 4);
  const InitialDataSet flat = make_euclidean(c);
  const SymPair dir{x1sq_delta(c), Field::zero(c, Rank{0, 2})};

  auto [s1, s2] = linearize(flat, dir, ConstraintVariant::plain);
  for (const Vec& x : {pt(2.0, 1.0, -1.0), pt(-3.0, 0.5, 2.0)}) {
    CHECK(s1.value(0, x) == doctest::Approx(-4.0).epsilon(1e-12));
    for (int i = 0; i < 3; ++i) CHECK(std::abs(s2.value(i, x)) < 1e-13);
  }

  // zero direction maps to zero
  const SymPair zero{Field::zero(c, Rank{2, 0}), Field::zero(c, Rank{0, 2})};
  auto [z1, z2] = linearize(flat, zero, ConstraintVariant::modified);
  CHECK(z1.value(0, pt(2, 1, 1)) == 0.0);

  // linearity in the direction on a curved base
  const InitialDataSet sch = make_schwarzschild(c, 1.0);
  const SymPair d1{seeded_symmetric_bump(c, Rank{2, 0}, 5, 1.0, 2.5, 6.0),
                   seeded_symmetric_bump(c, Rank{0, 2}, 6, 1.0, 2.5, 6.0)};
  const SymPair d2{seeded_symmetric_bump(c, Rank{2, 0}, 7, 1.0, 2.5, 6.0),
                   seeded_symmetric_bump(c, Rank{0, 2}, 8, 1.0, 2.5, 6.0)};
  const SymPair dsum{d1.h.axpy(2.0, d2.h, -1.5), d1.w.axpy(2.0, d2.w, -1.5)};
  auto [a1, a2] = linearize(sch, d1, ConstraintVariant::modified);
  auto [b1, b2] = linearize(sch, d2, ConstraintVariant::modified);
  auto [c1, c2] = linearize(sch, dsum, ConstraintVariant::modified);
  const Vec x = pt(3.2, 1.1, -2.3);
  CHECK(c1.value(0, x) ==
        doctest::Approx(2.0 * a1.value(0, x) - 1.5 * b1.value(0, x)).epsilon(1e-10));
  for (int i = 0; i < 3; ++i)
    CHECK(c2.value(i, x) ==
          doctest::Approx(2.0 * a2.value(i, x) - 1.5 * b2.value(i, x)).epsilon(1e-10));
}

TEST_CASE("linearization matches finite differences of the nonlinear map") {
  const Chart c = make_chart(3, 1, 8, 33, 4);
  const InitialDataSet sch = make_schwarzschild(c, 1.0);
  const SymPair dir{seeded_symmetric_bump(c, Rank{2, 0}, 11, 1.0, 2.5, 6.0),
                    seeded_symmetric_bump(c, Rank{0, 2}, 12, 1.0, 2.5, 6.0)};
  auto [l1, l2] = linearize(sch, dir, ConstraintVariant::modified);

  // sample where the direction is active
  std::vector<Vec> pts;
  for (std::size_t f = 0; f < c.node_count() && pts.size() < 12; ++f) {
    const Vec x = c.node_point(c.multi_index(f));
    if (!c.in_annulus(x, 1.0, 1.0)) continue;
    double m = 0.0;
    for (int cc = 0; cc < 9; ++cc)
      m = std::max({m, std::abs(dir.h.value(cc, x)), std::abs(dir.w.value(cc, x))});
    if (m > 0.2) pts.push_back(x);
  }
  REQUIRE(pts.size() >= 3);
  double err[2];
  int k = 0;
  for (double t : {1e-3, 5e-4}) {
    const Field gp = sch.g.axpy(1.0, dir.h, t);
    const Field pip = sch.pi.axpy(1.0, dir.w, t);
    auto [f1, f2] = constraint_map(sch, {gp, pip}, ConstraintVariant::modified);
    auto [g1, g2] = constraint_map(sch, {sch.g, sch.pi}, ConstraintVariant::modified);
    double m = 0.0;
    for (const Vec& x : pts) {
      m = std::max(m, std::abs((f1.value(0, x) - g1.value(0, x)) / t - l1.value(0, x)));
      for (int i = 0; i < 3; ++i)
        m = std::max(m, std::abs((f2.value(i, x) - g2.value(i, x)) / t - l2.value(i, x)));
    }
    err[k++] = m;
  }
  REQUIRE(err[0] > 0.0);
  // first-order remainder: error scales like t
  CHECK(err[1] / err[0] > 0.3);
  CHECK(err[1] / err[0] < 0.7);
}

TEST_CASE("adjoint: flat closed forms") {
  const Chart c = make_chart(3, 1, 8, 33, 4);
  const InitialDataSet flat = make_euclidean(c);
  const Vec x = pt(2.0, -1.0, 1.5);

  // constants are flat KIDs
  const LapseShiftPair constant{const_scalar(c, 1.0), const_vector(c, vzero()), true, 1.0, vzero()};
  const SymPair a0 = adjoint(flat, constant, ConstraintVariant::plain);
  for (int cc = 0; cc < 9; ++cc) {
    CHECK(a0.h.value(cc, x) == 0.0);
    CHECK(a0.w.value(cc, x) == 0.0);
  }

  // f = x1^2: L* f = -2 delta + 2 e1 x e1
  std::vector<Field::ValueFn> fv = {[](const Vec& xx) { return xx[0] * xx[0]; }};
  std::vector<Field::GradFn> fg = {[](const Vec& xx) {
    Vec g = vzero();
    g[0] = 2.0 * xx[0];
    return g;
  }};
  std::vector<Field::HessFn> fh = {[](const Vec&) {
    std::array<Vec, kMaxDim> h{vzero(), vzero(), vzero(), vzero()};
    h[0][0] = 2.0;
    return h;
  }};
  const LapseShiftPair p{
      Field::analytic_full(c, Rank{0, 0}, std::move(fv), std::move(fg), std::move(fh)),
      const_vector(c, vzero())};
  const SymPair a1 = adjoint(flat, p, ConstraintVariant::plain);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double expect = (i == j) ? ((i == 0) ? 0.0 : -2.0) : 0.0;
      CHECK(a1.h.value(i + 3 * j, x) == doctest::Approx(expect).epsilon(1e-13));
      CHECK(std::abs(a1.w.value(i + 3 * j, x)) < 1e-13);
    }
}

TEST_CASE("adjoint: schwarzschild static lapse residual converges at fourth order") {
  double sup[2];
  for (int lvl = 0; lvl < 2; ++lvl) {
    const Chart c = make_chart(3, 1, 12, (lvl == 0) ? 49 : 97, 4);
    const InitialDataSet sch = make_schwarzschild(c, 1.0);
    InitialDataSet grid = sch;
    grid.g = Field::sampled(sch.g);
    grid.pi = Field::sampled(sch.pi);
    const LapseShiftPair p{Field::sampled(schwarzschild_lapse(c, 1.0)),
                           Field::zero(c, Rank{0, 1})};
    const SymPair a = adjoint(grid, p, ConstraintVariant::plain);
    double m = 0.0;
    for (std::size_t f = 0; f < c.node_count(); ++f) {
      const Vec x = c.node_point(c.multi_index(f));
      const double r = norm2(x, 3);
      if (r < 4.0 || r > 9.0) continue;
      for (int cc = 0; cc < 9; ++cc) m = std::max(m, std::abs(a.h.value(cc, x)));
    }
    sup[lvl] = m;
  }
  const double rate = std::log2(sup[0] / sup[1]);
  CHECK(rate > 3.6);
  CHECK(rate < 4.4);
}

TEST_CASE("modified and plain differ by the displayed corrections exactly") {
  const Chart c = make_chart(3, 1, 8, 33, 4);
  DatasetManifest man;
  man.family = "perturbed";
  man.base_family = "euclidean";
  man.chart = c;
  man.seed = 21;
  man.amplitude = 8e-2;
  man.support_lo = 2.0;
  man.support_hi = 6.0;
  const InitialDataSet pert = generate(man);
  const MassCurrent mc = mass_current(pert);

  const SymPair dir{seeded_symmetric_bump(c, Rank{2, 0}, 31, 1.0, 2.5, 6.5),
                    seeded_symmetric_bump(c, Rank{0, 2}, 32, 1.0, 2.5, 6.5)};
  auto [p1, p2] = linearize(pert, dir, ConstraintVariant::plain);
  auto [m1, m2] = linearize(pert, dir, ConstraintVariant::modified);

  // points where both the current density J and the direction h are active
  std::vector<Vec> probe;
  for (std::size_t f = 0; f < c.node_count() && probe.size() < 8; ++f) {
    const Vec x = c.node_point(c.multi_index(f));
    if (!c.in_annulus(x, 1.0, 1.0)) continue;
    double hm = 0.0, jm = 0.0;
    for (int cc = 0; cc < 9; ++cc) hm = std::max(hm, std::abs(dir.h.value(cc, x)));
    for (int i = 0; i < 3; ++i) jm = std::max(jm, std::abs(mc.J.value(i, x)));
    if (hm > 0.1 && jm > 1e-4) probe.push_back(x);
  }
  REQUIRE(probe.size() >= 2);

  bool saw_nonzero = false;
  for (const Vec& x : probe) {
    CHECK(m1.value(0, x) == doctest::Approx(p1.value(0, x)).epsilon(1e-13));
    const MetricJet G = metric_jet(pert.g, x);
    double J[4];
    for (int i = 0; i < 3; ++i) J[i] = mc.J.value(i, x);
    for (int i = 0; i < 3; ++i) {
      double corr = 0.0;
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) corr += 0.5 * G.ginv[i][j] * dir.h.value(j + 3 * k, x) * J[k];
      if (std::abs(corr) > 1e-8) saw_nonzero = true;
      CHECK(m2.value(i, x) - p2.value(i, x) == doctest::Approx(corr).epsilon(1e-11));
    }
  }
  CHECK(saw_nonzero);

  // adjoint correction (1/2) X (.) J
  const LapseShiftPair pr{const_scalar(c, 0.7), const_vector(c, pt(0.3, -1.1, 0.8))};
  const SymPair ap = adjoint(pert, pr, ConstraintVariant::plain);
  const SymPair am = adjoint(pert, pr, ConstraintVariant::modified);
  for (const Vec& x : probe) {
    const MetricJet G = metric_jet(pert.g, x);
    double Xl[3], Jl[3];
    for (int i = 0; i < 3; ++i) {
      Xl[i] = 0.0;
      Jl[i] = 0.0;
      for (int a = 0; a < 3; ++a) {
        Xl[i] += G.g[i][a] * pr.X.value(a, x);
        Jl[i] += G.g[i][a] * mc.J.value(a, x);
      }
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double corr = 0.25 * (Xl[i] * Jl[j] + Xl[j] * Jl[i]);
        CHECK(am.h.value(i + 3 * j, x) - ap.h.value(i + 3 * j, x) ==
              doctest::Approx(corr).epsilon(1e-11));
        CHECK(am.w.value(i + 3 * j, x) == doctest::Approx(ap.w.value(i + 3 * j, x)));
      }
  }
}

TEST_CASE("pairing defect vanishes for compact directions") {
  const Chart c = make_chart(3, 1, 8, 65, 4);
  const InitialDataSet flat = make_euclidean(c);
  const LapseShiftPair ones{const_scalar(c, 1.0), const_vector(c, vzero())};

  // zero direction: exactly zero
  const SymPair zero{Field::zero(c, Rank{2, 0}), Field::zero(c, Rank{0, 2})};
  CHECK(pairing_defect(flat, ones, zero) == 0.0);

  // seeded compact grid-backed directions: defect small vs the direction norm
  for (std::uint64_t seed : {101u, 102u, 103u}) {
    const SymPair dir{
        Field::sampled(seeded_symmetric_bump(c, Rank{2, 0}, seed, 1.0, 3.0, 5.5)),
        Field::sampled(seeded_symmetric_bump(c, Rank{0, 2}, seed + 50, 1.0, 3.0, 5.5))};
    const double defect = std::abs(pairing_defect(flat, ones, dir));
    const double nrm = dir_l2_norm(flat, dir);
    CHECK(defect <= 1e-3 * nrm);
  }

  // support guard
  const SymPair wide{seeded_symmetric_bump(c, Rank{2, 0}, 1, 1.0, 6.5, 7.9),
                     Field::zero(c, Rank{0, 2})};
  CHECK(throws_code([&] { pairing_defect(flat, ones, wide); }, "support-touches-boundary"));
}

TEST_CASE("kid residuals: flat KIDs vanish exactly") {
  const Chart c = make_chart(3, 1, 8, 33, 4);
  const InitialDataSet flat = make_euclidean(c);
  const SymPair zero{Field::zero(c, Rank{2, 0}), Field::zero(c, Rank{0, 2})};
  const std::vector<Vec> pts = {pt(2.0, 1.0, -1.0), pt(-3.0, 2.0, 0.5), pt(1.5, -1.5, 3.0)};

  // translational: (1, b)
  const LapseShiftPair tr{const_scalar(c, 1.0), const_vector(c, pt(0.5, -1.0, 2.0))};
  const KidResiduals r1 = kid_residuals(flat, tr, zero);
  CHECK(sup_comps(r1.hessian_f, pts) == 0.0);
  CHECK(sup_comps(r1.hessian_X, pts) == 0.0);
  CHECK(sup_comps(r1.trace_f, pts) == 0.0);
  CHECK(sup_comps(r1.trace_X, pts) == 0.0);

  // boost-type: f = x1, X = 0 (pi = 0)
  std::vector<Field::ValueFn> fv = {[](const Vec& x) { return x[0]; }};
  std::vector<Field::GradFn> fg = {[](const Vec&) {
    Vec g = vzero();
    g[0] = 1.0;
    return g;
  }};
  std::vector<Field::HessFn> fh = {[](const Vec&) {
    return std::array<Vec, kMaxDim>{vzero(), vzero(), vzero(), vzero()};
  }};
  const LapseShiftPair boost{
      Field::analytic_full(c, Rank{0, 0}, std::move(fv), std::move(fg), std::move(fh)),
      const_vector(c, vzero())};
  const KidResiduals r2 = kid_residuals(flat, boost, zero);
  CHECK(sup_comps(r2.hessian_f, pts) == 0.0);
  CHECK(sup_comps(r2.hessian_X, pts) == 0.0);

  // a seeded non-solution stays bounded away from zero
  const LapseShiftPair junk{bump_field(c, pt(3.0, 0.0, 0.0), 2.0, 1.0),
                            const_vector(c, pt(0.0, 0.0, 0.0))};
  const KidResiduals r3 = kid_residuals(flat, junk, zero);
  CHECK(sup_comps(r3.hessian_f, {pt(3.0, 0.5, 0.0)}) > 1e-3);
}

TEST_CASE("kid residuals: schwarzschild static lapse converges, consistent with adjoint") {
  double sup[2], sup_adj[2];
  for (int lvl = 0; lvl < 2; ++lvl) {
    const Chart c = make_chart(3, 1, 12, (lvl == 0) ? 49 : 97, 4);
    const InitialDataSet sch = make_schwarzschild(c, 1.0);
    InitialDataSet grid = sch;
    grid.g = Field::sampled(sch.g);
    grid.pi = Field::sampled(sch.pi);
    const LapseShiftPair p{Field::sampled(schwarzschild_lapse(c, 1.0)),
                           Field::zero(c, Rank{0, 1})};
    const SymPair zero{Field::zero(c, Rank{2, 0}), Field::zero(c, Rank{0, 2})};
    const KidResiduals res = kid_residuals(grid, p, zero);
    const SymPair adj = adjoint(grid, p, ConstraintVariant::modified);
    double m = 0.0, ma = 0.0;
    for (std::size_t f = 0; f < c.node_count(); ++f) {
      const Vec x = c.node_point(c.multi_index(f));
      const double r = norm2(x, 3);
      if (r < 4.0 || r > 9.0) continue;
      for (int cc = 0; cc < res.hessian_f.comps(); ++cc)
        m = std::max(m, std::abs(res.hessian_f.value(cc, x)));
      m = std::max(m, std::abs(res.trace_f.value(0, x)));
      for (int cc = 0; cc < 9; ++cc) ma = std::max(ma, std::abs(adj.h.value(cc, x)));
    }
    sup[lvl] = m;
    sup_adj[lvl] = ma;
  }
  const double rate = std::log2(sup[0] / sup[1]);
  CHECK(rate > 3.6);
  CHECK(rate < 4.4);
  // equivalence: both the residuals and the adjoint are small together
  CHECK(sup[1] < 1e-4);
  CHECK(sup_adj[1] < 1e-4);
}
