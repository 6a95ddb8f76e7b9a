#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "adm/charges.hpp"
#include "adm/families.hpp"
#include "adm/quadrature.hpp"

using namespace adm;

namespace {

// dense cubic polynomial with exact jets
struct Poly3 {
  double c[20];  // monomials 1,x,y,z,x2,xy,xz,y2,yz,z2, x3,x2y,x2z,xy2,xyz,xz2,y3,y2z,yz2,z3
  static constexpr int e[20][3] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {2, 0, 0},
                                   {1, 1, 0}, {1, 0, 1}, {0, 2, 0}, {0, 1, 1}, {0, 0, 2},
                                   {3, 0, 0}, {2, 1, 0}, {2, 0, 1}, {1, 2, 0}, {1, 1, 1},
                                   {1, 0, 2}, {0, 3, 0}, {0, 2, 1}, {0, 1, 2}, {0, 0, 3}};
  double value(const Vec& x) const {
    double s = 0.0;
    for (int m = 0; m < 20; ++m)
      s += c[m] * std::pow(x[0], e[m][0]) * std::pow(x[1], e[m][1]) * std::pow(x[2], e[m][2]);
    return s;
  }
  double deriv(const Vec& x, int a) const {
    double s = 0.0;
    for (int m = 0; m < 20; ++m) {
      int ex[3] = {e[m][0], e[m][1], e[m][2]};
      if (ex[a] == 0) continue;
      const double k = ex[a];
      ex[a] -= 1;
      s += c[m] * k * std::pow(x[0], ex[0]) * std::pow(x[1], ex[1]) * std::pow(x[2], ex[2]);
    }
    return s;
  }
  double deriv2(const Vec& x, int a, int b) const {
    double s = 0.0;
    for (int m = 0; m < 20; ++m) {
      int ex[3] = {e[m][0], e[m][1], e[m][2]};
      double k = 1.0;
      if (ex[a] == 0) continue;
      k *= ex[a];
      ex[a] -= 1;
      if (ex[b] == 0) continue;
      k *= ex[b];
      ex[b] -= 1;
      s += c[m] * k * std::pow(x[0], ex[0]) * std::pow(x[1], ex[1]) * std::pow(x[2], ex[2]);
    }
    return s;
  }
};

Field poly_tensor(const Chart& chart, std::uint64_t seed) {
  auto rng = seeded_rng(seed);
  auto polys = std::make_shared<std::array<Poly3, 9>>();
  for (auto& p : *polys)
    for (double& cc : p.c) cc = uniform(rng, -0.5, 0.5);
  std::vector<Field::ValueFn> v(9);
  std::vector<Field::GradFn> g(9);
  std::vector<Field::HessFn> h(9);
  for (int c = 0; c < 9; ++c) {
    v[c] = [polys, c](const Vec& x) { return (*polys)[c].value(x); };
    g[c] = [polys, c](const Vec& x) {
      Vec out = vzero();
      for (int a = 0; a < 3; ++a) out[a] = (*polys)[c].deriv(x, a);
      return out;
    };
    h[c] = [polys, c](const Vec& x) {
      std::array<Vec, kMaxDim> out{vzero(), vzero(), vzero(), vzero()};
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) out[a][b] = (*polys)[c].deriv2(x, a, b);
      return out;
    };
  }
  return Field::analytic_full(chart, Rank{2, 0}, std::move(v), std::move(g), std::move(h));
}

Field x1cubed(const Chart& chart) {
  std::vector<Field::ValueFn> v = {[](const Vec& x) { return x[0] * x[0] * x[0]; }};
  std::vector<Field::GradFn> g = {[](const Vec& x) {
    Vec out = vzero();
    out[0] = 3.0 * x[0] * x[0];
    return out;
  }};
  std::vector<Field::HessFn> h = {[](const Vec& x) {
    std::array<Vec, kMaxDim> out{vzero(), vzero(), vzero(), vzero()};
    out[0][0] = 6.0 * x[0];
    return out;
  }};
  return Field::analytic_full(chart, Rank{0, 0}, std::move(v), std::move(g), std::move(h));
}

}  // namespace

TEST_CASE("adm charges on the exact families") {
  const Chart c = make_chart(3, 1, 32, 129, 4);

  // euclidean: exactly zero
  const ADMCharges z = adm_charges(make_euclidean(c), {4.0, 8.0, 16.0});
  CHECK(std::abs(z.E) < 1e-14);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(z.P[i]) < 1e-14);

  // schwarzschild m=1
  const ADMCharges s = adm_charges(make_schwarzschild(c, 1.0), {4.0, 8.0, 16.0});
  CHECK(std::abs(s.E - 1.0) < 1e-3);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(s.P[i]) < 1e-6);

  // bowen-york P* = (0,0,0.5): per-radius momentum flux is exactly P*
  Vec Pstar = vzero();
  Pstar[2] = 0.5;
  const InitialDataSet by = make_bowen_york(c, Pstar);
  const ADMCharges b = adm_charges(by, {4.0, 8.0, 16.0});
  CHECK(std::abs(b.E) < 1e-6);
  CHECK(std::abs(b.P[0]) < 1e-6);
  CHECK(std::abs(b.P[1]) < 1e-6);
  CHECK(std::abs(b.P[2] - 0.5) < 1e-6);
  for (const auto& Pr : b.P_at_radius) CHECK(std::abs(Pr[2] - 0.5) < 1e-9);

  // trace-free: tr0 pi = 0 exactly
  Vec x = vzero();
  x[0] = 2.0;
  x[1] = -1.0;
  x[2] = 3.0;
  double tr = 0.0;
  for (int i = 0; i < 3; ++i) tr += by.pi.value(i + 3 * i, x);
  CHECK(std::abs(tr) < 1e-14);

  // guards
  CHECK_THROWS(adm_charges(by, {4.0, 8.0}));
  CHECK_THROWS(adm_charges(by, {4.0, 8.0, 40.0}));
}

TEST_CASE("adm charges rotate with the data") {
  const Chart c = make_chart(3, 1, 32, 65, 4);
  Vec P1 = vzero();
  P1[2] = 0.5;
  // rotate z -> x by a quarter turn: P2 = (0.5, 0, 0)
  Vec P2 = vzero();
  P2[0] = 0.5;
  const ADMCharges a = adm_charges(make_bowen_york(c, P1), {4.0, 8.0, 16.0});
  const ADMCharges b = adm_charges(make_bowen_york(c, P2), {4.0, 8.0, 16.0});
  CHECK(a.P[2] == doctest::Approx(b.P[0]).epsilon(1e-12));
  CHECK(std::abs(a.E - b.E) < 1e-12);
}

TEST_CASE("flux extrapolation") {
  // constant sequence
  auto [c0, e0] = extrapolate_flux({{4.0, 2.5}, {8.0, 2.5}, {16.0, 2.5}}, 1.0);
  CHECK(c0 == doctest::Approx(2.5).epsilon(1e-13));
  CHECK(e0 == doctest::Approx(0.0));

  // exact model 1 + 1/r
  auto [c1, e1] = extrapolate_flux({{4.0, 1.25}, {8.0, 1.125}, {16.0, 1.0625}}, 1.0);
  CHECK(c1 == doctest::Approx(1.0).epsilon(1e-12));

  // contaminated model 1 + 1/r + 0.1 r^{-2}
  std::vector<std::pair<double, double>> vals;
  for (double r : {4.0, 8.0, 16.0}) vals.push_back({r, 1.0 + 1.0 / r + 0.1 / (r * r)});
  auto [c2, e2] = extrapolate_flux(vals, 1.0);
  CHECK(std::abs(c2 - 1.0) <= 0.01);

  CHECK_THROWS(extrapolate_flux({{4.0, 1.0}, {8.0, 1.0}}, 1.0));
  CHECK_THROWS(extrapolate_flux({{4.0, 1.0}, {4.0, 1.0}, {4.0, 1.0}}, 1.0));
  (void)e1;
  (void)e2;
}

TEST_CASE("flux identities") {
  const Chart c = make_chart(3, 1, 8, 33, 4);

  // symmetric tensor: integrand identically zero
  const InitialDataSet sch = make_schwarzschild(c, 1.0);
  const FluxIdentityReport sym = flux_identity_suite(sch.g, 3.0);
  CHECK(std::abs(sym.lemma_defect) < 1e-13);

  // seeded asymmetric polynomial tensors (analytic): defect at roundoff
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const FluxIdentityReport rep = flux_identity_suite(poly_tensor(c, seed), 2.0);
    CHECK(std::abs(rep.lemma_defect) < 1e-10);
  }

  // scalar corollaries with f = x1^3 at radius r: both sides 8 pi r^3 for j = 1
  const double r = 3.0;
  const FluxIdentityReport rep = flux_identity_suite(x1cubed(c), r);
  CHECK(rep.corollary1_lhs[0] == doctest::Approx(8.0 * M_PI * r * r * r).epsilon(1e-12));
  CHECK(std::abs(rep.corollary1_defect[0]) <= 1e-8 * std::abs(rep.corollary1_lhs[0]));
  CHECK(std::abs(rep.corollary1_defect[1]) < 1e-10);
  CHECK(std::abs(rep.corollary2_defect) < 1e-9);
}

TEST_CASE("ricci-based energy cross-check approaches the adm energy") {
  const Chart c = make_chart(3, 1, 64, 65, 4);
  const InitialDataSet sch = make_schwarzschild(c, 1.0);
  const ADMCharges ch = adm_charges(sch, {8.0, 16.0, 32.0});
  const double target = 2.0 * 1.0 * 4.0 * M_PI * ch.E;  // (n-1)(n-2) omega E

  auto ricci_flux = [&](double r) {
    return sphere_integral(3, r, [&](const Vec& x) {
      const MetricJet G = metric_jet(sch.g, x);
      const double rr = norm2(x, 3);
      double s = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += G.ric[i][j] * x[i] * (x[j] / rr);
      return -s;
    });
  };
  double defect_prev = 1e300;
  std::vector<double> defects;
  for (double r : {8.0, 16.0, 32.0}) {
    const double d = std::abs(ricci_flux(r) - target);
    defects.push_back(d);
    CHECK(d < defect_prev);
    defect_prev = d;
  }
  // empirical decay rate at least ~q
  const double rate = std::log2(defects[0] / defects[2]) / 2.0;
  CHECK(rate > 0.5);
}
