#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "adm/families.hpp"
#include "adm/hamiltonian.hpp"

using namespace adm;

namespace {

Vec pt(double a, double b, double c) {
  Vec x = vzero();
  x[0] = a;
  x[1] = b;
  x[2] = c;
  return x;
}

}  // namespace

TEST_CASE("reference pair: profile contract") {
  const Chart c = make_chart(3, 1, 16, 65, 4);
  // (a, b) = (0, 0): identically zero
  const LapseShiftPair z = reference_pair(0.0, vzero(), c, 4.0);
  CHECK(z.f.value(0, pt(2, 1, 0)) == 0.0);

  // (1, 0) with transition 4: f0 = 1 beyond, smooth ramp inside
  const LapseShiftPair p = reference_pair(1.0, vzero(), c, 4.0);
  CHECK(p.f.value(0, pt(5.0, 0.0, 0.0)) == doctest::Approx(1.0));
  CHECK(p.f.value(0, pt(0.0, 8.0, 3.0)) == doctest::Approx(1.0));
  CHECK(p.f.value(0, pt(1.0, 0.0, 0.0)) == doctest::Approx(0.0));
  const double mid = p.f.value(0, pt(2.5, 0.0, 0.0));
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
  // gradient supported strictly inside the transition annulus
  CHECK(norm2(p.f.jet(0, pt(6.0, 0, 0), 1).d1, 3) == doctest::Approx(0.0));
  CHECK(norm2(p.f.jet(0, pt(2.5, 0, 0), 1).d1, 3) > 0.0);

  // (E, -2P) wiring
  Vec b = vzero();
  b[2] = -1.0;
  const LapseShiftPair w = reference_pair(1.0, b, c, 4.0);
  CHECK(w.X.value(2, pt(6, 0, 0)) == doctest::Approx(-1.0));
  CHECK(w.a == 1.0);

  CHECK_THROWS(reference_pair(1.0, vzero(), c, 0.5));
}

TEST_CASE("hamiltonian value: euclidean zero and bowen-york 4 pi") {
  const Chart c = make_chart(3, 1, 32, 65, 4);
  // base = target = euclidean: every integrand vanishes
  {
    HamiltonianSpec spec{make_euclidean(c), reference_pair(1.0, vzero(), c, 4.0), 4.0};
    const HamiltonianValue H = hamiltonian_value(spec, {spec.base.g, spec.base.pi});
    CHECK(std::abs(H.value) < 1e-10);
    CHECK(std::abs(H.inner_correction) < 1e-12);
  }
  // bowen-york with (a,b) = (0, e3): surface and volume forms both 4 pi
  {
    Vec P = vzero();
    P[2] = 0.5;
    Vec b = vzero();
    b[2] = 1.0;
    const InitialDataSet by = make_bowen_york(c, P);
    HamiltonianSpec spec{by, reference_pair(0.0, b, c, 4.0), 4.0};
    const HamiltonianValue H = hamiltonian_value(spec, {by.g, by.pi});
    CHECK(H.value == doctest::Approx(4.0 * M_PI).epsilon(0.02));
    CHECK(H.surface_form == doctest::Approx(4.0 * M_PI).epsilon(0.02));
  }
}

TEST_CASE("hamiltonian value: schwarzschild 16 pi on a wide analytic chart") {
  const Chart c = make_chart(3, 1, 256, 65, 4);
  const InitialDataSet sch = make_schwarzschild(c, 1.0);
  HamiltonianSpec spec{sch, reference_pair(1.0, vzero(), c, 4.0), 4.0};
  const HamiltonianValue H = hamiltonian_value(spec, {sch.g, sch.pi});
  CHECK(H.value == doctest::Approx(16.0 * M_PI).epsilon(0.02));
  CHECK(H.surface_form == doctest::Approx(16.0 * M_PI).epsilon(0.02));
  CHECK(std::abs(H.value - H.surface_form) / (16.0 * M_PI) < 0.02);
}

TEST_CASE("hamiltonian is affine in (a, b) for the same profile") {
  const Chart c = make_chart(3, 1, 16, 33, 4);
  const InitialDataSet sch = make_schwarzschild(c, 1.0);
  Vec b1 = vzero();
  b1[0] = 0.4;
  Vec b2 = vzero();
  b2[2] = -0.7;
  Vec b12 = vzero();
  b12[0] = 0.4;
  b12[2] = -0.7;
  HamiltonianSpec s1{sch, reference_pair(0.5, b1, c, 4.0), 4.0};
  HamiltonianSpec s2{sch, reference_pair(1.0, b2, c, 4.0), 4.0};
  HamiltonianSpec s12{sch, reference_pair(1.5, b12, c, 4.0), 4.0};
  const double H1 = hamiltonian_value(s1, {sch.g, sch.pi}).value;
  const double H2 = hamiltonian_value(s2, {sch.g, sch.pi}).value;
  const double H12 = hamiltonian_value(s12, {sch.g, sch.pi}).value;
  CHECK(H12 == doctest::Approx(H1 + H2).epsilon(1e-11));
}

TEST_CASE("gradient pairing matches symmetric finite differences") {
  const Chart c = make_chart(3, 1, 16, 65, 4);
  for (const bool schw : {false, true}) {
    const InitialDataSet base = schw ? make_schwarzschild(c, 1.0) : make_euclidean(c);
    // transition zone [1, 6] fully contains the direction support
    HamiltonianSpec spec{base, reference_pair(1.0, vzero(), c, 6.0), 6.0};
    const SymPair dir{seeded_symmetric_bump(c, Rank{2, 0}, 61, 1.0, 3.2, 4.8),
                      seeded_symmetric_bump(c, Rank{0, 2}, 62, 1.0, 3.2, 4.8)};
    const double dh = hamiltonian_gradient_pairing(spec, dir);
    const double t = 1e-4;
    const HamiltonianValue Hp = hamiltonian_value(
        spec, {base.g.axpy(1.0, dir.h, t), base.pi.axpy(1.0, dir.w, t)}, 32, 32);
    const HamiltonianValue Hm = hamiltonian_value(
        spec, {base.g.axpy(1.0, dir.h, -t), base.pi.axpy(1.0, dir.w, -t)}, 32, 32);
    const double fd = (Hp.value - Hm.value) / (2.0 * t);
    CHECK(dh == doctest::Approx(fd).epsilon(1e-3));
  }
}

TEST_CASE("stationarity residual with the exact multipliers") {
  const Chart c = make_chart(3, 1, 16, 65, 4);
  const double tol = 10.0 * std::pow(c.h(), 4);

  // euclidean, (a,b) = (0,0), multiplier 0
  {
    HamiltonianSpec spec{make_euclidean(c), reference_pair(0.0, vzero(), c, 4.0), 4.0};
    LapseShiftPair zero{Field::zero(c, Rank{0, 0}), Field::zero(c, Rank{0, 1})};
    CHECK(stationarity_residual(spec, zero, 3) == doctest::Approx(0.0).epsilon(1e-12));
  }
  // euclidean, (a,b) = (1,0): multiplier (1 - f0, -X0)
  {
    const InitialDataSet flat = make_euclidean(c);
    HamiltonianSpec spec{flat, reference_pair(1.0, vzero(), c, 4.0), 4.0};
    LapseShiftPair mult;
    mult.f = Field::analytic(c, Rank{0, 0}, {[](const Vec&) { return 1.0; }}).axpy(
        1.0, spec.reference.f, -1.0);
    mult.X = spec.reference.X.axpy(-1.0, Field::zero(c, Rank{0, 1}), 0.0);
    CHECK(stationarity_residual(spec, mult, 4) < tol);
  }
  // schwarzschild, (a,b) = (1,0): multiplier (static lapse - f0, 0)
  {
    const InitialDataSet sch = make_schwarzschild(c, 1.0);
    HamiltonianSpec spec{sch, reference_pair(1.0, vzero(), c, 4.0), 4.0};
    LapseShiftPair mult;
    mult.f = schwarzschild_lapse(c, 1.0).axpy(1.0, spec.reference.f, -1.0);
    mult.X = Field::zero(c, Rank{0, 1});
    CHECK(stationarity_residual(spec, mult, 4) < tol);
  }
}
