#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "adm/families.hpp"
#include "adm/quadrature.hpp"
#include "adm/weights.hpp"

using namespace adm;

namespace {

bool throws_code(const std::function<void()>& f, const std::string& code) {
  try {
    f();
  } catch (const error& e) {
    return e.code() == code;
  }
  return false;
}

Field scalar_analytic(const Chart& c, Field::ValueFn v, Field::GradFn g, Field::HessFn h) {
  return Field::analytic_full(c, Rank{0, 0}, {std::move(v)}, {std::move(g)}, {std::move(h)});
}

}  // namespace

TEST_CASE("chart constructor and validation") {
  const Chart c = make_chart(3, 1, 16, 65, 4);
  CHECK(c.h() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(c.coord(0) == doctest::Approx(-16.0));
  CHECK(c.coord(64) == doctest::Approx(16.0));

  CHECK(throws_code([] { make_chart(3, 1, 1, 65, 4); }, "invalid-radii"));
  CHECK(throws_code([] { make_chart(2, 1, 16, 65, 4); }, "invalid-dimension"));
  CHECK(throws_code([] { make_chart(3, 0.5, 16, 65, 4); }, "invalid-radii"));
  CHECK(throws_code([] { make_chart(3, 1, 16, 5, 4); }, "insufficient-resolution"));

  const Chart c4 = make_chart(4, 1, 8, 33, 2);
  CHECK(c4.n == 4);
}

TEST_CASE("grid derivative is exact on low-degree polynomials") {
  const Chart c = make_chart(3, 1, 8, 33, 4);
  std::vector<double> samples(c.node_count());
  for (std::size_t f = 0; f < samples.size(); ++f) {
    const Vec x = c.node_point(c.multi_index(f));
    samples[f] = x[0] * x[0];
  }
  const Field fld = Field::grid(c, Rank{0, 0}, {samples});
  const Field d1 = derivative(fld, {0});
  for (double t : {2.0, 3.5, -4.0}) {
    Vec x = vzero();
    x[0] = t;
    x[1] = 1.5;
    x[2] = -2.0;
    CHECK(d1.value(0, x) == doctest::Approx(2.0 * t).epsilon(1e-10));
  }
  // constant field differentiates to zero
  std::vector<double> ones(c.node_count(), 3.25);
  const Field cf = Field::grid(c, Rank{0, 0}, {ones});
  const Field dc = derivative(derivative(cf, {1}), {2});
  Vec x = vzero();
  x[0] = 2.0;
  CHECK(std::abs(dc.value(0, x)) < 1e-12);
}

TEST_CASE("grid derivative converges at the fd_order rate") {
  for (int fd : {2, 4}) {
    double errs[2];
    for (int lvl = 0; lvl < 2; ++lvl) {
      const int nodes = (lvl == 0) ? 65 : 129;
      const Chart c = make_chart(3, 1, 8, nodes, fd);
      std::vector<double> samples(c.node_count());
      for (std::size_t f = 0; f < samples.size(); ++f)
        samples[f] = std::sin(c.node_point(c.multi_index(f))[0]);
      const Field fld = Field::grid(c, Rank{0, 0}, {samples});
      const Field d1 = derivative(fld, {0});
      Vec x = vzero();
      x[0] = 2.0;  // node at both resolutions
      x[1] = 2.0;
      x[2] = 2.0;
      errs[lvl] = std::abs(d1.value(0, x) - std::cos(2.0));
    }
    const double ratio = errs[0] / errs[1];
    const double expect = std::pow(2.0, fd);
    CHECK(ratio > 0.9 * expect);
    CHECK(ratio < 1.1 * expect);
  }
}

TEST_CASE("differentiation is linear and mixed partials commute") {
  const Chart c = make_chart(3, 1, 8, 49, 4);
  auto sample = [&](const std::function<double(const Vec&)>& fn) {
    std::vector<double> s(c.node_count());
    for (std::size_t f = 0; f < s.size(); ++f) s[f] = fn(c.node_point(c.multi_index(f)));
    return s;
  };
  const Field F = Field::grid(c, Rank{0, 0},
                              {sample([](const Vec& x) { return std::sin(x[0]) * x[1]; })});
  const Field G = Field::grid(c, Rank{0, 0},
                              {sample([](const Vec& x) { return std::cos(x[1]) + x[2] * x[2]; })});
  const Field FG = F.axpy(2.0, G, -3.0);
  const Field dFG = derivative(FG, {1});
  const Field dF = derivative(F, {1});
  const Field dG = derivative(G, {1});
  Vec x = vzero();
  x[0] = 2.5;
  x[1] = 3.0;
  x[2] = -1.5;
  CHECK(dFG.value(0, x) ==
        doctest::Approx(2.0 * dF.value(0, x) - 3.0 * dG.value(0, x)).epsilon(1e-13));

  const Field d12 = derivative(F, {0, 1});
  const Field d21 = derivative(F, {1, 0});
  CHECK(d12.value(0, x) == doctest::Approx(d21.value(0, x)).epsilon(1e-10));
}

TEST_CASE("sphere_flux oracle values") {
  const Chart c = make_chart(3, 1, 8, 33, 4);
  const int n = 3;

  // integrand nu_1 (realized by the constant covector e_1) is odd: flux 0
  std::vector<Field::ValueFn> nu1(n);
  nu1[0] = [](const Vec&) { return 1.0; };
  nu1[1] = [](const Vec&) { return 0.0; };
  nu1[2] = [](const Vec&) { return 0.0; };
  const Field f1 = Field::analytic(c, Rank{1, 0}, std::move(nu1));
  CHECK(std::abs(sphere_flux(f1, 3.0)) < 1e-12);

  // field x1 delta_{j1} at r = 2: integral of x1 nu1 = 4 pi r^3 / 3
  std::vector<Field::ValueFn> xdelta(n);
  xdelta[0] = [](const Vec& x) { return x[0]; };
  xdelta[1] = [](const Vec&) { return 0.0; };
  xdelta[2] = [](const Vec&) { return 0.0; };
  const Field f2 = Field::analytic(c, Rank{1, 0}, std::move(xdelta));
  CHECK(sphere_flux(f2, 2.0) == doctest::Approx(32.0 * M_PI / 3.0).epsilon(1e-12));

  // constant covector integrates to zero
  std::vector<Field::ValueFn> cc(n);
  for (int i = 0; i < n; ++i) cc[i] = [i](const Vec&) { return 1.0 + 0.5 * i; };
  const Field f3 = Field::analytic(c, Rank{1, 0}, std::move(cc));
  CHECK(std::abs(sphere_flux(f3, 5.0)) < 1e-12);

  CHECK(throws_code([&] { sphere_flux(f3, 100.0); }, "radius-out-of-chart"));
}

TEST_CASE("weighted norms: closed-form checks") {
  const Chart c = make_chart(3, 1, 16, 65, 4);
  DecayWeight w;
  w.q = 1.0;
  w.k = 0;
  w.alpha = 0.5;
  w.p = 4.0;

  // f = |x|^{-q}: the weighted sup is exactly 1
  {
    DecayWeight wq = w;
    wq.q = 2.0;  // matches the field decay: sup |x|^q |x|^{-q} = 1
    const Field f = radial_field(c, [](double r, double* v, double* dv, double* ddv) {
      *v = std::pow(r, -2.0);
      *dv = -2.0 * std::pow(r, -3.0);
      *ddv = 6.0 * std::pow(r, -4.0);
    });
    const double nrm = weighted_norm(f, wq, NormMode::holder);
    // sup term is 1; the sampled seminorm adds a bounded positive amount
    CHECK(nrm >= 1.0 - 1e-12);
  }

  // zero field
  CHECK(weighted_norm(Field::zero(c, Rank{0, 0}), w, NormMode::sobolev) == 0.0);
  CHECK(weighted_norm(Field::zero(c, Rank{0, 0}), w, NormMode::holder) == 0.0);

  // sobolev oracle: f = |x|^{-2}, q=1, n=3, p=4:
  // integral_1^R (r^{1-2})^4 r^{-3} 4 pi r^2 dr = pi (1 - R^{-4})
  const Field f2 = radial_field(c, [](double r, double* v, double* dv, double* ddv) {
    *v = std::pow(r, -2.0);
    *dv = -2.0 * std::pow(r, -3.0);
    *ddv = 6.0 * std::pow(r, -4.0);
  });
  const double est16 = weighted_norm(f2, w, NormMode::sobolev);
  const double oracle = std::pow(M_PI, 0.25);
  CHECK(est16 == doctest::Approx(oracle).epsilon(0.05));

  const Chart c32 = make_chart(3, 1, 32, 129, 4);
  const Field f3 = radial_field(c32, [](double r, double* v, double* dv, double* ddv) {
    *v = std::pow(r, -2.0);
    *dv = -2.0 * std::pow(r, -3.0);
    *ddv = 6.0 * std::pow(r, -4.0);
  });
  const double est32 = weighted_norm(f3, w, NormMode::sobolev);
  CHECK(std::abs(est32 - est16) / est16 < 0.01);

  // absolute homogeneity
  const Field f2s = f2.axpy(-2.5, Field::zero(c, Rank{0, 0}), 0.0);
  CHECK(weighted_norm(f2s, w, NormMode::sobolev) ==
        doctest::Approx(2.5 * est16).epsilon(1e-12));

  // insufficient derivatives: k = 1 norm of a value-only closure field
  const Field vonly = Field::analytic(c, Rank{0, 0}, {[](const Vec& x) { return x[0]; }});
  DecayWeight w1 = w;
  w1.k = 1;
  CHECK(throws_code([&] { weighted_norm(vonly, w1, NormMode::holder); },
                    "insufficient-derivatives"));
}

TEST_CASE("stencil rows reproduce classic central differences") {
  const StencilRows r = stencil_rows(5, 2.0);
  CHECK(r.w[2] == doctest::Approx(1.0));
  CHECK(std::abs(r.w[0]) < 1e-13);
  // 4th-order first derivative: (1/12, -2/3, 0, 2/3, -1/12)
  CHECK(r.wd[0] == doctest::Approx(1.0 / 12.0));
  CHECK(r.wd[1] == doctest::Approx(-2.0 / 3.0));
  CHECK(r.wd[3] == doctest::Approx(2.0 / 3.0));
  // 4th-order second derivative: (-1/12, 4/3, -5/2, 4/3, -1/12)
  CHECK(r.wdd[2] == doctest::Approx(-2.5));
  CHECK(r.wdd[1] == doctest::Approx(4.0 / 3.0));
}
