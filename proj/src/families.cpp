#include "adm/families.hpp"

#include <cmath>

namespace adm {

namespace {

constexpr double kRadiusFloor = 0.25;  // ghost samples below this are clamped

// Jets of F(x) = f(r): radial chain rule.
struct RadialJet {
  double v, d1[4], d2[4][4];
};

RadialJet radial_jet(const Vec& x, int n, double f, double df, double ddf) {
  RadialJet out{};
  double r = norm2(x, n);
  r = std::max(r, kRadiusFloor);
  out.v = f;
  for (int a = 0; a < n; ++a) out.d1[a] = df * x[a] / r;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double dab = (a == b) ? 1.0 : 0.0;
      out.d2[a][b] = ddf * x[a] * x[b] / (r * r) + df * (dab / r - x[a] * x[b] / (r * r * r));
    }
  return out;
}

using RadialFn = std::function<void(double, double*, double*, double*)>;

Field conformal_metric(const Chart& chart, const RadialFn& u_of_r) {
  const int n = chart.n;
  const double e = 4.0 / (n - 2.0);
  auto U = [u_of_r, e](double r, double* f, double* df, double* ddf) {
    double u, du, ddu;
    u_of_r(r, &u, &du, &ddu);
    *f = std::pow(u, e);
    *df = e * std::pow(u, e - 1.0) * du;
    *ddf = e * (e - 1.0) * std::pow(u, e - 2.0) * du * du + e * std::pow(u, e - 1.0) * ddu;
  };
  std::vector<Field::ValueFn> vals(n * n);
  std::vector<Field::GradFn> grads(n * n);
  std::vector<Field::HessFn> hessians(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double dij = (i == j) ? 1.0 : 0.0;
      vals[i + n * j] = [U, dij, n](const Vec& x) {
        if (dij == 0.0) return 0.0;
        double f, df, ddf;
        U(std::max(norm2(x, n), kRadiusFloor), &f, &df, &ddf);
        return f;
      };
      grads[i + n * j] = [U, dij, n](const Vec& x) {
        Vec g = vzero();
        if (dij == 0.0) return g;
        double f, df, ddf;
        const double r = std::max(norm2(x, n), kRadiusFloor);
        U(r, &f, &df, &ddf);
        const RadialJet rj = radial_jet(x, n, f, df, ddf);
        for (int a = 0; a < n; ++a) g[a] = rj.d1[a];
        return g;
      };
      hessians[i + n * j] = [U, dij, n](const Vec& x) {
        std::array<Vec, kMaxDim> h{vzero(), vzero(), vzero(), vzero()};
        if (dij == 0.0) return h;
        double f, df, ddf;
        const double r = std::max(norm2(x, n), kRadiusFloor);
        U(r, &f, &df, &ddf);
        const RadialJet rj = radial_jet(x, n, f, df, ddf);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) h[a][b] = rj.d2[a][b];
        return h;
      };
    }
  return Field::analytic_full(chart, Rank{2, 0}, std::move(vals), std::move(grads),
                              std::move(hessians), Symmetry::none);
}

DecayWeight default_weight() {
  DecayWeight w;
  w.q = 0.9;
  w.alpha = 0.5;
  w.p = 4.0;
  w.q0 = 0.5;
  return w;
}

}  // namespace

Field radial_field(const Chart& chart, RadialFn frr) {
  const int n = chart.n;
  auto val = [frr, n](const Vec& x) {
    double f, df, ddf;
    frr(std::max(norm2(x, n), kRadiusFloor), &f, &df, &ddf);
    return f;
  };
  auto grad = [frr, n](const Vec& x) {
    double f, df, ddf;
    const double r = std::max(norm2(x, n), kRadiusFloor);
    frr(r, &f, &df, &ddf);
    const RadialJet rj = radial_jet(x, n, f, df, ddf);
    Vec g = vzero();
    for (int a = 0; a < n; ++a) g[a] = rj.d1[a];
    return g;
  };
  auto hess = [frr, n](const Vec& x) {
    double f, df, ddf;
    const double r = std::max(norm2(x, n), kRadiusFloor);
    frr(r, &f, &df, &ddf);
    const RadialJet rj = radial_jet(x, n, f, df, ddf);
    std::array<Vec, kMaxDim> h{vzero(), vzero(), vzero(), vzero()};
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) h[a][b] = rj.d2[a][b];
    return h;
  };
  return Field::analytic_full(chart, Rank{0, 0}, {val}, {grad}, {hess});
}

InitialDataSet make_euclidean(const Chart& chart) {
  InitialDataSet ids;
  ids.chart = chart;
  const int n = chart.n;
  std::vector<Field::ValueFn> vals(n * n);
  std::vector<Field::GradFn> grads(n * n);
  std::vector<Field::HessFn> hessians(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double dij = (i == j) ? 1.0 : 0.0;
      vals[i + n * j] = [dij](const Vec&) { return dij; };
      grads[i + n * j] = [](const Vec&) { return vzero(); };
      hessians[i + n * j] = [](const Vec&) {
        return std::array<Vec, kMaxDim>{vzero(), vzero(), vzero(), vzero()};
      };
    }
  ids.g = Field::analytic_full(chart, Rank{2, 0}, std::move(vals), std::move(grads),
                               std::move(hessians));
  ids.pi = Field::zero(chart, Rank{0, 2}, Symmetry::symmetric_pair);
  ids.type_params = default_weight();
  ids.flux_rate = 1.0;
  return ids;
}

InitialDataSet make_schwarzschild(const Chart& chart, double m) {
  if (!(m > 0.0)) fail("invalid-parameters", "schwarzschild mass must be positive");
  InitialDataSet ids;
  ids.chart = chart;
  const int n = chart.n;
  const double p = n - 2.0;
  ids.g = conformal_metric(chart, [m, p](double r, double* u, double* du, double* ddu) {
    *u = 1.0 + 0.5 * m * std::pow(r, -p);
    *du = -0.5 * m * p * std::pow(r, -p - 1.0);
    *ddu = 0.5 * m * p * (p + 1.0) * std::pow(r, -p - 2.0);
  });
  ids.pi = Field::zero(chart, Rank{0, 2}, Symmetry::symmetric_pair);
  ids.type_params = default_weight();
  ids.flux_rate = 1.0;  // E(r) = m (1 + m/2r)^3 for n = 3: leading correction r^{-1}
  return ids;
}

Field schwarzschild_lapse(const Chart& chart, double m) {
  if (chart.n != 3) fail("unsupported-dimension-for-family", "static lapse provided for n = 3");
  return radial_field(chart, [m](double r, double* f, double* df, double* ddf) {
    const double d = 2.0 * r + m;
    *f = (2.0 * r - m) / d;
    *df = 4.0 * m / (d * d);
    *ddf = -16.0 * m / (d * d * d);
  });
}

InitialDataSet make_bowen_york(const Chart& chart, const Vec& P) {
  if (chart.n != 3) fail("unsupported-dimension-for-family", "bowen_york is defined for n = 3");
  InitialDataSet ids;
  ids.chart = chart;
  ids.g = make_euclidean(chart).g;
  const int n = 3;
  std::vector<Field::ValueFn> vals(n * n);
  std::vector<Field::GradFn> grads(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      vals[i + n * j] = [P, i, j, n](const Vec& x) {
        const double r = std::max(norm2(x, n), kRadiusFloor);
        double Px = 0.0;
        for (int a = 0; a < n; ++a) Px += P[a] * x[a];
        const double dij = (i == j) ? 1.0 : 0.0;
        const double A = (P[i] * x[j] + P[j] * x[i] - dij * Px) / (r * r * r);
        const double B = x[i] * x[j] * Px / std::pow(r, 5);
        return 1.5 * (A + B);
      };
      grads[i + n * j] = [P, i, j, n](const Vec& x) {
        const double r = std::max(norm2(x, n), kRadiusFloor);
        double Px = 0.0;
        for (int a = 0; a < n; ++a) Px += P[a] * x[a];
        const double dij = (i == j) ? 1.0 : 0.0;
        const double r3 = r * r * r, r5 = std::pow(r, 5), r7 = std::pow(r, 7);
        Vec g = vzero();
        for (int a = 0; a < n; ++a) {
          const double dia = (i == a) ? 1.0 : 0.0;
          const double dja = (j == a) ? 1.0 : 0.0;
          const double numA = P[i] * x[j] + P[j] * x[i] - dij * Px;
          double dA = (P[i] * dja + P[j] * dia - dij * P[a]) / r3 - 3.0 * numA * x[a] / r5;
          double dB = (dia * x[j] + dja * x[i]) * Px / r5 + x[i] * x[j] * P[a] / r5 -
                      5.0 * x[i] * x[j] * Px * x[a] / r7;
          g[a] = 1.5 * (dA + dB);
        }
        return g;
      };
    }
  // grads-only analytic field: second derivatives of pi are never required
  // by the operator kernels
  {
    std::vector<Field::HessFn> hs(n * n);
    for (int c = 0; c < n * n; ++c)
      hs[c] = [](const Vec&) -> std::array<Vec, kMaxDim> {
        fail("insufficient-derivatives", "bowen_york momentum provides first-order jets only");
      };
    ids.pi = Field::analytic_full(chart, Rank{0, 2}, std::move(vals), std::move(grads),
                                  std::move(hs), Symmetry::none);
  }
  ids.type_params = default_weight();
  ids.flux_rate = 1.0;  // per-radius P flux is exactly constant; any rate fits
  return ids;
}

InitialDataSet make_conformal(const Chart& chart, double c, double k) {
  if (!(k > 0.0)) fail("invalid-parameters", "conformal exponent k must be positive");
  InitialDataSet ids;
  ids.chart = chart;
  ids.g = conformal_metric(chart, [c, k](double r, double* u, double* du, double* ddu) {
    *u = 1.0 + c * std::pow(r, -k);
    *du = -c * k * std::pow(r, -k - 1.0);
    *ddu = c * k * (k + 1.0) * std::pow(r, -k - 2.0);
  });
  ids.pi = Field::zero(chart, Rank{0, 2}, Symmetry::symmetric_pair);
  ids.type_params = default_weight();
  return ids;
}

Field bump_field(const Chart& chart, const Vec& center, double radius, double amplitude) {
  const int n = chart.n;
  auto eval = [center, radius, amplitude, n](const Vec& x, double* b, double* bs, double* bss,
                                             Vec* ds, std::array<Vec, kMaxDim>* dds) {
    double s = 0.0;
    for (int a = 0; a < n; ++a) s += (x[a] - center[a]) * (x[a] - center[a]);
    s /= radius * radius;
    if (s >= 1.0 - 1e-12) {
      *b = *bs = *bss = 0.0;
      if (ds) *ds = vzero();
      if (dds) *dds = {vzero(), vzero(), vzero(), vzero()};
      return;
    }
    const double om = 1.0 - s;
    const double e = amplitude * std::exp(1.0 - 1.0 / om);
    *b = e;
    *bs = -e / (om * om);
    *bss = e / (om * om * om * om) - 2.0 * e / (om * om * om);
    if (ds) {
      for (int a = 0; a < n; ++a) (*ds)[a] = 2.0 * (x[a] - center[a]) / (radius * radius);
    }
    if (dds) {
      for (int a = 0; a < n; ++a) {
        (*dds)[a] = vzero();
        (*dds)[a][a] = 2.0 / (radius * radius);
      }
    }
  };
  auto val = [eval](const Vec& x) {
    double b, bs, bss;
    eval(x, &b, &bs, &bss, nullptr, nullptr);
    return b;
  };
  auto grad = [eval, n](const Vec& x) {
    double b, bs, bss;
    Vec ds;
    std::array<Vec, kMaxDim> dds;
    eval(x, &b, &bs, &bss, &ds, &dds);
    Vec g = vzero();
    for (int a = 0; a < n; ++a) g[a] = bs * ds[a];
    return g;
  };
  auto hess = [eval, n](const Vec& x) {
    double b, bs, bss;
    Vec ds;
    std::array<Vec, kMaxDim> dds;
    eval(x, &b, &bs, &bss, &ds, &dds);
    std::array<Vec, kMaxDim> h{vzero(), vzero(), vzero(), vzero()};
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < n; ++c) h[a][c] = bss * ds[a] * ds[c] + bs * dds[a][c];
    return h;
  };
  return Field::analytic_full(chart, Rank{0, 0}, {val}, {grad}, {hess});
}

Field seeded_symmetric_bump(const Chart& chart, Rank rank, std::uint64_t seed, double amplitude,
                            double lo, double hi, int terms) {
  const int n = chart.n;
  if (rank.total() != 2) fail("incompatible-valence", "seeded bump directions are rank-2");
  auto rng = seeded_rng(seed);
  struct Term {
    Field bump;
    double coef[4][4];
  };
  auto shell_center = [&](std::mt19937_64& r) {
    // deterministic direction + radius inside the shell
    Vec d = vzero();
    double nrm = 0.0;
    for (int a = 0; a < n; ++a) {
      d[a] = uniform(r, -1.0, 1.0);
      nrm += d[a] * d[a];
    }
    nrm = std::sqrt(std::max(nrm, 1e-12));
    const double rad = uniform(r, lo, hi);
    for (int a = 0; a < n; ++a) d[a] = rad * d[a] / nrm;
    return d;
  };
  std::vector<Term> tl;
  const double width = std::min((hi - lo) * 0.45, 0.3 * (hi + lo));
  for (int t = 0; t < terms; ++t) {
    Term term;
    const Vec c = shell_center(rng);
    term.bump = bump_field(chart, c, width, 1.0);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) term.coef[i][j] = term.coef[j][i] = uniform(rng, -1.0, 1.0);
    tl.push_back(term);
  }
  std::vector<Field::ValueFn> vals(n * n);
  std::vector<Field::GradFn> grads(n * n);
  std::vector<Field::HessFn> hessians(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      vals[i + n * j] = [tl, i, j, amplitude](const Vec& x) {
        double s = 0.0;
        for (const auto& t : tl) s += t.coef[i][j] * t.bump.value(0, x);
        return amplitude * s;
      };
      grads[i + n * j] = [tl, i, j, amplitude, n](const Vec& x) {
        Vec g = vzero();
        for (const auto& t : tl) {
          const Jet bj = t.bump.jet(0, x, 1);
          for (int a = 0; a < n; ++a) g[a] += t.coef[i][j] * bj.d1[a];
        }
        for (int a = 0; a < n; ++a) g[a] *= amplitude;
        return g;
      };
      hessians[i + n * j] = [tl, i, j, amplitude, n](const Vec& x) {
        std::array<Vec, kMaxDim> h{vzero(), vzero(), vzero(), vzero()};
        for (const auto& t : tl) {
          const Jet bj = t.bump.jet(0, x, 2);
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) h[a][b] += t.coef[i][j] * bj.d2[a][b];
        }
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) h[a][b] *= amplitude;
        return h;
      };
    }
  return Field::analytic_full(chart, rank, std::move(vals), std::move(grads), std::move(hessians),
                              Symmetry::none);
}

void ramp_profile(double r, double r1, double r2, double* p, double* dp, double* ddp) {
  const double w = r2 - r1;
  const double t = (r - r1) / w;
  auto q = [](double t_) { return (t_ > 0.0) ? std::exp(-1.0 / t_) : 0.0; };
  if (t <= 1e-12) {
    *p = 0.0;
    *dp = 0.0;
    *ddp = 0.0;
    return;
  }
  if (t >= 1.0 - 1e-12) {
    *p = 1.0;
    *dp = 0.0;
    *ddp = 0.0;
    return;
  }
  const double Q = q(t), R = q(1.0 - t);
  const double Qp = Q / (t * t), Rp = -R / ((1.0 - t) * (1.0 - t));
  const double Qpp = Q * (1.0 - 2.0 * t) / (t * t * t * t);
  const double Rpp = R * (2.0 * t - 1.0) / std::pow(1.0 - t, 4);
  const double S = Q + R, Sp = Qp + Rp;
  *p = Q / S;
  const double num = Qp * R - Q * Rp;
  *dp = num / (S * S) / w;
  *ddp = ((Qpp * R - Q * Rpp) / (S * S) - 2.0 * num * Sp / (S * S * S)) / (w * w);
}

InitialDataSet make_perturbed(const Chart& chart, const DatasetManifest& manifest) {
  InitialDataSet base;
  if (manifest.base_family == "euclidean")
    base = make_euclidean(chart);
  else if (manifest.base_family == "schwarzschild")
    base = make_schwarzschild(chart, manifest.m);
  else if (manifest.base_family == "bowen_york")
    base = make_bowen_york(chart, manifest.P);
  else if (manifest.base_family == "conformal")
    base = make_conformal(chart, manifest.conformal_c, manifest.conformal_k);
  else
    fail("invalid-parameters", "perturbed base family '" + manifest.base_family + "' unknown");
  InitialDataSet ids = base;
  const Field dh = seeded_symmetric_bump(chart, Rank{2, 0}, manifest.seed, manifest.amplitude,
                                         manifest.support_lo, manifest.support_hi);
  const Field dw = seeded_symmetric_bump(chart, Rank{0, 2}, manifest.seed + 101, manifest.amplitude,
                                         manifest.support_lo, manifest.support_hi);
  ids.g = base.g.axpy(1.0, dh, 1.0);
  if (base.pi.has_derivatives(2)) {
    ids.pi = base.pi.axpy(1.0, dw, 1.0);
  } else {
    // keep first-order jets: combine by hand
    const int n = chart.n;
    const Field bp = base.pi;
    std::vector<Field::ValueFn> vals(n * n);
    std::vector<Field::GradFn> grads(n * n);
    std::vector<Field::HessFn> hessians(n * n);
    for (int c = 0; c < n * n; ++c) {
      vals[c] = [bp, dw, c](const Vec& x) { return bp.value(c, x) + dw.value(c, x); };
      grads[c] = [bp, dw, c, n](const Vec& x) {
        const Jet a = bp.jet(c, x, 1), b = dw.jet(c, x, 1);
        Vec g = vzero();
        for (int i = 0; i < n; ++i) g[i] = a.d1[i] + b.d1[i];
        return g;
      };
      hessians[c] = [](const Vec&) -> std::array<Vec, kMaxDim> {
        fail("insufficient-derivatives", "perturbed momentum provides first-order jets only");
      };
    }
    ids.pi = Field::analytic_full(chart, Rank{0, 2}, std::move(vals), std::move(grads),
                                  std::move(hessians), Symmetry::none);
  }
  return ids;
}

void DatasetManifest::validate() const {
  if (n < 3) fail("invalid-dimension", "manifest n must be >= 3");
  if (family == "schwarzschild" && !(m > 0.0))
    fail("invalid-parameters", "schwarzschild requires m > 0");
  if (family == "bowen_york") {
    for (int a = 0; a < n; ++a)
      if (!std::isfinite(P[a])) fail("invalid-parameters", "bowen_york momentum must be finite");
  }
  if (convention != "paper")
    fail("convention-not-paper",
         "only the paper pi-normalization is supported natively (got '" + convention + "')");
}

InitialDataSet generate(const DatasetManifest& manifest) {
  manifest.validate();
  Chart chart = manifest.chart;
  if (chart.n != manifest.n)
    fail("manifest-mismatch", "manifest n and chart n disagree");
  InitialDataSet ids;
  if (manifest.family == "euclidean")
    ids = make_euclidean(chart);
  else if (manifest.family == "schwarzschild")
    ids = make_schwarzschild(chart, manifest.m);
  else if (manifest.family == "bowen_york")
    ids = make_bowen_york(chart, manifest.P);
  else if (manifest.family == "conformal")
    ids = make_conformal(chart, manifest.conformal_c, manifest.conformal_k);
  else if (manifest.family == "perturbed")
    ids = make_perturbed(chart, manifest);
  else
    fail("invalid-parameters", "unknown family '" + manifest.family + "'");
  if (manifest.flux_rate > 0.0) ids.flux_rate = manifest.flux_rate;
  return ids;
}

}  // namespace adm
