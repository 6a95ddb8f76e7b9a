#include "adm/charges.hpp"

#include <algorithm>
#include <cmath>

#include "adm/kernels.hpp"
#include "adm/quadrature.hpp"

namespace adm {

std::pair<double, double> extrapolate_flux(const std::vector<std::pair<double, double>>& values,
                                           double model_rate) {
  const int m = static_cast<int>(values.size());
  if (m < 3) fail("too-few-radii", "extrapolation needs at least 3 samples");
  {
    bool distinct = false;
    for (int i = 1; i < m; ++i)
      if (values[i].first != values[0].first) distinct = true;
    if (!distinct) fail("degenerate-fit", "all sample radii are equal");
  }
  const double s = model_rate;
  // normal equations for basis {1, r^-s, r^-s-1} with column scaling
  double col_scale[3] = {1.0, 0.0, 0.0};
  for (const auto& [r, y] : values) {
    col_scale[1] = std::max(col_scale[1], std::pow(r, -s));
    col_scale[2] = std::max(col_scale[2], std::pow(r, -s - 1.0));
  }
  double A[3][3] = {};
  double b[3] = {};
  for (const auto& [r, y] : values) {
    const double phi[3] = {1.0, std::pow(r, -s) / col_scale[1],
                           std::pow(r, -s - 1.0) / col_scale[2]};
    for (int i = 0; i < 3; ++i) {
      b[i] += phi[i] * y;
      for (int j = 0; j < 3; ++j) A[i][j] += phi[i] * phi[j];
    }
  }
  // solve 3x3 by elimination with partial pivoting
  double M[3][4];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) M[i][j] = A[i][j];
    M[i][3] = b[i];
  }
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r2 = c + 1; r2 < 3; ++r2)
      if (std::abs(M[r2][c]) > std::abs(M[piv][c])) piv = r2;
    if (M[piv][c] == 0.0) fail("degenerate-fit", "singular normal equations");
    if (piv != c)
      for (int j = 0; j < 4; ++j) std::swap(M[piv][j], M[c][j]);
    for (int r2 = 0; r2 < 3; ++r2) {
      if (r2 == c) continue;
      const double f = M[r2][c] / M[c][c];
      for (int j = 0; j < 4; ++j) M[r2][j] -= f * M[c][j];
    }
  }
  const double coef[3] = {M[0][3] / M[0][0], M[1][3] / M[1][1], M[2][3] / M[2][2]};
  double maxdev = 0.0;
  for (const auto& [r, y] : values) {
    const double fit = coef[0] + coef[1] * std::pow(r, -s) / col_scale[1] +
                       coef[2] * std::pow(r, -s - 1.0) / col_scale[2];
    maxdev = std::max(maxdev, std::abs(fit - y));
  }
  const double spread = std::abs(values[m - 1].second - values[m - 2].second);
  return {coef[0], maxdev + spread};
}

ADMCharges adm_charges(const InitialDataSet& ids, const std::vector<double>& radii,
                       int quad_order) {
  const Chart& chart = ids.chart;
  const int n = chart.n;
  if (static_cast<int>(radii.size()) < 3)
    fail("too-few-radii", "adm_charges needs at least 3 radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (radii[i] <= chart.r_inner || radii[i] >= chart.r_outer)
      fail("radii-out-of-chart", "radius " + std::to_string(radii[i]) + " not inside the chart");
    if (i > 0 && radii[i] <= radii[i - 1])
      fail("invalid-parameters", "radii must be strictly increasing");
  }
  const double omega = unit_sphere_volume(n);
  const Field g = ids.g, pi = ids.pi;

  ADMCharges out;
  out.radii_used = radii;
  std::vector<std::pair<double, double>> Eseries;
  std::vector<std::vector<std::pair<double, double>>> Pseries(n);
  for (double r : radii) {
    const double eflux = sphere_integral(n, r, [&](const Vec& x) {
      const double rr = norm2(x, n);
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const Jet gij = g.jet(i + n * j, x, 1);
          // accumulate (g_{ij,i} - g_{ii,j}) nu^j using one jet per (i,j)
          s += gij.d1[i] * (x[j] / rr);
          if (i == j) {
            for (int k = 0; k < n; ++k) s -= gij.d1[k] * (x[k] / rr);
          }
        }
      return s;
    }, quad_order);
    const double Er = eflux / (2.0 * (n - 1.0) * omega);
    Eseries.push_back({r, Er});
    out.E_at_radius.push_back(Er);

    std::array<double, 4> Pr{};
    for (int i = 0; i < n; ++i) {
      const double pflux = sphere_integral(n, r, [&](const Vec& x) {
        const double rr = norm2(x, n);
        const MetricJet G = metric_jet(g, x);
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
          double pil = 0.0;  // pi_{ij}
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) pil += G.g[i][a] * G.g[j][b] * pi.value(a + n * b, x);
          s += pil * (x[j] / rr);
        }
        return s;
      }, quad_order);
      Pr[i] = pflux / ((n - 1.0) * omega);
      Pseries[i].push_back({r, Pr[i]});
    }
    out.P_at_radius.push_back(Pr);
  }

  const double rate = (ids.flux_rate > 0.0) ? ids.flux_rate : ids.type_params.q;
  auto [E, E_err] = extrapolate_flux(Eseries, rate);
  out.E = E;
  out.E_err = E_err;
  for (int i = 0; i < n; ++i) {
    auto [Pi, Pi_err] = extrapolate_flux(Pseries[i], rate);
    out.P[i] = Pi;
    out.P_err[i] = Pi_err;
  }
  return out;
}

FluxIdentityReport flux_identity_suite(const Field& T_or_f, double radius, int quad_order) {
  const Chart& chart = T_or_f.chart();
  const int n = chart.n;
  if (radius <= chart.r_inner || radius >= chart.r_outer)
    fail("radius-out-of-chart", "identity radius outside the chart");
  FluxIdentityReport rep;
  const Field F = T_or_f;

  if (F.rank().total() == 2) {
    rep.tensor_mode = true;
    rep.lemma_defect = sphere_integral(n, radius, [&](const Vec& x) {
      const double rr = norm2(x, n);
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const Jet tij = F.jet(i + n * j, x, 1);
          const Jet tji = F.jet(j + n * i, x, 1);
          s += (tij.d1[j] - tji.d1[j]) * (x[i] / rr);
        }
      return s;
    }, quad_order);
    return rep;
  }
  if (F.rank().total() != 0)
    fail("incompatible-valence", "flux_identity_suite takes a scalar or a 2-tensor");

  // first corollary identity, per j
  for (int j = 0; j < n; ++j) {
    const double lhs = sphere_integral(n, radius, [&](const Vec& x) {
      const double rr = norm2(x, n);
      const Jet fj = F.jet(0, x, 2);
      double lap = 0.0;
      for (int a = 0; a < n; ++a) lap += fj.d2[a][a];
      return lap * (x[j] / rr);
    }, quad_order);
    const double rhs = sphere_integral(n, radius, [&](const Vec& x) {
      const double rr = norm2(x, n);
      const Jet fj = F.jet(0, x, 2);
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += fj.d2[i][j] * (x[i] / rr);
      return s;
    }, quad_order);
    rep.corollary1_lhs[j] = lhs;
    rep.corollary1_defect[j] = lhs - rhs;
  }

  // second corollary identity
  {
    const double lhs = sphere_integral(n, radius, [&](const Vec& x) {
      const Jet fj = F.jet(0, x, 2);
      double lap = 0.0;
      for (int a = 0; a < n; ++a) lap += fj.d2[a][a];
      return norm2(x, n) * lap;  // (x . nu) = |x| on the sphere
    }, quad_order);
    const double rhs = sphere_integral(n, radius, [&](const Vec& x) {
      const double rr = norm2(x, n);
      const Jet fj = F.jet(0, x, 2);
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        double t = (n - 1.0) * fj.d1[i];
        for (int j = 0; j < n; ++j) t += fj.d2[i][j] * x[j];
        s += t * (x[i] / rr);
      }
      return s;
    }, quad_order);
    rep.corollary2_defect = lhs - rhs;
  }
  return rep;
}

}  // namespace adm
