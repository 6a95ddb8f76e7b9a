#include "adm/hamiltonian.hpp"

#include <cmath>

#include "adm/families.hpp"
#include "adm/kernels.hpp"
#include "adm/quadrature.hpp"

namespace adm {

LapseShiftPair reference_pair(double a, const Vec& b, const Chart& chart,
                              double transition_radius) {
  if (!(transition_radius > chart.r_inner) || !(transition_radius < chart.r_outer))
    fail("invalid-transition-radius", "transition radius must lie strictly inside the chart");
  const double r1 = chart.r_inner, r2 = transition_radius;
  auto profile = [r1, r2](double r, double* p, double* dp, double* ddp) {
    ramp_profile(r, r1, r2, p, dp, ddp);
  };
  LapseShiftPair out;
  {
    const Field ramp = radial_field(chart, profile);
    out.f = ramp.axpy(a, Field::zero(chart, Rank{0, 0}), 0.0);
  }
  {
    const int n = chart.n;
    const Field ramp = radial_field(chart, profile);
    std::vector<Field::ValueFn> v(n);
    std::vector<Field::GradFn> g(n);
    std::vector<Field::HessFn> hs(n);
    for (int i = 0; i < n; ++i) {
      const double bi = b[i];
      v[i] = [ramp, bi](const Vec& x) { return bi * ramp.value(0, x); };
      g[i] = [ramp, bi, n](const Vec& x) {
        const Jet j = ramp.jet(0, x, 1);
        Vec out2 = vzero();
        for (int a2 = 0; a2 < n; ++a2) out2[a2] = bi * j.d1[a2];
        return out2;
      };
      hs[i] = [ramp, bi, n](const Vec& x) {
        const Jet j = ramp.jet(0, x, 2);
        std::array<Vec, kMaxDim> out2{vzero(), vzero(), vzero(), vzero()};
        for (int a2 = 0; a2 < n; ++a2)
          for (int b2 = 0; b2 < n; ++b2) out2[a2][b2] = bi * j.d2[a2][b2];
        return out2;
      };
    }
    out.X = Field::analytic_full(chart, Rank{0, 1}, std::move(v), std::move(g), std::move(hs));
  }
  out.has_asymptote = true;
  out.a = a;
  out.b = b;
  return out;
}

namespace {

// Integrand of the volume form (times sqrt(det g_base)).
double volume_integrand(const InitialDataSet& base, const LapseShiftPair& ref,
                        const std::pair<Field, Field>& target, const Vec& x) {
  const int n = base.chart.n;
  const Field gamma = target.first, tau = target.second;
  const MetricJet G = metric_jet(base.g, x);
  const MetricJet Gt = metric_jet(gamma, x);
  const MomentumJet Pt = momentum_jet(tau, x);
  const MomentumJet Pb = momentum_jet(base.pi, x);

  // xi_j = gamma_{ij,i} - gamma_{ii,j} and its coordinate derivatives
  double xi[4] = {}, dxi[4][4] = {};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      xi[j] += Gt.dg[i][j][i] - Gt.dg[i][i][j];
      for (int k = 0; k < n; ++k) dxi[j][k] += Gt.ddg[i][j][i][k] - Gt.ddg[i][i][j][k];
    }
  double divxi = 0.0;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      double cov = dxi[j][k];
      for (int m = 0; m < n; ++m) cov -= G.gamma[m][j][k] * xi[m];
      divxi += G.ginv[j][k] * cov;
    }

  // div_g tau (base-metric divergence)
  double divtau[4];
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      s += Pt.dpi[i][j][j];
      for (int p = 0; p < n; ++p)
        s += G.gamma[i][j][p] * Pt.pi[p][j] + G.gamma[j][j][p] * Pt.pi[i][p];
    }
    divtau[i] = s;
  }

  // Phi(gamma, tau) = (2 mu, J) of the target
  double mu_t, J_t[4];
  mass_current_at(Gt, Pt, &mu_t, J_t);

  // baseline current J = div_g pi and the correction (1/2) gamma . J
  double Jb[4];
  mass_current_at(G, Pb, nullptr, Jb);
  double corrv[4];
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) s += 0.5 * G.ginv[i][j] * Gt.g[j][k] * Jb[k];
    corrv[i] = s;
  }

  const Jet f0 = ref.f.jet(0, x, 1);
  double X0[4];
  Jet X0j[4];
  for (int i = 0; i < n; ++i) {
    X0j[i] = ref.X.jet(i, x, 1);
    X0[i] = X0j[i].v;
  }

  double I1 = (divxi - 2.0 * mu_t) * f0.v;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) I1 += G.g[i][j] * (divtau[i] - J_t[i] - corrv[i]) * X0[j];

  double I2 = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) I2 += G.ginv[i][j] * xi[i] * f0.d1[j];
  // tau^{ij} g_{jk} X0^k_{;i}
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double xkji = 0.0;
      for (int k = 0; k < n; ++k) {
        double cov = X0j[k].d1[i];
        for (int p = 0; p < n; ++p) cov += G.gamma[k][i][p] * X0[p];
        xkji += G.g[j][k] * cov;
      }
      I2 += Pt.pi[i][j] * xkji;
    }
  return (I1 + I2) * G.sqrtdet;
}

}  // namespace

HamiltonianValue hamiltonian_value(const HamiltonianSpec& spec,
                                   const std::pair<Field, Field>& target, int quad_order,
                                   int radial_panels) {
  const InitialDataSet& base = spec.base;
  const Chart& chart = base.chart;
  const int n = chart.n;
  HamiltonianValue out;

  // volume form over the annulus, with radial breaks at the transition zone
  out.value = annulus_integral(
      n, chart.r_inner, chart.r_outer,
      [&](const Vec& x) { return volume_integrand(base, spec.reference, target, x); }, quad_order,
      radial_panels, {spec.transition_radius});

  // inner-boundary flux correction of the divergence-theorem identity
  {
    const double r_in = chart.r_inner * (1.0 + 1e-9);
    out.inner_correction = sphere_integral(n, r_in, [&](const Vec& x) {
      const double rr = norm2(x, n);
      const MetricJet G = metric_jet(base.g, x);
      const MetricJet Gt = metric_jet(target.first, x);
      const MomentumJet Pt = momentum_jet(target.second, x);
      double xi[4] = {};
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) xi[j] += Gt.dg[i][j][i] - Gt.dg[i][i][j];
      const double f0 = spec.reference.f.value(0, x);
      double flux = 0.0;
      for (int i = 0; i < n; ++i) {
        double Fi = 0.0;
        for (int j = 0; j < n; ++j) Fi += G.ginv[i][j] * xi[j] * f0;
        for (int j = 0; j < n; ++j) {
          double X0l = 0.0;
          for (int k = 0; k < n; ++k) X0l += G.g[j][k] * spec.reference.X.value(k, x);
          Fi += Pt.pi[i][j] * X0l;
        }
        flux += Fi * (x[i] / rr);
      }
      return flux * G.sqrtdet;
    }, quad_order);
    out.value += out.inner_correction;
  }

  // surface form: ADM term of the target minus the Phibar pairing
  {
    InitialDataSet tgt = base;
    tgt.g = target.first;
    tgt.pi = target.second;
    const double R = chart.r_outer;
    const ADMCharges ch = adm_charges(tgt, {R / 8.0, R / 4.0, R / 2.0}, quad_order);
    out.E = ch.E;
    out.P = ch.P;
    double bP = 0.0;
    for (int i = 0; i < n; ++i) bP += spec.reference.b[i] * ch.P[i];
    const double adm_term =
        (n - 1.0) * unit_sphere_volume(n) * (2.0 * spec.reference.a * ch.E + bP);

    const double pairing = annulus_integral(
        n, chart.r_inner, chart.r_outer,
        [&](const Vec& x) {
          const MetricJet G = metric_jet(base.g, x);
          const MetricJet Gt = metric_jet(target.first, x);
          const MomentumJet Pt = momentum_jet(target.second, x);
          const MomentumJet Pb = momentum_jet(base.pi, x);
          double mu_t, J_t[4], Jb[4];
          mass_current_at(Gt, Pt, &mu_t, J_t);
          mass_current_at(G, Pb, nullptr, Jb);
          double s = 2.0 * mu_t * spec.reference.f.value(0, x);
          for (int i = 0; i < n; ++i) {
            double slot2 = J_t[i];
            for (int j = 0; j < n; ++j)
              for (int k = 0; k < n; ++k)
                slot2 += 0.5 * G.ginv[i][j] * Gt.g[j][k] * Jb[k];
            for (int j = 0; j < n; ++j)
              s += G.g[i][j] * slot2 * spec.reference.X.value(j, x);
          }
          return s * G.sqrtdet;
        },
        quad_order, radial_panels, {spec.transition_radius});
    out.surface_form = adm_term - pairing;
  }
  return out;
}

double hamiltonian_gradient_pairing(const HamiltonianSpec& spec, const SymPair& dir) {
  const InitialDataSet& base = spec.base;
  const Chart& chart = base.chart;
  const int n = chart.n;
  double lo, hi;
  direction_support(dir, &lo, &hi);
  if (hi < 0.0) return 0.0;
  const double pad = 2.0 * chart.h();
  const double rlo = std::max(lo - pad, chart.r_inner);
  const double rhi = std::min(hi + pad, chart.r_outer);
  const int panels = std::max(24, static_cast<int>((rhi - rlo) / (0.5 * chart.h())));
  const double total = annulus_integral(
      n, rlo, rhi,
      [&](const Vec& x) { return adjoint_pairing_integrand(base, spec.reference, dir, x); }, 32,
      panels);
  return -total;
}

double stationarity_residual(const HamiltonianSpec& spec, const LapseShiftPair& multiplier,
                             int batch, std::uint64_t seed) {
  const InitialDataSet& base = spec.base;
  const Chart& chart = base.chart;
  const int n = chart.n;
  const double R = chart.r_outer;
  double worst = 0.0;
  for (int k = 0; k < batch; ++k) {
    const SymPair dir{
        seeded_symmetric_bump(chart, Rank{2, 0}, seed + 2 * k, 1.0, 0.35 * R, 0.6 * R),
        seeded_symmetric_bump(chart, Rank{0, 2}, seed + 2 * k + 1, 1.0, 0.35 * R, 0.6 * R)};
    const double dh = hamiltonian_gradient_pairing(spec, dir);
    double lo, hi;
    direction_support(dir, &lo, &hi);
    const double pad = 2.0 * chart.h();
    const double rlo = std::max(lo - pad, chart.r_inner);
    const double rhi = std::min(hi + pad, chart.r_outer);
    const int panels = std::max(24, static_cast<int>((rhi - rlo) / (0.5 * chart.h())));
    const double s = annulus_integral(
        n, rlo, rhi,
        [&](const Vec& x) { return linearize_pairing_integrand(base, multiplier, dir, x); }, 32,
        panels);
    const double nrm = dir_l2_norm(base, dir);
    if (nrm == 0.0) continue;
    worst = std::max(worst, std::abs(dh - s) / nrm);
  }
  return worst;
}

}  // namespace adm
