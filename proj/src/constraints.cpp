#include "adm/constraints.hpp"

#include <cmath>

#include "adm/kernels.hpp"

namespace adm {

Field momentum_convert(const Field& data, const Field& g, MomentumDirection direction) {
  const Chart& chart = data.chart();
  const int n = chart.n;
  std::vector<Field::ValueFn> comps(n * n);
  if (direction == MomentumDirection::k_to_pi) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        comps[i + n * j] = [data, g, i, j, n](const Vec& x) {
          double kv[4][4];
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) kv[a][b] = data.value(a + n * b, x);
          const MetricJet full = metric_jet(g, x);
          double inv[4][4];
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) inv[a][b] = full.ginv[a][b];
          double trk = 0.0;
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) trk += inv[a][b] * kv[a][b];
          double kij = 0.0;
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) kij += inv[i][a] * inv[j][b] * kv[a][b];
          return kij - trk * inv[i][j];
        };
    return Field::analytic(chart, Rank{0, 2}, std::move(comps), Symmetry::symmetric_pair);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      comps[i + n * j] = [data, g, i, j, n](const Vec& x) {
        const MetricJet mj = metric_jet(g, x);
        double trpi = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) trpi += mj.g[a][b] * data.value(a + n * b, x);
        double kup[4][4];
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b)
            kup[a][b] = data.value(a + n * b, x) - trpi * mj.ginv[a][b] / (n - 1.0);
        double s = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) s += mj.g[i][a] * mj.g[j][b] * kup[a][b];
        return s;
      };
  return Field::analytic(chart, Rank{2, 0}, std::move(comps), Symmetry::symmetric_pair);
}

MassCurrent mass_current(const InitialDataSet& ids) {
  const Chart& chart = ids.chart;
  const int n = chart.n;
  const Field g = ids.g, pi = ids.pi;
  MassCurrent mc;
  mc.mu = Field::analytic(chart, Rank{0, 0}, {[g, pi](const Vec& x) {
                            const MetricJet G = metric_jet(g, x);
                            const MomentumJet P = momentum_jet(pi, x);
                            double mu;
                            mass_current_at(G, P, &mu, nullptr);
                            return mu;
                          }});
  std::vector<Field::ValueFn> jc(n);
  for (int i = 0; i < n; ++i)
    jc[i] = [g, pi, i](const Vec& x) {
      const MetricJet G = metric_jet(g, x);
      const MomentumJet P = momentum_jet(pi, x);
      double J[4];
      mass_current_at(G, P, nullptr, J);
      return J[i];
    };
  mc.J = Field::analytic(chart, Rank{0, 1}, std::move(jc));
  return mc;
}

std::pair<Field, Field> constraint_map(const InitialDataSet& ids,
                                       const std::pair<Field, Field>& target,
                                       ConstraintVariant variant) {
  const Chart& chart = ids.chart;
  const int n = chart.n;
  const Field gamma = target.first, tau = target.second;
  const Field gbase = ids.g, pibase = ids.pi;

  Field slot1 = Field::analytic(chart, Rank{0, 0}, {[gamma, tau](const Vec& x) {
                                  const MetricJet G = metric_jet(gamma, x);
                                  if (!G.spd)
                                    fail("metric-not-positive-definite",
                                         "target metric not positive definite at sample point");
                                  const MomentumJet P = momentum_jet(tau, x);
                                  double mu;
                                  mass_current_at(G, P, &mu, nullptr);
                                  return 2.0 * mu;
                                }});
  std::vector<Field::ValueFn> jc(n);
  const bool modified = variant == ConstraintVariant::modified;
  for (int i = 0; i < n; ++i)
    jc[i] = [gamma, tau, gbase, pibase, modified, i, n](const Vec& x) {
      const MetricJet G = metric_jet(gamma, x);
      const MomentumJet P = momentum_jet(tau, x);
      double J[4];
      mass_current_at(G, P, nullptr, J);
      double v = J[i];
      if (modified) {
        const MetricJet GB = metric_jet(gbase, x);
        const MomentumJet PB = momentum_jet(pibase, x);
        double Jb[4];
        mass_current_at(GB, PB, nullptr, Jb);
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            v += 0.5 * GB.ginv[i][j] * gamma.value(j + n * k, x) * Jb[k];
      }
      return v;
    };
  Field slot2 = Field::analytic(chart, Rank{0, 1}, std::move(jc));
  return {slot1, slot2};
}

Field dec_margin(const InitialDataSet& ids) {
  const Field g = ids.g, pi = ids.pi;
  const int n = ids.chart.n;
  return Field::analytic(ids.chart, Rank{0, 0}, {[g, pi, n](const Vec& x) {
                           const MetricJet G = metric_jet(g, x);
                           const MomentumJet P = momentum_jet(pi, x);
                           double mu, J[4];
                           mass_current_at(G, P, &mu, J);
                           double jn = 0.0;
                           for (int i = 0; i < n; ++i)
                             for (int j = 0; j < n; ++j) jn += G.g[i][j] * J[i] * J[j];
                           return mu - std::sqrt(std::max(jn, 0.0));
                         }});
}

DecVerdict dec_check(const InitialDataSet& ids, double tolerance, int layers) {
  const Chart& chart = ids.chart;
  const Field margin = dec_margin(ids);
  const double pad = layers * chart.fd_order / 2 * chart.h();
  DecVerdict v;
  v.min_margin = 1e300;
  const std::size_t count = chart.node_count();
  for (std::size_t f = 0; f < count; ++f) {
    const Vec x = chart.node_point(chart.multi_index(f));
    if (!chart.in_annulus(x, pad, pad)) continue;
    const double m = margin.value(0, x);
    if (m < v.min_margin) {
      v.min_margin = m;
      v.worst_node = x;
    }
  }
  v.pass = v.min_margin >= -tolerance;
  return v;
}

DecTransport dec_transport_check(const Field& g, const Field& J, const Field& h) {
  const Chart& chart = g.chart();
  const int n = chart.n;
  // hypothesis scan: |h|_g < 3 at every annulus node
  {
    double worst = 0.0;
    Vec worst_x = vzero();
    const std::size_t count = chart.node_count();
    for (std::size_t f = 0; f < count; ++f) {
      const Vec x = chart.node_point(chart.multi_index(f));
      if (!chart.in_annulus(x)) continue;
      const MetricJet G = metric_jet(g, x);
      double hn = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
              hn += G.ginv[i][a] * G.ginv[j][b] * h.value(i + n * j, x) * h.value(a + n * b, x);
      hn = std::sqrt(std::max(hn, 0.0));
      if (hn > worst) {
        worst = hn;
        worst_x = x;
      }
    }
    if (worst >= 3.0)
      fail("h-too-large", "|h|_g = " + std::to_string(worst) +
                              " >= 3 at a node; the hypothesis |gamma - g|_g < 3 fails");
  }

  DecTransport out;
  out.jbar_normsq = Field::analytic(chart, Rank{0, 0}, {[g, J, h, n](const Vec& x) {
                                      const MetricJet G = metric_jet(g, x);
                                      double Jv[4], hJ[4];
                                      for (int i = 0; i < n; ++i) Jv[i] = J.value(i, x);
                                      for (int i = 0; i < n; ++i) {
                                        double s = 0.0;
                                        for (int j = 0; j < n; ++j)
                                          for (int k = 0; k < n; ++k)
                                            s += G.ginv[i][j] * h.value(j + n * k, x) * Jv[k];
                                        hJ[i] = s;
                                      }
                                      double j2 = 0.0, hj2 = 0.0, cross = 0.0;
                                      for (int i = 0; i < n; ++i)
                                        for (int j = 0; j < n; ++j) {
                                          j2 += G.g[i][j] * Jv[i] * Jv[j];
                                          hj2 += G.g[i][j] * hJ[i] * hJ[j];
                                          cross += h.value(i + n * j, x) * hJ[i] * hJ[j];
                                        }
                                      return j2 - 0.75 * hj2 + 0.25 * cross;
                                    }});
  // nodewise bound |Jbar|^2_gamma <= |J|^2_g
  const std::size_t count = chart.node_count();
  double scale = 0.0;
  for (std::size_t f = 0; f < count; ++f) {
    const Vec x = chart.node_point(chart.multi_index(f));
    if (!chart.in_annulus(x)) continue;
    const MetricJet G = metric_jet(g, x);
    double Jv[4];
    double j2 = 0.0;
    for (int i = 0; i < n; ++i) Jv[i] = J.value(i, x);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) j2 += G.g[i][j] * Jv[i] * Jv[j];
    const double chain = out.jbar_normsq.value(0, x);
    const double excess = chain - j2;
    scale = std::max(scale, std::abs(j2));
    if (excess > out.worst_excess) out.worst_excess = excess;
  }
  out.bound_ok = out.worst_excess <= 1e-12 * std::max(1.0, scale);
  return out;
}

}  // namespace adm
