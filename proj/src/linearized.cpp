#include "adm/linearized.hpp"

#include <cmath>

namespace adm {

namespace {

// Lowered covariant derivative of a symmetric (2,0) tensor given its jets:
// out[i][j][k] = (g_{ia} g_{jb} t^{ab})_{;k} = g_{ia} g_{jb} t^{ab}_{;k}.
void lowered_cov_deriv(const MetricJet& G, const double t[4][4], const double dt[4][4][4],
                       double out[4][4][4]) {
  const int n = G.n;
  double covd[4][4][4];
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int k = 0; k < n; ++k) {
        double s = dt[a][b][k];
        for (int p = 0; p < n; ++p)
          s += G.gamma[a][k][p] * t[p][b] + G.gamma[b][k][p] * t[a][p];
        covd[a][b][k] = s;
      }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) s += G.g[i][a] * G.g[j][b] * covd[a][b][k];
        out[i][j][k] = s;
      }
}

struct PairJets {
  double f, fd1[4], fd2[4][4];
  double X[4], dX[4][4], ddX[4][4][4];  // ddX[c][j][k] = X^c_{,jk}
};

PairJets pair_jets(const LapseShiftPair& p, const Vec& x, bool need_ddX) {
  PairJets out{};
  const int n = p.f.chart().n;
  const Jet fj = p.f.jet(0, x, 2);
  out.f = fj.v;
  for (int a = 0; a < n; ++a) {
    out.fd1[a] = fj.d1[a];
    for (int b = 0; b < n; ++b) out.fd2[a][b] = fj.d2[a][b];
  }
  for (int c = 0; c < n; ++c) {
    const Jet xj = p.X.jet(c, x, need_ddX ? 2 : 1);
    out.X[c] = xj.v;
    for (int a = 0; a < n; ++a) {
      out.dX[c][a] = xj.d1[a];
      if (need_ddX)
        for (int b = 0; b < n; ++b) out.ddX[c][a][b] = xj.d2[a][b];
    }
  }
  return out;
}

// Shared X-dependent blocks of the adjoint.
struct AdjointBlocks {
  double J[4], Jlow[4], Xlow[4];
  double pilow[4][4], pimix[4][4];  // pi_{ij}, pi^i_j
  double trpi, normsq;
  double LXpi_low[4][4];
  double divX, XkmPi, gXJ;
  double M[4][4], trM;
};

AdjointBlocks adjoint_blocks(const MetricJet& G, const MomentumJet& P, const PairJets& q) {
  AdjointBlocks B{};
  const int n = G.n;
  mass_current_at(G, P, nullptr, B.J);
  B.trpi = 0.0;
  B.normsq = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      B.trpi += G.g[i][j] * P.pi[i][j];
      double low = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) low += G.g[i][a] * G.g[j][b] * P.pi[a][b];
      B.pilow[i][j] = low;
      double mix = 0.0;
      for (int a = 0; a < n; ++a) mix += P.pi[i][a] * G.g[a][j];
      B.pimix[i][j] = mix;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B.normsq += B.pilow[i][j] * P.pi[i][j];

  for (int i = 0; i < n; ++i) {
    double xl = 0.0, jl = 0.0;
    for (int a = 0; a < n; ++a) {
      xl += G.g[i][a] * q.X[a];
      jl += G.g[i][a] * B.J[a];
    }
    B.Xlow[i] = xl;
    B.Jlow[i] = jl;
  }

  double LXpi[4][4];
  for (int l = 0; l < n; ++l)
    for (int m = 0; m < n; ++m) {
      double s = 0.0;
      for (int k = 0; k < n; ++k)
        s += q.X[k] * P.dpi[l][m][k] - P.pi[k][m] * q.dX[l][k] - P.pi[l][k] * q.dX[m][k];
      LXpi[l][m] = s;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m) s += G.g[i][l] * G.g[j][m] * LXpi[l][m];
      B.LXpi_low[i][j] = s;
    }

  B.divX = 0.0;
  for (int i = 0; i < n; ++i) {
    B.divX += q.dX[i][i];
    for (int p2 = 0; p2 < n; ++p2) B.divX += G.gamma[i][i][p2] * q.X[p2];
  }

  // X_{k;m} pi^{km} with X lowered
  B.XkmPi = 0.0;
  for (int k = 0; k < n; ++k)
    for (int m = 0; m < n; ++m) {
      double dxl = 0.0;
      for (int c = 0; c < n; ++c) dxl += G.dg[k][c][m] * q.X[c] + G.g[k][c] * q.dX[c][m];
      for (int l = 0; l < n; ++l) dxl -= G.gamma[l][k][m] * B.Xlow[l];
      B.XkmPi += dxl * P.pi[k][m];
    }

  B.gXJ = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B.gXJ += G.g[i][j] * q.X[i] * B.J[j];

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      B.M[i][j] = B.LXpi_low[i][j] + B.divX * B.pilow[i][j] -
                  (B.XkmPi + B.gXJ) * G.g[i][j];
  B.trM = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B.trM += G.ginv[i][j] * B.M[i][j];
  return B;
}

void adjoint_at_point(const MetricJet& G, const MomentumJet& P, const PairJets& q, bool modified,
                      double out1[4][4], double out2[4][4]) {
  const int n = G.n;
  const AdjointBlocks B = adjoint_blocks(G, P, q);

  double hessf[4][4];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = q.fd2[i][j];
      for (int c = 0; c < n; ++c) s -= G.gamma[c][i][j] * q.fd1[c];
      hessf[i][j] = s;
    }
  double lapf = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) lapf += G.ginv[i][j] * hessf[i][j];

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = -lapf * G.g[i][j] + hessf[i][j] - q.f * G.ric[i][j];
      double pipi = 0.0;
      for (int k = 0; k < n; ++k) pipi += B.pilow[i][k] * B.pimix[k][j];
      v += (2.0 / (n - 1.0) * B.trpi * B.pilow[i][j] - 2.0 * pipi) * q.f;
      v += 0.5 * B.M[i][j];
      if (modified) v += 0.25 * (B.Xlow[i] * B.Jlow[j] + B.Xlow[j] * B.Jlow[i]);
      out1[i][j] = v;
    }

  double lxg[4][4];
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double s = 0.0;
      for (int k = 0; k < n; ++k)
        s += q.X[k] * G.dg[a][b][k] + G.g[k][b] * q.dX[k][a] + G.g[a][k] * q.dX[k][b];
      lxg[a][b] = s;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double up = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) up += G.ginv[i][a] * G.ginv[j][b] * lxg[a][b];
      out2[i][j] = -0.5 * up + (2.0 / (n - 1.0) * B.trpi * G.ginv[i][j] - 2.0 * P.pi[i][j]) * q.f;
    }
}

}  // namespace

DirJets dir_jets(const SymPair& dir, const Vec& x) {
  DirJets d{};
  const int n = dir.h.chart().n;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const Jet hj = dir.h.jet(i + n * j, x, 2);
      d.h[i][j] = d.h[j][i] = hj.v;
      for (int a = 0; a < n; ++a) {
        d.dh[i][j][a] = d.dh[j][i][a] = hj.d1[a];
        for (int b = 0; b < n; ++b) d.ddh[i][j][a][b] = d.ddh[j][i][a][b] = hj.d2[a][b];
      }
      const Jet wj = dir.w.jet(i + n * j, x, 1);
      d.w[i][j] = d.w[j][i] = wj.v;
      for (int a = 0; a < n; ++a) d.dw[i][j][a] = d.dw[j][i][a] = wj.d1[a];
    }
  return d;
}

void linearize_at_point(const MetricJet& G, const MomentumJet& P, const DirJets& dir,
                        const BaseCorrection& corr, double out[1 + kMaxDim]) {
  const int n = G.n;

  double trh = 0.0, dtrh[4] = {}, ddtrh[4][4] = {};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      trh += G.ginv[i][j] * dir.h[i][j];
      for (int a = 0; a < n; ++a) {
        dtrh[a] += G.dginv[i][j][a] * dir.h[i][j] + G.ginv[i][j] * dir.dh[i][j][a];
        for (int b = 0; b < n; ++b)
          ddtrh[a][b] += G.ddginv[i][j][a][b] * dir.h[i][j] +
                         G.dginv[i][j][a] * dir.dh[i][j][b] +
                         G.dginv[i][j][b] * dir.dh[i][j][a] + G.ginv[i][j] * dir.ddh[i][j][a][b];
      }
    }
  double lap_trh = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double s = ddtrh[a][b];
      for (int c = 0; c < n; ++c) s -= G.gamma[c][a][b] * dtrh[c];
      lap_trh += G.ginv[a][b] * s;
    }

  double A[4][4][4];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = dir.dh[i][j][k];
        for (int m = 0; m < n; ++m)
          s -= G.gamma[m][i][k] * dir.h[m][j] + G.gamma[m][j][k] * dir.h[i][m];
        A[i][j][k] = s;
      }
  double divdiv = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double dA = dir.ddh[i][j][k][l];
          for (int m = 0; m < n; ++m)
            dA -= G.dgamma[l][m][i][k] * dir.h[m][j] + G.gamma[m][i][k] * dir.dh[m][j][l] +
                  G.dgamma[l][m][j][k] * dir.h[i][m] + G.gamma[m][j][k] * dir.dh[i][m][l];
          double B = dA;
          for (int m = 0; m < n; ++m)
            B -= G.gamma[m][i][l] * A[m][j][k] + G.gamma[m][j][l] * A[i][m][k] +
                 G.gamma[m][k][l] * A[i][j][m];
          divdiv += G.ginv[i][k] * G.ginv[j][l] * B;
        }

  double hup_ric = 0.0, trpi = 0.0, trw = 0.0, hpi = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double hup = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) hup += G.ginv[i][a] * G.ginv[j][b] * dir.h[a][b];
      hup_ric += hup * G.ric[i][j];
      trpi += G.g[i][j] * P.pi[i][j];
      trw += G.g[i][j] * dir.w[i][j];
      hpi += dir.h[i][j] * P.pi[i][j];
    }

  double term_hpipi = 0.0, term_piw = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double pim = 0.0;  // pi^i_l pi^{jl} contracted against h_{ij}
      for (int l = 0; l < n; ++l)
        for (int a = 0; a < n; ++a) pim += P.pi[i][a] * G.g[a][l] * P.pi[j][l];
      term_hpipi += dir.h[i][j] * pim;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          term_piw += P.pi[j][a] * G.g[a][i] * dir.w[i][b] * G.g[b][j];
    }

  out[0] = -lap_trh + divdiv - hup_ric - 2.0 * term_hpipi - 2.0 * term_piw +
           2.0 / (n - 1.0) * trpi * (hpi + trw);

  for (int i = 0; i < n; ++i) {
    double divw = 0.0;
    for (int j = 0; j < n; ++j) {
      divw += dir.dw[i][j][j];
      for (int p = 0; p < n; ++p)
        divw += G.gamma[i][j][p] * dir.w[p][j] + G.gamma[j][j][p] * dir.w[i][p];
    }
    double t2 = 0.0, t3 = 0.0, t4 = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) t2 += G.ginv[l][i] * P.pi[j][k] * A[j][k][l];
        for (int m = 0; m < n; ++m) t3 += P.pi[j][k] * G.ginv[i][m] * A[m][j][k];
      }
      t4 += P.pi[i][j] * dtrh[j];
    }
    double v = divw - 0.5 * t2 + t3 + 0.5 * t4;
    if (corr.modified) {
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) v += 0.5 * corr.ginv[i][j] * dir.h[j][k] * corr.J[k];
    }
    out[1 + i] = v;
  }
}

std::pair<Field, Field> modified_linearize_at(const InitialDataSet& base,
                                              const std::pair<Field, Field>& point,
                                              const SymPair& dir) {
  const Chart& chart = base.chart;
  const int n = chart.n;
  const Field gp = point.first, taup = point.second;
  const Field gb = base.g, pib = base.pi;
  const Field dh = dir.h, dw = dir.w;

  auto eval = [gp, taup, gb, pib, dh, dw, n](const Vec& x, double out[1 + kMaxDim]) {
    const MetricJet G = metric_jet(gp, x);
    const MomentumJet P = momentum_jet(taup, x);
    const DirJets d = dir_jets({dh, dw}, x);
    BaseCorrection corr;
    corr.modified = true;
    const MetricJet GB = metric_jet(gb, x);
    const MomentumJet PB = momentum_jet(pib, x);
    mass_current_at(GB, PB, nullptr, corr.J);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) corr.ginv[i][j] = GB.ginv[i][j];
    linearize_at_point(G, P, d, corr, out);
  };

  Field slot1 = Field::analytic(chart, Rank{0, 0}, {[eval](const Vec& x) {
                                  double out[1 + kMaxDim];
                                  eval(x, out);
                                  return out[0];
                                }});
  std::vector<Field::ValueFn> jc(n);
  for (int i = 0; i < n; ++i)
    jc[i] = [eval, i](const Vec& x) {
      double out[1 + kMaxDim];
      eval(x, out);
      return out[1 + i];
    };
  return {slot1, Field::analytic(chart, Rank{0, 1}, std::move(jc))};
}

std::pair<Field, Field> linearize(const InitialDataSet& base, const SymPair& dir,
                                  ConstraintVariant variant) {
  const Chart& chart = base.chart;
  const int n = chart.n;
  const Field g = base.g, pi = base.pi;
  const Field dh = dir.h, dw = dir.w;
  const bool modified = variant == ConstraintVariant::modified;

  auto eval = [g, pi, dh, dw, modified, n](const Vec& x, double out[1 + kMaxDim]) {
    const MetricJet G = metric_jet(g, x);
    const MomentumJet P = momentum_jet(pi, x);
    const DirJets d = dir_jets({dh, dw}, x);
    BaseCorrection corr;
    corr.modified = modified;
    if (modified) {
      mass_current_at(G, P, nullptr, corr.J);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) corr.ginv[i][j] = G.ginv[i][j];
    }
    linearize_at_point(G, P, d, corr, out);
  };

  Field slot1 = Field::analytic(chart, Rank{0, 0}, {[eval](const Vec& x) {
                                  double out[1 + kMaxDim];
                                  eval(x, out);
                                  return out[0];
                                }});
  std::vector<Field::ValueFn> jc(n);
  for (int i = 0; i < n; ++i)
    jc[i] = [eval, i](const Vec& x) {
      double out[1 + kMaxDim];
      eval(x, out);
      return out[1 + i];
    };
  return {slot1, Field::analytic(chart, Rank{0, 1}, std::move(jc))};
}

SymPair adjoint(const InitialDataSet& base, const LapseShiftPair& pair,
                ConstraintVariant variant) {
  const Chart& chart = base.chart;
  const int n = chart.n;
  const Field g = base.g, pi = base.pi;
  const LapseShiftPair p = pair;
  const bool modified = variant == ConstraintVariant::modified;

  auto eval1 = [g, pi, p, modified](const Vec& x, int i, int j) {
    const MetricJet G = metric_jet(g, x);
    const MomentumJet P = momentum_jet(pi, x);
    const PairJets q = pair_jets(p, x, false);
    double o1[4][4], o2[4][4];
    adjoint_at_point(G, P, q, modified, o1, o2);
    return o1[i][j];
  };
  auto eval2 = [g, pi, p, modified](const Vec& x, int i, int j) {
    const MetricJet G = metric_jet(g, x);
    const MomentumJet P = momentum_jet(pi, x);
    const PairJets q = pair_jets(p, x, false);
    double o1[4][4], o2[4][4];
    adjoint_at_point(G, P, q, modified, o1, o2);
    return o2[i][j];
  };

  std::vector<Field::ValueFn> c1(n * n), c2(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      c1[i + n * j] = [eval1, i, j](const Vec& x) { return eval1(x, i, j); };
      c2[i + n * j] = [eval2, i, j](const Vec& x) { return eval2(x, i, j); };
    }
  SymPair out;
  out.h = Field::analytic(chart, Rank{2, 0}, std::move(c1), Symmetry::symmetric_pair);
  out.w = Field::analytic(chart, Rank{0, 2}, std::move(c2), Symmetry::symmetric_pair);
  return out;
}

double adjoint_pairing_integrand(const InitialDataSet& base, const LapseShiftPair& pair,
                                 const SymPair& dir, const Vec& x) {
  const int n = base.chart.n;
  const MetricJet G = metric_jet(base.g, x);
  const MomentumJet P = momentum_jet(base.pi, x);
  const PairJets q = pair_jets(pair, x, false);
  double a1[4][4], a2[4][4];
  adjoint_at_point(G, P, q, true, a1, a2);
  const DirJets dj = dir_jets(dir, x);
  double rhs = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          rhs += G.ginv[i][a] * G.ginv[j][b] * dj.h[i][j] * a1[a][b];
          rhs += G.g[i][a] * G.g[j][b] * dj.w[i][j] * a2[a][b];
        }
  return rhs * G.sqrtdet;
}

double linearize_pairing_integrand(const InitialDataSet& base, const LapseShiftPair& pair,
                                   const SymPair& dir, const Vec& x) {
  const int n = base.chart.n;
  const MetricJet G = metric_jet(base.g, x);
  const MomentumJet P = momentum_jet(base.pi, x);
  const DirJets dj = dir_jets(dir, x);
  BaseCorrection corr;
  corr.modified = true;
  mass_current_at(G, P, nullptr, corr.J);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) corr.ginv[i][j] = G.ginv[i][j];
  double lin[1 + kMaxDim];
  linearize_at_point(G, P, dj, corr, lin);
  const Jet fj = pair.f.jet(0, x, 0);
  double s = lin[0] * fj.v;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += G.g[i][j] * lin[1 + i] * pair.X.value(j, x);
  return s * G.sqrtdet;
}

namespace {

// Radial extent of the support of a direction, scanned over grid nodes.
void support_extent(const SymPair& dir, double* lo, double* hi) {
  const Chart& chart = dir.h.chart();
  const int n = chart.n;
  double mn = 1e300, mx = -1.0, scale = 0.0;
  std::vector<double> vals(chart.node_count());
  const Field h = dir.h, w = dir.w;
  parallel_for(chart.node_count(), [&](std::size_t a, std::size_t b) {
    for (std::size_t f = a; f < b; ++f) {
      const Vec x = chart.node_point(chart.multi_index(f));
      double m = 0.0;
      for (int c = 0; c < n * n; ++c)
        m = std::max({m, std::abs(h.value(c, x)), std::abs(w.value(c, x))});
      vals[f] = m;
    }
  });
  for (std::size_t f = 0; f < chart.node_count(); ++f) scale = std::max(scale, vals[f]);
  const double tiny = 1e-14 * std::max(scale, 1e-300);
  for (std::size_t f = 0; f < chart.node_count(); ++f) {
    if (vals[f] <= tiny) continue;
    const double r = norm2(chart.node_point(chart.multi_index(f)), n);
    mn = std::min(mn, r);
    mx = std::max(mx, r);
  }
  *lo = mn;
  *hi = mx;
}

}  // namespace

void direction_support(const SymPair& dir, double* lo, double* hi) { support_extent(dir, lo, hi); }

double dir_l2_norm(const InitialDataSet& base, const SymPair& dir) {
  const Chart& chart = base.chart;
  const int n = chart.n;
  const Field g = base.g, h = dir.h, w = dir.w;
  const double cell = std::pow(chart.h(), n);
  const double total = parallel_sum(chart.node_count(), [&](std::size_t f) {
    const Vec x = chart.node_point(chart.multi_index(f));
    if (!chart.in_annulus(x)) return 0.0;
    const MetricJet G = metric_jet(g, x);
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            s += G.ginv[i][a] * G.ginv[j][b] * h.value(i + n * j, x) * h.value(a + n * b, x);
            s += G.g[i][a] * G.g[j][b] * w.value(i + n * j, x) * w.value(a + n * b, x);
          }
    return s * G.sqrtdet;
  });
  return std::sqrt(std::max(total * cell, 0.0));
}

double pairing_defect(const InitialDataSet& base, const LapseShiftPair& pair, const SymPair& dir) {
  const Chart& chart = base.chart;
  const int n = chart.n;
  double lo, hi;
  support_extent(dir, &lo, &hi);
  if (hi < 0.0) return 0.0;  // identically zero direction
  const double margin = 2.0 * (chart.fd_order / 2) * chart.h();
  if (lo < chart.r_inner + margin || hi > chart.r_outer - margin)
    fail("support-touches-boundary",
         "direction support [" + std::to_string(lo) + ", " + std::to_string(hi) +
             "] too close to the chart boundaries");

  const Field g = base.g, pi = base.pi;
  const LapseShiftPair p = pair;
  const SymPair d = dir;
  const double cell = std::pow(chart.h(), n);
  const double rlo = lo - margin, rhi = hi + margin;

  const double total = parallel_sum(chart.node_count(), [&](std::size_t f) {
    const Vec x = chart.node_point(chart.multi_index(f));
    const double r = norm2(x, n);
    if (r < rlo || r > rhi) return 0.0;
    const MetricJet G = metric_jet(g, x);
    const MomentumJet P = momentum_jet(pi, x);
    const DirJets dj = dir_jets(d, x);
    BaseCorrection corr;
    corr.modified = true;
    mass_current_at(G, P, nullptr, corr.J);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) corr.ginv[i][j] = G.ginv[i][j];
    double lin[1 + kMaxDim];
    linearize_at_point(G, P, dj, corr, lin);
    const PairJets q = pair_jets(p, x, false);
    double a1[4][4], a2[4][4];
    adjoint_at_point(G, P, q, true, a1, a2);

    // <DPhibar(h,w), (f,X)>
    double lhs = lin[0] * q.f;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) lhs += G.g[i][j] * lin[1 + i] * q.X[j];
    // <(h,w), DPhibar*(f,X)>
    double rhs = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            rhs += G.ginv[i][a] * G.ginv[j][b] * dj.h[i][j] * a1[a][b];
            rhs += G.g[i][a] * G.g[j][b] * dj.w[i][j] * a2[a][b];
          }
    return (lhs - rhs) * G.sqrtdet;
  });
  return total * cell;
}

KidResiduals kid_residuals(const InitialDataSet& base, const LapseShiftPair& pair,
                           const SymPair& rhs) {
  const Chart& chart = base.chart;
  const int n = chart.n;
  const Field g = base.g, pi = base.pi;
  const LapseShiftPair p = pair;
  const SymPair r = rhs;

  struct KidOut {
    double hf[4][4];
    double hX[4][4][4];
    double tf;
    double tX[4];
  };

  auto eval = [g, pi, p, r, n](const Vec& x) {
    KidOut out{};
    const MetricJet G = metric_jet(g, x);
    const MomentumJet P = momentum_jet(pi, x);
    const PairJets q = pair_jets(p, x, true);
    const AdjointBlocks B = adjoint_blocks(G, P, q);

    // rhs jets
    double hv[4][4], wv[4][4], dwv[4][4][4];
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        hv[i][j] = hv[j][i] = r.h.value(i + n * j, x);
        const Jet wj = r.w.jet(i + n * j, x, 1);
        wv[i][j] = wv[j][i] = wj.v;
        for (int a = 0; a < n; ++a) dwv[i][j][a] = dwv[j][i][a] = wj.d1[a];
      }
    double trh = 0.0, trw = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        trh += G.ginv[i][j] * hv[i][j];
        trw += G.g[i][j] * wv[i][j];
      }

    // --- Hessian-type equation for f ---
    double hessf[4][4];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = q.fd2[i][j];
        for (int c = 0; c < n; ++c) s -= G.gamma[c][i][j] * q.fd1[c];
        hessf[i][j] = s;
      }
    const double curv_coeff =
        (G.scal - 2.0 / (n - 1.0) * B.trpi * B.trpi + 2.0 * B.normsq) / (n - 1.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double pipi = 0.0;
        for (int k = 0; k < n; ++k) pipi += B.pilow[i][k] * B.pimix[k][j];
        double RHS = hessf[i][j] +
                     (-G.ric[i][j] + 2.0 / (n - 1.0) * B.trpi * B.pilow[i][j] - 2.0 * pipi +
                      curv_coeff * G.g[i][j]) *
                         q.f;
        RHS += 0.5 * B.M[i][j];
        RHS -= (B.trM + B.gXJ) / (2.0 * (n - 1.0)) * G.g[i][j];
        RHS += 0.25 * (B.Xlow[i] * B.Jlow[j] + B.Xlow[j] * B.Jlow[i]);
        const double LHS = hv[i][j] - trh / (n - 1.0) * G.g[i][j];
        out.hf[i][j] = RHS - LHS;
      }

    // --- Hessian-type equation for X ---
    // second covariant derivative of the lowered X
    double Xlow[4], dXlow[4][4], ddXlow[4][4][4];
    for (int i = 0; i < n; ++i) {
      Xlow[i] = B.Xlow[i];
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int c = 0; c < n; ++c) s += G.dg[i][c][j] * q.X[c] + G.g[i][c] * q.dX[c][j];
        dXlow[i][j] = s;
        for (int k = 0; k < n; ++k) {
          double t = 0.0;
          for (int c = 0; c < n; ++c)
            t += G.ddg[i][c][j][k] * q.X[c] + G.dg[i][c][j] * q.dX[c][k] +
                 G.dg[i][c][k] * q.dX[c][j] + G.g[i][c] * q.ddX[c][j][k];
          ddXlow[i][j][k] = t;
        }
      }
    }
    double A1[4][4];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = dXlow[i][j];
        for (int l = 0; l < n; ++l) s -= G.gamma[l][i][j] * Xlow[l];
        A1[i][j] = s;
      }
    double A2[4][4][4];  // X_{i;jk}
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double s = ddXlow[i][j][k];
          for (int l = 0; l < n; ++l)
            s -= G.dgamma[k][l][i][j] * Xlow[l] + G.gamma[l][i][j] * dXlow[l][k];
          for (int m = 0; m < n; ++m)
            s -= G.gamma[m][i][k] * A1[m][j] + G.gamma[m][j][k] * A1[i][m];
          A2[i][j][k] = s;
        }

    // T_{ij} = (2/(n-1)) trpi g_{ij} - 2 pi_{ij}, its covariant derivative,
    // and the scalar trpi derivative
    double dtrpi[4];
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          s += G.dg[a][b][k] * P.pi[a][b] + G.g[a][b] * P.dpi[a][b][k];
      dtrpi[k] = s;
    }
    double pilow_cov[4][4][4];
    lowered_momentum_derivative(G, P, pilow_cov);
    double TF[4][4][4];  // (T f)_{ij;k}
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double Tij = 2.0 / (n - 1.0) * B.trpi * G.g[i][j] - 2.0 * B.pilow[i][j];
        for (int k = 0; k < n; ++k) {
          const double Tijk =
              2.0 / (n - 1.0) * dtrpi[k] * G.g[i][j] - 2.0 * pilow_cov[i][j][k];
          TF[i][j][k] = Tijk * q.f + Tij * q.fd1[k];
        }
      }
    double wlow[4][4], dwlow_cov[4][4][4];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) s += G.g[i][a] * G.g[j][b] * wv[a][b];
        wlow[i][j] = s;
      }
    lowered_cov_deriv(G, wv, dwv, dwlow_cov);
    (void)wlow;

    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double riem = 0.0;
          for (int l = 0; l < n; ++l)
            riem += (G.riemann(l, k, j, i) + G.riemann(l, i, k, j) + G.riemann(l, i, j, k)) *
                    Xlow[l];
          const double RHS =
              A2[i][j][k] + 0.5 * riem - TF[i][j][k] - TF[k][i][j] + TF[j][k][i];
          const double LHS = -dwlow_cov[i][j][k] - dwlow_cov[k][i][j] + dwlow_cov[j][k][i];
          out.hX[i][j][k] = RHS - LHS;
        }

    // --- trace equations ---
    double lapf = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) lapf += G.ginv[i][j] * hessf[i][j];
    {
      const double bracket = B.trM + B.gXJ;  // = trLXpi + divX trpi - n XkmPi - (n-1) gXJ
      const double RHS = lapf + curv_coeff * q.f - bracket / (2.0 * (n - 1.0));
      const double LHS = -trh / (n - 1.0);
      out.tf = RHS - LHS;
    }
    for (int i = 0; i < n; ++i) {
      double lapX = 0.0;
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) lapX += G.ginv[j][k] * A2[i][j][k];
      double ricX = 0.0;
      for (int l = 0; l < n; ++l)
        for (int a = 0; a < n; ++a) ricX += G.ginv[l][a] * G.ric[a][i] * Xlow[l];
      const double dftrpi = q.fd1[i] * B.trpi + q.f * dtrpi[i];
      double divfpi = 0.0;
      for (int a = 0; a < n; ++a) {
        double s = q.f * B.J[a];
        for (int b = 0; b < n; ++b) s += q.fd1[b] * P.pi[a][b];
        divfpi += G.g[i][a] * s;
      }
      const double RHS = lapX + ricX - 2.0 / (n - 1.0) * dftrpi + 4.0 * divfpi;
      double divw = 0.0;
      for (int a = 0; a < n; ++a) {
        double s = 0.0;
        for (int b = 0; b < n; ++b) {
          s += dwv[a][b][b];
          for (int pp = 0; pp < n; ++pp)
            s += G.gamma[a][b][pp] * wv[pp][b] + G.gamma[b][b][pp] * wv[a][pp];
        }
        divw += G.g[i][a] * s;
      }
      double dtrw = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          dtrw += G.dg[a][b][i] * wv[a][b] + G.g[a][b] * dwv[a][b][i];
      const double LHS = -2.0 * divw + dtrw;
      out.tX[i] = RHS - LHS;
    }
    return out;
  };

  KidResiduals res;
  {
    std::vector<Field::ValueFn> c(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        c[i + n * j] = [eval, i, j](const Vec& x) { return eval(x).hf[i][j]; };
    res.hessian_f = Field::analytic(chart, Rank{2, 0}, std::move(c), Symmetry::symmetric_pair);
  }
  {
    std::vector<Field::ValueFn> c(n * n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          c[i + n * (j + n * k)] = [eval, i, j, k](const Vec& x) { return eval(x).hX[i][j][k]; };
    res.hessian_X = Field::analytic(chart, Rank{3, 0}, std::move(c));
  }
  res.trace_f = Field::analytic(chart, Rank{0, 0}, {[eval](const Vec& x) { return eval(x).tf; }});
  {
    std::vector<Field::ValueFn> c(n);
    for (int i = 0; i < n; ++i)
      c[i] = [eval, i](const Vec& x) { return eval(x).tX[i]; };
    res.trace_X = Field::analytic(chart, Rank{1, 0}, std::move(c));
  }
  return res;
}

}  // namespace adm
