#pragma once

#include "adm/geometry.hpp"

// Pointwise ingredient jets shared by the constraint, linearization, adjoint
// and KID kernels. Everything here operates on small dense arrays at one
// point; field-level operations wrap these.

namespace adm {

struct MomentumJet {
  double pi[4][4];
  double dpi[4][4][4];  // pi^{ij}_{,a}
};

inline MomentumJet momentum_jet(const Field& pi, const Vec& x) {
  MomentumJet m{};
  const int n = pi.chart().n;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const Jet jj = pi.jet(i + n * j, x, 1);
      m.pi[i][j] = m.pi[j][i] = jj.v;
      for (int a = 0; a < n; ++a) m.dpi[i][j][a] = m.dpi[j][i][a] = jj.d1[a];
    }
  return m;
}

// mu = (R + (tr pi)^2/(n-1) - |pi|^2)/2 and J^i = div_g pi.
inline void mass_current_at(const MetricJet& G, const MomentumJet& P, double* mu, double J[4]) {
  const int n = G.n;
  double trpi = 0.0, normsq = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      trpi += G.g[i][j] * P.pi[i][j];
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) normsq += G.g[i][a] * G.g[j][b] * P.pi[i][j] * P.pi[a][b];
    }
  if (mu) *mu = 0.5 * (G.scal + trpi * trpi / (n - 1.0) - normsq);
  if (J) {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) {
        s += P.dpi[i][j][j];
        for (int p = 0; p < n; ++p)
          s += G.gamma[i][j][p] * P.pi[p][j] + G.gamma[j][j][p] * P.pi[i][p];
      }
      J[i] = s;
    }
  }
}

// Covariant derivative of the lowered momentum pi_{ij;k}, needed by the KID
// residuals: pi_{ij;k} = g_{ia} g_{jb} pi^{ab}_{;k}.
inline void lowered_momentum_derivative(const MetricJet& G, const MomentumJet& P,
                                        double out[4][4][4]) {
  const int n = G.n;
  double covd[4][4][4];  // pi^{ab}_{;k}
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int k = 0; k < n; ++k) {
        double s = P.dpi[a][b][k];
        for (int p = 0; p < n; ++p)
          s += G.gamma[a][k][p] * P.pi[p][b] + G.gamma[b][k][p] * P.pi[a][p];
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

}  // namespace adm
