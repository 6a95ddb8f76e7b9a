#include "adm/geometry.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

namespace adm {

namespace {

// Inverse and determinant via Gaussian elimination with partial pivoting
// (n <= 4). Returns false on a (numerically) singular matrix.
bool invert(int n, const double a_in[4][4], double inv[4][4], double* det) {
  double a[4][8];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      a[i][j] = a_in[i][j];
      a[i][n + j] = (i == j) ? 1.0 : 0.0;
    }
  }
  double d = 1.0;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (a[piv][c] == 0.0) return false;
    if (piv != c) {
      for (int j = 0; j < 2 * n; ++j) std::swap(a[piv][j], a[c][j]);
      d = -d;
    }
    d *= a[c][c];
    const double s = 1.0 / a[c][c];
    for (int j = 0; j < 2 * n; ++j) a[c][j] *= s;
    for (int r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0.0) continue;
      const double f = a[r][c];
      for (int j = 0; j < 2 * n; ++j) a[r][j] -= f * a[c][j];
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv[i][j] = a[i][n + j];
  if (det) *det = d;
  return true;
}

bool cholesky_spd(int n, const double a[4][4]) {
  double L[4][4] = {};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[i][j];
      for (int k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
      if (i == j) {
        if (s <= 0.0) return false;
        L[i][i] = std::sqrt(s);
      } else {
        L[i][j] = s / L[j][j];
      }
    }
  }
  return true;
}

}  // namespace

MetricJet metric_jet(const Field& g, const Vec& x) {
  MetricJet m;
  const int n = g.chart().n;
  m.n = n;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const Jet jj = g.jet(i + n * j, x, 2);
      m.g[i][j] = m.g[j][i] = jj.v;
      for (int a = 0; a < n; ++a) {
        m.dg[i][j][a] = m.dg[j][i][a] = jj.d1[a];
        for (int b = 0; b < n; ++b) m.ddg[i][j][a][b] = m.ddg[j][i][a][b] = jj.d2[a][b];
      }
    }
  double det = 0.0;
  if (!invert(n, m.g, m.ginv, &det) || det <= 0.0 || !cholesky_spd(n, m.g)) {
    m.spd = false;
    m.sqrtdet = 0.0;
    return m;
  }
  m.sqrtdet = std::sqrt(det);

  for (int a = 0; a < n; ++a)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q) s -= m.ginv[i][p] * m.dg[p][q][a] * m.ginv[q][j];
        m.dginv[i][j][a] = s;
      }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double s = 0.0;
          for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
              s -= m.dginv[i][p][b] * m.dg[p][q][a] * m.ginv[q][j] +
                   m.ginv[i][p] * m.ddg[p][q][a][b] * m.ginv[q][j] +
                   m.ginv[i][p] * m.dg[p][q][a] * m.dginv[q][j][b];
          m.ddginv[i][j][a][b] = s;
        }

  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l)
          s += m.ginv[k][l] * (m.dg[l][i][j] + m.dg[l][j][i] - m.dg[i][j][l]);
        m.gamma[k][i][j] = 0.5 * s;
      }
  for (int a = 0; a < n; ++a)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double s = 0.0;
          for (int l = 0; l < n; ++l) {
            s += m.dginv[k][l][a] * (m.dg[l][i][j] + m.dg[l][j][i] - m.dg[i][j][l]);
            s += m.ginv[k][l] * (m.ddg[l][i][j][a] + m.ddg[l][j][i][a] - m.ddg[i][j][l][a]);
          }
          m.dgamma[a][k][i][j] = 0.5 * s;
        }

  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      double s = 0.0;
      for (int a = 0; a < n; ++a) s += m.dgamma[a][a][j][k] - m.dgamma[j][a][a][k];
      for (int a = 0; a < n; ++a)
        for (int p = 0; p < n; ++p)
          s += m.gamma[a][a][p] * m.gamma[p][j][k] - m.gamma[a][j][p] * m.gamma[p][a][k];
      m.ric[j][k] = m.ric[k][j] = s;
    }
  m.scal = 0.0;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) m.scal += m.ginv[j][k] * m.ric[j][k];
  return m;
}

void require_positive_definite(const Field& g) {
  const Chart& chart = g.chart();
  const int n = chart.n;
  double worst = 1e300;
  Vec worst_x = vzero();
  bool bad = false;
  const std::size_t count = chart.node_count();
  for (std::size_t f = 0; f < count; ++f) {
    const Vec x = chart.node_point(chart.multi_index(f));
    const double r = norm2(x, n);
    if (r < chart.r_inner || r > chart.r_outer) continue;
    double gm[4][4];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) gm[i][j] = g.value(i + n * j, x);
    if (!cholesky_spd(n, gm)) {
      // track the most negative leading value for the report
      double mn = gm[0][0];
      for (int i = 0; i < n; ++i) mn = std::min(mn, gm[i][i]);
      if (!bad || mn < worst) {
        worst = mn;
        worst_x = x;
        bad = true;
      }
    }
  }
  if (bad) {
    std::ostringstream os;
    os << "metric fails positive definiteness; worst node (" << worst_x[0] << ", " << worst_x[1]
       << ", " << worst_x[2];
    if (n > 3) os << ", " << worst_x[3];
    os << ")";
    fail("metric-not-positive-definite", os.str());
  }
}

CurvaturePackage curvature_package(const Field& g, bool want_riemann) {
  require_positive_definite(g);
  const Chart& chart = g.chart();
  const int n = chart.n;
  CurvaturePackage pkg;

  {
    std::vector<Field::ValueFn> comps(n * n * n);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          comps[k + n * (i + n * j)] = [g, k, i, j](const Vec& x) {
            return metric_jet(g, x).gamma[k][i][j];
          };
    pkg.christoffel = Field::analytic(chart, Rank{2, 1}, std::move(comps));
  }
  {
    std::vector<Field::ValueFn> comps(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        comps[i + n * j] = [g, i, j](const Vec& x) { return metric_jet(g, x).ric[i][j]; };
    pkg.ricci = Field::analytic(chart, Rank{2, 0}, std::move(comps), Symmetry::symmetric_pair);
  }
  pkg.scalar = Field::analytic(chart, Rank{0, 0},
                               {[g](const Vec& x) { return metric_jet(g, x).scal; }});
  if (want_riemann) {
    std::vector<Field::ValueFn> comps(n * n * n * n);
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            comps[l + n * (i + n * (j + n * k))] = [g, l, i, j, k](const Vec& x) {
              return metric_jet(g, x).riemann(l, i, j, k);
            };
    pkg.riemann = Field::analytic(chart, Rank{3, 1}, std::move(comps));
  }
  return pkg;
}

CurvatureGrids curvature_grids(const Field& g) {
  const Chart& chart = g.chart();
  const int n = chart.n;
  const std::size_t count = chart.node_count();
  std::vector<std::vector<double>> ric(n * (n + 1) / 2, std::vector<double>(count));
  std::vector<double> scal(count);
  parallel_for(count, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t f = lo; f < hi; ++f) {
      const Vec x = chart.node_point(chart.multi_index(f));
      const MetricJet mj = metric_jet(g, x);
      scal[f] = mj.scal;
      for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i) ric[i + j * (j + 1) / 2][f] = mj.ric[i][j];
    }
  });
  CurvatureGrids out;
  out.ricci = Field::grid(chart, Rank{2, 0}, std::move(ric), Symmetry::symmetric_pair);
  out.scalar = Field::grid(chart, Rank{0, 0}, {std::move(scal)});
  return out;
}

Field covariant_derivative(const Field& T, const Field& g) {
  const Chart& chart = T.chart();
  const int n = chart.n;
  const Rank rk = T.rank();
  if (rk.total() > 4 || (rk.cov > 2 || rk.con > 2))
    fail("unsupported-valence", "covariant_derivative supports valence up to (2,2)");
  const int m = rk.total();
  const int ncomp_in = T.comps();
  const Rank out_rank{rk.cov + 1, rk.con};
  std::vector<Field::ValueFn> comps(ncomp_in * n);

  for (int c = 0; c < ncomp_in; ++c)
    for (int a = 0; a < n; ++a) {
      comps[c + ncomp_in * a] = [T, g, c, a, n, m, rk](const Vec& x) {
        // decode slots (contravariant slots come first in the flattening)
        int slots[4] = {0, 0, 0, 0};
        int rem = c;
        for (int s = 0; s < m; ++s) {
          slots[s] = rem % n;
          rem /= n;
        }
        const MetricJet mj = metric_jet(g, x);
        double val = T.jet(c, x, 1).d1[a];
        for (int s = 0; s < m; ++s) {
          const bool upper = s < rk.con;
          int stride = 1;
          for (int t = 0; t < s; ++t) stride *= n;
          for (int p = 0; p < n; ++p) {
            const int cc = c + (p - slots[s]) * stride;
            const double tv = T.value(cc, x);
            if (upper)
              val += mj.gamma[slots[s]][a][p] * tv;
            else
              val -= mj.gamma[p][slots[s]][a] * tv;
          }
        }
        return val;
      };
    }
  return Field::analytic(chart, out_rank, std::move(comps));
}

std::pair<Field, Field> lie_derivatives(const Field& g, const Field& pi, const Field& X) {
  const Chart& chart = g.chart();
  const int n = chart.n;
  std::vector<Field::ValueFn> lg(n * n), lpi(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      lg[i + n * j] = [g, X, i, j, n](const Vec& x) {
        double xv[4];
        Jet xj[4];
        for (int k = 0; k < n; ++k) {
          xj[k] = X.jet(k, x, 1);
          xv[k] = xj[k].v;
        }
        const Jet gij = g.jet(i + n * j, x, 1);
        double s = 0.0;
        for (int k = 0; k < n; ++k) {
          s += xv[k] * gij.d1[k];
          s += g.value(k + n * j, x) * xj[k].d1[i];
          s += g.value(i + n * k, x) * xj[k].d1[j];
        }
        return s;
      };
      lpi[i + n * j] = [pi, X, i, j, n](const Vec& x) {
        double s = 0.0;
        Jet xj[4];
        for (int k = 0; k < n; ++k) xj[k] = X.jet(k, x, 1);
        const Jet pij = pi.jet(i + n * j, x, 1);
        for (int k = 0; k < n; ++k) {
          s += xj[k].v * pij.d1[k];
          s -= pi.value(k + n * j, x) * xj[i].d1[k];
          s -= pi.value(i + n * k, x) * xj[j].d1[k];
        }
        return s;
      };
    }
  Field Lg = Field::analytic(chart, Rank{2, 0}, std::move(lg), Symmetry::symmetric_pair);
  Field Lpi = Field::analytic(chart, Rank{0, 2}, std::move(lpi), Symmetry::symmetric_pair);
  return {Lg, Lpi};
}

Field conformal_killing_op(const Field& g, const Field& Y) {
  const Chart& chart = g.chart();
  const int n = chart.n;
  std::vector<Field::ValueFn> comps(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      comps[i + n * j] = [g, Y, i, j, n](const Vec& x) {
        const MetricJet mj = metric_jet(g, x);
        Jet yj[4];
        for (int k = 0; k < n; ++k) yj[k] = Y.jet(k, x, 1);
        double lyg[4][4];
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) {
              s += yj[k].v * mj.dg[a][b][k];
              s += mj.g[k][b] * yj[k].d1[a];
              s += mj.g[a][k] * yj[k].d1[b];
            }
            lyg[a][b] = s;
          }
        double divY = 0.0;
        for (int k = 0; k < n; ++k) {
          divY += yj[k].d1[k];
          for (int p = 0; p < n; ++p) divY += mj.gamma[k][k][p] * yj[p].v;
        }
        double s = 0.0;
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) s += mj.ginv[i][a] * mj.ginv[j][b] * lyg[a][b];
        return s - divY * mj.ginv[i][j];
      };
    }
  return Field::analytic(chart, Rank{0, 2}, std::move(comps), Symmetry::symmetric_pair);
}

Field metric_algebra(const Field& g, const Field& T, AlgebraMode mode) {
  const Chart& chart = T.chart();
  const int n = chart.n;
  const Rank rk = T.rank();

  switch (mode) {
    case AlgebraMode::raise: {
      if (rk.total() == 1 && rk.cov == 1) {
        std::vector<Field::ValueFn> comps(n);
        for (int i = 0; i < n; ++i)
          comps[i] = [g, T, i, n](const Vec& x) {
            const MetricJet mj = metric_jet(g, x);
            double s = 0.0;
            for (int a = 0; a < n; ++a) s += mj.ginv[i][a] * T.value(a, x);
            return s;
          };
        return Field::analytic(chart, Rank{0, 1}, std::move(comps));
      }
      if (rk.total() == 2 && rk.cov == 2) {
        std::vector<Field::ValueFn> comps(n * n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            comps[i + n * j] = [g, T, i, j, n](const Vec& x) {
              const MetricJet mj = metric_jet(g, x);
              double s = 0.0;
              for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                  s += mj.ginv[i][a] * mj.ginv[j][b] * T.value(a + n * b, x);
              return s;
            };
        return Field::analytic(chart, Rank{0, 2}, std::move(comps), T.symmetry());
      }
      fail("incompatible-valence", "raise supports rank-1/rank-2 covariant fields");
    }
    case AlgebraMode::lower: {
      if (rk.total() == 1 && rk.con == 1) {
        std::vector<Field::ValueFn> comps(n);
        for (int i = 0; i < n; ++i)
          comps[i] = [g, T, i, n](const Vec& x) {
            const MetricJet mj = metric_jet(g, x);
            double s = 0.0;
            for (int a = 0; a < n; ++a) s += mj.g[i][a] * T.value(a, x);
            return s;
          };
        return Field::analytic(chart, Rank{1, 0}, std::move(comps));
      }
      if (rk.total() == 2 && rk.con == 2) {
        std::vector<Field::ValueFn> comps(n * n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            comps[i + n * j] = [g, T, i, j, n](const Vec& x) {
              const MetricJet mj = metric_jet(g, x);
              double s = 0.0;
              for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) s += mj.g[i][a] * mj.g[j][b] * T.value(a + n * b, x);
              return s;
            };
        return Field::analytic(chart, Rank{2, 0}, std::move(comps), T.symmetry());
      }
      fail("incompatible-valence", "lower supports rank-1/rank-2 contravariant fields");
    }
    case AlgebraMode::trace: {
      if (rk.total() != 2) fail("incompatible-valence", "trace requires a rank-2 field");
      return Field::analytic(chart, Rank{0, 0}, {[g, T, rk, n](const Vec& x) {
                               const MetricJet mj = metric_jet(g, x);
                               double s = 0.0;
                               for (int i = 0; i < n; ++i)
                                 for (int j = 0; j < n; ++j) {
                                   const double tv = T.value(i + n * j, x);
                                   if (rk.cov == 2)
                                     s += mj.ginv[i][j] * tv;
                                   else if (rk.con == 2)
                                     s += mj.g[i][j] * tv;
                                   else if (i == j)
                                     s += tv;
                                 }
                               return s;
                             }});
    }
    case AlgebraMode::divergence: {
      if (rk.con == 1 && rk.cov == 0) {
        return Field::analytic(chart, Rank{0, 0}, {[g, T, n](const Vec& x) {
                                 const MetricJet mj = metric_jet(g, x);
                                 double s = 0.0;
                                 for (int i = 0; i < n; ++i) {
                                   s += T.jet(i, x, 1).d1[i];
                                   for (int p = 0; p < n; ++p)
                                     s += mj.gamma[i][i][p] * T.value(p, x);
                                 }
                                 return s;
                               }});
      }
      if (rk.con == 2 && rk.cov == 0) {
        std::vector<Field::ValueFn> comps(n);
        for (int i = 0; i < n; ++i)
          comps[i] = [g, T, i, n](const Vec& x) {
            const MetricJet mj = metric_jet(g, x);
            double s = 0.0;
            for (int j = 0; j < n; ++j) {
              s += T.jet(i + n * j, x, 1).d1[j];
              for (int p = 0; p < n; ++p) {
                s += mj.gamma[i][j][p] * T.value(p + n * j, x);
                s += mj.gamma[j][j][p] * T.value(i + n * p, x);
              }
            }
            return s;
          };
        return Field::analytic(chart, Rank{0, 1}, std::move(comps));
      }
      fail("incompatible-valence", "divergence supports (1,0) and (2,0) fields");
    }
    case AlgebraMode::inner: {
      if (rk.total() != 2 && rk.total() != 1)
        fail("incompatible-valence", "inner supports rank-1/rank-2 fields");
      return Field::analytic(chart, Rank{0, 0}, {[g, T, rk, n](const Vec& x) {
                               const MetricJet mj = metric_jet(g, x);
                               double s = 0.0;
                               if (rk.total() == 1) {
                                 for (int i = 0; i < n; ++i)
                                   for (int j = 0; j < n; ++j) {
                                     const double m =
                                         (rk.con == 1) ? mj.g[i][j] : mj.ginv[i][j];
                                     s += m * T.value(i, x) * T.value(j, x);
                                   }
                                 return s;
                               }
                               for (int i = 0; i < n; ++i)
                                 for (int j = 0; j < n; ++j)
                                   for (int a = 0; a < n; ++a)
                                     for (int b = 0; b < n; ++b) {
                                       double mia, mjb;
                                       if (rk.con == 2) {
                                         mia = mj.g[i][a];
                                         mjb = mj.g[j][b];
                                       } else if (rk.cov == 2) {
                                         mia = mj.ginv[i][a];
                                         mjb = mj.ginv[j][b];
                                       } else {
                                         mia = (i == a) ? 1.0 : 0.0;
                                         mjb = (j == b) ? 1.0 : 0.0;
                                       }
                                       s += mia * mjb * T.value(i + n * j, x) *
                                            T.value(a + n * b, x);
                                     }
                               return s;
                             }});
    }
  }
  fail("incompatible-valence", "unknown algebra mode");
}

}  // namespace adm
