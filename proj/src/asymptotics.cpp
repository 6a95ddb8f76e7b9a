#include "adm/asymptotics.hpp"

#include <Eigen/Dense>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>

#include "adm/quadrature.hpp"

namespace adm {

double sphere_average(int n, double r, const std::function<double(const Vec&)>& f,
                      int quad_order) {
  const double area = unit_sphere_volume(n) * std::pow(r, n - 1);
  return sphere_integral(n, r, f, quad_order) / area;
}

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Trip = Eigen::Triplet<double>;

// Assemble the flat Laplacian with inner Dirichlet and cube-face Robin rows.
// Unknowns are all cube nodes. Robin rows are scaled by r:
//   sum_a x_a d_a u + (n-2) u = 0.
struct PoissonSystem {
  SpMat A;
  std::vector<char> kind;  // 0 interior, 1 dirichlet, 2 robin
};

PoissonSystem assemble_poisson(const Chart& chart) {
  const int n = chart.n;
  if (n != 3) fail("unsupported-dimension", "the flat Poisson solver is provided for n = 3");
  const int N = chart.nodes;
  const double h = chart.h();
  const std::size_t count = chart.node_count();
  PoissonSystem sys;
  sys.kind.assign(count, 0);
  std::vector<Trip> trips;
  trips.reserve(count * 7);

  std::size_t stride[3];
  stride[2] = 1;
  stride[1] = N;
  stride[0] = static_cast<std::size_t>(N) * N;

  for (std::size_t f = 0; f < count; ++f) {
    const auto idx = chart.multi_index(f);
    const Vec x = chart.node_point(idx);
    const double r = norm2(x, n);
    const bool on_face = (idx[0] == 0 || idx[0] == N - 1 || idx[1] == 0 || idx[1] == N - 1 ||
                          idx[2] == 0 || idx[2] == N - 1);
    if (r <= chart.r_inner) {
      sys.kind[f] = 1;
      trips.emplace_back(f, f, 1.0);
      continue;
    }
    if (on_face) {
      sys.kind[f] = 2;
      // sum_a x_a d_a u + (n-2) u = 0, one-sided along face normals
      trips.emplace_back(f, f, static_cast<double>(n - 2));
      for (int a = 0; a < n; ++a) {
        const double xa = x[a];
        if (std::abs(xa) < 1e-14) continue;
        if (idx[a] == N - 1) {
          // backward 2nd order: (3u_i - 4u_{i-1} + u_{i-2}) / (2h)
          trips.emplace_back(f, f, xa * 1.5 / h);
          trips.emplace_back(f, f - stride[a], xa * (-2.0) / h);
          trips.emplace_back(f, f - 2 * stride[a], xa * 0.5 / h);
        } else if (idx[a] == 0) {
          trips.emplace_back(f, f, xa * (-1.5) / h);
          trips.emplace_back(f, f + stride[a], xa * 2.0 / h);
          trips.emplace_back(f, f + 2 * stride[a], xa * (-0.5) / h);
        } else {
          trips.emplace_back(f, f + stride[a], xa * 0.5 / h);
          trips.emplace_back(f, f - stride[a], xa * (-0.5) / h);
        }
      }
      continue;
    }
    // interior 7-point Laplacian
    trips.emplace_back(f, f, -6.0 / (h * h));
    for (int a = 0; a < n; ++a) {
      trips.emplace_back(f, f + stride[a], 1.0 / (h * h));
      trips.emplace_back(f, f - stride[a], 1.0 / (h * h));
    }
  }
  sys.A.resize(count, count);
  sys.A.setFromTriplets(trips.begin(), trips.end());
  sys.A.makeCompressed();
  return sys;
}

struct SolveOut {
  std::vector<double> u;
  double residual_sup;
  int iterations;
};

SolveOut solve_poisson_system(const Chart& chart, const PoissonSystem& sys,
                              const std::function<double(const Vec&)>& source) {
  const std::size_t count = chart.node_count();
  Eigen::VectorXd rhs(count);
  for (std::size_t f = 0; f < count; ++f) {
    if (sys.kind[f] == 0)
      rhs[f] = source(chart.node_point(chart.multi_index(f)));
    else
      rhs[f] = 0.0;
  }
  Eigen::BiCGSTAB<SpMat> solver;
  solver.setTolerance(1e-12);
  solver.setMaxIterations(20000);
  solver.compute(sys.A);
  Eigen::VectorXd u = solver.solve(rhs);
  if (solver.info() != Eigen::Success) {
    Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>> solver2;
    solver2.setTolerance(1e-12);
    solver2.setMaxIterations(5000);
    solver2.compute(sys.A);
    u = solver2.solve(rhs);
    if (solver2.info() != Eigen::Success)
      fail("solver-not-converged", "flat Poisson solve stalled (residual " +
                                       std::to_string(solver2.error()) + ")");
  }
  const Eigen::VectorXd res = sys.A * u - rhs;
  double sup = 0.0;
  for (std::size_t f = 0; f < count; ++f)
    if (sys.kind[f] == 0) sup = std::max(sup, std::abs(res[f]));
  SolveOut out;
  out.u.assign(u.data(), u.data() + count);
  out.residual_sup = sup;
  out.iterations = static_cast<int>(solver.iterations());
  return out;
}

}  // namespace

PoissonSolution solve_flat_poisson(const Chart& chart, const Field& source) {
  const PoissonSystem sys = assemble_poisson(chart);
  const Field src = source;
  const SolveOut so =
      solve_poisson_system(chart, sys, [&](const Vec& x) { return src.value(0, x); });
  PoissonSolution out;
  out.u = Field::grid(chart, Rank{0, 0}, {so.u});
  out.residual_sup = so.residual_sup;
  out.iterations = so.iterations;
  return out;
}

AuxPotentials solve_aux_poisson(const InitialDataSet& ids) {
  const Chart& chart = ids.chart;
  const int n = chart.n;
  const PoissonSystem sys = assemble_poisson(chart);
  const Field g = ids.g, pi = ids.pi;

  AuxPotentials out;
  out.iterations = 0;

  // phi: source tr0 pi
  {
    const SolveOut so = solve_poisson_system(chart, sys, [&](const Vec& x) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += pi.value(i + n * i, x);
      return s;
    });
    out.phi = Field::grid(chart, Rank{0, 0}, {so.u});
    out.phi_residual = so.residual_sup;
    out.iterations = std::max(out.iterations, so.iterations);
  }
  // V_i: source (1/2) g_{jj,i} - g_{ij,j}
  {
    std::vector<std::vector<double>> comps;
    for (int i = 0; i < n; ++i) {
      const SolveOut so = solve_poisson_system(chart, sys, [&](const Vec& x) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
          const Jet gjj = g.jet(j + n * j, x, 1);
          const Jet gij = g.jet(i + n * j, x, 1);
          s += 0.5 * gjj.d1[i] - gij.d1[j];
        }
        return s;
      });
      comps.push_back(so.u);
      out.V_residual = std::max(out.V_residual, so.residual_sup);
      out.iterations = std::max(out.iterations, so.iterations);
    }
    out.V = Field::grid(chart, Rank{1, 0}, std::move(comps));
  }

  // beta from the sphere-averaged div0 V - (n - g_ii)/2 profile
  {
    const double r_lo = 0.25 * chart.r_outer, r_hi = 0.7 * chart.r_outer;
    std::vector<std::pair<double, double>> series;
    for (int s = 0; s < 8; ++s) {
      const double r = r_lo + (r_hi - r_lo) * s / 7.0;
      const double avg = sphere_average(n, r, [&](const Vec& x) {
        double div = 0.0, gii = 0.0;
        for (int i = 0; i < n; ++i) {
          div += out.V.jet(i, x, 1).d1[i];
          gii += g.value(i + n * i, x);
        }
        return div - 0.5 * (n - gii);
      });
      series.push_back({r, avg});
    }
    auto [c0, err] = extrapolate_flux(series, static_cast<double>(n - 2));
    (void)c0;
    (void)err;
    // refit explicitly to read off the r^{2-n} coefficient
    Eigen::MatrixXd M(series.size(), 3);
    Eigen::VectorXd y(series.size());
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double r = series[s].first;
      M(s, 0) = 1.0;
      M(s, 1) = std::pow(r, 2.0 - n);
      M(s, 2) = std::pow(r, 1.0 - n);
      y(s) = series[s].second;
    }
    const Eigen::VectorXd coef = M.colPivHouseholderQr().solve(y);
    out.beta = coef(1);
  }
  return out;
}

ExpansionFit fit_expansion(const LapseShiftPair& pair, const InitialDataSet& ids,
                           const AuxPotentials& aux, double r_lo, double r_hi, int spheres) {
  const Chart& chart = ids.chart;
  const int n = chart.n;
  if (spheres < 3 || !(r_lo < r_hi) || r_lo <= chart.r_inner || r_hi >= chart.r_outer)
    fail("window-too-small", "fit window needs >= 3 spheres inside the chart");
  const DecayWeight w = ids.type_params;
  const double q1 = (w.q1 > 0.0) ? w.q1 : w.q1_default(n);

  // Per series, basis {1, r^{2-n}, r^{2-n-q1}, r^{1-n}}: the two extra
  // columns absorb the admissible remainder class and the next power.
  // unknowns: (a, A, A', A'') then per i (b_i, B_i, B', B'')
  const int na = 4 * (1 + n);
  const int rows = spheres * (1 + n);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(rows, na);
  Eigen::VectorXd y(rows);
  const int ia = 0, iA = 1;
  auto ib = [&](int i) { return 4 * (1 + i); };
  auto iB = [&](int i) { return 4 * (1 + i) + 1; };

  const Field f = pair.f, X = pair.X, phi = aux.phi, V = aux.V;
  int row = 0;
  for (int s = 0; s < spheres; ++s) {
    const double r = r_lo + (r_hi - r_lo) * s / (spheres - 1.0);
    const double u = std::pow(r, 2.0 - n);
    const double uq = std::pow(r, 2.0 - n - q1);
    const double u2 = std::pow(r, 1.0 - n);
    // averaged aux ingredients
    Vec avg_dphi = vzero();
    double avg_f = sphere_average(n, r, [&](const Vec& x) { return f.value(0, x); });
    for (int k = 0; k < n; ++k)
      avg_dphi[k] = sphere_average(n, r, [&](const Vec& x) { return phi.jet(0, x, 1).d1[k]; });

    M(row, ia) = 1.0;
    M(row, iA) = u;
    M(row, iA + 1) = uq;
    M(row, iA + 2) = u2;
    for (int k = 0; k < n; ++k) M(row, ib(k)) = avg_dphi[k] / (2.0 * (n - 1.0));
    y(row) = avg_f;
    ++row;

    for (int i = 0; i < n; ++i) {
      const double avg_X = sphere_average(n, r, [&](const Vec& x) { return X.value(i, x); });
      M(row, ib(i)) += 1.0;
      M(row, iB(i)) = u;
      M(row, iB(i) + 1) = uq;
      M(row, iB(i) + 2) = u2;
      M(row, ia) = 2.0 / (n - 1.0) * avg_dphi[i];
      for (int k = 0; k < n; ++k) {
        const double avg_dV = sphere_average(n, r, [&](const Vec& x) {
          return V.jet(i, x, 1).d1[k];
        });
        M(row, ib(k)) += avg_dV;
      }
      y(row) = avg_X;
      ++row;
    }
  }
  const Eigen::VectorXd coef = M.colPivHouseholderQr().solve(y);
  ExpansionFit fit;
  fit.a = coef(ia);
  fit.A = coef(iA);
  for (int i = 0; i < n; ++i) {
    fit.b[i] = coef(ib(i));
    fit.B[i] = coef(iB(i));
  }
  fit.r_lo = r_lo;
  fit.r_hi = r_hi;
  const Eigen::VectorXd res = M * coef - y;
  double rn = 0.0;
  row = 0;
  for (int s = 0; s < spheres; ++s) {
    const double r = r_lo + (r_hi - r_lo) * s / (spheres - 1.0);
    const double wgt = std::pow(r, n - 2.0 + q1);
    for (int c = 0; c < 1 + n; ++c, ++row) rn += std::pow(res(row) * wgt, 2);
  }
  fit.residual_norm = std::sqrt(rn / rows);
  return fit;
}

RelationReport expansion_relations(const ExpansionFit& fit, const ADMCharges& charges, int n,
                                   double tolerance) {
  RelationReport rep;
  double bP = 0.0;
  for (int i = 0; i < n; ++i) bP += fit.b[i] * charges.P[i];
  rep.defect_A = std::abs(fit.A - (-fit.a * charges.E + bP / (2.0 * (n - 2.0))));
  for (int i = 0; i < n; ++i) {
    rep.defect_B = std::max(
        rep.defect_B, std::abs(fit.B[i] + 2.0 * (n - 1.0) / (n - 2.0) * fit.b[i] * charges.E));
    rep.defect_prop =
        std::max(rep.defect_prop, std::abs(fit.b[i] * charges.E + 2.0 * fit.a * charges.P[i]));
  }
  rep.pass = rep.defect_A <= tolerance && rep.defect_B <= tolerance && rep.defect_prop <= tolerance;
  return rep;
}

KidClass classify_kid(double a, const Vec& b, const ADMCharges& charges, int n, double tolerance) {
  KidClass out;
  const double E = charges.E;
  double Pn = 0.0, bn = 0.0;
  for (int i = 0; i < n; ++i) {
    Pn = std::max(Pn, std::abs(charges.P[i]));
    bn = std::max(bn, std::abs(b[i]));
  }
  if (std::abs(E) > tolerance) {
    if (std::abs(a) > tolerance) {
      out.which_case = 1;
      // proportionality of (a, b) and (E, -2P) via cross-multiplication
      for (int i = 0; i < n; ++i)
        out.defect = std::max(out.defect, std::abs(a * (-2.0 * charges.P[i]) - b[i] * E));
    } else {
      out.which_case = 2;
      out.defect = bn;  // must have b = 0
    }
  } else {
    out.which_case = 3;
    out.defect = (Pn <= tolerance) ? 0.0 : std::abs(a);  // a = 0 or P = 0
  }
  out.pass = out.defect <= tolerance;
  return out;
}

Field solve_slice_poisson(const Chart& chart, const std::function<double(const Vec&)>& src,
                          double slab_lo, double slab_hi, double pad) {
  const int n = chart.n;
  if (n != 3) fail("unsupported-dimension", "slice Poisson solves are provided for n = 3");
  const int N = chart.nodes;
  const double h = chart.h();
  std::vector<double> data(chart.node_count(), 0.0);

  using SpMatC = Eigen::SparseMatrix<double>;
  // one 2D system per x3 slice within the padded slab
  for (int kz = 0; kz < N; ++kz) {
    const double z = chart.coord(kz);
    if (z < slab_lo - pad || z > slab_hi + pad) continue;
    const int m = N * N;
    std::vector<Trip> trips;
    Eigen::VectorXd rhs(m);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        const int p = i * N + j;
        const bool bd = (i == 0 || i == N - 1 || j == 0 || j == N - 1);
        if (bd) {
          trips.emplace_back(p, p, 1.0);
          rhs(p) = 0.0;
          continue;
        }
        trips.emplace_back(p, p, -4.0 / (h * h));
        trips.emplace_back(p, p + N, 1.0 / (h * h));
        trips.emplace_back(p, p - N, 1.0 / (h * h));
        trips.emplace_back(p, p + 1, 1.0 / (h * h));
        trips.emplace_back(p, p - 1, 1.0 / (h * h));
        Vec x = vzero();
        x[0] = chart.coord(i);
        x[1] = chart.coord(j);
        x[2] = z;
        rhs(p) = src(x);
      }
    SpMatC A(m, m);
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::BiCGSTAB<SpMatC> solver;
    solver.setTolerance(1e-12);
    solver.setMaxIterations(20000);
    solver.compute(A);
    const Eigen::VectorXd u = solver.solve(rhs);
    if (solver.info() != Eigen::Success)
      fail("solver-not-converged", "slice Poisson solve stalled");
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        std::array<int, kMaxDim> idx{};
        idx[0] = i;
        idx[1] = j;
        idx[2] = kz;
        data[chart.flat_index(idx)] = u(i * N + j);
      }
  }
  return Field::grid(chart, Rank{0, 0}, {std::move(data)});
}

RigidityReport rigidity_divY_check(const Field& omega, double E, double slab_lo, double slab_hi) {
  const Chart& chart = omega.chart();
  const int n = chart.n;
  const int np = n - 1;  // primed axes
  const double h = chart.h();

  // materialize Y_B on the slab (value from omega jets of order 1)
  const Field om = omega;
  auto Yval = [om, np, n](const Vec& x, int B) {
    double rho2 = 0.0;
    for (int A = 0; A < np; ++A) rho2 += x[A] * x[A];
    double s = 0.0;
    double trw = 0.0, dtrw_B = 0.0;
    for (int A = 0; A < np; ++A) {
      const Jet wAA = om.jet(A + n * A, x, 1);
      trw += wAA.v;
      dtrw_B += wAA.d1[B];
    }
    for (int A = 0; A < np; ++A) {
      for (int C = 0; C < np; ++C) {
        const Jet wAC = om.jet(A + n * C, x, 1);
        s += x[A] * x[C] * wAC.d1[B];
      }
      s += -2.0 * x[A] * om.value(A + n * B, x);
    }
    s += -rho2 / (np) * dtrw_B;
    s += 2.0 / (np) * x[B] * trw;
    return s;
  };

  std::vector<std::vector<double>> ydata(np, std::vector<double>(chart.node_count(), 0.0));
  const double pad = 3.0 * h;
  parallel_for(chart.node_count(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t f = lo; f < hi; ++f) {
      const Vec x = chart.node_point(chart.multi_index(f));
      if (x[n - 1] < slab_lo - pad || x[n - 1] > slab_hi + pad) continue;
      for (int B = 0; B < np; ++B) ydata[B][f] = Yval(x, B);
    }
  });
  std::vector<Field> Y;
  for (int B = 0; B < np; ++B)
    Y.push_back(Field::grid(chart, Rank{0, 0}, {std::move(ydata[B])}));

  // sup of |div'Y - model| over slab nodes away from the cube faces
  RigidityReport rep;
  double num = 0.0, den = 0.0;
  const double margin = 3.0 * h;
  double sup_stated = 0.0, sup_derived = 0.0, scale = 0.0;
  for (std::size_t f = 0; f < chart.node_count(); ++f) {
    const Vec x = chart.node_point(chart.multi_index(f));
    if (x[n - 1] < slab_lo || x[n - 1] > slab_hi) continue;
    bool inside = true;
    for (int a = 0; a < n; ++a)
      if (std::abs(x[a]) > chart.r_outer - margin) inside = false;
    const double r = norm2(x, n);
    if (!inside || r < chart.r_inner + margin || r > chart.r_outer - margin) continue;
    double rho2 = 0.0;
    for (int A = 0; A < np; ++A) rho2 += x[A] * x[A];
    double div = 0.0;
    for (int B = 0; B < np; ++B) div += Y[B].jet(0, x, 1).d1[B];
    const double profile = rho2 * rho2 * std::pow(r, -(n + 2.0));
    const double stated = -2.0 * E * profile;
    const double derived = 2.0 * n * (n - 2.0) * E * profile;
    sup_stated = std::max(sup_stated, std::abs(div - stated));
    sup_derived = std::max(sup_derived, std::abs(div - derived));
    scale = std::max({scale, std::abs(div), std::abs(stated), std::abs(derived)});
    num += div * profile;
    den += profile * profile;
  }
  rep.scale = scale;
  const double s = std::max(scale, 1e-300);
  rep.defect_stated = sup_stated / s;
  rep.defect_derived = sup_derived / s;
  rep.fitted_coefficient = (den > 0.0 && std::abs(E) > 0.0) ? num / den / E : 0.0;
  if (scale == 0.0) {
    rep.defect_stated = sup_stated;
    rep.defect_derived = sup_derived;
  }
  return rep;
}

}  // namespace adm
