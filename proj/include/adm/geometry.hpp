#pragma once

#include "adm/field.hpp"

namespace adm {

// Pointwise second-order jet of a metric with everything the operator
// formulas need: inverse, Christoffels and their first derivatives, Ricci,
// scalar curvature, volume factor. Convention: R_{jk} = R^l_{ljk} (paper
// index order; equals the standard Ricci tensor).
struct MetricJet {
  int n = 3;
  double g[4][4];
  double dg[4][4][4];        // g_{ij,a}
  double ddg[4][4][4][4];    // g_{ij,ab}
  double ginv[4][4];
  double dginv[4][4][4];     // (g^{ij})_{,a}
  double ddginv[4][4][4][4]; // (g^{ij})_{,ab}
  double gamma[4][4][4];     // Gamma^k_{ij}   [k][i][j]
  double dgamma[4][4][4][4]; // d_a Gamma^k_{ij} [a][k][i][j]
  double ric[4][4];
  double scal = 0.0;
  double sqrtdet = 1.0;
  bool spd = true;

  // Paper-convention Riemann R^l_{ijk}: antisymmetric in (i,j), cyclic sum
  // over (i,j,k) vanishes, and R^l_{ljk} gives the Ricci tensor above.
  double riemann(int l, int i, int j, int k) const {
    double s = dgamma[i][l][k][j] - dgamma[j][l][k][i];
    for (int m = 0; m < n; ++m)
      s += gamma[l][m][i] * gamma[m][k][j] - gamma[l][m][j] * gamma[m][k][i];
    return s;
  }
};

// Evaluate the metric jet at a point. `order` >= 2 jets of g are required.
MetricJet metric_jet(const Field& g, const Vec& x);

// Curvature fields bundled per the toolkit contract. All fields are
// value-closure views over the input metric (no materialization).
struct CurvaturePackage {
  Field christoffel;      // (1,2) valence, comp = k + n*(i + n*j) ordering below
  Field ricci;            // (0,2), symmetric
  Field scalar;           // scalar
  Field riemann;          // (1,3), only when requested (invalid Field otherwise)
};

CurvaturePackage curvature_package(const Field& g, bool want_riemann = false);

// Grid-materialized curvature in one parallel sweep (one metric jet per
// node), for pipelines that consume curvature over whole grids.
struct CurvatureGrids {
  Field ricci;   // (0,2) symmetric
  Field scalar;  // scalar
};
CurvatureGrids curvature_grids(const Field& g);

// Covariant derivative with respect to g; the new covariant slot is appended
// last. Supports valence up to (2,2).
Field covariant_derivative(const Field& T, const Field& g);

// Lie derivatives along X: returns (L_X g)_{ij} and (L_X pi)^{ij}.
std::pair<Field, Field> lie_derivatives(const Field& g, const Field& pi, const Field& X);

// Conformal Killing operator, (2,0) realization: (L_Y g - (div_g Y) g) with
// indices raised by g.
Field conformal_killing_op(const Field& g, const Field& Y);

enum class AlgebraMode { raise, lower, trace, divergence, inner };

// Pointwise metric algebra. raise/lower act on all slots of rank-2 fields;
// trace contracts a rank-2 field to a scalar; divergence contracts the last
// slot of the covariant derivative; inner returns the pointwise g-norm
// squared contraction <T,T>_g as a scalar field.
Field metric_algebra(const Field& g, const Field& T, AlgebraMode mode);

// Worst-node positive-definiteness scan (grid nodes in the annulus for grid
// fields; a deterministic node sample for analytic fields). Throws
// metric-not-positive-definite with the worst node when violated.
void require_positive_definite(const Field& g);

}  // namespace adm
