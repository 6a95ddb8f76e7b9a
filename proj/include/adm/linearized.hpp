#pragma once

#include "adm/constraints.hpp"
#include "adm/kernels.hpp"

namespace adm {

// Perturbation direction: symmetric (0,2) metric direction h and symmetric
// (2,0) momentum direction w.
struct SymPair {
  Field h;
  Field w;
};

// Lapse-shift pair (f, X) with optional declared asymptote (a, b).
struct LapseShiftPair {
  Field f;
  Field X;
  bool has_asymptote = false;
  double a = 0.0;
  Vec b = vzero();
};

// ---------------------------------------------------------------------------
// Pointwise kernels (shared with the deformation solver's Jacobian assembly).
// ---------------------------------------------------------------------------

// Jets of a direction (h, w) at a point: h carries two derivative orders,
// w one.
struct DirJets {
  double h[4][4] = {};
  double dh[4][4][4] = {};
  double ddh[4][4][4][4] = {};
  double w[4][4] = {};
  double dw[4][4][4] = {};
};

// Base-point data for the modified correction (0, (1/2) h.J_base) with
// raising by the base metric; disabled for the plain variant.
struct BaseCorrection {
  bool modified = false;
  double ginv[4][4] = {};
  double J[4] = {};
};

DirJets dir_jets(const SymPair& dir, const Vec& x);

// D Phi at the point (G, P) in direction (h, w), plus the modified
// correction; out = (scalar slot, vector slot 0..n-1).
void linearize_at_point(const MetricJet& G, const MomentumJet& P, const DirJets& dir,
                        const BaseCorrection& corr, double out[1 + kMaxDim]);

// ---------------------------------------------------------------------------
// Field-level operations
// ---------------------------------------------------------------------------

// Linearization D Phi / D Phi-bar at the base point of `base`.
std::pair<Field, Field> linearize(const InitialDataSet& base, const SymPair& dir,
                                  ConstraintVariant variant);

// Linearization of the base-modified map Phi-bar_{(g,pi)} evaluated at a
// different point (gamma, tau) (the Newton iterate in the deform module).
std::pair<Field, Field> modified_linearize_at(const InitialDataSet& base,
                                              const std::pair<Field, Field>& point,
                                              const SymPair& dir);

// Formal L^2(g) adjoint (D Phi)^* / (D Phi-bar)^* applied to a lapse-shift
// pair; returns SymPair-shaped fields (first slot (0,2), second (2,0)).
SymPair adjoint(const InitialDataSet& base, const LapseShiftPair& pair, ConstraintVariant variant);

// Duality defect  int <DPhibar(h,w),(f,X)> - <(h,w),(DPhibar)*(f,X)> dmu_g
// for compactly supported directions (support margin >= 2 stencil widths
// from both chart boundaries, else support-touches-boundary).
double pairing_defect(const InitialDataSet& base, const LapseShiftPair& pair, const SymPair& dir);

// L^2(g) norm of a direction, sqrt(int |h|_g^2 + |w|_g^2 dmu_g); the
// normalization used by the duality and stationarity checks.
double dir_l2_norm(const InitialDataSet& base, const SymPair& dir);

// Pointwise integrands shared with the Hamiltonian module (both include the
// sqrt(det g) volume factor):
//   <(h,w), (DPhibar)*(f,X)>_g  and  <DPhibar(h,w), (f,X)>_g.
double adjoint_pairing_integrand(const InitialDataSet& base, const LapseShiftPair& pair,
                                 const SymPair& dir, const Vec& x);
double linearize_pairing_integrand(const InitialDataSet& base, const LapseShiftPair& pair,
                                   const SymPair& dir, const Vec& x);

// Radial support scan of a direction over grid nodes (smallest/largest
// radius with a nonzero component; hi < 0 for an identically zero field).
void direction_support(const SymPair& dir, double* lo, double* hi);

// The four residual systems of the adjoint-equation reformulation: two
// Hessian-type equations (for f and for X) and their traces. rhs = (h, w) is
// the claimed value of (DPhibar)*(f, X); zero rhs certifies a KID.
struct KidResiduals {
  Field hessian_f;  // (0,2)
  Field hessian_X;  // (0,3), comp = i + n*(j + n*k)
  Field trace_f;    // scalar
  Field trace_X;    // (0,1)
};
KidResiduals kid_residuals(const InitialDataSet& base, const LapseShiftPair& pair,
                           const SymPair& rhs);

}  // namespace adm
