#pragma once

#include "adm/constraints.hpp"

namespace adm {

// ADM energy-momentum extracted from flux integrals at finitely many radii,
// with a radius extrapolation toward infinity.
struct ADMCharges {
  double E = 0.0;
  Vec P = vzero();
  double E_err = 0.0;
  Vec P_err = vzero();
  std::vector<double> radii_used;
  std::vector<double> E_at_radius;            // per-radius normalized flux
  std::vector<std::array<double, 4>> P_at_radius;
};

// Least-squares fit of flux(r) = c0 + c1 r^{-s} + c2 r^{-s-1} (exact solve
// for three samples); returns the limit c0 and a conservative error estimate
// (max fit deviation plus the last-two-sample spread).
std::pair<double, double> extrapolate_flux(const std::vector<std::pair<double, double>>& values,
                                           double model_rate);

// Energy and momentum fluxes: E from (g_{ij,i} - g_{ii,j}) nu^j with
// prefactor 1/(2(n-1)omega_{n-1}); P_i from pi_{ij} nu^j with prefactor
// 1/((n-1)omega_{n-1}). Radii must lie inside the chart, at least three.
ADMCharges adm_charges(const InitialDataSet& ids, const std::vector<double>& radii,
                       int quad_order = 32);

// Flux identities on a coordinate sphere: for a 2-tensor input the
// antisymmetric-divergence flux (vanishes for C^1 fields); for a scalar
// input the two corollary identities.
struct FluxIdentityReport {
  bool tensor_mode = false;
  double lemma_defect = 0.0;       // int (T_{ij,j} - T_{ji,j}) nu_i
  Vec corollary1_lhs = vzero();    // int (Lap0 f) nu_j
  Vec corollary1_defect = vzero(); // lhs_j - int f_{,ij} nu_i
  double corollary2_defect = 0.0;  // int (x.nu) Lap0 f - int (f_{,ij} x_j + (n-1) f_{,i}) nu_i
};
FluxIdentityReport flux_identity_suite(const Field& T_or_f, double radius, int quad_order = 32);

}  // namespace adm
