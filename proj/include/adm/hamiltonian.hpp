#pragma once

#include "adm/charges.hpp"
#include "adm/linearized.hpp"

namespace adm {

// Functional configuration: base data (supplies g, pi, J, the measure), the
// reference lapse-shift pair with declared asymptote (a,b), and the radius
// beyond which the pair is exactly constant.
struct HamiltonianSpec {
  InitialDataSet base;
  LapseShiftPair reference;
  double transition_radius = 4.0;
};

// Smooth reference pair: (0,0) at r_inner ramping to exactly (a,b) beyond
// the transition radius (two-sided C^inf smoothstep profile).
LapseShiftPair reference_pair(double a, const Vec& b, const Chart& chart,
                              double transition_radius);

struct HamiltonianValue {
  double value = 0.0;             // volume form over the annulus
  double inner_correction = 0.0;  // flux correction at r_inner (added in)
  double surface_form = 0.0;      // (n-1) omega (2aE + b.P) - int Phibar.(f0,X0)
  double E = 0.0;                 // charges used by the surface form
  Vec P = vzero();
};

// Volume-integral form of the functional over the truncated annulus, plus
// the inner-boundary flux correction and the surface-form value for
// comparison. Radii for the surface-form charges default to the geometric
// schedule {R/8, R/4, R/2}.
HamiltonianValue hamiltonian_value(const HamiltonianSpec& spec,
                                   const std::pair<Field, Field>& target, int quad_order = 24,
                                   int radial_panels = 24);

// First-variation pairing  DH(h,w) = -int (h,w) . (DPhibar)*(f0,X0) dmu_g.
double hamiltonian_gradient_pairing(const HamiltonianSpec& spec, const SymPair& dir);

// Lagrange-multiplier stationarity: max_i |DH(dir_i) - int (f1,X1).DPhibar(dir_i)| / |dir_i|
// over a seeded batch of compactly supported directions.
double stationarity_residual(const HamiltonianSpec& spec, const LapseShiftPair& multiplier,
                             int batch = 6, std::uint64_t seed = 2027);

}  // namespace adm
