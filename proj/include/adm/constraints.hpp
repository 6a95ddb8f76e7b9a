#pragma once

#include "adm/weights.hpp"
#include "adm/geometry.hpp"

namespace adm {

// Initial data set (g, pi) on an exterior chart, with its decay class.
struct InitialDataSet {
  Chart chart;
  Field g;   // (0,2)-valence metric, positive definite
  Field pi;  // (2,0)-valence symmetric momentum tensor
  DecayWeight type_params;
  // Sharper known decay rate of the flux integrands, used as the default
  // extrapolation exponent when set (> 0); otherwise type_params.q is used.
  double flux_rate = 0.0;
};

struct MassCurrent {
  Field mu;  // scalar energy density
  Field J;   // (1,0)-valence current density vector
};

enum class MomentumDirection { k_to_pi, pi_to_k };
enum class ConstraintVariant { plain, modified };

// Conversion between the second fundamental form k and the momentum tensor:
// pi^{ij} = k^{ij} - (tr_g k) g^{ij}, k^{ij} = pi^{ij} - (tr_g pi) g^{ij}/(n-1).
// Input/output k is a (0,2) field; pi is (2,0).
Field momentum_convert(const Field& data, const Field& g, MomentumDirection direction);

MassCurrent mass_current(const InitialDataSet& ids);

// Constraint operator Phi(gamma,tau) = (2 mu, J), and the modified map
// at base (g,pi): Phi(gamma,tau) + (0, (1/2) gamma.(div_g pi)) with
// (gamma.J)^i = g^{ij} gamma_{jk} J^k (base metric raising).
std::pair<Field, Field> constraint_map(const InitialDataSet& ids,
                                       const std::pair<Field, Field>& target,
                                       ConstraintVariant variant);

// Pointwise DEC margin mu - |J|_g.
Field dec_margin(const InitialDataSet& ids);

struct DecVerdict {
  double min_margin = 0.0;
  Vec worst_node = vzero();
  bool pass = false;
};

// Reduction companion to dec_margin: min over annulus nodes (with an
// interior margin of `layers` stencil widths) >= -tolerance.
DecVerdict dec_check(const InitialDataSet& ids, double tolerance, int layers = 2);

struct DecTransport {
  Field jbar_normsq;  // |Jbar|^2_gamma via the chain formula
  bool bound_ok = true;
  double worst_excess = 0.0;  // max over nodes of |Jbar|^2 - |J|^2 (should be <= 0)
};

// The DEC-preservation algebra: for gamma = g + h and Jbar = J - h.J/2,
// |Jbar|^2_gamma = |J|^2_g - (3/4)|h.J|^2_g + (1/4) h_{ij}(h.J)^i(h.J)^j,
// asserted against |J|^2_g nodewise. Requires |h|_g < 3 everywhere.
DecTransport dec_transport_check(const Field& g, const Field& J, const Field& h);

}  // namespace adm
