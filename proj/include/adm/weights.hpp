#pragma once

#include "adm/field.hpp"

namespace adm {

// Decay/regularity bookkeeping for the weighted function spaces: rate q,
// derivative count k, Hoelder exponent alpha, integrability p, plus the
// auxiliary rates q0 (source decay) and q1 (expansion remainders).
struct DecayWeight {
  double q = 0.9;
  int k = 0;
  double alpha = 0.5;
  double p = 4.0;
  double q0 = 0.5;
  double q1 = 0.0;  // 0 => derive the default from (q, q0)

  // Default q1 in (0,1) with n + q1 <= min(n + q0, 2 + 2q).
  double q1_default(int n) const {
    double v = std::min({q0, 2.0 + 2.0 * q - n, 0.9});
    return std::max(v, 1e-3);
  }

  void validate(int n) const {
    if (!(q > 0.0)) fail("invalid-parameters", "decay rate q must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) fail("invalid-parameters", "alpha must lie in (0,1)");
    if (!(p > n)) fail("invalid-parameters", "p must exceed n for Sobolev-type use");
    if (!(q + alpha > n - 2.0)) fail("invalid-parameters", "need q + alpha > n - 2");
    if (k < 0 || k > 2) fail("insufficient-derivatives", "k must be 0, 1, or 2");
  }
};

enum class NormMode { holder, sobolev };

// Discrete estimator of the weighted Hoelder / Sobolev norm over the chart
// annulus. Suprema and quadrature sums run over grid nodes, so the value is
// a lower bound of the true norm that converges under refinement; the
// Hoelder seminorm is sampled on a fixed deterministic set of node pairs
// (dyadic axis offsets up to |x|/2). Tensor fields sum componentwise norms.
double weighted_norm(const Field& field, const DecayWeight& weight, NormMode mode);

}  // namespace adm
