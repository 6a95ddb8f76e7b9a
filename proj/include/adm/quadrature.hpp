#pragma once

#include "adm/field.hpp"

namespace adm {

// Product quadrature on the coordinate sphere |x| = r for n = 3:
// Gauss-Legendre in cos(theta) times a uniform azimuthal rule. Exact for
// high-degree spherical polynomials and fully deterministic.
struct SphereRule {
  std::vector<Vec> dirs;       // unit directions
  std::vector<double> weights; // sum = unit sphere area
};

const SphereRule& sphere_rule(int polar_order);  // default callers use 32

// Integral over |x|=r of a scalar function of position, d\mathcal{H}^{n-1}.
// n = 3 uses the product rule; other n fall back to seeded Monte Carlo on
// analytic evaluators (variance reported through *mc_stderr when non-null).
double sphere_integral(int n, double r, const std::function<double(const Vec&)>& f,
                       int quad_order = 32, double* mc_stderr = nullptr,
                       std::uint64_t seed = 0x5eedu);

// Flux of a rank-1 field through |x| = r: integral of <field, nu> with
// nu = x/|x|. Works for valence (0,1) and (1,0).
double sphere_flux(const Field& covector_field, double radius, int quad_order = 32);

// Integral over the annulus r_lo <= |x| <= r_hi of f(x) dx (Euclidean
// measure; put any volume-form factor inside f). Composite Gauss-Legendre
// radial panels times the sphere rule; panel breaks may be supplied to
// resolve localized features.
double annulus_integral(int n, double r_lo, double r_hi,
                        const std::function<double(const Vec&)>& f, int quad_order = 24,
                        int radial_panels = 16, const std::vector<double>& extra_breaks = {});

// Nodes/weights of a Gauss-Legendre rule on [-1, 1].
void gauss_legendre(int npts, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace adm
