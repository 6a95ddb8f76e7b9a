#pragma once

#include <cstdint>
#include <string>

#include "adm/constraints.hpp"

namespace adm {

// Dataset descriptor used by generate() and the container format. The pi
// normalization convention must be "paper" for ingestion into the operators;
// other conventions are recorded but not converted.
struct DatasetManifest {
  int n = 3;
  std::string family = "euclidean";  // euclidean|schwarzschild|bowen_york|conformal|perturbed|external
  double m = 1.0;                    // schwarzschild mass
  Vec P = vzero();                   // bowen_york momentum parameter
  double conformal_c = 1.0;          // conformal: u = 1 + c |x|^{-k}
  double conformal_k = 2.0;
  std::string base_family = "euclidean";  // perturbed: family being perturbed
  std::uint64_t seed = 1;
  double amplitude = 1e-2;
  double support_lo = 3.0, support_hi = 6.0;
  Chart chart;
  std::string convention = "paper";
  std::string units = "geometric, coordinate units";
  DecayWeight weight;
  double flux_rate = 0.0;

  void validate() const;
};

InitialDataSet generate(const DatasetManifest& manifest);

// Convenience builders (all analytic backends with exact derivative closures).
InitialDataSet make_euclidean(const Chart& chart);
InitialDataSet make_schwarzschild(const Chart& chart, double m);
InitialDataSet make_bowen_york(const Chart& chart, const Vec& P);
InitialDataSet make_conformal(const Chart& chart, double c, double k);
InitialDataSet make_perturbed(const Chart& chart, const DatasetManifest& manifest);

// Static Schwarzschild lapse (2r - m)/(2r + m), n = 3; a KID for the
// Schwarzschild data above.
Field schwarzschild_lapse(const Chart& chart, double m);

// Scalar field from a radial profile with exact jets.
Field radial_field(const Chart& chart, std::function<void(double, double*, double*, double*)> frr);

// C^inf bump exp(1 - 1/(1 - t^2)), t = |x - center|/radius, with exact jets.
Field bump_field(const Chart& chart, const Vec& center, double radius, double amplitude);

// Seeded symmetric rank-2 bump direction: sum of `terms` bumps with random
// symmetric coefficient matrices, centers in the shell [lo, hi].
Field seeded_symmetric_bump(const Chart& chart, Rank rank, std::uint64_t seed, double amplitude,
                            double lo, double hi, int terms = 3);

// Smoothstep ramp: 0 for r <= r1, 1 for r >= r2, C^inf monotone between.
void ramp_profile(double r, double r1, double r2, double* p, double* dp, double* ddp);

}  // namespace adm
