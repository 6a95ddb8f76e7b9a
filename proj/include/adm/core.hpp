#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace adm {

// Spatial dimension cap for the dense tensor kernels (metric inversion is
// closed-form for n <= 4; charts with larger n can be constructed but not
// operated on).
inline constexpr int kMaxDim = 4;

using Vec = std::array<double, kMaxDim>;

// All toolkit failures carry a stable kebab-case code as the message prefix,
// e.g. "invalid-radii: ...".
class error : public std::runtime_error {
 public:
  error(const std::string& code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), code_(code) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& detail) {
  throw error(code, detail);
}

inline double norm2(const Vec& x, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += x[i] * x[i];
  return std::sqrt(s);
}

inline Vec vzero() { return Vec{0.0, 0.0, 0.0, 0.0}; }

// Volume of the unit (n-1)-sphere, omega_{n-1} = 2 pi^{n/2} / Gamma(n/2).
inline double unit_sphere_volume(int n) {
  return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

// ---------------------------------------------------------------------------
// Deterministic parallel execution.
//
// Work is split into fixed-size chunks independent of the thread count;
// chunk results land in preassigned slots and reductions combine them in
// chunk order, so results are bit-identical for any ADM_TOOLKIT_THREADS.
// ---------------------------------------------------------------------------

int thread_cap();  // from ADM_TOOLKIT_THREADS, default hardware_concurrency

void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body);

// Deterministic sum of f(i) for i in [0, count): per-chunk serial partials,
// combined in chunk order.
double parallel_sum(std::size_t count, const std::function<double(std::size_t)>& f);

// Seeded RNG helper; mt19937_64 output is specified by the standard, so
// seeded draws are reproducible across platforms.
inline std::mt19937_64 seeded_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  // Fixed affine map from the raw 64-bit draw; avoids distribution objects
  // whose output is implementation-defined.
  const double u = (rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

}  // namespace adm
