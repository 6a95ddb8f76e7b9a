#include "adm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace adm {

void gauss_legendre(int npts, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(npts);
  weights.resize(npts);
  // Newton iteration on Legendre polynomials.
  for (int i = 0; i < npts; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (npts + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= npts; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = npts * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= npts; ++k) {
      const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const double dp = npts * (x * p1 - p0) / (x * x - 1.0);
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  // ascending order for determinism
  std::vector<int> perm(npts);
  for (int i = 0; i < npts; ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end(), [&](int a, int b) { return nodes[a] < nodes[b]; });
  std::vector<double> nn(npts), ww(npts);
  for (int i = 0; i < npts; ++i) {
    nn[i] = nodes[perm[i]];
    ww[i] = weights[perm[i]];
  }
  nodes = nn;
  weights = ww;
}

const SphereRule& sphere_rule(int polar_order) {
  static std::map<int, SphereRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(polar_order);
  if (it != cache.end()) return it->second;

  SphereRule rule;
  std::vector<double> ct, wt;
  gauss_legendre(polar_order, ct, wt);
  const int naz = 2 * polar_order;
  const double waz = 2.0 * M_PI / naz;
  rule.dirs.reserve(polar_order * naz);
  rule.weights.reserve(polar_order * naz);
  for (int i = 0; i < polar_order; ++i) {
    const double c = ct[i], s = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (int j = 0; j < naz; ++j) {
      const double phi = waz * (j + 0.5);
      Vec d = vzero();
      d[0] = s * std::cos(phi);
      d[1] = s * std::sin(phi);
      d[2] = c;
      rule.dirs.push_back(d);
      rule.weights.push_back(wt[i] * waz);
    }
  }
  return cache.emplace(polar_order, std::move(rule)).first->second;
}

double sphere_integral(int n, double r, const std::function<double(const Vec&)>& f, int quad_order,
                       double* mc_stderr, std::uint64_t seed) {
  if (n == 3) {
    const SphereRule& rule = sphere_rule(quad_order);
    const std::size_t m = rule.dirs.size();
    std::vector<double> vals(m);
    parallel_for(m, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        Vec x = vzero();
        for (int a = 0; a < 3; ++a) x[a] = r * rule.dirs[i][a];
        vals[i] = f(x);
      }
    });
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += rule.weights[i] * vals[i];
    if (mc_stderr) *mc_stderr = 0.0;
    return s * r * r;
  }
  // Seeded Monte Carlo on S^{n-1} for n != 3 (analytic backends only in
  // practice; variance is reported, not hidden).
  if (n > kMaxDim) fail("unsupported-dimension", "sphere quadrature supports n <= 4");
  auto rng = seeded_rng(seed);
  const int samples = 20000 * quad_order / 32 + 1000;
  const double area = unit_sphere_volume(n) * std::pow(r, n - 1);
  double mean = 0.0, m2 = 0.0;
  for (int i = 1; i <= samples; ++i) {
    Vec x = vzero();
    double nrm = 0.0;
    for (int a = 0; a < n; ++a) {
      // Box-Muller from two fixed uniform draws
      const double u1 = uniform(rng, 1e-12, 1.0), u2 = uniform(rng, 0.0, 1.0);
      x[a] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
      nrm += x[a] * x[a];
    }
    nrm = std::sqrt(nrm);
    for (int a = 0; a < n; ++a) x[a] = r * x[a] / nrm;
    const double v = f(x);
    const double d = v - mean;
    mean += d / i;
    m2 += d * (v - mean);
  }
  if (mc_stderr) *mc_stderr = area * std::sqrt(m2 / (static_cast<double>(samples) - 1) / samples);
  return area * mean;
}

double sphere_flux(const Field& covector_field, double radius, int quad_order) {
  const Chart& chart = covector_field.chart();
  const Rank rk = covector_field.rank();
  if (rk.total() != 1)
    fail("incompatible-valence", "sphere_flux requires a rank-1 field");
  if (radius <= chart.r_inner || radius >= chart.r_outer)
    fail("radius-out-of-chart", "flux radius " + std::to_string(radius) +
                                    " outside (r_inner, r_outer)");
  const int n = chart.n;
  if (n != 3 && covector_field.is_grid())
    fail("unsupported-dimension", "grid-backed sphere quadrature is only provided for n = 3");
  return sphere_integral(n, radius, [&](const Vec& x) {
    const double r = norm2(x, n);
    double s = 0.0;
    for (int a = 0; a < n; ++a) s += covector_field.value(a, x) * (x[a] / r);
    return s;
  }, quad_order);
}

double annulus_integral(int n, double r_lo, double r_hi, const std::function<double(const Vec&)>& f,
                        int quad_order, int radial_panels, const std::vector<double>& extra_breaks) {
  if (n != 3) fail("unsupported-dimension", "annulus quadrature is only provided for n = 3");
  // Geometric radial breakpoints plus caller-supplied breaks.
  std::vector<double> brk;
  brk.push_back(r_lo);
  const double ratio = std::pow(r_hi / r_lo, 1.0 / radial_panels);
  double r = r_lo;
  for (int i = 1; i < radial_panels; ++i) {
    r *= ratio;
    brk.push_back(r);
  }
  brk.push_back(r_hi);
  for (double b : extra_breaks)
    if (b > r_lo && b < r_hi) brk.push_back(b);
  std::sort(brk.begin(), brk.end());
  brk.erase(std::unique(brk.begin(), brk.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-12; }),
            brk.end());

  std::vector<double> gn, gw;
  gauss_legendre(8, gn, gw);
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < brk.size(); ++p) {
    const double a = brk[p], b = brk[p + 1];
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t q = 0; q < gn.size(); ++q) {
      const double rr = mid + half * gn[q];
      const double shell = sphere_integral(n, rr, f, quad_order);
      total += gw[q] * half * shell;
    }
  }
  return total;
}

}  // namespace adm
