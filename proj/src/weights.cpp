#include "adm/weights.hpp"

#include <algorithm>
#include <cmath>

namespace adm {

namespace {

struct MultiIndex {
  int order;
  int a, b;  // axes for order 1/2 (a <= b for order 2)
};

std::vector<MultiIndex> multi_indices(int n, int upto) {
  std::vector<MultiIndex> mi;
  mi.push_back({0, 0, 0});
  if (upto >= 1)
    for (int a = 0; a < n; ++a) mi.push_back({1, a, 0});
  if (upto >= 2)
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) mi.push_back({2, a, b});
  return mi;
}

double deriv_of(const Jet& j, const MultiIndex& m) {
  if (m.order == 0) return j.v;
  if (m.order == 1) return j.d1[m.a];
  return j.d2[m.a][m.b];
}

double parallel_max(std::size_t count, const std::function<double(std::size_t)>& f) {
  constexpr std::size_t kChunk = 4096;
  const std::size_t nchunks = (count + kChunk - 1) / kChunk;
  std::vector<double> partial(nchunks, 0.0);
  parallel_for(count, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double v = f(i);
      double& slot = partial[i / kChunk];
      if (v > slot) slot = v;
    }
  });
  double m = 0.0;
  for (double p : partial) m = std::max(m, p);
  return m;
}

}  // namespace

double weighted_norm(const Field& field, const DecayWeight& weight, NormMode mode) {
  const Chart& chart = field.chart();
  const int n = chart.n;
  weight.validate(n);
  if (!field.has_derivatives(weight.k))
    fail("insufficient-derivatives", "field cannot provide order-" + std::to_string(weight.k) +
                                         " jets for the requested norm");
  const auto mis = multi_indices(n, weight.k);
  const double h = chart.h();
  const std::size_t count = chart.node_count();

  double total = 0.0;
  for (int comp = 0; comp < field.comps(); ++comp) {
    if (field.symmetry() == Symmetry::symmetric_pair &&
        field.representative_comp(field.storage_of(comp)) != comp)
      continue;  // each stored component counted once
    if (mode == NormMode::sobolev) {
      const double p = weight.p;
      const double sum = parallel_sum(count, [&](std::size_t fl) {
        const Vec x = chart.node_point(chart.multi_index(fl));
        const double r = norm2(x, n);
        if (r < chart.r_inner || r > chart.r_outer) return 0.0;
        const Jet j = field.jet(comp, x, weight.k);
        double s = 0.0;
        for (const auto& m : mis) {
          const double term = std::pow(r, m.order + weight.q) * std::abs(deriv_of(j, m));
          s += std::pow(term, p);
        }
        return s * std::pow(r, -n);
      });
      total += std::pow(sum * std::pow(h, n), 1.0 / p);
      continue;
    }
    // Hoelder: weighted suprema plus a sampled top-order seminorm.
    double sup_terms = 0.0;
    for (const auto& m : mis) {
      sup_terms += parallel_max(count, [&](std::size_t fl) {
        const Vec x = chart.node_point(chart.multi_index(fl));
        const double r = norm2(x, n);
        if (r < chart.r_inner || r > chart.r_outer) return 0.0;
        const Jet j = field.jet(comp, x, weight.k);
        return std::pow(r, m.order + weight.q) * std::abs(deriv_of(j, m));
      });
    }
    double semi = 0.0;
    for (const auto& m : mis) {
      if (m.order != weight.k) continue;
      semi += parallel_max(count, [&](std::size_t fl) {
        const Vec x = chart.node_point(chart.multi_index(fl));
        const double r = norm2(x, n);
        if (r < chart.r_inner || r > chart.r_outer) return 0.0;
        const Jet jx = field.jet(comp, x, weight.k);
        const double fx = deriv_of(jx, m);
        double best = 0.0;
        for (int axis = 0; axis < n; ++axis) {
          for (int step = 1; step * h <= 0.5 * r; step *= 2) {
            Vec y = x;
            y[axis] += step * h;
            const double ry = norm2(y, n);
            if (std::abs(y[axis]) > chart.r_outer || ry < chart.r_inner || ry > chart.r_outer)
              break;
            const Jet jy = field.jet(comp, y, weight.k);
            const double d = std::abs(fx - deriv_of(jy, m));
            const double v =
                std::pow(r, weight.alpha + weight.k + weight.q) * d / std::pow(step * h, weight.alpha);
            best = std::max(best, v);
          }
        }
        return best;
      });
    }
    total += sup_terms + semi;
  }
  return total;
}

}  // namespace adm
