#pragma once

#include "adm/core.hpp"

namespace adm {

// Exterior coordinate chart: a tensor-product node set over the cube
// [-r_outer, r_outer]^n, used on the annulus r_inner <= |x| <= r_outer.
// Nodes outside the annulus (cube corners, a shell below r_inner) carry
// ghost samples so finite-difference stencils near the annulus stay fed.
struct Chart {
  int n = 3;
  double r_inner = 1.0;
  double r_outer = 16.0;
  int nodes = 65;    // nodes per axis
  int fd_order = 4;  // finite-difference accuracy order, 2 or 4

  double h() const { return 2.0 * r_outer / (nodes - 1); }
  double coord(int i) const { return -r_outer + i * h(); }
  std::size_t node_count() const {
    std::size_t c = 1;
    for (int a = 0; a < n; ++a) c *= static_cast<std::size_t>(nodes);
    return c;
  }

  Vec node_point(const std::array<int, kMaxDim>& idx) const {
    Vec x = vzero();
    for (int a = 0; a < n; ++a) x[a] = coord(idx[a]);
    return x;
  }

  std::size_t flat_index(const std::array<int, kMaxDim>& idx) const {
    std::size_t f = 0;
    for (int a = 0; a < n; ++a) f = f * nodes + idx[a];
    return f;
  }

  std::array<int, kMaxDim> multi_index(std::size_t flat) const {
    std::array<int, kMaxDim> idx{};
    for (int a = n - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(flat % nodes);
      flat /= nodes;
    }
    return idx;
  }

  bool in_annulus(const Vec& x, double margin_inner = 0.0, double margin_outer = 0.0) const {
    const double r = norm2(x, n);
    return r >= r_inner + margin_inner && r <= r_outer - margin_outer;
  }

  bool same_geometry(const Chart& o) const {
    return n == o.n && r_inner == o.r_inner && r_outer == o.r_outer && nodes == o.nodes;
  }
};

// Validated constructor. nodes_per_axis must leave room for the widest
// centered stencil (2*fd_order + 1).
Chart make_chart(int n, double r_inner, double r_outer, int nodes_per_axis, int fd_order);

}  // namespace adm
