#include "adm/chart.hpp"

#include <string>

namespace adm {

Chart make_chart(int n, double r_inner, double r_outer, int nodes_per_axis, int fd_order) {
  if (n < 3) fail("invalid-dimension", "n must be >= 3 (got " + std::to_string(n) + ")");
  if (!(r_inner >= 1.0) || !(r_inner < r_outer))
    fail("invalid-radii", "need 1 <= r_inner < r_outer (got r_inner=" + std::to_string(r_inner) +
                              ", r_outer=" + std::to_string(r_outer) + ")");
  if (fd_order != 2 && fd_order != 4)
    fail("invalid-fd-order", "fd_order must be 2 or 4 (got " + std::to_string(fd_order) + ")");
  if (nodes_per_axis < 2 * fd_order + 1)
    fail("insufficient-resolution", "nodes_per_axis must be >= 2*fd_order+1 (got " +
                                        std::to_string(nodes_per_axis) + ")");
  Chart c;
  c.n = n;
  c.r_inner = r_inner;
  c.r_outer = r_outer;
  c.nodes = nodes_per_axis;
  c.fd_order = fd_order;
  return c;
}

}  // namespace adm
