#pragma once

#include <memory>

#include "adm/chart.hpp"

namespace adm {

// Value and first/second partial derivatives of one scalar component at a point.
struct Jet {
  double v = 0.0;
  Vec d1 = vzero();
  std::array<Vec, kMaxDim> d2{vzero(), vzero(), vzero(), vzero()};
};

// Tensor valence (covariant, contravariant). Components are flattened with
// slot 0 fastest: comp = i0 + n*i1 + n^2*i2 + ...
struct Rank {
  int cov = 0;
  int con = 0;
  int total() const { return cov + con; }
  bool operator==(const Rank&) const = default;
};

enum class Symmetry { none, symmetric_pair };

// Immutable tensor field over a chart. Two backends:
//   - analytic: per-component value closures, optionally with exact gradient
//     and Hessian closures (generators supply them);
//   - grid: per-component samples on the full cube node set; jets anywhere
//     via local tensor-product Lagrange interpolation consistent with the
//     chart's fd_order (classic central stencils at nodes).
class Field {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;
  using HessFn = std::function<std::array<Vec, kMaxDim>(const Vec&)>;

  Field() = default;

  static Field analytic(const Chart& chart, Rank rank, std::vector<ValueFn> comps,
                        Symmetry sym = Symmetry::none);
  static Field analytic_full(const Chart& chart, Rank rank, std::vector<ValueFn> comps,
                             std::vector<GradFn> grads, std::vector<HessFn> hessians,
                             Symmetry sym = Symmetry::none);
  static Field grid(const Chart& chart, Rank rank, std::vector<std::vector<double>> samples,
                    Symmetry sym = Symmetry::none);
  // Sample any field onto the grid backend of its chart.
  static Field sampled(const Field& src);
  static Field zero(const Chart& chart, Rank rank, Symmetry sym = Symmetry::none);

  bool valid() const { return impl_ != nullptr; }
  const Chart& chart() const;
  Rank rank() const;
  Symmetry symmetry() const;
  bool is_grid() const;
  bool has_derivatives(int order) const;  // analytic: closures present; grid: order <= 2

  int comps() const;                    // n^total logical components
  int storage_comps() const;            // unique stored components
  int storage_of(int comp) const;       // logical -> stored (symmetry folding)
  int representative_comp(int storage) const;  // stored -> one logical
  int comp_index(std::initializer_list<int> slots) const;

  double value(int comp, const Vec& x) const;
  Jet jet(int comp, const Vec& x, int order) const;

  // Grid backend access (throws for analytic fields).
  const std::vector<double>& samples(int storage_comp) const;

  // a*this + b*other, pointwise; preserves analytic closures when both sides
  // carry them.
  Field axpy(double a, const Field& other, double b) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

// Central-difference / interpolation machinery shared with the solvers:
// value, first- and second-derivative stencil rows for a Lagrange window of
// `npts` uniform nodes evaluated at local coordinate xi in [0, npts-1].
struct StencilRows {
  int npts = 0;
  std::array<double, 8> w{}, wd{}, wdd{};  // value, d/dxi, d2/dxi2
};
StencilRows stencil_rows(int npts, double xi);

// Comma derivative of a field along an axis multi-index (|multi| <= 2 for
// grid fields). Analytic fields require the matching derivative closures.
Field derivative(const Field& f, const std::vector<int>& axis_multi_index);

}  // namespace adm
