#include "adm/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace adm {

namespace {

int ipow(int b, int e) {
  int r = 1;
  while (e-- > 0) r *= b;
  return r;
}

// Monomial coefficients of the Lagrange basis on nodes {0,1,...,npts-1}.
// coeff[k][m] is the xi^m coefficient of basis polynomial k.
struct BasisTable {
  int npts;
  double coeff[8][8];
};

const BasisTable& basis_table(int npts) {
  static BasisTable tables[9];
  static bool built[9] = {false};
  BasisTable& t = tables[npts];
  if (!built[npts]) {
    t.npts = npts;
    for (int k = 0; k < npts; ++k) {
      double poly[8] = {1.0};
      int deg = 0;
      double denom = 1.0;
      for (int j = 0; j < npts; ++j) {
        if (j == k) continue;
        // multiply by (xi - j)
        for (int m = deg + 1; m >= 1; --m) poly[m] = poly[m - 1] - j * poly[m];
        poly[0] *= -static_cast<double>(j);
        ++deg;
        denom *= (k - j);
      }
      for (int m = 0; m <= deg; ++m) t.coeff[k][m] = poly[m] / denom;
      for (int m = deg + 1; m < 8; ++m) t.coeff[k][m] = 0.0;
    }
    built[npts] = true;
  }
  return t;
}

}  // namespace

StencilRows stencil_rows(int npts, double xi) {
  const BasisTable& t = basis_table(npts);
  StencilRows rows;
  rows.npts = npts;
  for (int k = 0; k < npts; ++k) {
    // Horner for p, p', p''.
    double p = 0.0, dp = 0.0, ddp = 0.0;
    for (int m = npts - 1; m >= 0; --m) {
      ddp = ddp * xi + 2.0 * dp;
      dp = dp * xi + p;
      p = p * xi + t.coeff[k][m];
    }
    rows.w[k] = p;
    rows.wd[k] = dp;
    rows.wdd[k] = ddp;
  }
  return rows;
}

// ---------------------------------------------------------------------------

struct Field::Impl {
  Chart chart;
  Rank rank;
  Symmetry sym = Symmetry::none;
  bool grid = false;

  // analytic backend
  std::vector<ValueFn> vals;
  std::vector<GradFn> grads;
  std::vector<HessFn> hessians;

  // grid backend (storage components)
  std::vector<std::vector<double>> data;

  int comps() const { return ipow(chart.n, rank.total()); }
  int storage_comps() const {
    if (sym == Symmetry::symmetric_pair) return chart.n * (chart.n + 1) / 2;
    return comps();
  }
  int storage_of(int comp) const {
    if (sym != Symmetry::symmetric_pair) return comp;
    const int n = chart.n;
    int i = comp % n, j = comp / n;
    if (i > j) std::swap(i, j);
    return i + j * (j + 1) / 2;
  }
  int representative(int storage) const {
    if (sym != Symmetry::symmetric_pair) return storage;
    const int n = chart.n;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i <= j; ++i)
        if (i + j * (j + 1) / 2 == storage) return i + n * j;
    return 0;
  }
};

namespace {

void check_sym(Rank rank, Symmetry sym) {
  if (sym == Symmetry::symmetric_pair && rank.total() != 2)
    fail("incompatible-valence", "symmetric-pair symmetry requires a rank-2 field");
}

}  // namespace

Field Field::analytic(const Chart& chart, Rank rank, std::vector<ValueFn> comps, Symmetry sym) {
  check_sym(rank, sym);
  auto impl = std::make_shared<Impl>();
  impl->chart = chart;
  impl->rank = rank;
  impl->sym = sym;
  if (static_cast<int>(comps.size()) != impl->storage_comps() &&
      static_cast<int>(comps.size()) != impl->comps())
    fail("incompatible-valence", "component count does not match valence");
  if (static_cast<int>(comps.size()) == impl->comps() &&
      impl->storage_comps() < impl->comps()) {
    // fold a full component list down to the symmetric storage layout
    std::vector<ValueFn> folded(impl->storage_comps());
    for (int s = 0; s < impl->storage_comps(); ++s) folded[s] = comps[impl->representative(s)];
    comps = std::move(folded);
  }
  impl->vals = std::move(comps);
  Field f;
  f.impl_ = impl;
  return f;
}

Field Field::analytic_full(const Chart& chart, Rank rank, std::vector<ValueFn> comps,
                           std::vector<GradFn> grads, std::vector<HessFn> hessians, Symmetry sym) {
  Field f = analytic(chart, rank, std::move(comps), sym);
  auto impl = std::const_pointer_cast<Impl>(f.impl_);
  const int sc = impl->storage_comps();
  if (static_cast<int>(grads.size()) == impl->comps() && sc < impl->comps()) {
    std::vector<GradFn> gf(sc);
    std::vector<HessFn> hf(sc);
    for (int s = 0; s < sc; ++s) {
      gf[s] = grads[impl->representative(s)];
      hf[s] = hessians[impl->representative(s)];
    }
    grads = std::move(gf);
    hessians = std::move(hf);
  }
  if (static_cast<int>(grads.size()) != sc || static_cast<int>(hessians.size()) != sc)
    fail("incompatible-valence", "derivative closure count does not match components");
  impl->grads = std::move(grads);
  impl->hessians = std::move(hessians);
  return f;
}

Field Field::grid(const Chart& chart, Rank rank, std::vector<std::vector<double>> samples,
                  Symmetry sym) {
  check_sym(rank, sym);
  auto impl = std::make_shared<Impl>();
  impl->chart = chart;
  impl->rank = rank;
  impl->sym = sym;
  impl->grid = true;
  if (static_cast<int>(samples.size()) != impl->storage_comps())
    fail("incompatible-valence", "grid component count does not match valence/symmetry");
  const std::size_t expect = chart.node_count();
  for (const auto& arr : samples)
    if (arr.size() != expect)
      fail("manifest-mismatch", "grid array size " + std::to_string(arr.size()) +
                                    " does not match node count " + std::to_string(expect));
  impl->data = std::move(samples);
  Field f;
  f.impl_ = impl;
  return f;
}

Field Field::sampled(const Field& src) {
  const Chart& chart = src.chart();
  if (chart.n > kMaxDim) fail("invalid-dimension", "grid sampling supports n <= 4");
  auto impl = std::make_shared<Impl>();
  impl->chart = chart;
  impl->rank = src.rank();
  impl->sym = src.symmetry();
  impl->grid = true;
  const int sc = impl->storage_comps();
  const std::size_t count = chart.node_count();
  impl->data.assign(sc, std::vector<double>(count));
  for (int s = 0; s < sc; ++s) {
    const int comp = impl->representative(s);
    auto& arr = impl->data[s];
    parallel_for(count, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t f = lo; f < hi; ++f)
        arr[f] = src.value(comp, chart.node_point(chart.multi_index(f)));
    });
  }
  Field f;
  f.impl_ = impl;
  return f;
}

Field Field::zero(const Chart& chart, Rank rank, Symmetry sym) {
  check_sym(rank, sym);
  auto impl = std::make_shared<Impl>();
  impl->chart = chart;
  impl->rank = rank;
  impl->sym = sym;
  const int sc = impl->storage_comps();
  auto z = [](const Vec&) { return 0.0; };
  auto zg = [](const Vec&) { return vzero(); };
  auto zh = [](const Vec&) { return std::array<Vec, kMaxDim>{vzero(), vzero(), vzero(), vzero()}; };
  impl->vals.assign(sc, z);
  impl->grads.assign(sc, zg);
  impl->hessians.assign(sc, zh);
  Field f;
  f.impl_ = impl;
  return f;
}

const Chart& Field::chart() const { return impl_->chart; }
Rank Field::rank() const { return impl_->rank; }
Symmetry Field::symmetry() const { return impl_->sym; }
bool Field::is_grid() const { return impl_->grid; }
int Field::comps() const { return impl_->comps(); }
int Field::storage_comps() const { return impl_->storage_comps(); }
int Field::storage_of(int comp) const { return impl_->storage_of(comp); }
int Field::representative_comp(int storage) const { return impl_->representative(storage); }

bool Field::has_derivatives(int order) const {
  if (impl_->grid) return order <= 2;
  if (order >= 1 && impl_->grads.empty()) return false;
  if (order >= 2 && impl_->hessians.empty()) return false;
  return true;
}

int Field::comp_index(std::initializer_list<int> slots) const {
  const int n = impl_->chart.n;
  int c = 0, stride = 1;
  for (int s : slots) {
    c += s * stride;
    stride *= n;
  }
  return c;
}

const std::vector<double>& Field::samples(int storage_comp) const {
  if (!impl_->grid) fail("io-error", "samples() requires a grid-backed field");
  return impl_->data[storage_comp];
}

// ---------------------------------------------------------------------------
// Grid jets
// ---------------------------------------------------------------------------

namespace {

struct AxisWindow {
  int start = 0;
  int npts = 1;
  StencilRows rows;
};

AxisWindow axis_window(const Chart& c, double t, int order) {
  const double R = c.r_outer, h = c.h();
  const int N = c.nodes;
  if (t < -R - 1e-9 * R || t > R + 1e-9 * R)
    fail("stencil-out-of-domain", "coordinate " + std::to_string(t) + " outside the chart cube");
  const double u = (t + R) / h;
  const double ru = std::round(u);
  AxisWindow w;
  const int fd = c.fd_order;
  if (std::abs(u - ru) < 1e-9) {
    w.npts = fd + 1;
    w.start = static_cast<int>(ru) - fd / 2;
  } else {
    w.npts = fd + 2;
    w.start = static_cast<int>(std::floor(u)) - (w.npts / 2 - 1);
  }
  w.start = std::clamp(w.start, 0, N - w.npts);
  (void)order;
  w.rows = stencil_rows(w.npts, u - w.start);
  return w;
}

}  // namespace

Jet Field::jet(int comp, const Vec& x, int order) const {
  const Impl& im = *impl_;
  const int n = im.chart.n;
  Jet out;
  if (!im.grid) {
    const int s = im.storage_of(comp);
    out.v = im.vals[s](x);
    if (order >= 1) {
      if (im.grads.empty())
        fail("insufficient-derivatives", "analytic field has no gradient closures");
      out.d1 = im.grads[s](x);
    }
    if (order >= 2) {
      if (im.hessians.empty())
        fail("insufficient-derivatives", "analytic field has no Hessian closures");
      const auto hs = im.hessians[s](x);
      for (int a = 0; a < n; ++a) out.d2[a] = hs[a];
    }
    return out;
  }

  if (order > 2) fail("insufficient-derivatives", "grid fields provide jets up to order 2");
  const double h = im.chart.h();
  const std::vector<double>& arr = im.data[im.storage_of(comp)];

  AxisWindow win[kMaxDim];
  bool all_on_node = true;
  for (int a = 0; a < n; ++a) {
    win[a] = axis_window(im.chart, x[a], order);
    // on-node windows have a Kronecker value row
    double diag = 0.0;
    for (int k = 0; k < win[a].npts; ++k) diag = std::max(diag, std::abs(win[a].rows.w[k]));
    (void)diag;
    all_on_node = all_on_node && (win[a].npts == im.chart.fd_order + 1);
  }

  std::size_t stride[kMaxDim];
  {
    std::size_t s = 1;
    for (int a = n - 1; a >= 0; --a) {
      stride[a] = s;
      s *= im.chart.nodes;
    }
  }

  if (all_on_node) {
    // Fast path: value row is a Kronecker delta at the centered node.
    std::array<int, kMaxDim> ctr{};
    std::size_t base = 0;
    for (int a = 0; a < n; ++a) {
      // locate the node index matching x along axis a
      const double u = (x[a] + im.chart.r_outer) / h;
      ctr[a] = static_cast<int>(std::round(u));
      base += static_cast<std::size_t>(ctr[a]) * stride[a];
    }
    out.v = arr[base];
    if (order >= 1) {
      for (int a = 0; a < n; ++a) {
        const auto& w = win[a];
        const int ca = ctr[a] - w.start;
        double s1 = 0.0, s2 = 0.0;
        for (int k = 0; k < w.npts; ++k) {
          const double F = arr[base + (k - ca) * static_cast<std::ptrdiff_t>(stride[a])];
          s1 += w.rows.wd[k] * F;
          s2 += w.rows.wdd[k] * F;
        }
        out.d1[a] = s1 / h;
        if (order >= 2) out.d2[a][a] = s2 / (h * h);
      }
    }
    if (order >= 2) {
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
          const auto& wa = win[a];
          const auto& wb = win[b];
          const int ca = ctr[a] - wa.start, cb = ctr[b] - wb.start;
          double s = 0.0;
          for (int k = 0; k < wa.npts; ++k) {
            if (wa.rows.wd[k] == 0.0) continue;
            double inner = 0.0;
            const std::size_t rowbase = base + (k - ca) * static_cast<std::ptrdiff_t>(stride[a]);
            for (int l = 0; l < wb.npts; ++l)
              inner += wb.rows.wd[l] * arr[rowbase + (l - cb) * static_cast<std::ptrdiff_t>(stride[b])];
            s += wa.rows.wd[k] * inner;
          }
          out.d2[a][b] = out.d2[b][a] = s / (h * h);
        }
    }
    return out;
  }

  // Generic tensor-product path.
  double acc_v = 0.0;
  Vec acc_d1 = vzero();
  std::array<Vec, kMaxDim> acc_d2{vzero(), vzero(), vzero(), vzero()};
  std::array<int, kMaxDim> k{};
  const int np0 = win[0].npts, np1 = (n > 1) ? win[1].npts : 1, np2 = (n > 2) ? win[2].npts : 1,
            np3 = (n > 3) ? win[3].npts : 1;
  for (k[0] = 0; k[0] < np0; ++k[0])
    for (k[1] = 0; k[1] < np1; ++k[1])
      for (k[2] = 0; k[2] < np2; ++k[2])
        for (k[3] = 0; k[3] < np3; ++k[3]) {
          std::size_t f = 0;
          for (int a = 0; a < n; ++a)
            f += static_cast<std::size_t>(win[a].start + k[a]) * stride[a];
          const double F = arr[f];
          double wv[kMaxDim], wd[kMaxDim], wdd[kMaxDim];
          for (int a = 0; a < n; ++a) {
            wv[a] = win[a].rows.w[k[a]];
            wd[a] = win[a].rows.wd[k[a]];
            wdd[a] = win[a].rows.wdd[k[a]];
          }
          double pv = F;
          for (int a = 0; a < n; ++a) pv *= wv[a];
          acc_v += pv;
          if (order >= 1) {
            for (int a = 0; a < n; ++a) {
              double p = F;
              for (int b = 0; b < n; ++b) p *= (b == a) ? wd[b] : wv[b];
              acc_d1[a] += p;
            }
          }
          if (order >= 2) {
            for (int a = 0; a < n; ++a)
              for (int b = a; b < n; ++b) {
                double p = F;
                if (a == b) {
                  for (int c2 = 0; c2 < n; ++c2) p *= (c2 == a) ? wdd[c2] : wv[c2];
                } else {
                  for (int c2 = 0; c2 < n; ++c2)
                    p *= (c2 == a || c2 == b) ? wd[c2] : wv[c2];
                }
                acc_d2[a][b] += p;
              }
          }
        }
  out.v = acc_v;
  if (order >= 1)
    for (int a = 0; a < n; ++a) out.d1[a] = acc_d1[a] / h;
  if (order >= 2)
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) out.d2[a][b] = out.d2[b][a] = acc_d2[a][b] / (h * h);
  return out;
}

double Field::value(int comp, const Vec& x) const {
  if (!impl_->grid) return impl_->vals[impl_->storage_of(comp)](x);
  return jet(comp, x, 0).v;
}

Field Field::axpy(double a, const Field& other, double b) const {
  const Impl& A = *impl_;
  const Impl& B = *other.impl_;
  if (!(A.rank == B.rank) || !A.chart.same_geometry(B.chart))
    fail("incompatible-valence", "axpy requires matching rank and chart");
  const Symmetry sym =
      (A.sym == Symmetry::symmetric_pair && B.sym == Symmetry::symmetric_pair)
          ? Symmetry::symmetric_pair
          : Symmetry::none;
  if (A.grid || B.grid) {
    Field ga = A.grid ? *this : Field::sampled(*this);
    Field gb = B.grid ? other : Field::sampled(other);
    auto impl = std::make_shared<Impl>();
    impl->chart = A.chart;
    impl->rank = A.rank;
    impl->sym = sym;
    impl->grid = true;
    const int sc = impl->storage_comps();
    impl->data.assign(sc, std::vector<double>(A.chart.node_count()));
    for (int s = 0; s < sc; ++s) {
      const int comp = impl->representative(s);
      const auto& xa = ga.samples(ga.storage_of(comp));
      const auto& xb = gb.samples(gb.storage_of(comp));
      auto& out = impl->data[s];
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * xa[i] + b * xb[i];
    }
    Field f;
    f.impl_ = impl;
    return f;
  }
  // analytic + analytic
  const int nc = A.comps();
  std::vector<ValueFn> vals(nc);
  const bool derivs = !A.grads.empty() && !B.grads.empty() && !A.hessians.empty() && !B.hessians.empty();
  std::vector<GradFn> grads;
  std::vector<HessFn> hessians;
  Field lhs = *this, rhs = other;  // keep payloads alive in the closures
  for (int cidx = 0; cidx < nc; ++cidx) {
    vals[cidx] = [lhs, rhs, a, b, cidx](const Vec& x) {
      return a * lhs.value(cidx, x) + b * rhs.value(cidx, x);
    };
  }
  if (derivs) {
    const int n = A.chart.n;
    grads.resize(nc);
    hessians.resize(nc);
    for (int cidx = 0; cidx < nc; ++cidx) {
      grads[cidx] = [lhs, rhs, a, b, cidx, n](const Vec& x) {
        const Jet ja = lhs.jet(cidx, x, 1), jb = rhs.jet(cidx, x, 1);
        Vec g = vzero();
        for (int i = 0; i < n; ++i) g[i] = a * ja.d1[i] + b * jb.d1[i];
        return g;
      };
      hessians[cidx] = [lhs, rhs, a, b, cidx, n](const Vec& x) {
        const Jet ja = lhs.jet(cidx, x, 2), jb = rhs.jet(cidx, x, 2);
        std::array<Vec, kMaxDim> hm{vzero(), vzero(), vzero(), vzero()};
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) hm[i][j] = a * ja.d2[i][j] + b * jb.d2[i][j];
        return hm;
      };
    }
    // note: closures built against logical components; construct with
    // symmetry none to keep the indexing one-to-one
    return Field::analytic_full(A.chart, A.rank, std::move(vals), std::move(grads),
                                std::move(hessians), Symmetry::none);
  }
  return Field::analytic(A.chart, A.rank, std::move(vals), Symmetry::none);
}

Field derivative(const Field& f, const std::vector<int>& axis_multi_index) {
  const Chart& chart = f.chart();
  const int n = chart.n;
  for (int a : axis_multi_index)
    if (a < 0 || a >= n) fail("invalid-dimension", "derivative axis out of range");
  const int order = static_cast<int>(axis_multi_index.size());
  if (order == 0) return f;
  if (order > 2) fail("insufficient-derivatives", "derivatives up to order 2 only");

  if (!f.is_grid()) {
    if (!f.has_derivatives(order))
      fail("insufficient-derivatives", "analytic field lacks derivative closures");
    const int nc = f.comps();
    std::vector<Field::ValueFn> vals(nc);
    for (int c = 0; c < nc; ++c) {
      if (order == 1) {
        const int a = axis_multi_index[0];
        vals[c] = [f, c, a](const Vec& x) { return f.jet(c, x, 1).d1[a]; };
      } else {
        const int a = axis_multi_index[0], b = axis_multi_index[1];
        vals[c] = [f, c, a, b](const Vec& x) { return f.jet(c, x, 2).d2[a][b]; };
      }
    }
    return Field::analytic(chart, f.rank(), std::move(vals), f.symmetry());
  }

  // grid: materialize the derivative samples
  const int sc = f.storage_comps();
  std::vector<std::vector<double>> out(sc, std::vector<double>(chart.node_count()));
  for (int s = 0; s < sc; ++s) {
    const int comp = f.representative_comp(s);
    auto& arr = out[s];
    parallel_for(chart.node_count(), [&](std::size_t lo, std::size_t hi) {
      for (std::size_t fl = lo; fl < hi; ++fl) {
        const Vec x = chart.node_point(chart.multi_index(fl));
        const Jet j = f.jet(comp, x, order);
        arr[fl] = (order == 1) ? j.d1[axis_multi_index[0]]
                               : j.d2[axis_multi_index[0]][axis_multi_index[1]];
      }
    });
  }
  return Field::grid(chart, f.rank(), std::move(out), f.symmetry());
}

}  // namespace adm
