#include "owell/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "owell/kernels.hpp"

namespace owell {

std::shared_ptr<const GridSpec> GridSpec::make(int dim, int n, double half_extent) {
  if (dim != 2 && dim != 3)
    throw InvalidInput("grid: dimension must be 2 or 3, got " + std::to_string(dim));
  if (n < 9 || n % 2 == 0)
    throw InvalidInput("grid: nodes_per_axis must be odd and >= 9, got " + std::to_string(n));
  if (!(half_extent > 0.0) || !std::isfinite(half_extent))
    throw InvalidInput("grid: half_extent must be positive and finite");

  auto g = std::make_shared<GridSpec>();
  g->dim = dim;
  g->n = n;
  g->half_extent = half_extent;
  g->spacing = 2.0 * half_extent / double(n - 1);
  g->num_nodes = 1;
  for (int d = 0; d < dim; ++d) g->num_nodes *= std::size_t(n);
  for (int d = 0; d < dim; ++d) {
    std::size_t s = 1;
    for (int e = d + 1; e < dim; ++e) s *= std::size_t(n);
    g->stride[std::size_t(d)] = s;
  }
  g->coord1d.resize(std::size_t(n));
  for (int i = 0; i < n; ++i)
    g->coord1d[std::size_t(i)] = -half_extent + g->spacing * double(i);

  const double hN = std::pow(g->spacing, dim);
  g->weight.assign(g->num_nodes, hN);
  for (std::size_t idx = 0; idx < g->num_nodes; ++idx) {
    auto c = g->unpack(idx);
    for (int d = 0; d < dim; ++d)
      if (c[d] == 0 || c[d] == n - 1) g->weight[idx] *= 0.5;
  }
  return g;
}

void Field::enforce_boundary_zero() {
  const GridSpec& g = *grid_;
  const int n = g.n;
  for (std::size_t idx = 0; idx < v_.size(); ++idx) {
    auto c = g.unpack(idx);
    bool b = false;
    for (int d = 0; d < g.dim; ++d)
      if (c[d] == 0 || c[d] == n - 1) { b = true; break; }
    if (b) v_[idx] = 0.0;
  }
}

void Field::check_finite(const char* what) const {
  for (std::size_t i = 0; i < v_.size(); ++i) {
    if (!std::isfinite(v_[i])) {
      auto c = grid_->unpack(i);
      std::ostringstream os;
      os << what << ": non-finite value " << v_[i] << " at node " << i << " (";
      for (int d = 0; d < grid_->dim; ++d)
        os << (d ? "," : "") << grid_->coord1d[std::size_t(c[d])];
      os << ")";
      throw InvalidInput(os.str());
    }
  }
}

RegionMask make_ball_mask(const GridSpec& g, Region label, const double* center,
                          double radius, bool closed_boundary) {
  RegionMask m;
  m.label = label;
  m.inside.assign(g.num_nodes, 0);
  const double r2 = radius * radius;
  for (std::size_t idx = 0; idx < g.num_nodes; ++idx) {
    double d2 = g.dist2(g.unpack(idx), center);
    bool in = closed_boundary ? (d2 <= r2) : (d2 < r2);
    if (in) {
      m.inside[idx] = 1;
      ++m.count;
    }
  }
  return m;
}

double integrate(const Field& u) {
  u.check_finite("integrate");
  return kern::active().dot(u.grid().weight.data(), u.data(), u.size());
}

double integrate_product(const GridSpec& g, const double* a, const double* b) {
  return kern::active().dot3(g.weight.data(), a, b, g.num_nodes);
}

double integrate_product(const Field& u, const Field& v) {
  return integrate_product(u.grid(), u.data(), v.data());
}

double integrate_product3(const GridSpec& g, const double* a, const double* b,
                          const double* c) {
  std::vector<double> wa(g.num_nodes);
  for (std::size_t i = 0; i < g.num_nodes; ++i) wa[i] = g.weight[i] * a[i];
  return kern::active().dot3(wa.data(), b, c, g.num_nodes);
}

void laplacian_into(const GridSpec& g, const double* src, double* dst) {
  const auto& k = kern::active();
  const std::size_t n = std::size_t(g.n);
  const double inv_h2 = 1.0 / (g.spacing * g.spacing);
  std::fill(dst, dst + g.num_nodes, 0.0);

  if (g.dim == 2) {
    for (std::size_t i0 = 1; i0 + 1 < n; ++i0) {
      const double* u0 = src + i0 * n;
      k.stencil_row2(dst + i0 * n, u0, u0 - n, u0 + n, n, inv_h2);
    }
  } else {
    const std::size_t s0 = n * n;
    for (std::size_t i0 = 1; i0 + 1 < n; ++i0) {
      for (std::size_t i1 = 1; i1 + 1 < n; ++i1) {
        const std::size_t base = i0 * s0 + i1 * n;
        const double* u0 = src + base;
        k.stencil_row3(dst + base, u0, u0 - n, u0 + n, u0 - s0, u0 + s0, n, inv_h2);
      }
    }
  }
}

Field laplacian_apply(const Field& u) {
  Field out(u.grid_ptr());
  laplacian_into(u.grid(), u.data(), out.data());
  return out;
}

double grad_pairing(const Field& u, const Field& v) {
  const GridSpec& g = u.grid();
  const auto& k = kern::active();
  const std::size_t n = std::size_t(g.n);
  double total = 0.0;
  // links along axis d exist for i_d < n-1; those index ranges are the
  // contiguous blocks of length stride*(n-1) at the start of each panel
  for (int d = 0; d < g.dim; ++d) {
    const std::size_t s = g.stride[std::size_t(d)];
    const std::size_t block = s * (n - 1);
    const std::size_t panel = s * n;
    const std::size_t panels = g.num_nodes / panel;
    for (std::size_t p = 0; p < panels; ++p)
      total += k.diff_dot(u.data() + p * panel, v.data() + p * panel, s, block);
  }
  return total * std::pow(g.spacing, g.dim - 2);
}

double norm_lambda_sq(const Field& u, double lam, const std::vector<double>& V) {
  const GridSpec& g = u.grid();
  double quad = grad_pairing(u, u) + integrate_product(u, u);
  if (lam != 0.0)
    quad += lam * integrate_product3(g, V.data(), u.data(), u.data());
  return quad;
}

double norm_lambda(const Field& u, double lam, const std::vector<double>& V) {
  if (lam < 0.0) throw InvalidInput("norm_lambda: lam must be >= 0");
  if (V.size() != u.size()) throw InvalidInput("norm_lambda: V size mismatch");
  for (std::size_t i = 0; i < V.size(); ++i)
    if (V[i] < 0.0)
      throw InvalidInput("norm_lambda: negative potential entry at node " +
                         std::to_string(i));
  return std::sqrt(norm_lambda_sq(u, lam, V));
}

namespace {

// H^1 density over selected nodes; forward differences across interior links
// only, attributed to the lower node of each link
template <class Pred>
double h1_mass_pred(const Field& u, Pred pred) {
  const GridSpec& g = u.grid();
  const int n = g.n;
  const double inv_h2 = 1.0 / (g.spacing * g.spacing);
  double total = 0.0;
  for (std::size_t idx = 0; idx < g.num_nodes; ++idx) {
    auto c = g.unpack(idx);
    if (!pred(idx, c)) continue;
    double density = u[idx] * u[idx];
    if (!g.on_boundary(c)) {
      for (int d = 0; d < g.dim; ++d) {
        auto cn = c;
        cn[d] += 1;
        if (cn[d] >= n - 1) continue; // neighbor on the boundary: skip link
        double du = u[g.pack(cn)] - u[idx];
        density += du * du * inv_h2;
      }
    }
    total += g.weight[idx] * density;
  }
  return total;
}

} // namespace

double tail_mass(const Field& u, double R) {
  const GridSpec& g = u.grid();
  if (!(R > 0.0) || R >= g.half_extent)
    throw InvalidInput("tail_mass: need 0 < R < half_extent");
  const double R2 = R * R;
  return h1_mass_pred(u, [&](std::size_t, const std::array<int, 3>& c) {
    return g.radius2(c) > R2;
  });
}

double h1_mass_where(const Field& u, const std::vector<std::uint8_t>& mask,
                     std::uint8_t value) {
  return h1_mass_pred(u, [&](std::size_t idx, const std::array<int, 3>&) {
    return mask[idx] == value;
  });
}

void field_axpy(double a, const Field& x, Field& y) {
  kern::active().axpy(a, x.data(), y.data(), y.size());
}

void field_scale(double a, Field& x) { kern::active().scale(a, x.data(), x.size()); }

double max_abs(const Field& u) { return kern::active().max_abs(u.data(), u.size()); }

double min_value(const Field& u) {
  double m = u[0];
  for (std::size_t i = 1; i < u.size(); ++i)
    if (u[i] < m) m = u[i];
  return m;
}

double max_value(const Field& u) {
  double m = u[0];
  for (std::size_t i = 1; i < u.size(); ++i)
    if (u[i] > m) m = u[i];
  return m;
}

} // namespace owell
