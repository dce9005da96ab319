#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "owell/common.hpp"

namespace owell {

// Uniform tensor grid on [-L, L]^dim with homogeneous Dirichlet boundary.
// Node order is lexicographic with the last axis fastest; nodes_per_axis is
// odd so the origin is a node.
struct GridSpec {
  int dim = 2;                 // 2 or 3
  int n = 0;                   // nodes per axis, odd, >= 9
  double half_extent = 0.0;    // L
  double spacing = 0.0;        // h = 2L/(n-1)
  std::size_t num_nodes = 0;   // n^dim
  std::array<std::size_t, 3> stride{}; // stride[d], d < dim
  std::vector<double> coord1d;         // axis coordinates, length n
  std::vector<double> weight;          // trapezoid quadrature weights, length n^dim

  static std::shared_ptr<const GridSpec> make(int dim, int n, double half_extent);

  std::array<int, 3> unpack(std::size_t idx) const {
    std::array<int, 3> c{0, 0, 0};
    for (int d = dim - 1; d >= 0; --d) {
      c[d] = int(idx % std::size_t(n));
      idx /= std::size_t(n);
    }
    return c;
  }

  std::size_t pack(const std::array<int, 3>& c) const {
    std::size_t idx = 0;
    for (int d = 0; d < dim; ++d) idx = idx * std::size_t(n) + std::size_t(c[d]);
    return idx;
  }

  bool on_boundary(const std::array<int, 3>& c) const {
    for (int d = 0; d < dim; ++d)
      if (c[d] == 0 || c[d] == n - 1) return true;
    return false;
  }

  // squared Euclidean distance of a node from a point (point has dim entries)
  double dist2(const std::array<int, 3>& c, const double* point) const {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
      double dx = coord1d[std::size_t(c[d])] - point[d];
      s += dx * dx;
    }
    return s;
  }

  double radius2(const std::array<int, 3>& c) const {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
      double x = coord1d[std::size_t(c[d])];
      s += x * x;
    }
    return s;
  }
};

// Nodal function with zero boundary values; the discrete H^1 iterate type.
class Field {
public:
  Field() = default;
  explicit Field(std::shared_ptr<const GridSpec> grid)
      : grid_(std::move(grid)), v_(grid_->num_nodes, 0.0) {}

  const GridSpec& grid() const { return *grid_; }
  const std::shared_ptr<const GridSpec>& grid_ptr() const { return grid_; }

  std::size_t size() const { return v_.size(); }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  std::span<const double> values() const { return v_; }

  bool empty() const { return v_.empty(); }

  // zero every node whose index touches an axis end
  void enforce_boundary_zero();

  // throws InvalidInput naming the first offending node
  void check_finite(const char* what) const;

private:
  std::shared_ptr<const GridSpec> grid_;
  std::vector<double> v_;
};

enum class Region { Omega, OmegaTilde, SuppObstacle };

struct RegionMask {
  Region label = Region::Omega;
  std::vector<std::uint8_t> inside;
  std::size_t count = 0;
};

// ball mask centered at `center` (dim entries); closed_boundary includes
// nodes at distance exactly `radius`
RegionMask make_ball_mask(const GridSpec& g, Region label, const double* center,
                          double radius, bool closed_boundary);

// Quadrature and differential operators ------------------------------------

// trapezoid quadrature of a nodal function
double integrate(const Field& u);
// quadrature of the nodewise product u*v (and u*v*w)
double integrate_product(const Field& u, const Field& v);
double integrate_product(const GridSpec& g, const double* a, const double* b);
double integrate_product3(const GridSpec& g, const double* a, const double* b,
                          const double* c);

// -Delta_h u with the 2*dim+1 point stencil; zero on the boundary
Field laplacian_apply(const Field& u);
// raw-array form used by the matrix-free solvers; dst is fully rewritten
void laplacian_into(const GridSpec& g, const double* src, double* dst);

// cell-matched forward-difference pairing sum_links h^{dim-2} du dv; equals
// the quadrature pairing <laplacian_apply(u), v> for zero-boundary fields
double grad_pairing(const Field& u, const Field& v);

// lambda-norm: sqrt(grad_pairing(u,u) + integral (1+lam V) u^2)
double norm_lambda(const Field& u, double lam, const std::vector<double>& V);
double norm_lambda_sq(const Field& u, double lam, const std::vector<double>& V);

// discrete H^1 density over nodes with |x| > R; differences are taken across
// interior links only, so the artificial Dirichlet edge is not charged
double tail_mass(const Field& u, double R);

// H^1 density restricted to nodes where mask==value (same link convention)
double h1_mass_where(const Field& u, const std::vector<std::uint8_t>& mask,
                     std::uint8_t value);

// elementwise helpers (boundary-preserving)
void field_axpy(double a, const Field& x, Field& y); // y += a*x
void field_scale(double a, Field& x);
double max_abs(const Field& u);
double min_value(const Field& u);
double max_value(const Field& u);

} // namespace owell
