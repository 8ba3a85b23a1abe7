#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rfis/errors.hpp"

namespace rfis {

/// Dense column-of-rows storage for node heights, indexed z(i, j) with
/// i along x (0..n) and j along y (0..m).
class HeightMatrix {
 public:
  HeightMatrix() = default;
  HeightMatrix(int nx, int ny, double fill = 0.0)
      : nx_(nx), ny_(ny), v_(static_cast<std::size_t>(nx) * ny, fill) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }

  double& operator()(int i, int j) { return v_[static_cast<std::size_t>(i) * ny_ + j]; }
  double operator()(int i, int j) const { return v_[static_cast<std::size_t>(i) * ny_ + j]; }

  const std::vector<double>& raw() const { return v_; }

 private:
  int nx_ = 0, ny_ = 0;
  std::vector<double> v_;
};

/// The interpolation data set on a rectangular grid: strictly increasing
/// axis nodes xs (n+1), ys (m+1) and heights z (n+1)x(m+1).
/// Immutable after construction.
struct GridData {
  std::vector<double> xs;
  std::vector<double> ys;
  HeightMatrix z;
  /// True when xs = i/n and ys = j/n exactly (the normalized form with
  /// square cells of side 1/n; spacing is then the stored rational 1/n,
  /// never re-derived by subtraction).
  bool normalized = false;

  int n() const { return static_cast<int>(xs.size()) - 1; }
  int m() const { return static_cast<int>(ys.size()) - 1; }
  int region_count() const { return n() * m(); }

  /// Exact raster step 1/n of the normalized form.
  double step() const {
    if (!normalized) fail(errc::not_uniform, "step() requires a normalized grid");
    return 1.0 / n();
  }

  double x_min() const { return xs.front(); }
  double x_max() const { return xs.back(); }
  double y_min() const { return ys.front(); }
  double y_max() const { return ys.back(); }

  /// 1-based region column containing x. Cells are half-open [x_{i-1}, x_i)
  /// except the last, which is closed: a point on a shared edge belongs to
  /// the region with the larger index.
  int region_col(double x) const {
    if (x < xs.front() || x > xs.back()) fail(errc::out_of_domain, "x outside grid extent");
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    int i = static_cast<int>(it - xs.begin());
    return std::min(i, n());
  }

  int region_row(double y) const {
    if (y < ys.front() || y > ys.back()) fail(errc::out_of_domain, "y outside grid extent");
    auto it = std::upper_bound(ys.begin(), ys.end(), y);
    int j = static_cast<int>(it - ys.begin());
    return std::min(j, m());
  }

  std::pair<int, int> region_of(double x, double y) const {
    return {region_col(x), region_row(y)};
  }
};

/// A domain: an index rectangle of regions, [sx, ex] x [sy, ey] in node
/// indices. Must span at least 2 regions per axis.
struct DomainSpec {
  int sx = 0, ex = 0, sy = 0, ey = 0;

  int span_x() const { return ex - sx; }
  int span_y() const { return ey - sy; }

  /// Exact index-space containment test of region (i, j) (1-based).
  bool contains_region(int i, int j) const {
    return sx <= i - 1 && i <= ex && sy <= j - 1 && j <= ey;
  }
};

/// Domains plus the region -> domain assignment (all 1-based).
struct DomainLayout {
  std::vector<DomainSpec> domains;
  /// gamma[(j-1)*n + (i-1)] = k in 1..l; 0 marks an unassigned region.
  std::vector<int> gamma_table;
  int n = 0, m = 0;

  int domain_count() const { return static_cast<int>(domains.size()); }

  int gamma(int i, int j) const {
    if (i < 1 || i > n || j < 1 || j > m)
      fail(errc::index_out_of_range, "gamma region index out of range");
    return gamma_table[static_cast<std::size_t>(j - 1) * n + (i - 1)];
  }

  const DomainSpec& domain_of(int i, int j) const {
    int k = gamma(i, j);
    if (k < 1 || k > domain_count())
      fail(errc::index_out_of_range, "gamma value outside domain list");
    return domains[k - 1];
  }
};

struct UniformityCertificate {
  int a = 0;          ///< domain side in region units; a^2 regions per domain
  int grid_n = 0;     ///< columns; derived spacing is 1/grid_n
  double n_per_unit() const { return 1.0 / grid_n; }
};

/// Records the bi-affine change of variables produced by normalize():
/// (x, y) -> (x*sx + ox, y*sy + oy).
struct AffinePlanarMap {
  double x_scale = 1.0, x_offset = 0.0;
  double y_scale = 1.0, y_offset = 0.0;

  std::pair<double, double> apply(double x, double y) const {
    return {x * x_scale + x_offset, y * y_scale + y_offset};
  }
  std::pair<double, double> invert(double x, double y) const {
    return {(x - x_offset) / x_scale, (y - y_offset) / y_scale};
  }
  bool is_identity() const {
    return x_scale == 1.0 && x_offset == 0.0 && y_scale == 1.0 && y_offset == 0.0;
  }
};

struct Diagnostic {
  enum class Severity { warning, error };
  Severity severity;
  std::string message;
};

namespace detail {

inline void check_axis(const std::vector<double>& axis, const char* name) {
  if (axis.size() < 2)
    fail(errc::shape_mismatch, std::string(name) + " needs at least 2 nodes");
  for (double v : axis)
    if (!std::isfinite(v)) fail(errc::shape_mismatch, std::string(name) + " has non-finite value");
  for (std::size_t i = 1; i < axis.size(); ++i)
    if (!(axis[i - 1] < axis[i]))
      fail(errc::non_monotonic_axis, std::string(name) + " is not strictly increasing at index " +
                                         std::to_string(i));
}

inline bool axis_uniform(const std::vector<double>& axis) {
  const double span = axis.back() - axis.front();
  const int cells = static_cast<int>(axis.size()) - 1;
  const double h = span / cells;
  for (std::size_t i = 1; i < axis.size(); ++i) {
    if (std::abs((axis[i] - axis[i - 1]) - h) > 1e-9 * span) return false;
  }
  return true;
}

inline bool is_normalized_form(const std::vector<double>& xs, const std::vector<double>& ys) {
  const int n = static_cast<int>(xs.size()) - 1;
  for (int i = 0; i <= n; ++i)
    if (xs[i] != static_cast<double>(i) / n) return false;
  const int m = static_cast<int>(ys.size()) - 1;
  for (int j = 0; j <= m; ++j)
    if (ys[j] != static_cast<double>(j) / n) return false;
  return true;
}

}  // namespace detail

/// Validates and assembles a GridData.
inline GridData build_grid(std::vector<double> xs, std::vector<double> ys, HeightMatrix z) {
  detail::check_axis(xs, "xs");
  detail::check_axis(ys, "ys");
  if (z.nx() != static_cast<int>(xs.size()) || z.ny() != static_cast<int>(ys.size()))
    fail(errc::shape_mismatch,
         "z shape (" + std::to_string(z.nx()) + "x" + std::to_string(z.ny()) +
             ") does not match axes (" + std::to_string(xs.size()) + "x" +
             std::to_string(ys.size()) + ")");
  for (int i = 0; i < z.nx(); ++i)
    for (int j = 0; j < z.ny(); ++j)
      if (!std::isfinite(z(i, j)))
        fail(errc::shape_mismatch, "z(" + std::to_string(i) + "," + std::to_string(j) +
                                       ") is not finite");
  GridData g{std::move(xs), std::move(ys), std::move(z), false};
  g.normalized = detail::is_normalized_form(g.xs, g.ys);
  return g;
}

/// The bijection t = i + (j-1)n between region pairs and linear indices.
inline int tau(int i, int j, int n) {
  if (n < 1 || i < 1 || i > n || j < 1) fail(errc::index_out_of_range, "tau(i,j,n) out of range");
  return i + (j - 1) * n;
}

inline std::pair<int, int> tau_inverse(int t, int n) {
  if (n < 1 || t < 1) fail(errc::index_out_of_range, "tau_inverse(t,n) out of range");
  return {(t - 1) % n + 1, (t - 1) / n + 1};
}

/// Rescales both axes onto [0,1] x [0, m/n]; node coordinates of the result
/// are the exact rationals i/n, j/n. Requires per-axis uniform spacing.
inline std::pair<GridData, AffinePlanarMap> normalize(const GridData& grid) {
  if (!detail::axis_uniform(grid.xs))
    fail(errc::non_uniform_spacing, "x spacing is not uniform");
  if (!detail::axis_uniform(grid.ys))
    fail(errc::non_uniform_spacing, "y spacing is not uniform");

  const int n = grid.n(), m = grid.m();
  AffinePlanarMap map;
  map.x_scale = 1.0 / (grid.x_max() - grid.x_min());
  map.x_offset = -grid.x_min() * map.x_scale;
  map.y_scale = (static_cast<double>(m) / n) / (grid.y_max() - grid.y_min());
  map.y_offset = -grid.y_min() * map.y_scale;

  GridData out;
  out.xs.resize(n + 1);
  out.ys.resize(m + 1);
  for (int i = 0; i <= n; ++i) out.xs[i] = static_cast<double>(i) / n;
  for (int j = 0; j <= m; ++j) out.ys[j] = static_cast<double>(j) / n;
  out.z = grid.z;
  out.normalized = true;
  if (grid.normalized) map = AffinePlanarMap{};  // identity
  return {std::move(out), map};
}

/// Checks every DomainSpec invariant and gamma totality. Empty result means
/// the layout is valid; unreferenced domains are warnings, not errors.
inline std::vector<Diagnostic> validate_layout(const GridData& grid, const DomainLayout& layout) {
  std::vector<Diagnostic> out;
  const int n = grid.n(), m = grid.m();
  const int l = layout.domain_count();

  if (layout.n != n || layout.m != m)
    out.push_back({Diagnostic::Severity::error, "layout grid shape does not match grid"});
  if (l < 2)
    out.push_back({Diagnostic::Severity::error,
                   "at least 2 domains are required (got " + std::to_string(l) + ")"});

  for (int k = 1; k <= l; ++k) {
    const DomainSpec& d = layout.domains[k - 1];
    const std::string tag = "domain " + std::to_string(k);
    if (!(0 <= d.sx && d.sx < d.ex && d.ex <= n) || !(0 <= d.sy && d.sy < d.ey && d.ey <= m)) {
      out.push_back({Diagnostic::Severity::error, tag + " indices out of range"});
      continue;
    }
    if (d.span_x() < 2 || d.span_y() < 2)
      out.push_back({Diagnostic::Severity::error,
                     tag + " too small: must span at least 2 regions per axis"});
  }

  std::vector<bool> referenced(l + 1, false);
  bool total = layout.gamma_table.size() == static_cast<std::size_t>(n) * m;
  if (total) {
    for (int j = 1; j <= m; ++j)
      for (int i = 1; i <= n; ++i) {
        int k = layout.gamma_table[static_cast<std::size_t>(j - 1) * n + (i - 1)];
        if (k < 1 || k > l) {
          out.push_back({Diagnostic::Severity::error,
                         "gamma not total: region (" + std::to_string(i) + "," +
                             std::to_string(j) + ") has no valid domain"});
        } else {
          referenced[k] = true;
        }
      }
  } else {
    out.push_back({Diagnostic::Severity::error, "gamma not total: table size mismatch"});
  }
  for (int k = 1; k <= l; ++k)
    if (total && !referenced[k])
      out.push_back({Diagnostic::Severity::warning,
                     "domain " + std::to_string(k) + " is referenced by no region"});
  return out;
}

/// Certifies the uniform setting: normalized grid, every domain square with
/// the same side a in region units (hence a^2 regions per domain).
inline UniformityCertificate certify_uniform(const GridData& grid, const DomainLayout& layout) {
  if (!grid.normalized)
    fail(errc::not_uniform, "uniformity certificate requires a normalized grid");
  if (layout.domains.empty()) fail(errc::non_uniform_domains, "layout has no domains");

  int a = 0;
  for (int k = 1; k <= layout.domain_count(); ++k) {
    const DomainSpec& d = layout.domains[k - 1];
    if (d.span_x() != d.span_y())
      fail(errc::non_square_domain, "domain " + std::to_string(k) + " spans " +
                                        std::to_string(d.span_x()) + "x" +
                                        std::to_string(d.span_y()) + " regions");
    if (a == 0) a = d.span_x();
    if (d.span_x() != a)
      fail(errc::non_uniform_domains, "domain " + std::to_string(k) + " side " +
                                          std::to_string(d.span_x()) +
                                          " differs from " + std::to_string(a));
  }
  return UniformityCertificate{a, grid.n()};
}

}  // namespace rfis
