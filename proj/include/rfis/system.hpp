#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rfis/errors.hpp"
#include "rfis/expr.hpp"
#include "rfis/grid.hpp"

namespace rfis {

// ---------------------------------------------------------------------------
// Axis and region contraction maps
// ---------------------------------------------------------------------------

/// Affine contraction of one source interval onto one target interval.
/// The source endpoints land on the target endpoints as a set; orientation
/// selects which endpoint goes where. Anchored form keeps apply(src_lo)
/// exact.
struct AxisMap {
  double src_lo = 0, src_hi = 0;
  double tgt_lo = 0, tgt_hi = 0;
  bool increasing = true;
  double scale = 0;       ///< signed; |scale| < 1
  double anchor_val = 0;  ///< image of src_lo

  double apply(double x) const { return anchor_val + (x - src_lo) * scale; }
  double invert(double v) const { return src_lo + (v - anchor_val) / scale; }
};

inline AxisMap build_axis_map(double src_lo, double src_hi, double tgt_lo, double tgt_hi,
                              bool increasing) {
  const double src_len = src_hi - src_lo;
  const double tgt_len = tgt_hi - tgt_lo;
  if (!(src_len > 0) || !(tgt_len > 0))
    fail(errc::config_error, "axis map intervals must have positive length");
  if (tgt_len >= src_len)
    fail(errc::not_contractive, "target interval is not shorter than the source interval");
  AxisMap m;
  m.src_lo = src_lo;
  m.src_hi = src_hi;
  m.tgt_lo = tgt_lo;
  m.tgt_hi = tgt_hi;
  m.increasing = increasing;
  m.scale = (increasing ? tgt_len : -tgt_len) / src_len;
  m.anchor_val = increasing ? tgt_lo : tgt_hi;
  return m;
}

/// The planar map L_ij = (lx, ly) taking the assigned domain onto region
/// (i, j).
struct RegionMap {
  int i = 0, j = 0;  ///< region (1-based)
  int k = 0;         ///< assigned domain (1-based)
  AxisMap lx, ly;

  std::pair<double, double> apply(double x, double y) const {
    return {lx.apply(x), ly.apply(y)};
  }
  std::pair<double, double> invert(double X, double Y) const {
    return {lx.invert(X), ly.invert(Y)};
  }
};

struct Orientation2 {
  bool x_increasing = true;
  bool y_increasing = true;
};

// ---------------------------------------------------------------------------
// Base surface
// ---------------------------------------------------------------------------

/// Lipschitz interpolant of the data set used to assemble the vertical maps:
/// piecewise bilinear over grid cells (default) or tensor-product Lagrange.
/// Both reproduce the data heights exactly at the grid nodes.
class BaseSurface {
 public:
  enum class Kind { bilinear, lagrange };

  BaseSurface() = default;

  static BaseSurface make(const GridData& grid, Kind kind) {
    BaseSurface b;
    b.kind_ = kind;
    b.xs_ = grid.xs;
    b.ys_ = grid.ys;
    b.z_ = grid.z;
    if (kind == Kind::lagrange) {
      b.denom_x_ = lagrange_denominators(b.xs_);
      b.denom_y_ = lagrange_denominators(b.ys_);
    }
    // region lookup reuses the grid's boundary tie-break
    b.lookup_ = grid;
    return b;
  }

  Kind kind() const { return kind_; }

  double eval(double x, double y) const {
    return kind_ == Kind::bilinear ? eval_bilinear(x, y) : eval_lagrange(x, y);
  }

  /// Max finite-difference quotient over a density x density sample of E.
  double sampled_lipschitz(int density = 128) const {
    const double hx = (xs_.back() - xs_.front()) / (density - 1);
    const double hy = (ys_.back() - ys_.front()) / (density - 1);
    double best = 0.0;
    std::vector<double> prev(density), col(density);
    for (int i = 0; i < density; ++i) {
      const double x = xs_.front() + hx * i;
      for (int j = 0; j < density; ++j) {
        col[j] = eval(x, ys_.front() + hy * j);
        if (j > 0) best = std::max(best, std::abs(col[j] - col[j - 1]) / hy);
        if (i > 0) best = std::max(best, std::abs(col[j] - prev[j]) / hx);
      }
      std::swap(col, prev);
    }
    return best;
  }

 private:
  double eval_bilinear(double x, double y) const {
    const int i = lookup_.region_col(x);
    const int j = lookup_.region_row(y);
    const double u = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
    const double v = (y - ys_[j - 1]) / (ys_[j] - ys_[j - 1]);
    return (1 - u) * (1 - v) * z_(i - 1, j - 1) + u * (1 - v) * z_(i, j - 1) +
           (1 - u) * v * z_(i - 1, j) + u * v * z_(i, j);
  }

  double eval_lagrange(double x, double y) const {
    const int nx = static_cast<int>(xs_.size());
    const int ny = static_cast<int>(ys_.size());
    std::vector<double> wx(nx), wy(ny);
    for (int i = 0; i < nx; ++i) {
      double p = 1.0;
      for (int k = 0; k < nx; ++k)
        if (k != i) p *= (x - xs_[k]);
      wx[i] = p / denom_x_[i];
    }
    for (int j = 0; j < ny; ++j) {
      double p = 1.0;
      for (int k = 0; k < ny; ++k)
        if (k != j) p *= (y - ys_[k]);
      wy[j] = p / denom_y_[j];
    }
    double acc = 0.0;
    for (int i = 0; i < nx; ++i) {
      double row = 0.0;
      for (int j = 0; j < ny; ++j) row += z_(i, j) * wy[j];
      acc += wx[i] * row;
    }
    return acc;
  }

  static std::vector<double> lagrange_denominators(const std::vector<double>& nodes) {
    std::vector<double> d(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      double p = 1.0;
      for (std::size_t k = 0; k < nodes.size(); ++k)
        if (k != i) p *= (nodes[i] - nodes[k]);
      d[i] = p;
    }
    return d;
  }

  Kind kind_ = Kind::bilinear;
  std::vector<double> xs_, ys_;
  HeightMatrix z_;
  std::vector<double> denom_x_, denom_y_;
  GridData lookup_;
};

// ---------------------------------------------------------------------------
// Scale field
// ---------------------------------------------------------------------------

/// Per-region vertical scaling expressions with certified magnitude bounds.
struct ScaleField {
  int n = 0, m = 0;
  int density = 64;
  double pad = 0.0;
  std::vector<ScaleExpr> exprs;          ///< tau order
  std::vector<MagnitudeBounds> bounds;   ///< tau order
  double cap = 0.0;                      ///< global max of certified upper bounds
  std::vector<std::string> warnings;

  const ScaleExpr& expr_at(int i, int j) const { return exprs[tau(i, j, n) - 1]; }
  const MagnitudeBounds& bounds_at(int i, int j) const { return bounds[tau(i, j, n) - 1]; }

  /// s_ij evaluated at a region point.
  double eval_at(int i, int j, double X, double Y) const { return eval(expr_at(i, j), X, Y); }
};

/// Certifies each region's bounds by dense sampling; throws CapViolation
/// naming the offending region. A vanishing lower bound is allowed but
/// reported as a warning (the theoretical lower dimension bound degenerates).
inline ScaleField build_scale_field(const GridData& grid, std::vector<ScaleExpr> exprs,
                                    int density = 64, double pad = 0.0) {
  const int n = grid.n(), m = grid.m();
  if (exprs.size() == 1) {
    exprs.resize(static_cast<std::size_t>(n) * m, exprs.front());
  }
  if (exprs.size() != static_cast<std::size_t>(n) * m)
    fail(errc::shape_mismatch, "scale table must have one expression per region");

  ScaleField f;
  f.n = n;
  f.m = m;
  f.density = density;
  f.pad = pad;
  f.exprs = std::move(exprs);
  f.bounds.resize(f.exprs.size());
  for (int j = 1; j <= m; ++j) {
    for (int i = 1; i <= n; ++i) {
      const Rect rect{grid.xs[i - 1], grid.xs[i], grid.ys[j - 1], grid.ys[j]};
      try {
        f.bounds[tau(i, j, n) - 1] = certify_bounds(f.expr_at(i, j), rect, density, pad);
      } catch (const Error& e) {
        if (e.code() == errc::cap_violation)
          fail(errc::cap_violation, "region (" + std::to_string(i) + "," + std::to_string(j) +
                                        "): " + e.detail());
        throw;
      }
      const MagnitudeBounds& b = f.bounds[tau(i, j, n) - 1];
      f.cap = std::max(f.cap, b.hi);
      if (b.lo == 0.0)
        f.warnings.push_back("|s| vanishes somewhere on region (" + std::to_string(i) + "," +
                             std::to_string(j) +
                             "); the theoretical lower dimension bound degenerates");
    }
  }
  return f;
}

// ---------------------------------------------------------------------------
// Row-stochastic matrix M and connection matrix C
// ---------------------------------------------------------------------------

/// M = (p_st): p_st = 1/a_s exactly when region s lies inside the domain
/// feeding region t. Stored as support + per-row counts so each row sums to
/// a_s * (1/a_s) = 1 as a rational, not as accumulated floating point.
struct RowStochastic {
  int size = 0;
  std::vector<std::uint8_t> support;  ///< row-major, 1 iff p_st > 0
  std::vector<int> row_count;         ///< a_s

  bool has(int s, int t) const {
    return support[static_cast<std::size_t>(s - 1) * size + (t - 1)] != 0;
  }
  double prob(int s, int t) const { return has(s, t) ? 1.0 / row_count[s - 1] : 0.0; }
};

/// C = (c_st): c_st = 1 iff p_ts > 0 (the transpose support pattern of M).
struct ConnectionMatrix {
  int size = 0;
  std::vector<std::uint8_t> c;

  bool at(int s, int t) const {
    return c[static_cast<std::size_t>(s - 1) * size + (t - 1)] != 0;
  }
  int row_sum(int s) const {
    int acc = 0;
    for (int t = 1; t <= size; ++t) acc += at(s, t) ? 1 : 0;
    return acc;
  }
};

inline RowStochastic stochastic_matrix(const DomainLayout& layout) {
  const int n = layout.n, m = layout.m;
  const int N = n * m;
  RowStochastic M;
  M.size = N;
  M.support.assign(static_cast<std::size_t>(N) * N, 0);
  M.row_count.assign(N, 0);
  for (int s = 1; s <= N; ++s) {
    auto [si, sj] = tau_inverse(s, n);
    int count = 0;
    for (int t = 1; t <= N; ++t) {
      auto [ti, tj] = tau_inverse(t, n);
      const DomainSpec& dom = layout.domains[layout.gamma(ti, tj) - 1];
      if (dom.contains_region(si, sj)) {
        M.support[static_cast<std::size_t>(s - 1) * N + (t - 1)] = 1;
        ++count;
      }
    }
    if (count == 0)
      fail(errc::dead_region, "region (" + std::to_string(si) + "," + std::to_string(sj) +
                                  ") lies inside no referenced domain");
    M.row_count[s - 1] = count;
  }
  return M;
}

inline ConnectionMatrix connection_matrix(const RowStochastic& M) {
  ConnectionMatrix C;
  C.size = M.size;
  C.c.assign(static_cast<std::size_t>(M.size) * M.size, 0);
  for (int s = 1; s <= M.size; ++s)
    for (int t = 1; t <= M.size; ++t)
      if (M.has(t, s)) C.c[static_cast<std::size_t>(s - 1) * M.size + (t - 1)] = 1;
  return C;
}

/// Tarjan strongly connected components of the digraph with edge s -> t iff
/// edge(s, t); vertices are 0-based. Components are emitted in completion
/// order.
template <class EdgeFn>
std::vector<std::vector<int>> strongly_connected_components(int size, EdgeFn edge) {
  std::vector<int> index(size, -1), low(size, 0), stack_pos(size, -1);
  std::vector<int> stk;
  std::vector<std::vector<int>> comps;
  int counter = 0;

  struct Frame {
    int v;
    int next;
  };
  for (int root = 0; root < size; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> frames{{root, 0}};
    index[root] = low[root] = counter++;
    stack_pos[root] = static_cast<int>(stk.size());
    stk.push_back(root);
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.next < size) {
        const int w = f.next++;
        if (w == f.v || !edge(f.v, w)) continue;
        if (index[w] == -1) {
          index[w] = low[w] = counter++;
          stack_pos[w] = static_cast<int>(stk.size());
          stk.push_back(w);
          frames.push_back({w, 0});
        } else if (stack_pos[w] != -1) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
      } else {
        if (low[f.v] == index[f.v]) {
          std::vector<int> comp;
          while (true) {
            int w = stk.back();
            stk.pop_back();
            stack_pos[w] = -1;
            comp.push_back(w);
            if (w == f.v) break;
          }
          comps.push_back(std::move(comp));
        }
        int v = f.v;
        frames.pop_back();
        if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
      }
    }
  }
  return comps;
}

inline std::vector<std::vector<int>> scc_decomposition(const ConnectionMatrix& C) {
  return strongly_connected_components(C.size,
                                       [&](int s, int t) { return C.at(s + 1, t + 1); });
}

/// Irreducibility = strong connectivity of the C digraph.
inline bool is_irreducible(const ConnectionMatrix& C) {
  return scc_decomposition(C).size() == 1;
}

// ---------------------------------------------------------------------------
// The assembled system
// ---------------------------------------------------------------------------

/// Domain-side base used in the vertical maps F_ij.
///
/// boundary_blend (default): per-domain transfinite blend of the base
/// surface's restriction to the domain boundary. It coincides with the base
/// surface on every domain edge (so the matching conditions and corner
/// mapping hold exactly) but differs inside, which is what drives the
/// fractal detail of the attractor.
///
/// global_g0: the base surface itself. The residual term is then zero for
/// every input on the base surface and the attractor collapses to it; kept
/// for cross-validation and diagnostics.
enum class DomainBase { boundary_blend, global_g0 };

/// Fault injection for verification demos: adds delta to F on one region.
struct QPerturb {
  int i = 0, j = 0;
  double delta = 0.0;
};

struct RifsSystem {
  GridData grid;
  DomainLayout layout;
  ScaleField scale;
  BaseSurface base;
  DomainBase domain_base = DomainBase::boundary_blend;
  std::vector<RegionMap> maps;  ///< tau order
  RowStochastic M;
  ConnectionMatrix C;
  bool irreducible = false;
  std::optional<UniformityCertificate> uniform;
  std::vector<std::string> warnings;
  std::optional<QPerturb> perturb;

  int n() const { return grid.n(); }
  int m() const { return grid.m(); }
  int map_count() const { return static_cast<int>(maps.size()); }

  const RegionMap& map_at(int i, int j) const { return maps[tau(i, j, n()) - 1]; }

  Rect domain_rect(int k) const {
    const DomainSpec& d = layout.domains[k - 1];
    return {grid.xs[d.sx], grid.xs[d.ex], grid.ys[d.sy], grid.ys[d.ey]};
  }

  double eval_g0(double x, double y) const { return base.eval(x, y); }

  /// The domain-side base b_k.
  double domain_base_at(int k, double x, double y) const {
    if (domain_base == DomainBase::global_g0) return base.eval(x, y);
    const Rect r = domain_rect(k);
    const double u = (x - r.x0) / (r.x1 - r.x0);
    const double v = (y - r.y0) / (r.y1 - r.y0);
    return (1 - v) * base.eval(x, r.y0) + v * base.eval(x, r.y1) +
           (1 - u) * base.eval(r.x0, y) + u * base.eval(r.x1, y) -
           ((1 - u) * (1 - v) * base.eval(r.x0, r.y0) + u * (1 - v) * base.eval(r.x1, r.y0) +
            (1 - u) * v * base.eval(r.x0, r.y1) + u * v * base.eval(r.x1, r.y1));
  }

  double eval_s(int i, int j, double X, double Y) const { return scale.eval_at(i, j, X, Y); }

  /// F_ij(x, y, z) for (x, y) in the assigned domain.
  double eval_F(int i, int j, double x, double y, double z) const {
    const RegionMap& rm = map_at(i, j);
    const Rect r = domain_rect(rm.k);
    const double ex = 1e-12 * (r.x1 - r.x0), ey = 1e-12 * (r.y1 - r.y0);
    if (x < r.x0 - ex || x > r.x1 + ex || y < r.y0 - ey || y > r.y1 + ey)
      fail(errc::out_of_domain, "(x,y) outside domain of region (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
    const auto [X, Y] = rm.apply(x, y);
    double v = eval_s(i, j, X, Y) * (z - domain_base_at(rm.k, x, y)) + base.eval(X, Y);
    if (perturb && perturb->i == i && perturb->j == j) v += perturb->delta;
    return v;
  }

  /// W_ij(x, y, z) = (L_ij(x, y), F_ij(x, y, z)).
  std::array<double, 3> apply_W(int i, int j, double x, double y, double z) const {
    const auto [X, Y] = map_at(i, j).apply(x, y);
    return {X, Y, eval_F(i, j, x, y, z)};
  }
};

struct BuildOptions {
  BaseSurface::Kind base_kind = BaseSurface::Kind::bilinear;
  DomainBase domain_base = DomainBase::boundary_blend;
  std::vector<Orientation2> orientations;  ///< empty = increasing everywhere
  int density = 64;
  double pad = 0.0;
  bool allow_reducible = false;
  std::optional<QPerturb> perturb;
};

inline RifsSystem build_system(GridData grid, DomainLayout layout,
                               std::vector<ScaleExpr> scale_exprs, BuildOptions opt = {}) {
  auto diags = validate_layout(grid, layout);
  std::string layout_errors;
  for (const auto& d : diags)
    if (d.severity == Diagnostic::Severity::error) layout_errors += d.message + "; ";
  if (!layout_errors.empty()) fail(errc::config_error, "invalid layout: " + layout_errors);

  RifsSystem sys;
  sys.scale = build_scale_field(grid, std::move(scale_exprs), opt.density, opt.pad);
  sys.base = BaseSurface::make(grid, opt.base_kind);
  sys.domain_base = opt.domain_base;
  sys.perturb = opt.perturb;
  sys.warnings = sys.scale.warnings;
  for (const auto& d : diags)
    if (d.severity == Diagnostic::Severity::warning) sys.warnings.push_back(d.message);
  if (opt.base_kind == BaseSurface::Kind::lagrange && (grid.n() > 8 || grid.m() > 8))
    sys.warnings.push_back("lagrange base surface on a grid larger than 8 cells per axis "
                           "may be badly conditioned");

  const int n = grid.n(), m = grid.m();
  if (!opt.orientations.empty() &&
      opt.orientations.size() != static_cast<std::size_t>(n) * m)
    fail(errc::shape_mismatch, "orientations table must have one entry per region");

  sys.maps.reserve(static_cast<std::size_t>(n) * m);
  for (int j = 1; j <= m; ++j) {
    for (int i = 1; i <= n; ++i) {
      const int k = layout.gamma(i, j);
      const DomainSpec& d = layout.domains[k - 1];
      Orientation2 o;
      if (!opt.orientations.empty()) o = opt.orientations[tau(i, j, n) - 1];
      RegionMap rm;
      rm.i = i;
      rm.j = j;
      rm.k = k;
      rm.lx = build_axis_map(grid.xs[d.sx], grid.xs[d.ex], grid.xs[i - 1], grid.xs[i],
                             o.x_increasing);
      rm.ly = build_axis_map(grid.ys[d.sy], grid.ys[d.ey], grid.ys[j - 1], grid.ys[j],
                             o.y_increasing);
      sys.maps.push_back(rm);
    }
  }

  sys.M = stochastic_matrix(layout);
  sys.C = connection_matrix(sys.M);
  auto comps = scc_decomposition(sys.C);
  sys.irreducible = comps.size() == 1;
  if (!sys.irreducible) {
    std::string decomp;
    for (const auto& comp : comps) {
      decomp += "{";
      for (std::size_t q = 0; q < comp.size(); ++q)
        decomp += (q ? "," : "") + std::to_string(comp[q] + 1);
      decomp += "} ";
    }
    if (!opt.allow_reducible)
      fail(errc::not_irreducible, "connection matrix is reducible; SCC decomposition: " + decomp);
    sys.warnings.push_back("connection matrix is reducible (SCCs: " + decomp +
                           "); dimension bounds are disabled");
  }

  if (grid.normalized) {
    try {
      sys.uniform = certify_uniform(grid, layout);
    } catch (const Error& e) {
      sys.warnings.push_back(std::string("no uniformity certificate: ") + e.what());
    }
  }

  sys.grid = std::move(grid);
  sys.layout = std::move(layout);
  return sys;
}

// ---------------------------------------------------------------------------
// Verification helpers
// ---------------------------------------------------------------------------

struct MatchReport {
  double max_residual = 0.0;
  int worst_i = 0, worst_j = 0;
  std::string worst_edge;
  int samples_per_edge = 0;
  double tol = 0.0;
  bool pass = true;
};

/// Checks the edge matching conditions with g = g0 at samples_per_edge
/// points on each domain edge of every region map.
inline MatchReport verify_matching(const RifsSystem& sys, int samples_per_edge = 33,
                                   double tol = 1e-9) {
  MatchReport rep;
  rep.samples_per_edge = samples_per_edge;
  rep.tol = tol;
  auto consider = [&](int i, int j, const char* edge, double r) {
    if (r > rep.max_residual) {
      rep.max_residual = r;
      rep.worst_i = i;
      rep.worst_j = j;
      rep.worst_edge = edge;
    }
  };
  for (const RegionMap& rm : sys.maps) {
    const Rect d = sys.domain_rect(rm.k);
    for (int q = 0; q < samples_per_edge; ++q) {
      const double t = static_cast<double>(q) / (samples_per_edge - 1);
      const double yq = d.y0 + (d.y1 - d.y0) * t;
      const double xq = d.x0 + (d.x1 - d.x0) * t;
      for (double alpha : {d.x0, d.x1}) {
        const double lhs = sys.eval_F(rm.i, rm.j, alpha, yq, sys.eval_g0(alpha, yq));
        const auto [X, Y] = rm.apply(alpha, yq);
        consider(rm.i, rm.j, alpha == d.x0 ? "x=start" : "x=end",
                 std::abs(lhs - sys.eval_g0(X, Y)));
      }
      for (double beta : {d.y0, d.y1}) {
        const double lhs = sys.eval_F(rm.i, rm.j, xq, beta, sys.eval_g0(xq, beta));
        const auto [X, Y] = rm.apply(xq, beta);
        consider(rm.i, rm.j, beta == d.y0 ? "y=start" : "y=end",
                 std::abs(lhs - sys.eval_g0(X, Y)));
      }
    }
  }
  rep.pass = rep.max_residual <= tol;
  return rep;
}

struct CollinearityResult {
  bool ok = false;           ///< some domain fails x- or y-collinearity
  int witness_domain = 0;    ///< 1-based; 0 when none
};

namespace detail {

// Points (u_q, w_q) are collinear iff every point lies on the line through
// the two endpoints; tested with triple cross-products against 1e-9.
inline bool points_collinear(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 3) return true;
  const auto& p0 = pts.front();
  const auto& p1 = pts.back();
  for (std::size_t q = 1; q + 1 < pts.size(); ++q) {
    const double cross = (p1.first - p0.first) * (pts[q].second - p0.second) -
                         (pts[q].first - p0.first) * (p1.second - p0.second);
    if (std::abs(cross) > 1e-9) return false;
  }
  return true;
}

}  // namespace detail

/// True iff some domain's interpolation points fail x-collinearity or fail
/// y-collinearity (the dimension theorem's hypothesis).
inline CollinearityResult check_collinearity_hypothesis(const GridData& grid,
                                                        const DomainLayout& layout) {
  for (int k = 1; k <= layout.domain_count(); ++k) {
    const DomainSpec& d = layout.domains[k - 1];
    bool x_collinear = true;
    for (int i = d.sx; i <= d.ex && x_collinear; ++i) {
      std::vector<std::pair<double, double>> pts;
      for (int j = d.sy; j <= d.ey; ++j) pts.emplace_back(grid.ys[j], grid.z(i, j));
      x_collinear = detail::points_collinear(pts);
    }
    bool y_collinear = true;
    for (int j = d.sy; j <= d.ey && y_collinear; ++j) {
      std::vector<std::pair<double, double>> pts;
      for (int i = d.sx; i <= d.ex; ++i) pts.emplace_back(grid.xs[i], grid.z(i, j));
      y_collinear = detail::points_collinear(pts);
    }
    if (!x_collinear || !y_collinear) return {true, k};
  }
  return {false, 0};
}

// ---------------------------------------------------------------------------
// Deterministic signature (raster metadata, reproducibility checks)
// ---------------------------------------------------------------------------

namespace detail {

struct Fnv1a {
  std::uint64_t h = 1469598103934665603ull;
  void feed(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t q = 0; q < len; ++q) {
      h ^= p[q];
      h *= 1099511628211ull;
    }
  }
  void feed_double(double v) { feed(&v, sizeof v); }
  void feed_int(std::int64_t v) { feed(&v, sizeof v); }
  void feed_str(const std::string& s) { feed(s.data(), s.size()); }
};

}  // namespace detail

inline std::uint64_t system_signature(const RifsSystem& sys) {
  detail::Fnv1a f;
  f.feed_int(sys.n());
  f.feed_int(sys.m());
  for (double v : sys.grid.xs) f.feed_double(v);
  for (double v : sys.grid.ys) f.feed_double(v);
  for (double v : sys.grid.z.raw()) f.feed_double(v);
  for (const auto& d : sys.layout.domains) {
    f.feed_int(d.sx);
    f.feed_int(d.ex);
    f.feed_int(d.sy);
    f.feed_int(d.ey);
  }
  for (int k : sys.layout.gamma_table) f.feed_int(k);
  for (const auto& e : sys.scale.exprs) f.feed_str(print(e));
  for (const auto& rm : sys.maps) {
    f.feed_int(rm.lx.increasing ? 1 : 0);
    f.feed_int(rm.ly.increasing ? 1 : 0);
  }
  f.feed_int(sys.base.kind() == BaseSurface::Kind::bilinear ? 0 : 1);
  f.feed_int(sys.domain_base == DomainBase::boundary_blend ? 0 : 1);
  return f.h;
}

}  // namespace rfis
