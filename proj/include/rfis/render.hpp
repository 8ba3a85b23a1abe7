#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rfis/errors.hpp"
#include "rfis/system.hpp"

namespace rfis {

/// Uniform raster of attractor values over E = [0,1] x [0, m/n] at depth r:
/// (n*a^r + 1) x (m*a^r + 1) nodes with step 1/(n*a^r).
struct SurfaceSample {
  int depth = 0;
  int grid_n = 0, grid_m = 0, a = 0;
  int nx = 0, ny = 0;  ///< node index extents: nx = n*a^depth, ny = m*a^depth
  std::vector<double> f;  ///< x-major: f[gx*(ny+1) + gy]

  std::uint64_t system_hash = 0;
  int iterations = 0;
  double final_delta = 0.0;
  double boundary_discrepancy = 0.0;

  double step() const { return 1.0 / (static_cast<double>(grid_n) * ipow(a, depth)); }
  // node coordinates match the ones the sweep evaluated (gx * step)
  double x_of(int gx) const { return gx * step(); }
  double y_of(int gy) const { return gy * step(); }
  double value(int gx, int gy) const { return f[static_cast<std::size_t>(gx) * (ny + 1) + gy]; }

  static std::int64_t ipow(int base, int e) {
    std::int64_t v = 1;
    while (e-- > 0) v *= base;
    return v;
  }
};

namespace detail {

/// Precomputed raster form of the operator T at one depth. Index arithmetic
/// is exact: a target node (i-1)*R + u pulls from source node sx*R + a*u
/// (or ex*R - a*u for decreasing orientation), so no interpolation happens
/// inside a sweep.
struct TSweep {
  const RifsSystem* sys = nullptr;
  int depth = 0;
  std::int64_t R = 0;      ///< a^depth subdivisions per region per axis
  int GX = 0, GY = 0;      ///< node index extents
  std::vector<double> g0r;  ///< base surface on the raster

  struct Region {
    int i, j, k;
    std::int64_t tgt_x0, tgt_y0;           // global index origin of the region
    std::int64_t src_x0, src_y0;           // source index anchor
    std::int64_t sdx, sdy;                 // source index step per local step (+-a)
    std::vector<double> s_vals;            // s at target nodes, (R+1)^2, u-major
    std::vector<double> base_src;          // domain base at source nodes
    double perturb = 0.0;
  };
  std::vector<Region> regions;

  std::size_t idx(std::int64_t gx, std::int64_t gy) const {
    return static_cast<std::size_t>(gx) * (GY + 1) + gy;
  }

  TSweep(const RifsSystem& s, int depth_) {
    if (!s.uniform)
      fail(errc::not_uniform, "deterministic render requires the uniformity certificate");
    if (depth_ < 0 || depth_ > 24) fail(errc::config_error, "render depth out of range [0,24]");
    sys = &s;
    depth = depth_;
    const int a = s.uniform->a;
    R = 1;
    for (int q = 0; q < depth; ++q) {
      R *= a;
      if (R > (1 << 24)) fail(errc::config_error, "render raster too large");
    }
    const int n = s.n(), m = s.m();
    GX = static_cast<int>(n * R);
    GY = static_cast<int>(m * R);
    const double h = 1.0 / (static_cast<double>(n) * R);

    // clamp against ulp overshoot of gx*h at the far extent
    auto cx = [&](double x) { return std::min(std::max(x, s.grid.x_min()), s.grid.x_max()); };
    auto cy = [&](double y) { return std::min(std::max(y, s.grid.y_min()), s.grid.y_max()); };

    g0r.resize(static_cast<std::size_t>(GX + 1) * (GY + 1));
    for (std::int64_t gx = 0; gx <= GX; ++gx)
      for (std::int64_t gy = 0; gy <= GY; ++gy)
        g0r[idx(gx, gy)] = s.eval_g0(cx(gx * h), cy(gy * h));

    regions.reserve(s.maps.size());
    for (const RegionMap& rm : s.maps) {
      const DomainSpec& d = s.layout.domains[rm.k - 1];
      Region reg;
      reg.i = rm.i;
      reg.j = rm.j;
      reg.k = rm.k;
      reg.tgt_x0 = (rm.i - 1) * R;
      reg.tgt_y0 = (rm.j - 1) * R;
      reg.src_x0 = rm.lx.increasing ? d.sx * R : d.ex * R;
      reg.sdx = rm.lx.increasing ? a : -a;
      reg.src_y0 = rm.ly.increasing ? d.sy * R : d.ey * R;
      reg.sdy = rm.ly.increasing ? a : -a;
      if (s.perturb && s.perturb->i == rm.i && s.perturb->j == rm.j)
        reg.perturb = s.perturb->delta;

      reg.s_vals.resize(static_cast<std::size_t>(R + 1) * (R + 1));
      reg.base_src.resize(reg.s_vals.size());
      for (std::int64_t u = 0; u <= R; ++u) {
        for (std::int64_t v = 0; v <= R; ++v) {
          const std::size_t q = static_cast<std::size_t>(u) * (R + 1) + v;
          reg.s_vals[q] =
              s.eval_s(rm.i, rm.j, (reg.tgt_x0 + u) * h, (reg.tgt_y0 + v) * h);
          reg.base_src[q] = s.domain_base_at(rm.k, cx((reg.src_x0 + reg.sdx * u) * h),
                                             cy((reg.src_y0 + reg.sdy * v) * h));
        }
      }
      regions.push_back(std::move(reg));
    }
  }

  // Lowest region index covering a node: nodes on shared edges belong to the
  // lower-index region; later visits only feed the discrepancy diagnostic.
  std::int64_t owner(std::int64_t g) const { return g == 0 ? 1 : (g + R - 1) / R; }

  /// One application of T. Returns the sup-norm boundary discrepancy of the
  /// sweep (competing values on shared region edges).
  double apply(const std::vector<double>& g, std::vector<double>& out) const {
    double bdis = 0.0;
    for (const Region& reg : regions) {
      for (std::int64_t u = 0; u <= R; ++u) {
        const std::int64_t gx = reg.tgt_x0 + u;
        const bool own_x = owner(gx) == reg.i;
        const std::int64_t sx = reg.src_x0 + reg.sdx * u;
        for (std::int64_t v = 0; v <= R; ++v) {
          const std::int64_t gy = reg.tgt_y0 + v;
          const std::size_t q = static_cast<std::size_t>(u) * (R + 1) + v;
          const std::size_t ti = idx(gx, gy);
          const double val = reg.s_vals[q] * (g[idx(sx, reg.src_y0 + reg.sdy * v)] -
                                              reg.base_src[q]) +
                             g0r[ti] + reg.perturb;
          if (own_x && owner(gy) == reg.j) {
            out[ti] = val;
          } else {
            bdis = std::max(bdis, std::abs(val - out[ti]));
          }
        }
      }
    }
    return bdis;
  }
};

}  // namespace detail

/// One application of the raster operator T to an arbitrary raster function
/// (used by the contraction-law tests). g must have (n*a^depth+1)*(m*a^depth+1)
/// entries, x-major.
inline std::vector<double> apply_T(const RifsSystem& sys, const std::vector<double>& g,
                                   int depth, double* boundary_discrepancy = nullptr) {
  detail::TSweep sweep(sys, depth);
  if (g.size() != sweep.g0r.size())
    fail(errc::shape_mismatch, "raster size does not match depth");
  std::vector<double> out(g.size(), 0.0);
  double bdis = sweep.apply(g, out);
  if (boundary_discrepancy) *boundary_discrepancy = bdis;
  return out;
}

/// Fixed-point iteration of T from the base surface on the depth-r raster.
/// Converges geometrically (ratio at most the certified cap); on the dyadic
/// raster every backward index orbit reaches the grid skeleton, so the exact
/// fixed point is reached after depth+1 sweeps.
inline SurfaceSample deterministic_render(const RifsSystem& sys, int depth, int max_iters = 200,
                                          double tol = 1e-10) {
  detail::TSweep sweep(sys, depth);
  std::vector<double> g = sweep.g0r;
  std::vector<double> next(g.size(), 0.0);

  int iters = 0;
  double delta = 0.0, bdis = 0.0;
  bool converged = false;
  while (iters < max_iters) {
    bdis = sweep.apply(g, next);
    ++iters;
    delta = 0.0;
    for (std::size_t q = 0; q < g.size(); ++q)
      delta = std::max(delta, std::abs(next[q] - g[q]));
    g.swap(next);
    if (delta <= tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    fail(errc::not_converged, "sup-norm delta " + std::to_string(delta) + " > tol after " +
                                  std::to_string(iters) + " iterations");

  SurfaceSample out;
  out.depth = depth;
  out.grid_n = sys.n();
  out.grid_m = sys.m();
  out.a = sys.uniform->a;
  out.nx = sweep.GX;
  out.ny = sweep.GY;
  out.f = std::move(g);
  out.system_hash = system_signature(sys);
  out.iterations = iters;
  out.final_delta = delta;
  out.boundary_discrepancy = bdis;
  return out;
}

/// Seeded stochastic rendering: a point orbit on the attractor. From a point
/// in region t, an admissible map is drawn from row t of M (all admissible
/// choices are equally likely by construction) and applied; the first
/// burn_in points are discarded.
struct PointCloud {
  std::vector<std::array<double, 3>> points;
  std::uint64_t seed = 0;
  int burn_in = 0;
};

inline PointCloud chaos_game(const RifsSystem& sys, std::size_t count, std::uint64_t seed,
                             int burn_in = 100) {
  const int n = sys.n(), m = sys.m();
  const int N = n * m;

  // row supports of M: admissible next maps per current region
  std::vector<std::vector<int>> row(N + 1);
  for (int t = 1; t <= N; ++t)
    for (int s = 1; s <= N; ++s)
      if (sys.M.has(t, s)) row[t].push_back(s);

  double x = sys.grid.xs.front();
  double y = sys.grid.ys.front();
  double z = sys.grid.z(0, 0);
  auto [ri, rj] = sys.grid.region_of(x, y);
  int t = tau(ri, rj, n);

  std::mt19937_64 rng(seed);
  PointCloud cloud;
  cloud.seed = seed;
  cloud.burn_in = burn_in;
  cloud.points.reserve(count);

  const std::size_t total = count + static_cast<std::size_t>(burn_in);
  for (std::size_t step = 0; step < total; ++step) {
    const std::vector<int>& choices = row[t];
    const int pick = choices[static_cast<std::size_t>(rng() % choices.size())];
    auto [pi, pj] = tau_inverse(pick, n);
    const auto w = sys.apply_W(pi, pj, x, y, z);
    x = w[0];
    y = w[1];
    z = w[2];
    t = pick;
    if (step >= static_cast<std::size_t>(burn_in)) cloud.points.push_back({x, y, z});
  }
  return cloud;
}

/// Bilinear interpolation between raster nodes.
inline double bilinear_lookup(const SurfaceSample& s, double x, double y) {
  const double fx = x * s.nx;
  const double fy = (y / (static_cast<double>(s.grid_m) / s.grid_n)) * s.ny;
  int ix = static_cast<int>(std::floor(fx));
  int iy = static_cast<int>(std::floor(fy));
  ix = std::max(0, std::min(ix, s.nx - 1));
  iy = std::max(0, std::min(iy, s.ny - 1));
  const double u = fx - ix, v = fy - iy;
  return (1 - u) * (1 - v) * s.value(ix, iy) + u * (1 - v) * s.value(ix + 1, iy) +
         (1 - u) * v * s.value(ix, iy + 1) + u * v * s.value(ix + 1, iy + 1);
}

/// Min/max of the raster over region (i, j).
inline std::pair<double, double> vertical_range(const SurfaceSample& s, int i, int j) {
  const std::int64_t R = SurfaceSample::ipow(s.a, s.depth);
  if (i < 1 || i > s.grid_n || j < 1 || j > s.grid_m)
    fail(errc::index_out_of_range, "vertical_range region out of range");
  double lo = s.value((i - 1) * R, (j - 1) * R), hi = lo;
  for (std::int64_t gx = (i - 1) * R; gx <= i * R; ++gx)
    for (std::int64_t gy = (j - 1) * R; gy <= j * R; ++gy) {
      const double v = s.value(static_cast<int>(gx), static_cast<int>(gy));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  return {lo, hi};
}

/// Maximum variation (max - min) of the raster over a rectangle, the sup
/// approximated on raster nodes.
inline double max_variation(const SurfaceSample& s, const Rect& rect) {
  const double h = s.step();
  const std::int64_t x_lo = static_cast<std::int64_t>(std::ceil(rect.x0 / h - 1e-9));
  const std::int64_t x_hi = static_cast<std::int64_t>(std::floor(rect.x1 / h + 1e-9));
  const std::int64_t y_lo = static_cast<std::int64_t>(std::ceil(rect.y0 / h - 1e-9));
  const std::int64_t y_hi = static_cast<std::int64_t>(std::floor(rect.y1 / h + 1e-9));
  const std::int64_t cx0 = std::max<std::int64_t>(0, x_lo);
  const std::int64_t cx1 = std::min<std::int64_t>(s.nx, x_hi);
  const std::int64_t cy0 = std::max<std::int64_t>(0, y_lo);
  const std::int64_t cy1 = std::min<std::int64_t>(s.ny, y_hi);
  if (cx0 > cx1 || cy0 > cy1)
    fail(errc::empty_rect, "rectangle contains no raster nodes");
  double lo = s.value(static_cast<int>(cx0), static_cast<int>(cy0)), hi = lo;
  for (std::int64_t gx = cx0; gx <= cx1; ++gx)
    for (std::int64_t gy = cy0; gy <= cy1; ++gy) {
      const double v = s.value(static_cast<int>(gx), static_cast<int>(gy));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  return hi - lo;
}

/// Per-region numerical check of the variation inequality
///   R_f[E_ij] <= sbar_ij * R_f[D_k] + diam(D_k) * (c_s * fbar + L_Q)
/// with sampled estimates for the scale Lipschitz constant c_s, the offset
/// Lipschitz constant L_Q and the sup fbar.
struct VariationCheckRow {
  int i = 0, j = 0, k = 0;
  double lhs = 0, rhs = 0;
  double rf_region = 0, rf_domain = 0, sbar = 0, cs = 0, fbar = 0, lq = 0, diam = 0;
  bool pass = false;
};

inline std::vector<VariationCheckRow> lemma_variation_check(const RifsSystem& sys,
                                                            const SurfaceSample& sample,
                                                            int density = 33) {
  std::vector<VariationCheckRow> rows;
  for (const RegionMap& rm : sys.maps) {
    const Rect region{sys.grid.xs[rm.i - 1], sys.grid.xs[rm.i], sys.grid.ys[rm.j - 1],
                      sys.grid.ys[rm.j]};
    const Rect dom = sys.domain_rect(rm.k);
    VariationCheckRow r;
    r.i = rm.i;
    r.j = rm.j;
    r.k = rm.k;
    r.rf_region = max_variation(sample, region);
    r.rf_domain = max_variation(sample, dom);
    r.sbar = sys.scale.bounds_at(rm.i, rm.j).hi;
    r.diam = std::hypot(dom.x1 - dom.x0, dom.y1 - dom.y0);
    r.cs = sampled_lipschitz(sys.scale.expr_at(rm.i, rm.j), region, density);

    // sup |f| over the domain, from the raster
    const double h = sample.step();
    const std::int64_t x0 = std::llround(dom.x0 / h), x1 = std::llround(dom.x1 / h);
    const std::int64_t y0 = std::llround(dom.y0 / h), y1 = std::llround(dom.y1 / h);
    double fbar = 0.0;
    for (std::int64_t gx = x0; gx <= x1; ++gx)
      for (std::int64_t gy = y0; gy <= y1; ++gy)
        fbar = std::max(fbar, std::abs(sample.value(static_cast<int>(gx), static_cast<int>(gy))));
    r.fbar = fbar;

    // sampled Lipschitz constant of Q(x,y) = g0(L(x,y)) - s(L(x,y)) * b_k(x,y)
    auto Q = [&](double x, double y) {
      const auto [X, Y] = rm.apply(x, y);
      return sys.eval_g0(X, Y) - sys.eval_s(rm.i, rm.j, X, Y) * sys.domain_base_at(rm.k, x, y);
    };
    const double hx = (dom.x1 - dom.x0) / (density - 1);
    const double hy = (dom.y1 - dom.y0) / (density - 1);
    double lq = 0.0;
    std::vector<double> prev(density), col(density);
    for (int qi = 0; qi < density; ++qi) {
      const double x = dom.x0 + hx * qi;
      for (int qj = 0; qj < density; ++qj) {
        col[qj] = Q(x, dom.y0 + hy * qj);
        if (qj > 0) lq = std::max(lq, std::abs(col[qj] - col[qj - 1]) / hy);
        if (qi > 0) lq = std::max(lq, std::abs(col[qj] - prev[qj]) / hx);
      }
      std::swap(col, prev);
    }
    r.lq = lq;

    r.lhs = r.rf_region;
    r.rhs = r.sbar * r.rf_domain + r.diam * (r.cs * r.fbar + r.lq);
    r.pass = r.lhs <= r.rhs + 1e-9 * (1.0 + std::abs(r.rhs));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace rfis
