#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rfis/errors.hpp"
#include "rfis/render.hpp"
#include "rfis/system.hpp"

namespace rfis {

/// Diagonal matrices of certified per-region bounds, ordered by the tau
/// bijection: entry t holds the bound of region tau^-1(t).
struct ScalingMatrices {
  int N = 0;
  std::vector<double> upper;  ///< certified max |s| per region
  std::vector<double> lower;  ///< certified min |s| per region
};

inline ScalingMatrices scaling_matrices(const RifsSystem& sys, int density = 64) {
  if (density < 64) fail(errc::config_error, "scaling matrix density must be >= 64");
  const int n = sys.n(), m = sys.m();
  ScalingMatrices out;
  out.N = n * m;
  out.upper.resize(out.N);
  out.lower.resize(out.N);
  const bool reuse = density == sys.scale.density;
  for (int t = 1; t <= out.N; ++t) {
    auto [i, j] = tau_inverse(t, n);
    MagnitudeBounds b;
    if (reuse) {
      b = sys.scale.bounds_at(i, j);
    } else {
      const Rect rect{sys.grid.xs[i - 1], sys.grid.xs[i], sys.grid.ys[j - 1], sys.grid.ys[j]};
      b = certify_bounds(sys.scale.expr_at(i, j), rect, density, sys.scale.pad);
    }
    out.upper[t - 1] = b.hi;
    out.lower[t - 1] = b.lo;
  }
  return out;
}

/// Small dense square matrix, row-major.
struct Mat {
  int n = 0;
  std::vector<double> a;

  Mat() = default;
  explicit Mat(int size) : n(size), a(static_cast<std::size_t>(size) * size, 0.0) {}

  double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * n + c]; }
  double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * n + c]; }
};

/// diag(d) * C as a dense matrix (0-based rows/cols).
inline Mat scaled_connection(const std::vector<double>& diag, const ConnectionMatrix& C) {
  Mat out(C.size);
  for (int r = 0; r < C.size; ++r)
    for (int c = 0; c < C.size; ++c)
      if (C.at(r + 1, c + 1)) out(r, c) = diag[r];
  return out;
}

struct SpectralResult {
  double value = 0.0;
  int iterations = 0;
  bool perron = true;  ///< support irreducible (Perron root with positive eigenvector)
};

/// Spectral radius of a nonnegative matrix by power iteration on A + I
/// (the shift makes an irreducible matrix primitive; rho(A) = rho(A+I) - 1).
/// Start vector all-ones; converged when successive Rayleigh estimates
/// differ by at most tol.
inline SpectralResult spectral_radius(const Mat& A, double tol = 1e-13, int max_iters = 100000) {
  const int n = A.n;
  if (n == 0) fail(errc::shape_mismatch, "empty matrix");
  for (double v : A.a)
    if (v < 0 || !std::isfinite(v))
      fail(errc::config_error, "spectral_radius requires a nonnegative matrix");

  SpectralResult res;
  res.perron =
      strongly_connected_components(n, [&](int s, int t) { return A(s, t) > 0.0; }).size() == 1;

  std::vector<double> v(n, 1.0), w(n, 0.0);
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iters; ++it) {
    // w = (A + I) v
    for (int r = 0; r < n; ++r) {
      double acc = v[r];
      for (int c = 0; c < n; ++c) acc += A(r, c) * v[c];
      w[r] = acc;
    }
    double vw = 0.0, vv = 0.0, norm = 0.0;
    for (int r = 0; r < n; ++r) {
      vw += v[r] * w[r];
      vv += v[r] * v[r];
      norm = std::max(norm, std::abs(w[r]));
    }
    const double est = vw / vv - 1.0;
    if (norm == 0.0) {  // A+I annihilated v: cannot happen for nonnegative A
      res.value = 0.0;
      res.iterations = it;
      return res;
    }
    for (int r = 0; r < n; ++r) v[r] = w[r] / norm;
    if (std::abs(est - prev) <= tol) {
      res.value = std::max(0.0, est);
      res.iterations = it;
      return res;
    }
    prev = est;
  }
  fail(errc::not_converged, "power iteration did not converge in " + std::to_string(max_iters) +
                                " iterations");
}

enum class DimCase { lower_bounded, exactly_two, indeterminate };

inline const char* dim_case_name(DimCase c) {
  switch (c) {
    case DimCase::lower_bounded: return "lower-bounded";
    case DimCase::exactly_two: return "exactly-two";
    case DimCase::indeterminate: return "indeterminate";
  }
  return "?";
}

struct BoxCountRow {
  int r = 0;
  double epsilon = 0.0;
  long long count = 0;
};

struct DimensionReport {
  int a = 0;
  double lambda_lower = 0.0, lambda_upper = 0.0;
  DimCase kase = DimCase::indeterminate;
  double bound_lower = 0.0, bound_upper = 0.0;
  std::optional<double> dim_exact;  ///< set for the constant-scaling fast path and case 2
  bool remark_constant_scaling = false;
  bool hypothesis_ok = false;
  int hypothesis_witness = 0;
  bool lower_bound_degenerate = false;  ///< some certified min |s| is zero
  std::vector<BoxCountRow> counts;
  double slope = 0.0, r2 = 0.0;
  int r_min = 0, r_max = 0;
  std::vector<std::string> warnings;
};

/// Theoretical part of the report: spectral radii of the scaled connection
/// matrices and the case analysis
///   lambda_lower > a  =>  dim in [1+log_a lambda_lower, 1+log_a lambda_upper]
///   lambda_upper <= a =>  dim = 2
/// with the constant-equal-scaling fast path dim = 1 + log_a lambda.
inline DimensionReport dimension_bounds(const RifsSystem& sys, const ScalingMatrices& sm) {
  if (!sys.uniform)
    fail(errc::not_uniform, "dimension bounds require the uniformity certificate");
  if (!sys.irreducible)
    fail(errc::not_irreducible, "dimension bounds are disabled for a reducible system");

  DimensionReport rep;
  rep.a = sys.uniform->a;
  const double log_a = std::log(static_cast<double>(rep.a));

  rep.lambda_upper = spectral_radius(scaled_connection(sm.upper, sys.C)).value;
  rep.lambda_lower = spectral_radius(scaled_connection(sm.lower, sys.C)).value;

  auto coll = check_collinearity_hypothesis(sys.grid, sys.layout);
  rep.hypothesis_ok = coll.ok;
  rep.hypothesis_witness = coll.witness_domain;
  if (!coll.ok)
    rep.warnings.push_back(
        "collinearity hypothesis unmet: every domain's points are x- and y-collinear; "
        "bounds are reported but not certified");

  for (double lo : sm.lower)
    if (lo == 0.0) rep.lower_bound_degenerate = true;
  if (rep.lower_bound_degenerate)
    rep.warnings.push_back("lower scaling bounds contain zeros; the lower dimension bound "
                           "is degenerate");

  // constant-equal-scaling fast path
  bool constant_equal = true;
  for (std::size_t q = 0; q < sys.scale.exprs.size() && constant_equal; ++q) {
    if (!is_constant(sys.scale.exprs[q])) constant_equal = false;
  }
  if (constant_equal) {
    const double v0 = std::abs(eval(sys.scale.exprs.front(), 0, 0));
    for (std::size_t q = 1; q < sys.scale.exprs.size() && constant_equal; ++q)
      if (std::abs(eval(sys.scale.exprs[q], 0, 0)) != v0) constant_equal = false;
  }
  rep.remark_constant_scaling = constant_equal;

  if (rep.lambda_upper <= rep.a) {
    rep.kase = DimCase::exactly_two;
    rep.bound_lower = rep.bound_upper = 2.0;
    rep.dim_exact = 2.0;
  } else if (rep.lambda_lower > rep.a) {
    rep.kase = DimCase::lower_bounded;
    rep.bound_lower = 1.0 + std::log(rep.lambda_lower) / log_a;
    rep.bound_upper = 1.0 + std::log(rep.lambda_upper) / log_a;
    if (constant_equal) rep.dim_exact = 1.0 + std::log(rep.lambda_upper) / log_a;
  } else {
    rep.kase = DimCase::indeterminate;
    rep.bound_lower = 2.0;  // trivial: a surface graph
    rep.bound_upper = 1.0 + std::log(rep.lambda_upper) / log_a;
    rep.warnings.push_back("indeterminate case (lambda_lower <= a < lambda_upper): upper "
                           "bound reported with the trivial lower bound 2");
  }
  return rep;
}

/// N'(eps_r): number of 1/a^r-mesh cubes meeting the graph, computed from
/// raster extremes per mesh square as
///   floor(max/eps) - floor(min/eps) + 1.
inline long long box_count(const SurfaceSample& s, int r) {
  if (r < 0) fail(errc::config_error, "box_count scale must be >= 0");
  if (r > s.depth)
    fail(errc::depth_too_shallow, "box_count at scale " + std::to_string(r) +
                                      " needs sample depth >= " + std::to_string(r));
  const double eps = 1.0 / SurfaceSample::ipow(s.a, r);
  const std::int64_t cells = static_cast<std::int64_t>(s.grid_n) *
                             SurfaceSample::ipow(s.a, s.depth - r);  // raster steps per square
  const std::int64_t sq_x = SurfaceSample::ipow(s.a, r);
  const std::int64_t sq_y =
      (static_cast<std::int64_t>(s.grid_m) * SurfaceSample::ipow(s.a, r) + s.grid_n - 1) /
      s.grid_n;  // ceil((m/n) / eps)

  long long total = 0;
  for (std::int64_t p = 0; p < sq_x; ++p) {
    const std::int64_t x0 = p * cells;
    const std::int64_t x1 = std::min<std::int64_t>((p + 1) * cells, s.nx);
    for (std::int64_t q = 0; q < sq_y; ++q) {
      const std::int64_t y0 = q * cells;
      if (y0 >= s.ny) break;
      const std::int64_t y1 = std::min<std::int64_t>((q + 1) * cells, s.ny);
      double lo = s.value(static_cast<int>(x0), static_cast<int>(y0)), hi = lo;
      for (std::int64_t gx = x0; gx <= x1; ++gx)
        for (std::int64_t gy = y0; gy <= y1; ++gy) {
          const double v = s.value(static_cast<int>(gx), static_cast<int>(gy));
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      total += static_cast<long long>(std::floor(hi / eps)) -
               static_cast<long long>(std::floor(lo / eps)) + 1;
    }
  }
  return total;
}

struct EmpiricalDimension {
  double slope = 0.0;
  double r2 = 1.0;
  std::vector<BoxCountRow> counts;
};

/// Least-squares slope of log N'(eps_r) against r * log a over [r_min, r_max].
/// min_oversample guards the raster extremes: sample depth must be at least
/// r_max + min_oversample (default 2, i.e. 4x oversampling per axis).
inline EmpiricalDimension empirical_dimension(const SurfaceSample& s, int r_min, int r_max,
                                              int min_oversample = 2) {
  if (r_max - r_min < 2)
    fail(errc::config_error, "empirical dimension needs r_max - r_min >= 2");
  if (r_min < 0) fail(errc::config_error, "r_min must be >= 0");
  if (r_max + min_oversample > s.depth)
    fail(errc::depth_too_shallow, "sample depth " + std::to_string(s.depth) +
                                      " is too shallow for r_max " + std::to_string(r_max) +
                                      " with oversampling guard " +
                                      std::to_string(min_oversample));

  EmpiricalDimension out;
  const double log_a = std::log(static_cast<double>(s.a));
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  const int cnt = r_max - r_min + 1;
  for (int r = r_min; r <= r_max; ++r) {
    const long long c = box_count(s, r);
    out.counts.push_back({r, 1.0 / SurfaceSample::ipow(s.a, r), c});
    const double xv = r * log_a;
    const double yv = std::log(static_cast<double>(c));
    sx += xv;
    sy += yv;
    sxx += xv * xv;
    sxy += xv * yv;
    syy += yv * yv;
  }
  const double den = cnt * sxx - sx * sx;
  out.slope = (cnt * sxy - sx * sy) / den;
  const double ss_tot = syy - sy * sy / cnt;
  if (ss_tot <= 0) {
    out.r2 = 1.0;
  } else {
    const double intercept = (sy - out.slope * sx) / cnt;
    double ss_res = 0.0;
    for (const auto& row : out.counts) {
      const double pred = out.slope * (row.r * log_a) + intercept;
      const double res = std::log(static_cast<double>(row.count)) - pred;
      ss_res += res * res;
    }
    out.r2 = 1.0 - ss_res / ss_tot;
  }
  return out;
}

}  // namespace rfis
