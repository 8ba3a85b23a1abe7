#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfis/config.hpp"
#include "rfis/dimension.hpp"
#include "rfis/io.hpp"
#include "rfis/render.hpp"
#include "rfis/system.hpp"

namespace rfis {

/// Loads the grid, resolves gamma, parses scale expressions and assembles
/// the system. The grid is normalized when its spacing allows it; otherwise
/// construction proceeds on the raw grid (deterministic render and the
/// dimension pipeline then refuse with NotUniform).
inline RifsSystem build_from_config(const RunConfig& cfg) {
  GridData grid = read_grid_csv(cfg.grid_path);
  try {
    grid = normalize(grid).first;
  } catch (const Error& e) {
    if (e.code() != errc::non_uniform_spacing) throw;
  }

  DomainLayout layout = resolve_layout(grid, cfg.domains, cfg.gamma);

  std::vector<ScaleExpr> exprs;
  exprs.push_back(parse(cfg.scale_default));
  if (!cfg.scale_regions.empty()) {
    exprs.resize(static_cast<std::size_t>(grid.n()) * grid.m(), exprs.front());
    for (const auto& re : cfg.scale_regions) {
      if (re.i < 1 || re.i > grid.n() || re.j < 1 || re.j > grid.m())
        fail(errc::config_error, "scale region override out of range");
      exprs[tau(re.i, re.j, grid.n()) - 1] = parse(re.expr);
    }
  }

  BuildOptions opt;
  opt.base_kind = cfg.base;
  opt.domain_base = cfg.domain_base;
  opt.density = cfg.dim.density;
  opt.pad = cfg.dim.pad;
  opt.allow_reducible = cfg.allow_reducible;
  opt.perturb = cfg.perturb;
  if (!cfg.orientations.empty()) {
    opt.orientations.assign(static_cast<std::size_t>(grid.n()) * grid.m(), Orientation2{});
    for (const auto& ro : cfg.orientations) {
      if (ro.i < 1 || ro.i > grid.n() || ro.j < 1 || ro.j > grid.m())
        fail(errc::config_error, "orientation override out of range");
      opt.orientations[tau(ro.i, ro.j, grid.n()) - 1] = {ro.x_increasing, ro.y_increasing};
    }
  }
  return build_system(std::move(grid), std::move(layout), std::move(exprs), std::move(opt));
}

namespace detail {

inline nlohmann::json system_summary(const RifsSystem& sys) {
  nlohmann::json j;
  j["N"] = sys.n() * sys.m();
  j["l"] = sys.layout.domain_count();
  j["normalized"] = sys.grid.normalized;
  if (sys.uniform)
    j["a"] = sys.uniform->a;
  else
    j["a"] = nullptr;
  j["irreducible"] = sys.irreducible;
  j["scale_cap"] = sys.scale.cap;
  const auto coll = check_collinearity_hypothesis(sys.grid, sys.layout);
  j["hypothesis_ok"] = coll.ok;
  j["hypothesis_witness_domain"] = coll.witness_domain;
  j["warnings"] = sys.warnings;
  j["signature"] = system_signature(sys);
  return j;
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(errc::config_error, "cannot create output directory: " + dir.string());
}

inline void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
  auto f = open_out(path);
  f << j.dump(2) << '\n';
}

}  // namespace detail

/// build: assemble the system and report its shape; optionally export M/C.
inline nlohmann::json cmd_build(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  RifsSystem sys = build_from_config(cfg);
  detail::ensure_dir(out_dir);
  nlohmann::json summary = detail::system_summary(sys);
  if (cfg.outputs.matrices_csv) {
    write_stochastic_csv(sys.M, out_dir / "M.csv");
    write_connection_csv(sys.C, out_dir / "C.csv");
    summary["files"] = {"M.csv", "C.csv"};
  }
  if (cfg.outputs.report_json) detail::write_json(summary, out_dir / "build.json");
  return summary;
}

/// verify: edge matching residuals, exact row sums, corner mapping and the
/// variation inequality, all report-based.
inline nlohmann::json cmd_verify(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  RifsSystem sys = build_from_config(cfg);
  detail::ensure_dir(out_dir);
  nlohmann::json rep;
  rep["system"] = detail::system_summary(sys);

  const MatchReport match = verify_matching(sys, cfg.verify.samples_per_edge, cfg.verify.tol);
  rep["matching"] = {{"max_residual", match.max_residual},
                     {"tol", match.tol},
                     {"samples_per_edge", match.samples_per_edge},
                     {"worst_region", {match.worst_i, match.worst_j}},
                     {"worst_edge", match.worst_edge},
                     {"pass", match.pass}};

  // Row sums are a_s copies of 1/a_s: rationally 1 per row by construction.
  bool rows_ok = true;
  for (int s = 1; s <= sys.M.size; ++s) {
    int nonzero = 0;
    for (int t = 1; t <= sys.M.size; ++t)
      if (sys.M.has(s, t)) ++nonzero;
    if (nonzero != sys.M.row_count[s - 1]) rows_ok = false;
  }
  rep["row_sums"] = {{"exact", true}, {"support_consistent", rows_ok}, {"pass", rows_ok}};

  // Corner mapping: every domain corner data point lands on a region corner
  // data point, in position and height.
  double corner_res = 0.0;
  for (const RegionMap& rm : sys.maps) {
    const DomainSpec& d = sys.layout.domains[rm.k - 1];
    for (int ai : {d.sx, d.ex}) {
      for (int bj : {d.sy, d.ey}) {
        const double xa = sys.grid.xs[ai], yb = sys.grid.ys[bj];
        const auto w = sys.apply_W(rm.i, rm.j, xa, yb, sys.grid.z(ai, bj));
        const int ta = rm.lx.increasing == (ai == d.sx) ? rm.i - 1 : rm.i;
        const int tb = rm.ly.increasing == (bj == d.sy) ? rm.j - 1 : rm.j;
        corner_res = std::max(corner_res, std::abs(w[0] - sys.grid.xs[ta]));
        corner_res = std::max(corner_res, std::abs(w[1] - sys.grid.ys[tb]));
        corner_res = std::max(corner_res, std::abs(w[2] - sys.grid.z(ta, tb)));
      }
    }
  }
  rep["corner_mapping"] = {{"max_residual", corner_res}, {"pass", corner_res <= 1e-12}};

  const auto coll = check_collinearity_hypothesis(sys.grid, sys.layout);
  rep["hypothesis"] = {{"ok", coll.ok}, {"witness_domain", coll.witness_domain}};

  if (sys.uniform) {
    const SurfaceSample sample =
        deterministic_render(sys, cfg.verify.lemma_depth, cfg.render.max_iters, cfg.render.tol);
    const auto rows = lemma_variation_check(sys, sample, cfg.verify.lemma_density);
    bool all = true;
    double worst_margin = 0.0;
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& r : rows) {
      if (!r.pass) {
        all = false;
        failures.push_back({{"region", {r.i, r.j}}, {"lhs", r.lhs}, {"rhs", r.rhs}});
      }
      worst_margin = std::max(worst_margin, r.lhs - r.rhs);
    }
    rep["variation_inequality"] = {{"regions", rows.size()},
                                   {"pass", all},
                                   {"worst_violation", worst_margin},
                                   {"failures", failures},
                                   {"depth", cfg.verify.lemma_depth}};
  } else {
    rep["variation_inequality"] = {{"skipped", "grid is not uniform"}};
  }

  bool pass = match.pass && rows_ok && corner_res <= 1e-12;
  if (rep["variation_inequality"].contains("pass"))
    pass = pass && rep["variation_inequality"]["pass"].get<bool>();
  rep["pass"] = pass;
  if (cfg.outputs.report_json) detail::write_json(rep, out_dir / "verify.json");
  return rep;
}

/// render: deterministic raster outputs (CSV, PGM + sidecar, OBJ mesh) and a
/// convergence log; with chaos = true a seeded point cloud instead.
inline nlohmann::json cmd_render(const RunConfig& cfg, const std::filesystem::path& out_dir,
                                 bool chaos = false) {
  RifsSystem sys = build_from_config(cfg);
  detail::ensure_dir(out_dir);
  nlohmann::json summary;
  summary["system"] = detail::system_summary(sys);

  if (chaos) {
    const PointCloud cloud =
        chaos_game(sys, static_cast<std::size_t>(cfg.chaos.count), cfg.chaos.seed,
                   cfg.chaos.burn_in);
    if (cfg.outputs.cloud_csv) write_cloud_csv(cloud, out_dir / "cloud.csv");
    if (cfg.outputs.cloud_obj) write_obj_cloud(cloud, out_dir / "cloud.obj");
    summary["chaos"] = {{"count", cloud.points.size()},
                        {"seed", cloud.seed},
                        {"burn_in", cloud.burn_in}};
  } else {
    const SurfaceSample sample =
        deterministic_render(sys, cfg.render.depth, cfg.render.max_iters, cfg.render.tol);
    if (cfg.outputs.surface_csv) write_surface_csv(sample, out_dir / "surface.csv");
    if (cfg.outputs.pgm) write_pgm16(sample, out_dir / "surface.pgm");
    if (cfg.outputs.obj) write_obj_raster(sample, out_dir / "surface.obj");
    nlohmann::json conv = {{"depth", sample.depth},
                           {"iterations", sample.iterations},
                           {"final_delta", sample.final_delta},
                           {"boundary_discrepancy", sample.boundary_discrepancy},
                           {"tol", cfg.render.tol},
                           {"raster", {sample.nx + 1, sample.ny + 1}}};
    detail::write_json(conv, out_dir / "convergence.json");
    summary["render"] = conv;
  }
  if (cfg.outputs.report_json) detail::write_json(summary, out_dir / "render.json");
  return summary;
}

inline nlohmann::json dimension_report_json(const DimensionReport& rep) {
  nlohmann::json j;
  j["a"] = rep.a;
  j["lambda_lower"] = rep.lambda_lower;
  j["lambda_upper"] = rep.lambda_upper;
  j["case"] = dim_case_name(rep.kase);
  j["bound_lower"] = rep.bound_lower;
  j["bound_upper"] = rep.bound_upper;
  if (rep.dim_exact)
    j["dim_exact"] = *rep.dim_exact;
  else
    j["dim_exact"] = nullptr;
  j["constant_scaling"] = rep.remark_constant_scaling;
  j["hypothesis_ok"] = rep.hypothesis_ok;
  j["hypothesis_witness_domain"] = rep.hypothesis_witness;
  j["lower_bound_degenerate"] = rep.lower_bound_degenerate;
  nlohmann::json counts = nlohmann::json::array();
  for (const auto& row : rep.counts)
    counts.push_back({{"r", row.r}, {"epsilon", row.epsilon}, {"count", row.count}});
  j["counts"] = counts;
  j["empirical_slope"] = rep.slope;
  j["r2"] = rep.r2;
  j["r_min"] = rep.r_min;
  j["r_max"] = rep.r_max;
  j["warnings"] = rep.warnings;
  return j;
}

/// dim: theoretical spectral bounds plus the empirical box-count regression;
/// exit stays 0 for the indeterminate case.
inline nlohmann::json cmd_dim(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  RifsSystem sys = build_from_config(cfg);
  detail::ensure_dir(out_dir);

  const ScalingMatrices sm = scaling_matrices(sys, cfg.dim.density);
  DimensionReport rep = dimension_bounds(sys, sm);

  const SurfaceSample sample =
      deterministic_render(sys, cfg.render.depth, cfg.render.max_iters, cfg.render.tol);
  const EmpiricalDimension emp =
      empirical_dimension(sample, cfg.dim.r_min, cfg.dim.r_max, cfg.dim.oversample);
  rep.counts = emp.counts;
  rep.slope = emp.slope;
  rep.r2 = emp.r2;
  rep.r_min = cfg.dim.r_min;
  rep.r_max = cfg.dim.r_max;

  nlohmann::json j = dimension_report_json(rep);
  j["system"] = detail::system_summary(sys);
  if (cfg.outputs.report_json) detail::write_json(j, out_dir / "dim.json");
  if (cfg.outputs.svg) write_svg_loglog(rep.counts, rep.slope, rep.r2, out_dir / "loglog.svg");
  {
    auto f = detail::open_out(out_dir / "counts.csv");
    f << "r,epsilon,count\n";
    for (const auto& row : rep.counts)
      f << row.r << ',' << format_double(row.epsilon) << ',' << row.count << '\n';
  }
  return j;
}

}  // namespace rfis
