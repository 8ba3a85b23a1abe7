#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "rfis/errors.hpp"
#include "rfis/grid.hpp"
#include "rfis/system.hpp"

namespace rfis {

/// Gamma assignment: a named policy or an explicit region -> domain table.
struct GammaSpec {
  enum class Policy { opposite_quadrant, rotate_quadrant, identity_block, explicit_table };
  Policy policy = Policy::explicit_table;
  std::vector<std::array<int, 3>> table;  ///< (i, j, k) triples when explicit
};

struct RenderConfig {
  int depth = 6;
  double tol = 1e-10;
  int max_iters = 200;
};

struct ChaosConfig {
  long long count = 100000;
  std::uint64_t seed = 1;
  int burn_in = 100;
};

struct DimConfig {
  int r_min = 2;
  int r_max = 4;
  int density = 64;
  double pad = 0.0;
  int oversample = 2;
};

struct VerifyConfig {
  int samples_per_edge = 33;
  double tol = 1e-9;
  int lemma_depth = 4;
  int lemma_density = 33;
};

struct OutputConfig {
  std::string dir = "out";
  bool surface_csv = true;
  bool pgm = true;
  bool obj = true;
  bool matrices_csv = false;
  bool report_json = true;
  bool svg = true;
  bool cloud_csv = true;
  bool cloud_obj = true;
};

struct RegionExpr {
  int i = 0, j = 0;
  std::string expr;
};

struct RegionOrientation {
  int i = 0, j = 0;
  bool x_increasing = true, y_increasing = true;
};

struct RunConfig {
  std::filesystem::path grid_path;
  std::vector<DomainSpec> domains;
  GammaSpec gamma;
  std::string scale_default;               ///< expression text
  std::vector<RegionExpr> scale_regions;   ///< per-region overrides
  BaseSurface::Kind base = BaseSurface::Kind::bilinear;
  DomainBase domain_base = DomainBase::boundary_blend;
  std::vector<RegionOrientation> orientations;  ///< default: increasing everywhere
  RenderConfig render;
  ChaosConfig chaos;
  DimConfig dim;
  VerifyConfig verify;
  OutputConfig outputs;
  bool allow_reducible = false;
  std::optional<QPerturb> perturb;
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& known,
                           const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key()))
      fail(errc::config_error, where + ": unknown key '" + it.key() + "'");
}

template <class T>
T get_or(const nlohmann::json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(errc::config_error, where + "." + key + ": wrong type");
  }
}

}  // namespace detail

/// Parses and schema-validates a run configuration. Unknown keys are
/// rejected at every level; the grid path is resolved relative to the
/// config file.
inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail(errc::config_error, "cannot open config: " + path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(errc::config_error, path.string() + ": " + e.what());
  }
  if (!j.is_object()) fail(errc::config_error, "config root must be an object");
  detail::reject_unknown(j,
                         {"grid", "layout", "gamma", "scale", "base", "domain_base",
                          "orientations", "render", "chaos", "dim", "verify", "outputs",
                          "allow_reducible", "perturb_q"},
                         "config");

  RunConfig cfg;

  if (!j.contains("grid") || !j["grid"].is_string())
    fail(errc::config_error, "config.grid: required string path");
  cfg.grid_path = path.parent_path() / j["grid"].get<std::string>();

  if (!j.contains("layout") || !j["layout"].is_array() || j["layout"].empty())
    fail(errc::config_error, "config.layout: required array of [sx,ex,sy,ey]");
  for (const auto& d : j["layout"]) {
    if (!d.is_array() || d.size() != 4)
      fail(errc::config_error, "config.layout: each domain is [sx,ex,sy,ey]");
    cfg.domains.push_back(
        {d[0].get<int>(), d[1].get<int>(), d[2].get<int>(), d[3].get<int>()});
  }

  if (!j.contains("gamma")) fail(errc::config_error, "config.gamma: required");
  const auto& g = j["gamma"];
  if (g.is_string()) {
    const std::string name = g.get<std::string>();
    if (name == "opposite-quadrant")
      cfg.gamma.policy = GammaSpec::Policy::opposite_quadrant;
    else if (name == "rotate-quadrant")
      cfg.gamma.policy = GammaSpec::Policy::rotate_quadrant;
    else if (name == "identity-block")
      cfg.gamma.policy = GammaSpec::Policy::identity_block;
    else
      fail(errc::config_error, "config.gamma: unknown policy '" + name + "'");
  } else if (g.is_array()) {
    cfg.gamma.policy = GammaSpec::Policy::explicit_table;
    for (const auto& row : g) {
      if (!row.is_array() || row.size() != 3)
        fail(errc::config_error, "config.gamma: explicit entries are [i,j,k]");
      cfg.gamma.table.push_back({row[0].get<int>(), row[1].get<int>(), row[2].get<int>()});
    }
  } else {
    fail(errc::config_error, "config.gamma: policy name or [i,j,k] table");
  }

  if (!j.contains("scale")) fail(errc::config_error, "config.scale: required");
  const auto& sc = j["scale"];
  if (sc.is_string()) {
    cfg.scale_default = sc.get<std::string>();
  } else if (sc.is_object()) {
    detail::reject_unknown(sc, {"default", "regions"}, "config.scale");
    if (!sc.contains("default") || !sc["default"].is_string())
      fail(errc::config_error, "config.scale.default: required string");
    cfg.scale_default = sc["default"].get<std::string>();
    if (sc.contains("regions")) {
      for (const auto& row : sc["regions"]) {
        if (!row.is_array() || row.size() != 3)
          fail(errc::config_error, "config.scale.regions: entries are [i,j,\"expr\"]");
        cfg.scale_regions.push_back(
            {row[0].get<int>(), row[1].get<int>(), row[2].get<std::string>()});
      }
    }
  } else {
    fail(errc::config_error, "config.scale: expression string or {default, regions}");
  }

  const std::string base = detail::get_or<std::string>(j, "base", "bilinear", "config");
  if (base == "bilinear")
    cfg.base = BaseSurface::Kind::bilinear;
  else if (base == "lagrange")
    cfg.base = BaseSurface::Kind::lagrange;
  else
    fail(errc::config_error, "config.base: 'bilinear' or 'lagrange'");

  const std::string db = detail::get_or<std::string>(j, "domain_base", "boundary", "config");
  if (db == "boundary")
    cfg.domain_base = DomainBase::boundary_blend;
  else if (db == "g0")
    cfg.domain_base = DomainBase::global_g0;
  else
    fail(errc::config_error, "config.domain_base: 'boundary' or 'g0'");

  if (j.contains("orientations")) {
    if (!j["orientations"].is_array())
      fail(errc::config_error, "config.orientations: array of [i,j,xdir,ydir]");
    for (const auto& row : j["orientations"]) {
      if (!row.is_array() || row.size() != 4)
        fail(errc::config_error, "config.orientations: entries are [i,j,\"inc|dec\",\"inc|dec\"]");
      const std::string dx = row[2].get<std::string>(), dy = row[3].get<std::string>();
      if ((dx != "inc" && dx != "dec") || (dy != "inc" && dy != "dec"))
        fail(errc::config_error, "config.orientations: directions are 'inc' or 'dec'");
      cfg.orientations.push_back(
          {row[0].get<int>(), row[1].get<int>(), dx == "inc", dy == "inc"});
    }
  }

  if (j.contains("render")) {
    const auto& r = j["render"];
    detail::reject_unknown(r, {"depth", "tol", "max_iters"}, "config.render");
    cfg.render.depth = detail::get_or<int>(r, "depth", cfg.render.depth, "config.render");
    cfg.render.tol = detail::get_or<double>(r, "tol", cfg.render.tol, "config.render");
    cfg.render.max_iters =
        detail::get_or<int>(r, "max_iters", cfg.render.max_iters, "config.render");
  }
  if (j.contains("chaos")) {
    const auto& c = j["chaos"];
    detail::reject_unknown(c, {"count", "seed", "burn_in"}, "config.chaos");
    cfg.chaos.count = detail::get_or<long long>(c, "count", cfg.chaos.count, "config.chaos");
    cfg.chaos.seed =
        detail::get_or<std::uint64_t>(c, "seed", cfg.chaos.seed, "config.chaos");
    cfg.chaos.burn_in = detail::get_or<int>(c, "burn_in", cfg.chaos.burn_in, "config.chaos");
  }
  if (j.contains("dim")) {
    const auto& d = j["dim"];
    detail::reject_unknown(d, {"r_min", "r_max", "density", "pad", "oversample"}, "config.dim");
    cfg.dim.r_min = detail::get_or<int>(d, "r_min", cfg.dim.r_min, "config.dim");
    cfg.dim.r_max = detail::get_or<int>(d, "r_max", cfg.dim.r_max, "config.dim");
    cfg.dim.density = detail::get_or<int>(d, "density", cfg.dim.density, "config.dim");
    cfg.dim.pad = detail::get_or<double>(d, "pad", cfg.dim.pad, "config.dim");
    cfg.dim.oversample =
        detail::get_or<int>(d, "oversample", cfg.dim.oversample, "config.dim");
  }
  if (j.contains("verify")) {
    const auto& v = j["verify"];
    detail::reject_unknown(v, {"samples_per_edge", "tol", "lemma_depth", "lemma_density"},
                           "config.verify");
    cfg.verify.samples_per_edge = detail::get_or<int>(v, "samples_per_edge",
                                                      cfg.verify.samples_per_edge,
                                                      "config.verify");
    cfg.verify.tol = detail::get_or<double>(v, "tol", cfg.verify.tol, "config.verify");
    cfg.verify.lemma_depth =
        detail::get_or<int>(v, "lemma_depth", cfg.verify.lemma_depth, "config.verify");
    cfg.verify.lemma_density =
        detail::get_or<int>(v, "lemma_density", cfg.verify.lemma_density, "config.verify");
  }
  if (j.contains("outputs")) {
    const auto& o = j["outputs"];
    detail::reject_unknown(o,
                           {"dir", "surface_csv", "pgm", "obj", "matrices_csv", "report_json",
                            "svg", "cloud_csv", "cloud_obj"},
                           "config.outputs");
    cfg.outputs.dir = detail::get_or<std::string>(o, "dir", cfg.outputs.dir, "config.outputs");
    cfg.outputs.surface_csv =
        detail::get_or<bool>(o, "surface_csv", cfg.outputs.surface_csv, "config.outputs");
    cfg.outputs.pgm = detail::get_or<bool>(o, "pgm", cfg.outputs.pgm, "config.outputs");
    cfg.outputs.obj = detail::get_or<bool>(o, "obj", cfg.outputs.obj, "config.outputs");
    cfg.outputs.matrices_csv =
        detail::get_or<bool>(o, "matrices_csv", cfg.outputs.matrices_csv, "config.outputs");
    cfg.outputs.report_json =
        detail::get_or<bool>(o, "report_json", cfg.outputs.report_json, "config.outputs");
    cfg.outputs.svg = detail::get_or<bool>(o, "svg", cfg.outputs.svg, "config.outputs");
    cfg.outputs.cloud_csv =
        detail::get_or<bool>(o, "cloud_csv", cfg.outputs.cloud_csv, "config.outputs");
    cfg.outputs.cloud_obj =
        detail::get_or<bool>(o, "cloud_obj", cfg.outputs.cloud_obj, "config.outputs");
  }
  cfg.allow_reducible =
      detail::get_or<bool>(j, "allow_reducible", cfg.allow_reducible, "config");

  if (j.contains("perturb_q")) {
    const auto& p = j["perturb_q"];
    detail::reject_unknown(p, {"region", "delta"}, "config.perturb_q");
    if (!p.contains("region") || !p["region"].is_array() || p["region"].size() != 2)
      fail(errc::config_error, "config.perturb_q.region: [i,j] required");
    QPerturb q;
    q.i = p["region"][0].get<int>();
    q.j = p["region"][1].get<int>();
    q.delta = detail::get_or<double>(p, "delta", 0.0, "config.perturb_q");
    cfg.perturb = q;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Gamma policy resolution against a concrete grid + layout
// ---------------------------------------------------------------------------

namespace detail {

/// Identifies layout domains as the four grid quadrants; returns the domain
/// index (1-based) per quadrant [LL, LR, UL, UR] or fails.
inline std::array<int, 4> quadrant_domains(int n, int m, const std::vector<DomainSpec>& doms) {
  if (n % 2 || m % 2)
    fail(errc::config_error, "quadrant gamma policies need even region counts per axis");
  if (doms.size() != 4)
    fail(errc::config_error, "quadrant gamma policies need exactly 4 domains");
  const DomainSpec want[4] = {{0, n / 2, 0, m / 2},
                              {n / 2, n, 0, m / 2},
                              {0, n / 2, m / 2, m},
                              {n / 2, n, m / 2, m}};
  std::array<int, 4> out{0, 0, 0, 0};
  for (int q = 0; q < 4; ++q) {
    for (int k = 0; k < 4; ++k) {
      const DomainSpec& d = doms[k];
      if (d.sx == want[q].sx && d.ex == want[q].ex && d.sy == want[q].sy && d.ey == want[q].ey)
        out[q] = k + 1;
    }
    if (out[q] == 0)
      fail(errc::config_error, "layout domains do not tile the four grid quadrants");
  }
  return out;
}

}  // namespace detail

/// Resolves a gamma spec into the dense region -> domain table of a layout.
inline DomainLayout resolve_layout(const GridData& grid, const std::vector<DomainSpec>& domains,
                                   const GammaSpec& gamma) {
  DomainLayout layout;
  layout.domains = domains;
  layout.n = grid.n();
  layout.m = grid.m();
  layout.gamma_table.assign(static_cast<std::size_t>(layout.n) * layout.m, 0);

  auto set = [&](int i, int j, int k) {
    layout.gamma_table[static_cast<std::size_t>(j - 1) * layout.n + (i - 1)] = k;
  };

  switch (gamma.policy) {
    case GammaSpec::Policy::explicit_table: {
      for (const auto& row : gamma.table) {
        const auto [i, j, k] = std::tuple{row[0], row[1], row[2]};
        if (i < 1 || i > layout.n || j < 1 || j > layout.m)
          fail(errc::config_error, "gamma table region out of range");
        set(i, j, k);
      }
      break;
    }
    case GammaSpec::Policy::identity_block: {
      for (int j = 1; j <= layout.m; ++j)
        for (int i = 1; i <= layout.n; ++i) {
          int found = 0;
          for (int k = 1; k <= layout.domain_count() && !found; ++k)
            if (layout.domains[k - 1].contains_region(i, j)) found = k;
          if (!found)
            fail(errc::config_error, "identity-block gamma: region (" + std::to_string(i) +
                                         "," + std::to_string(j) + ") lies in no domain");
          set(i, j, found);
        }
      break;
    }
    case GammaSpec::Policy::opposite_quadrant:
    case GammaSpec::Policy::rotate_quadrant: {
      const auto qd = detail::quadrant_domains(layout.n, layout.m, layout.domains);
      // quadrant of a region: 0=LL, 1=LR, 2=UL, 3=UR
      for (int j = 1; j <= layout.m; ++j)
        for (int i = 1; i <= layout.n; ++i) {
          const int q = (i <= layout.n / 2 ? 0 : 1) + (j <= layout.m / 2 ? 0 : 2);
          int pull;
          if (gamma.policy == GammaSpec::Policy::opposite_quadrant) {
            pull = 3 - q;  // diagonal involution (reducible; kept as documented)
          } else {
            // strongly connected 4-cycle: LL->UR, UR->LR, LR->UL, UL->LL
            constexpr int cycle[4] = {3, 2, 0, 1};
            pull = cycle[q];
          }
          set(i, j, qd[pull]);
        }
      break;
    }
  }
  return layout;
}

}  // namespace rfis
