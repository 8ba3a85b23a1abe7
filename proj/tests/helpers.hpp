#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rfis/rfis.hpp"

namespace rfis::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(RFIS_FIXTURE_DIR) / name;
}

inline GridData table1_raw() { return read_grid_csv(fixture("table1.csv")); }

inline GridData table1() { return normalize(table1_raw()).first; }

inline std::vector<DomainSpec> quadrant_domains() {
  return {{0, 2, 0, 2}, {2, 4, 0, 2}, {0, 2, 2, 4}, {2, 4, 2, 4}};
}

inline DomainLayout rotate_layout(const GridData& g) {
  GammaSpec spec;
  spec.policy = GammaSpec::Policy::rotate_quadrant;
  return resolve_layout(g, quadrant_domains(), spec);
}

inline DomainLayout opposite_layout(const GridData& g) {
  GammaSpec spec;
  spec.policy = GammaSpec::Policy::opposite_quadrant;
  return resolve_layout(g, quadrant_domains(), spec);
}

inline RifsSystem constant_system(double s, DomainBase db = DomainBase::boundary_blend,
                                  int density = 64) {
  GridData g = table1();
  DomainLayout layout = rotate_layout(g);
  BuildOptions opt;
  opt.domain_base = db;
  opt.density = density;
  return build_system(std::move(g), std::move(layout), {parse(detail::format_double(s))},
                      std::move(opt));
}

inline RifsSystem example2_system(int density = 257) {
  GridData g = table1();
  DomainLayout layout = rotate_layout(g);
  BuildOptions opt;
  opt.base_kind = BaseSurface::Kind::lagrange;
  opt.density = density;
  return build_system(std::move(g), std::move(layout), {parse("sin(10*x^2+10*y^2)")},
                      std::move(opt));
}

}  // namespace rfis::testing
