#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "helpers.hpp"

using namespace rfis;
using rfis::testing::constant_system;
using rfis::testing::example2_system;
using rfis::testing::rotate_layout;
using rfis::testing::table1;

namespace {

double data_node_error(const RifsSystem& sys, const SurfaceSample& s) {
  const std::int64_t R = SurfaceSample::ipow(s.a, s.depth);
  double worst = 0.0;
  for (int i = 0; i <= sys.n(); ++i)
    for (int j = 0; j <= sys.m(); ++j)
      worst = std::max(worst, std::abs(s.value(static_cast<int>(i * R),
                                               static_cast<int>(j * R)) -
                                       sys.grid.z(i, j)));
  return worst;
}

}  // namespace

TEST_CASE("a zero scale factor reproduces the base surface in one sweep") {
  RifsSystem sys = constant_system(0.0);
  SurfaceSample s = deterministic_render(sys, 5);
  CHECK(s.iterations == 1);
  CHECK(s.final_delta == 0.0);
  double worst = 0.0;
  for (int gx = 0; gx <= s.nx; ++gx)
    for (int gy = 0; gy <= s.ny; ++gy)
      worst = std::max(worst, std::abs(s.value(gx, gy) - sys.eval_g0(s.x_of(gx), s.y_of(gy))));
  CHECK(worst <= 1e-12);
}

TEST_CASE("constant data renders a constant surface") {
  HeightMatrix z(5, 5, 5.0);
  GridData g = normalize(build_grid({0, 1, 2, 3, 4}, {0, 1, 2, 3, 4}, std::move(z))).first;
  DomainLayout layout = rotate_layout(g);
  RifsSystem sys = build_system(std::move(g), std::move(layout), {parse("0.7")}, {});
  SurfaceSample s = deterministic_render(sys, 4);
  for (double v : s.f) REQUIRE(v == 5.0);
}

TEST_CASE("the walkthrough system converges with the expected data interpolation") {
  RifsSystem sys = example2_system();
  SurfaceSample s = deterministic_render(sys, 6, 200, 1e-10);
  CHECK(s.nx + 1 == 257);
  CHECK(s.ny + 1 == 257);
  CHECK(data_node_error(sys, s) <= 1e-9);
  CHECK(s.final_delta <= 1e-10);
  CHECK(s.boundary_discrepancy <= 1e-9);
  CHECK(s.system_hash == system_signature(sys));

  // geometric envelope: iterations never exceed ceil(log(tol/delta1)/log(cap))
  std::vector<double> g0r = apply_T(sys, std::vector<double>(s.f.size(), 0.0), 6);  // warm-up shape check
  (void)g0r;
  // delta1 measured by applying T once to the base raster
  detail::TSweep sweep(sys, 6);
  std::vector<double> base = sweep.g0r, once(base.size());
  sweep.apply(base, once);
  double delta1 = 0.0;
  for (std::size_t q = 0; q < base.size(); ++q)
    delta1 = std::max(delta1, std::abs(once[q] - base[q]));
  CHECK(delta1 > 1.0);  // the vertical maps genuinely move the base surface
  const double envelope = std::ceil(std::log(1e-10 / delta1) / std::log(sys.scale.cap));
  CHECK(s.iterations <= envelope);
}

TEST_CASE("renders refuse non-uniform grids while the chaos game accepts them") {
  RunConfig cfg = load_config(rfis::testing::fixture("nonuniform.json"));
  RifsSystem sys = build_from_config(cfg);
  CHECK_FALSE(sys.uniform.has_value());
  CHECK_THROWS_MATCHES(deterministic_render(sys, 4), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == errc::not_uniform; }));
  PointCloud cloud = chaos_game(sys, 2000, 11, 100);
  CHECK(cloud.points.size() == 2000);
}

TEST_CASE("render reports non-convergence when the iteration budget is exhausted") {
  RifsSystem sys = constant_system(0.7);
  CHECK_THROWS_MATCHES(deterministic_render(sys, 6, 2, 1e-10), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == errc::not_converged; }));
}

TEST_CASE("one more application of T leaves the converged raster in place") {
  RifsSystem sys = constant_system(0.7);
  SurfaceSample s = deterministic_render(sys, 5, 200, 1e-10);
  std::vector<double> again = apply_T(sys, s.f, 5);
  double delta = 0.0;
  for (std::size_t q = 0; q < again.size(); ++q)
    delta = std::max(delta, std::abs(again[q] - s.f[q]));
  CHECK(delta <= 1e-10);
}

TEST_CASE("T contracts random raster pairs by at most the certified cap") {
  for (auto* make : {+[] { return constant_system(0.7); }, +[] { return example2_system(); }}) {
    RifsSystem sys = make();
    const int depth = 4;
    detail::TSweep sweep(sys, depth);
    const std::size_t sz = sweep.g0r.size();
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> g(sz), h(sz);
      for (std::size_t q = 0; q < sz; ++q) {
        g[q] = u(rng);
        h[q] = u(rng);
      }
      std::vector<double> tg(sz), th(sz);
      sweep.apply(g, tg);
      sweep.apply(h, th);
      double num = 0.0, den = 0.0;
      for (std::size_t q = 0; q < sz; ++q) {
        num = std::max(num, std::abs(tg[q] - th[q]));
        den = std::max(den, std::abs(g[q] - h[q]));
      }
      REQUIRE(num <= sys.scale.cap * den + 1e-12);
    }
  }
}

TEST_CASE("adjacent region formulas agree along shared edges") {
  // iterate manually and inspect the boundary discrepancy of each sweep
  RifsSystem sys = constant_system(0.7);
  SurfaceSample s = deterministic_render(sys, 6, 200, 1e-10);
  CHECK(s.boundary_discrepancy <= 1e-9);
  SurfaceSample e2 = deterministic_render(example2_system(), 5, 200, 1e-10);
  CHECK(e2.boundary_discrepancy <= 1e-9);
}

TEST_CASE("interpolation of the data set holds at every depth") {
  RifsSystem sys = constant_system(0.7);
  for (int depth : {0, 1, 3, 6}) {
    SurfaceSample s = deterministic_render(sys, depth);
    CHECK(data_node_error(sys, s) <= 1e-9);
  }
}

TEST_CASE("chaos game is deterministic per seed") {
  RifsSystem sys = constant_system(0.7);
  PointCloud a = chaos_game(sys, 5000, 42, 100);
  PointCloud b = chaos_game(sys, 5000, 42, 100);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t q = 0; q < a.points.size(); ++q) REQUIRE(a.points[q] == b.points[q]);
  PointCloud c = chaos_game(sys, 5000, 43, 100);
  CHECK(a.points != c.points);
}

TEST_CASE("chaos points stay inside the base rectangle and render bounds") {
  RifsSystem sys = constant_system(0.7);
  SurfaceSample s = deterministic_render(sys, 6);
  double lo = s.f.front(), hi = s.f.front();
  for (double v : s.f) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  PointCloud cloud = chaos_game(sys, 20000, 42, 100);
  for (const auto& p : cloud.points) {
    REQUIRE(p[0] >= 0.0);
    REQUIRE(p[0] <= 1.0);
    REQUIRE(p[1] >= 0.0);
    REQUIRE(p[1] <= 1.0);
    REQUIRE(p[2] >= lo - 1.0);
    REQUIRE(p[2] <= hi + 1.0);
  }
}

TEST_CASE("chaos points of a zero-scale system lie on the base surface") {
  RifsSystem sys = constant_system(0.0);
  PointCloud cloud = chaos_game(sys, 20000, 7, 100);
  double worst = 0.0;
  for (const auto& p : cloud.points)
    worst = std::max(worst, std::abs(p[2] - sys.eval_g0(p[0], p[1])));
  CHECK(worst <= 1e-9);
}

TEST_CASE("chaos points match the raster exactly when the attractor is the base surface") {
  // with the global-g0 base the attractor is bilinear on every cell, so the
  // raster lookup is exact and the two renderers cross-validate tightly
  RifsSystem sys = constant_system(0.7, DomainBase::global_g0);
  SurfaceSample s = deterministic_render(sys, 8);
  PointCloud cloud = chaos_game(sys, 100000, 42, 100);
  double worst = 0.0;
  for (const auto& p : cloud.points)
    worst = std::max(worst, std::abs(p[2] - bilinear_lookup(s, p[0], p[1])));
  CHECK(worst <= 1e-9);
}

TEST_CASE("vertical_range of a constant surface is a point") {
  HeightMatrix z(5, 5, 3.25);
  GridData g = normalize(build_grid({0, 1, 2, 3, 4}, {0, 1, 2, 3, 4}, std::move(z))).first;
  RifsSystem sys = build_system(GridData(g), rotate_layout(g), {parse("0.5")}, {});
  SurfaceSample s = deterministic_render(sys, 3);
  auto [lo, hi] = vertical_range(s, 2, 2);
  CHECK(lo == 3.25);
  CHECK(hi == 3.25);
}

TEST_CASE("vertical_range of the zero-scale table system hits the corner extremes") {
  RifsSystem sys = constant_system(0.0);
  SurfaceSample s = deterministic_render(sys, 5);
  // region (1,1) of a bilinear patch attains extremes at its corners 35,42,43,28
  auto [lo, hi] = vertical_range(s, 1, 1);
  CHECK_THAT(lo, Catch::Matchers::WithinAbs(28.0, 1e-12));
  CHECK_THAT(hi, Catch::Matchers::WithinAbs(43.0, 1e-12));
}

TEST_CASE("vertical_range of the fractal system contains the base patch range") {
  RifsSystem sys = constant_system(0.7);
  SurfaceSample s = deterministic_render(sys, 6);
  auto [lo, hi] = vertical_range(s, 1, 1);
  CHECK(lo <= 28.0);
  CHECK(hi >= 43.0);
}

TEST_CASE("max_variation on rasters") {
  HeightMatrix z(5, 5, 1.0);
  GridData g = normalize(build_grid({0, 1, 2, 3, 4}, {0, 1, 2, 3, 4}, std::move(z))).first;
  RifsSystem flat = build_system(GridData(g), rotate_layout(g), {parse("0.5")}, {});
  SurfaceSample s = deterministic_render(flat, 4);
  CHECK(max_variation(s, {0, 1, 0, 1}) == 0.0);

  // f = x over the unit square: variation 1 across E, about 1/4 over a column
  HeightMatrix zx(5, 5);
  for (int i = 0; i <= 4; ++i)
    for (int j = 0; j <= 4; ++j) zx(i, j) = 0.25 * i;
  GridData gx = normalize(build_grid({0, 1, 2, 3, 4}, {0, 1, 2, 3, 4}, std::move(zx))).first;
  RifsSystem plane = build_system(GridData(gx), rotate_layout(gx), {parse("0")}, {});
  SurfaceSample sp = deterministic_render(plane, 4);
  CHECK_THAT(max_variation(sp, {0, 1, 0, 1}), Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK_THAT(max_variation(sp, {0, 0.25, 0, 1}), Catch::Matchers::WithinAbs(0.25, 1e-12));
  CHECK_THROWS_MATCHES(max_variation(sp, {0.26, 0.26 + 1e-6, 0, 0.5}), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == errc::empty_rect; }));
}

TEST_CASE("the table attractor varies at least as much as its data") {
  RifsSystem sys = example2_system();
  SurfaceSample s = deterministic_render(sys, 6);
  CHECK(max_variation(s, {0, 1, 0, 1}) >= 88.0 - 25.0);
}

TEST_CASE("a non-square grid renders and box-counts over its rectangular extent") {
  // 4 x 2 regions with the two blocks pulling from each other (a 2-cycle of
  // domains, strongly connected)
  GridData g = normalize(read_grid_csv(rfis::testing::fixture("reducible2.csv"))).first;
  GammaSpec spec;
  spec.policy = GammaSpec::Policy::explicit_table;
  for (int j = 1; j <= 2; ++j)
    for (int i = 1; i <= 4; ++i) spec.table.push_back({i, j, i <= 2 ? 2 : 1});
  DomainLayout layout = resolve_layout(g, {{0, 2, 0, 2}, {2, 4, 0, 2}}, spec);
  RifsSystem sys = build_system(std::move(g), std::move(layout), {parse("0.6")}, {});
  REQUIRE(sys.irreducible);
  REQUIRE(sys.uniform.has_value());

  SurfaceSample s = deterministic_render(sys, 4);
  CHECK(s.nx + 1 == 4 * 16 + 1);
  CHECK(s.ny + 1 == 2 * 16 + 1);  // extent [0, 1] x [0, 1/2]
  const std::int64_t R = 16;
  for (int i = 0; i <= 4; ++i)
    for (int j = 0; j <= 2; ++j)
      REQUIRE_THAT(s.value(static_cast<int>(i * R), static_cast<int>(j * R)),
                   Catch::Matchers::WithinAbs(sys.grid.z(i, j), 1e-9));

  // at r = 0 the single mesh square must be clipped to the y extent
  CHECK(box_count(s, 0) >= 1);
  CHECK(box_count(s, 1) >= 2);
  CHECK(box_count(s, 2) >= box_count(s, 1));
}

TEST_CASE("the variation inequality holds region by region") {
  for (auto* make : {+[] { return constant_system(0.7); }, +[] { return example2_system(); }}) {
    RifsSystem sys = make();
    SurfaceSample s = deterministic_render(sys, 5);
    auto rows = lemma_variation_check(sys, s, 33);
    REQUIRE(rows.size() == 16);
    for (const auto& r : rows) {
      INFO("region (" << r.i << "," << r.j << "): lhs=" << r.lhs << " rhs=" << r.rhs);
      CHECK(r.pass);
    }
  }
}
