#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"

using namespace rfis;
using rfis::testing::quadrant_domains;
using rfis::testing::table1;
using rfis::testing::table1_raw;

namespace {

HeightMatrix flat(int nx, int ny, double v = 0.0) { return HeightMatrix(nx, ny, v); }

}  // namespace

TEST_CASE("build_grid accepts the table fixture") {
  GridData g = table1_raw();
  CHECK(g.n() == 4);
  CHECK(g.m() == 4);
  CHECK(g.xs.front() == 0.0);
  CHECK(g.xs.back() == 200.0);
  CHECK(g.z(0, 0) == 35.0);
  CHECK(g.z(2, 1) == 88.0);  // x=100, y=50
  CHECK(g.z(4, 4) == 54.0);
  CHECK_FALSE(g.normalized);
}

TEST_CASE("build_grid accepts a trivial flat grid") {
  GridData g = build_grid({0, 1}, {0, 1}, flat(2, 2));
  CHECK(g.n() == 1);
  CHECK(g.m() == 1);
}

TEST_CASE("build_grid rejects non-monotonic axes and shape mismatches") {
  CHECK_THROWS_MATCHES(build_grid({0, 0, 1}, {0, 1, 2}, flat(3, 3)), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == errc::non_monotonic_axis; }));
  CHECK_THROWS_MATCHES(build_grid({0, 1, 2}, {0, 1}, flat(2, 2)), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == errc::shape_mismatch; }));
  HeightMatrix bad(2, 2);
  bad(1, 1) = std::nan("");
  CHECK_THROWS_AS(build_grid({0, 1}, {0, 1}, std::move(bad)), Error);
}

TEST_CASE("normalize maps the table grid onto the unit square") {
  auto [g, map] = normalize(table1_raw());
  REQUIRE(g.normalized);
  for (int i = 0; i <= 4; ++i) {
    CHECK(g.xs[i] == static_cast<double>(i) / 4);
    CHECK(g.ys[i] == static_cast<double>(i) / 4);
  }
  CHECK(g.z(0, 0) == 35.0);  // heights untouched
  auto [x, y] = map.apply(100.0, 50.0);
  CHECK(x == 0.5);
  CHECK(y == 0.25);
  auto [xi, yi] = map.invert(0.5, 0.25);
  CHECK_THAT(xi, Catch::Matchers::WithinAbs(100.0, 1e-12));
  CHECK_THAT(yi, Catch::Matchers::WithinAbs(50.0, 1e-12));
}

TEST_CASE("normalize is exactly idempotent") {
  auto [g1, m1] = normalize(table1_raw());
  auto [g2, m2] = normalize(g1);
  CHECK(m2.is_identity());
  for (std::size_t i = 0; i < g1.xs.size(); ++i) CHECK(g1.xs[i] == g2.xs[i]);
  for (std::size_t j = 0; j < g1.ys.size(); ++j) CHECK(g1.ys[j] == g2.ys[j]);
}

TEST_CASE("normalize rejects non-uniform spacing") {
  GridData g = build_grid({0, 1, 3}, {0, 1, 2}, flat(3, 3));
  CHECK_THROWS_MATCHES(normalize(g), Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == errc::non_uniform_spacing;
                       }));
}

TEST_CASE("normalized spacing is the stored rational 1/n") {
  GridData g = normalize(build_grid({0, 10, 20, 30}, {0, 10, 20, 30}, flat(4, 4))).first;
  CHECK(g.step() == 1.0 / 3);
  for (int i = 0; i <= 3; ++i) CHECK(g.xs[i] == static_cast<double>(i) / 3);
}

TEST_CASE("non-square normalization keeps 1/n steps on both axes") {
  // 4 x 2 regions: y extent becomes m/n = 0.5 with steps 1/4
  GridData g = normalize(build_grid({0, 1, 2, 3, 4}, {0, 1, 2}, flat(5, 3))).first;
  CHECK(g.ys.back() == 0.5);
  CHECK(g.ys[1] == 0.25);
}

TEST_CASE("tau matches the linear-index formula") {
  CHECK(tau(1, 1, 4) == 1);
  CHECK(tau(3, 2, 4) == 7);
  CHECK(tau_inverse(16, 4) == std::pair{4, 4});
  CHECK_THROWS_AS(tau(5, 1, 4), Error);
  CHECK_THROWS_AS(tau(0, 1, 4), Error);
  CHECK_THROWS_AS(tau_inverse(0, 4), Error);
}

TEST_CASE("tau round-trips exhaustively up to 8x8") {
  for (int n = 1; n <= 8; ++n)
    for (int m = 1; m <= 8; ++m)
      for (int j = 1; j <= m; ++j)
        for (int i = 1; i <= n; ++i) {
          auto [ri, rj] = tau_inverse(tau(i, j, n), n);
          REQUIRE(ri == i);
          REQUIRE(rj == j);
        }
}

TEST_CASE("region lookup uses half-open cells with a closed final cell") {
  GridData g = table1();
  CHECK(g.region_col(0.0) == 1);
  CHECK(g.region_col(0.1) == 1);
  CHECK(g.region_col(0.25) == 2);  // shared edge -> larger index
  CHECK(g.region_col(0.999) == 4);
  CHECK(g.region_col(1.0) == 4);  // final cell closed
  CHECK_THROWS_AS(g.region_col(1.5), Error);
}

TEST_CASE("validate_layout passes the quadrant layout") {
  GridData g = table1();
  auto diags = validate_layout(g, rfis::testing::rotate_layout(g));
  CHECK(diags.empty());
}

TEST_CASE("validate_layout flags undersized domains") {
  GridData g = table1();
  DomainLayout layout;
  layout.n = 4;
  layout.m = 4;
  layout.domains = {{0, 1, 0, 2}, {0, 4, 0, 4}};  // first domain spans 1 region in x
  layout.gamma_table.assign(16, 2);
  auto diags = validate_layout(g, layout);
  REQUIRE_FALSE(diags.empty());
  bool found = false;
  for (const auto& d : diags)
    if (d.severity == Diagnostic::Severity::error &&
        d.message.find("too small") != std::string::npos)
      found = true;
  CHECK(found);
}

TEST_CASE("validate_layout flags a non-total gamma and unreferenced domains") {
  GridData g = table1();
  DomainLayout layout;
  layout.n = 4;
  layout.m = 4;
  layout.domains = quadrant_domains();
  layout.gamma_table.assign(16, 1);
  layout.gamma_table[(2 - 1) * 4 + (2 - 1)] = 0;  // region (2,2) unassigned
  auto diags = validate_layout(g, layout);
  bool not_total = false, unreferenced = false;
  for (const auto& d : diags) {
    if (d.message.find("gamma not total") != std::string::npos) not_total = true;
    if (d.severity == Diagnostic::Severity::warning &&
        d.message.find("referenced by no region") != std::string::npos)
      unreferenced = true;
  }
  CHECK(not_total);
  CHECK(unreferenced);
}

TEST_CASE("validate_layout enforces at least two domains") {
  GridData g = table1();
  DomainLayout layout;
  layout.n = 4;
  layout.m = 4;
  layout.domains = {{0, 4, 0, 4}};
  layout.gamma_table.assign(16, 1);
  auto diags = validate_layout(g, layout);
  bool found = false;
  for (const auto& d : diags)
    if (d.message.find("at least 2 domains") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("certify_uniform finds a = 2 for the quadrant layout") {
  GridData g = table1();
  auto cert = certify_uniform(g, rfis::testing::rotate_layout(g));
  CHECK(cert.a == 2);
  CHECK(cert.grid_n == 4);
  CHECK(cert.n_per_unit() == 0.25);
}

TEST_CASE("certify_uniform accepts a duplicated whole-grid domain with a = 4") {
  GridData g = table1();
  DomainLayout layout;
  layout.n = 4;
  layout.m = 4;
  layout.domains = {{0, 4, 0, 4}, {0, 4, 0, 4}};
  layout.gamma_table.assign(16, 1);
  CHECK(certify_uniform(g, layout).a == 4);
}

TEST_CASE("certify_uniform rejects mixed and non-square domains") {
  GridData g = table1();
  DomainLayout layout;
  layout.n = 4;
  layout.m = 4;
  layout.gamma_table.assign(16, 1);

  layout.domains = {{0, 2, 0, 2}, {0, 3, 0, 3}};
  CHECK_THROWS_MATCHES(certify_uniform(g, layout), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == errc::non_uniform_domains;
                       }));

  layout.domains = {{0, 3, 0, 2}, {0, 2, 0, 2}};
  CHECK_THROWS_MATCHES(certify_uniform(g, layout), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == errc::non_square_domain;
                       }));

  layout.domains = quadrant_domains();
  CHECK_THROWS_MATCHES(certify_uniform(table1_raw(), layout), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == errc::not_uniform; }));
}
