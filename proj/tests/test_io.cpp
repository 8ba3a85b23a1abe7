#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "helpers.hpp"

using namespace rfis;
using rfis::testing::constant_system;

namespace {

std::filesystem::path temp_dir() {
  auto p = std::filesystem::temp_directory_path() / "rfis_io_tests";
  std::filesystem::create_directories(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f);
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("grid CSV reads the table fixture") {
  GridData g = read_grid_csv(rfis::testing::fixture("table1.csv"));
  CHECK(g.n() == 4);
  CHECK(g.m() == 4);
  CHECK(g.xs == std::vector<double>{0, 50, 100, 150, 200});
  CHECK(g.ys == std::vector<double>{0, 50, 100, 150, 200});
  CHECK(g.z(1, 0) == 42.0);
  CHECK(g.z(0, 1) == 43.0);
}

TEST_CASE("grid CSV round-trips bit-exactly") {
  GridData g = rfis::testing::table1();
  const auto path = temp_dir() / "grid_rt.csv";
  write_grid_csv(g, path);
  GridData r = read_grid_csv(path);
  CHECK(r.xs == g.xs);
  CHECK(r.ys == g.ys);
  CHECK(r.z.raw() == g.z.raw());
  CHECK(r.normalized);
}

TEST_CASE("grid CSV rejects ragged rows and bad headers") {
  const auto bad1 = temp_dir() / "bad1.csv";
  {
    std::ofstream f(bad1);
    f << ",0,1\n0,1\n";
  }
  CHECK_THROWS_AS(read_grid_csv(bad1), Error);
  const auto bad2 = temp_dir() / "bad2.csv";
  {
    std::ofstream f(bad2);
    f << "x,0,1\n0,1,2\n1,3,4\n";
  }
  CHECK_THROWS_AS(read_grid_csv(bad2), Error);
}

TEST_CASE("surface CSV round-trips the raster bit-for-bit") {
  RifsSystem sys = constant_system(0.7);
  SurfaceSample s = deterministic_render(sys, 4);
  const auto path = temp_dir() / "surface_rt.csv";
  write_surface_csv(s, path);
  SurfaceCsv r = read_surface_csv(path);
  REQUIRE(r.nx == s.nx);
  REQUIRE(r.ny == s.ny);
  REQUIRE(r.f.size() == s.f.size());
  for (std::size_t q = 0; q < r.f.size(); ++q) REQUIRE(r.f[q] == s.f[q]);
}

TEST_CASE("PGM export writes a 16-bit big-endian P5 with a sidecar") {
  RifsSystem sys = constant_system(0.7);
  SurfaceSample s = deterministic_render(sys, 3);
  const auto path = temp_dir() / "surface.pgm";
  write_pgm16(s, path);
  const std::string bytes = slurp(path);
  const std::string header = "P5\n33 33\n65535\n";
  REQUIRE(bytes.substr(0, header.size()) == header);
  CHECK(bytes.size() == header.size() + 2u * 33 * 33);

  // the maximum raster value maps to the byte pair 0xff 0xff somewhere
  double lo = s.f.front(), hi = s.f.front();
  for (double v : s.f) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  nlohmann::json side = nlohmann::json::parse(slurp(path.string() + ".json"));
  CHECK(side["min"].get<double>() == lo);
  CHECK(side["max"].get<double>() == hi);
  CHECK(side["width"] == 33);
  CHECK(side["height"] == 33);
}

TEST_CASE("PGM of a flat surface is mid-gray with a degenerate sidecar note") {
  HeightMatrix z(5, 5, 0.0);
  GridData g = normalize(build_grid({0, 1, 2, 3, 4}, {0, 1, 2, 3, 4}, std::move(z))).first;
  GammaSpec spec;
  spec.policy = GammaSpec::Policy::rotate_quadrant;
  RifsSystem sys = build_system(GridData(g),
                                resolve_layout(g, rfis::testing::quadrant_domains(), spec),
                                {parse("0.5")}, {});
  SurfaceSample s = deterministic_render(sys, 2);  // 4 * 2^2 + 1 = 17 nodes per axis
  const auto path = temp_dir() / "flat.pgm";
  write_pgm16(s, path);
  const std::string bytes = slurp(path);
  const std::string header = "P5\n17 17\n65535\n";
  REQUIRE(bytes.substr(0, header.size()) == header);
  for (std::size_t q = header.size(); q + 1 < bytes.size(); q += 2) {
    REQUIRE(static_cast<unsigned char>(bytes[q]) == 0x80);
    REQUIRE(static_cast<unsigned char>(bytes[q + 1]) == 0x00);
  }
  nlohmann::json side = nlohmann::json::parse(slurp(path.string() + ".json"));
  CHECK_THAT(side["scale"].get<std::string>(),
             Catch::Matchers::ContainsSubstring("degenerate"));
}

TEST_CASE("OBJ raster export carries vertices and quad faces") {
  RifsSystem sys = constant_system(0.7);
  SurfaceSample s = deterministic_render(sys, 2);
  const auto path = temp_dir() / "surface.obj";
  write_obj_raster(s, path);
  const std::string text = slurp(path);
  std::size_t vcount = 0, fcount = 0;
  for (std::size_t q = 0; q < text.size(); ++q) {
    if (q == 0 || text[q - 1] == '\n') {
      if (text[q] == 'v') ++vcount;
      if (text[q] == 'f') ++fcount;
    }
  }
  CHECK(vcount == 17u * 17);
  CHECK(fcount == 16u * 16);
}

TEST_CASE("OBJ cloud export is vertices only") {
  RifsSystem sys = constant_system(0.7);
  PointCloud cloud = chaos_game(sys, 500, 42, 10);
  const auto path = temp_dir() / "cloud.obj";
  write_obj_cloud(cloud, path);
  const std::string text = slurp(path);
  CHECK(text.find("\nf ") == std::string::npos);
  std::size_t vcount = 0;
  for (std::size_t q = 0; q < text.size(); ++q)
    if ((q == 0 || text[q - 1] == '\n') && text[q] == 'v') ++vcount;
  CHECK(vcount == 500);
}

TEST_CASE("matrix CSV exports are plain numeric grids") {
  RifsSystem sys = constant_system(0.7);
  const auto mpath = temp_dir() / "M.csv";
  const auto cpath = temp_dir() / "C.csv";
  write_stochastic_csv(sys.M, mpath);
  write_connection_csv(sys.C, cpath);
  const std::string m = slurp(mpath);
  CHECK_THAT(m, Catch::Matchers::ContainsSubstring("0.25"));
  const std::string c = slurp(cpath);
  std::size_t ones = 0;
  for (char ch : c)
    if (ch == '1') ++ones;
  CHECK(ones == 16u * 4);  // four ones per row
}

TEST_CASE("format_double uses shortest round-trip decimals") {
  CHECK(format_double(0.25) == "0.25");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
  CHECK(format_double(-2.0) == "-2");
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("the SVG plot contains axes, points and the slope annotation") {
  std::vector<BoxCountRow> counts = {{2, 0.25, 100}, {3, 0.125, 560}, {4, 0.0625, 3100}};
  const auto path = temp_dir() / "plot.svg";
  write_svg_loglog(counts, 2.48, 0.999, path);
  const std::string svg = slurp(path);
  CHECK_THAT(svg, Catch::Matchers::ContainsSubstring("<svg"));
  CHECK_THAT(svg, Catch::Matchers::ContainsSubstring("slope = 2.48"));
  CHECK_THAT(svg, Catch::Matchers::ContainsSubstring("<circle"));
  CHECK_THAT(svg, Catch::Matchers::ContainsSubstring("log(1/eps)"));
}
