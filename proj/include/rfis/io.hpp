#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfis/dimension.hpp"
#include "rfis/errors.hpp"
#include "rfis/grid.hpp"
#include "rfis/render.hpp"

namespace rfis {

/// Shortest round-trip decimal form (reloads bit-exactly via from_chars).
inline std::string format_double(double v) { return detail::format_double(v); }

namespace detail {

inline double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    fail(errc::config_error, "bad number '" + std::string(s) + "' in " + where);
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(errc::config_error, "cannot open for writing: " + path.string());
  return f;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Grid CSV: first row = xs (leading cell empty), first column = ys,
// body = heights row-major by y.
// ---------------------------------------------------------------------------

inline GridData read_grid_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail(errc::config_error, "cannot open grid CSV: " + path.string());
  std::string line;
  if (!std::getline(f, line)) fail(errc::shape_mismatch, "grid CSV is empty");

  auto header = detail::split_csv_line(line);
  if (header.size() < 3 || !header[0].empty())
    fail(errc::shape_mismatch, "grid CSV header must be an empty cell followed by xs");
  std::vector<double> xs;
  for (std::size_t c = 1; c < header.size(); ++c)
    xs.push_back(detail::parse_double(header[c], "grid CSV header"));

  std::vector<double> ys;
  std::vector<std::vector<double>> rows;
  while (std::getline(f, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != xs.size() + 1)
      fail(errc::shape_mismatch, "grid CSV row " + std::to_string(ys.size() + 2) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(xs.size() + 1));
    const std::string where = "grid CSV row " + std::to_string(ys.size() + 2);
    ys.push_back(detail::parse_double(cells[0], where));
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c)
      row.push_back(detail::parse_double(cells[c], where));
    rows.push_back(std::move(row));
  }
  if (ys.size() < 2) fail(errc::shape_mismatch, "grid CSV needs at least 2 data rows");

  HeightMatrix z(static_cast<int>(xs.size()), static_cast<int>(ys.size()));
  for (std::size_t j = 0; j < ys.size(); ++j)
    for (std::size_t i = 0; i < xs.size(); ++i) z(static_cast<int>(i), static_cast<int>(j)) = rows[j][i];
  return build_grid(std::move(xs), std::move(ys), std::move(z));
}

inline void write_grid_csv(const GridData& g, const std::filesystem::path& path) {
  auto f = detail::open_out(path);
  for (double x : g.xs) f << ',' << format_double(x);
  f << '\n';
  for (int j = 0; j <= g.m(); ++j) {
    f << format_double(g.ys[j]);
    for (int i = 0; i <= g.n(); ++i) f << ',' << format_double(g.z(i, j));
    f << '\n';
  }
}

// ---------------------------------------------------------------------------
// Matrix CSV exports (M as probabilities, C as 0/1)
// ---------------------------------------------------------------------------

inline void write_stochastic_csv(const RowStochastic& M, const std::filesystem::path& path) {
  auto f = detail::open_out(path);
  for (int s = 1; s <= M.size; ++s) {
    for (int t = 1; t <= M.size; ++t) {
      if (t > 1) f << ',';
      f << format_double(M.prob(s, t));
    }
    f << '\n';
  }
}

inline void write_connection_csv(const ConnectionMatrix& C, const std::filesystem::path& path) {
  auto f = detail::open_out(path);
  for (int s = 1; s <= C.size; ++s) {
    for (int t = 1; t <= C.size; ++t) {
      if (t > 1) f << ',';
      f << (C.at(s, t) ? '1' : '0');
    }
    f << '\n';
  }
}

// ---------------------------------------------------------------------------
// Surface CSV: header "x,y,f", rows grouped by y (y outer, x inner)
// ---------------------------------------------------------------------------

inline void write_surface_csv(const SurfaceSample& s, const std::filesystem::path& path) {
  auto f = detail::open_out(path);
  f << "x,y,f\n";
  for (int gy = 0; gy <= s.ny; ++gy)
    for (int gx = 0; gx <= s.nx; ++gx)
      f << format_double(s.x_of(gx)) << ',' << format_double(s.y_of(gy)) << ','
        << format_double(s.value(gx, gy)) << '\n';
}

struct SurfaceCsv {
  int nx = 0, ny = 0;
  std::vector<double> f;  ///< x-major, matching SurfaceSample::f
};

inline SurfaceCsv read_surface_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail(errc::config_error, "cannot open surface CSV: " + path.string());
  std::string line;
  if (!std::getline(f, line) || detail::split_csv_line(line).front() != "x")
    fail(errc::shape_mismatch, "surface CSV must start with an x,y,f header");

  std::vector<double> xs_seen, vals;
  int nx = -1;
  std::size_t rows = 0;
  double prev_x = -std::numeric_limits<double>::infinity();
  while (std::getline(f, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != 3) fail(errc::shape_mismatch, "surface CSV rows must have 3 cells");
    const double x = detail::parse_double(cells[0], "surface CSV");
    vals.push_back(detail::parse_double(cells[2], "surface CSV"));
    if (nx < 0 && rows > 0 && x < prev_x) nx = static_cast<int>(rows) - 1;
    prev_x = x;
    ++rows;
  }
  if (nx < 0) fail(errc::shape_mismatch, "surface CSV has a single row block");
  SurfaceCsv out;
  out.nx = nx;
  out.ny = static_cast<int>(rows / (nx + 1)) - 1;
  if (rows != static_cast<std::size_t>(out.nx + 1) * (out.ny + 1))
    fail(errc::shape_mismatch, "surface CSV row count is not a full raster");
  out.f.resize(rows);
  // stored y-major on disk, x-major in memory
  std::size_t p = 0;
  for (int gy = 0; gy <= out.ny; ++gy)
    for (int gx = 0; gx <= out.nx; ++gx)
      out.f[static_cast<std::size_t>(gx) * (out.ny + 1) + gy] = vals[p++];
  return out;
}

// ---------------------------------------------------------------------------
// 16-bit big-endian PGM (P5) + JSON sidecar with the scaling
// ---------------------------------------------------------------------------

inline void write_pgm16(const SurfaceSample& s, const std::filesystem::path& path) {
  double lo = s.f.front(), hi = s.f.front();
  for (double v : s.f) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  auto f = detail::open_out(path);
  const int w = s.nx + 1, h = s.ny + 1;
  f << "P5\n" << w << ' ' << h << "\n65535\n";
  // rows top-down: gy = ny first
  for (int gy = s.ny; gy >= 0; --gy) {
    for (int gx = 0; gx <= s.nx; ++gx) {
      std::uint16_t q = 32768;  // degenerate flat surface maps to mid-gray
      if (hi > lo)
        q = static_cast<std::uint16_t>(
            std::lround((s.value(gx, gy) - lo) / (hi - lo) * 65535.0));
      const unsigned char bytes[2] = {static_cast<unsigned char>(q >> 8),
                                      static_cast<unsigned char>(q & 0xff)};
      f.write(reinterpret_cast<const char*>(bytes), 2);
    }
  }

  nlohmann::json side;
  side["min"] = lo;
  side["max"] = hi;
  side["width"] = w;
  side["height"] = h;
  side["depth"] = s.depth;
  side["row_order"] = "top-down (y decreasing)";
  side["scale"] = hi > lo ? "linear min-max to [0,65535], big-endian"
                          : "degenerate (min == max): constant mid-gray 32768";
  auto sf = detail::open_out(path.string() + ".json");
  sf << side.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// OBJ: v-lines only for clouds, v + quad f-lines for rasters
// ---------------------------------------------------------------------------

inline void write_obj_raster(const SurfaceSample& s, const std::filesystem::path& path) {
  auto f = detail::open_out(path);
  for (int gy = 0; gy <= s.ny; ++gy)
    for (int gx = 0; gx <= s.nx; ++gx)
      f << "v " << format_double(s.x_of(gx)) << ' ' << format_double(s.y_of(gy)) << ' '
        << format_double(s.value(gx, gy)) << '\n';
  const int w = s.nx + 1;
  for (int gy = 0; gy < s.ny; ++gy)
    for (int gx = 0; gx < s.nx; ++gx) {
      const int i1 = gy * w + gx + 1;
      f << "f " << i1 << ' ' << (i1 + 1) << ' ' << (i1 + w + 1) << ' ' << (i1 + w) << '\n';
    }
}

inline void write_obj_cloud(const PointCloud& c, const std::filesystem::path& path) {
  auto f = detail::open_out(path);
  for (const auto& p : c.points)
    f << "v " << format_double(p[0]) << ' ' << format_double(p[1]) << ' '
      << format_double(p[2]) << '\n';
}

inline void write_cloud_csv(const PointCloud& c, const std::filesystem::path& path) {
  auto f = detail::open_out(path);
  f << "x,y,z\n";
  for (const auto& p : c.points)
    f << format_double(p[0]) << ',' << format_double(p[1]) << ',' << format_double(p[2])
      << '\n';
}

// ---------------------------------------------------------------------------
// Log-log SVG plot of the box counts with the fitted line
// ---------------------------------------------------------------------------

inline void write_svg_loglog(const std::vector<BoxCountRow>& counts, double slope, double r2,
                             const std::filesystem::path& path) {
  if (counts.size() < 2) fail(errc::config_error, "log-log plot needs at least 2 counts");
  const double W = 640, H = 480, ml = 70, mr = 20, mt = 20, mb = 50;
  double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : counts) {
    const double xv = std::log(1.0 / row.epsilon);
    const double yv = std::log(static_cast<double>(row.count));
    pts.emplace_back(xv, yv);
    x_lo = std::min(x_lo, xv);
    x_hi = std::max(x_hi, xv);
    y_lo = std::min(y_lo, yv);
    y_hi = std::max(y_hi, yv);
  }
  if (y_hi <= y_lo) y_hi = y_lo + 1;
  auto px = [&](double xv) { return ml + (xv - x_lo) / (x_hi - x_lo) * (W - ml - mr); };
  auto py = [&](double yv) { return H - mb - (yv - y_lo) / (y_hi - y_lo) * (H - mt - mb); };

  // intercept of the least-squares line through the points
  double sx = 0, sy = 0;
  for (auto& p : pts) {
    sx += p.first;
    sy += p.second;
  }
  const double intercept = (sy - slope * sx) / pts.size();

  auto f = detail::open_out(path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  f << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  f << "<line x1=\"" << ml << "\" y1=\"" << (H - mb) << "\" x2=\"" << (W - mr) << "\" y2=\""
    << (H - mb) << "\" stroke=\"black\"/>\n";
  f << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << (H - mb)
    << "\" stroke=\"black\"/>\n";
  f << "<text x=\"" << (W / 2) << "\" y=\"" << (H - 12)
    << "\" text-anchor=\"middle\" font-size=\"14\">log(1/eps)</text>\n";
  f << "<text x=\"16\" y=\"" << (H / 2)
    << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 16 " << (H / 2)
    << ")\">log N'(eps)</text>\n";
  for (std::size_t q = 0; q < pts.size(); ++q) {
    f << "<circle cx=\"" << format_double(px(pts[q].first)) << "\" cy=\""
      << format_double(py(pts[q].second)) << "\" r=\"4\" fill=\"#1f77b4\"/>\n";
    f << "<text x=\"" << format_double(px(pts[q].first)) << "\" y=\"" << (H - mb + 18)
      << "\" text-anchor=\"middle\" font-size=\"11\">r=" << counts[q].r << "</text>\n";
  }
  f << "<line x1=\"" << format_double(px(x_lo)) << "\" y1=\""
    << format_double(py(slope * x_lo + intercept)) << "\" x2=\"" << format_double(px(x_hi))
    << "\" y2=\"" << format_double(py(slope * x_hi + intercept))
    << "\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n";
  f << "<text x=\"" << (ml + 10) << "\" y=\"" << (mt + 16) << "\" font-size=\"14\">slope = "
    << format_double(slope) << ", R2 = " << format_double(r2) << "</text>\n";
  f << "</svg>\n";
}

}  // namespace rfis
