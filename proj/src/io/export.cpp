#include "hthk/io/export.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "hthk/error.hpp"

namespace hthk::io {

std::string format_real(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_csv_header(std::ostream& out, std::size_t n) {
  out << 't';
  for (std::size_t i = 1; i <= n; ++i) out << ",x_" << i;
  out << '\n';
}

void write_csv_row(std::ostream& out, std::size_t t, std::span<const double> x) {
  out << t;
  for (double v : x) out << ',' << format_real(v);
  out << '\n';
}

std::string trajectory_svg(const TrajectoryReport& report) {
  constexpr double width = 800.0, height = 500.0, margin = 40.0;
  const auto& snaps = report.snapshots;
  const std::size_t n = snaps.front().opinions.size();
  double lo = snaps.front().opinions.front(), hi = lo;
  for (const auto& s : snaps) {
    const auto [a, b] = std::minmax_element(s.opinions.begin(), s.opinions.end());
    lo = std::min(lo, *a);
    hi = std::max(hi, *b);
  }
  const double t_max = std::max<double>(1.0, static_cast<double>(snaps.back().t));
  const double span = hi > lo ? hi - lo : 1.0;
  const auto px = [&](std::size_t t) { return margin + (width - 2 * margin) * static_cast<double>(t) / t_max; };
  const auto py = [&](double v) { return height - margin - (height - 2 * margin) * (v - lo) / span; };

  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\" viewBox=\"0 0 "
      << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
      << height - margin << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"" << height - 8 << "\" font-size=\"12\" text-anchor=\"middle\">t (0.."
      << snaps.back().t << ")</text>\n";
  out << "<text x=\"4\" y=\"" << margin - 8 << "\" font-size=\"12\">x in [" << format_real(lo) << ", " << format_real(hi)
      << "]</text>\n";
  for (std::size_t i = 0; i < n; ++i) {
    out << "<polyline fill=\"none\" stroke=\"hsl(" << (i * 360) / std::max<std::size_t>(n, 1)
        << ",70%,40%)\" stroke-width=\"1\" points=\"";
    for (const auto& s : snaps) out << px(s.t) << ',' << py(s.opinions[i]) << ' ';
    out << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string edge_list(const ProximityDigraph& digraph, const StructureReport& structure) {
  std::ostringstream out;
  for (Agent i = 0; i < digraph.size(); ++i) {
    for (Agent j : digraph.out_neighbors(i)) out << i + 1 << " -> " << j + 1 << '\n';
  }
  out << '\n';
  for (std::size_t k = 0; k < structure.sccs.size(); ++k) {
    out << "scc " << k + 1 << ' ' << to_string(structure.class_of[k]) << ':';
    for (Agent a : structure.sccs[k]) out << ' ' << a + 1;
    out << '\n';
  }
  return out.str();
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot move output into place at " + path.string());
  }
}

}  // namespace hthk::io
