#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <string_view>

#include "hthk/core_model.hpp"
#include "hthk/graph_structure.hpp"
#include "hthk/simulator.hpp"

namespace hthk::io {

/// Locale-independent general format with 17 significant digits.
std::string format_real(double v);

void write_csv_header(std::ostream& out, std::size_t n);
/// One `t,x_1,...,x_n` row.
void write_csv_row(std::ostream& out, std::size_t t, std::span<const double> x);

/// Step-versus-opinion polylines over the retained snapshots.
std::string trajectory_svg(const TrajectoryReport& report);

/// `i -> j` per edge, then one `scc <id> <class>: members` line per SCC.
std::string edge_list(const ProximityDigraph& digraph, const StructureReport& structure);

/// Writes through a sibling temporary file renamed into place.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace hthk::io
