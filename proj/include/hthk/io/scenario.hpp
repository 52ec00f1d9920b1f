#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hthk/core_model.hpp"
#include "hthk/simulator.hpp"

namespace hthk::io {

/// A scenario document: initial opinions, bounds and run options.
///
/// Text format, one `key = value` per line, `#` starts a comment:
///
///     n = 5                  # optional, checked against x0
///     x0 = 0.1 0.2, 0.3 2*0.5
///     r = 0.3                # a single value is broadcast
///     center = ...           # optional equilibrium for check-thm1
///     tie_tol = 0
///     convergence_tol = 1e-12
///     max_steps = 100000
///     stability_window = 100
///     mode = free            # or frozen
///
/// Vector entries are separated by spaces or commas; `count*value` repeats
/// a value.
struct Scenario {
  std::vector<double> x0;
  std::vector<double> r;
  std::optional<std::vector<double>> center;
  double tie_tol = 0.0;
  double convergence_tol = 1e-12;
  std::size_t max_steps = 100000;
  std::size_t stability_window = kDefaultStabilityWindow;
  Mode mode = Mode::Free;

  std::size_t n() const noexcept { return x0.size(); }
  OpinionState state() const { return OpinionState(x0, r); }
  std::optional<OpinionState> center_state() const;
  SimulationOptions options() const;
};

Scenario parse_scenario(std::string_view text, std::string_view source = "<text>");
Scenario load_scenario(const std::filesystem::path& path);
/// Canonical text form: fixed key order, shortest round-trip numbers, runs of
/// four or more equal values written as count*value.
std::string serialize_scenario(const Scenario& scenario);

}  // namespace hthk::io
