#pragma once

#include <json.hpp>

#include "hthk/convergence_factors.hpp"
#include "hthk/fixed_topology.hpp"
#include "hthk/graph_structure.hpp"
#include "hthk/leader_dynamics.hpp"
#include "hthk/neighborhoods.hpp"
#include "hthk/simulator.hpp"

/// JSON views of the analysis reports. Agents and components are numbered
/// from 1 in every document.
namespace hthk::io {

using Json = nlohmann::ordered_json;

Json to_json(const TrajectoryReport& report, std::optional<std::size_t> tau, bool with_snapshots = false);
Json to_json(const StructureReport& structure, const OpinionState& state);
Json to_json(const FinalValueResult& result);
Json to_json(const Theorem1Report& report, const NeighborhoodSpec& spec);
Json to_json(const Theorem2Report& report, const ConvergenceFactors& factors);
Json to_json(const Theorem3Report& report);
Json to_json(const LeaderReport& report, const StructureReport& structure);

}  // namespace hthk::io
