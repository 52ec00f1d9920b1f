#include "hthk/io/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "hthk/error.hpp"
#include "hthk/invariants.hpp"
#include "hthk/io/export.hpp"
#include "hthk/io/report_json.hpp"
#include "hthk/io/scenario.hpp"
#include "hthk/sampling.hpp"

namespace hthk::io {

namespace {

struct Flags {
  std::string scenario;
  std::optional<std::size_t> max_steps;
  std::optional<double> tol;
  std::optional<double> tie_tol;
  std::optional<std::size_t> window;
  std::optional<std::string> mode;
  std::size_t at_step = 0;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> horizon;
  std::uint64_t seed = 1;
  std::size_t count = 100;
  std::size_t jobs = 0;
  std::size_t n_min = 3;
  std::size_t n_max = 20;
};

Scenario load_with_overrides(const Flags& f) {
  Scenario sc = load_scenario(f.scenario);
  if (f.max_steps) sc.max_steps = *f.max_steps;
  if (f.tol) sc.convergence_tol = *f.tol;
  if (f.tie_tol) sc.tie_tol = *f.tie_tol;
  if (f.window) sc.stability_window = *f.window;
  if (f.mode) sc.mode = *f.mode == "frozen" ? Mode::Frozen : Mode::Free;
  if (!(sc.convergence_tol > 0.0)) throw ValidationError("--tol must be positive");
  if (sc.stability_window == 0) throw ValidationError("--window must be positive");
  for (double b : sc.r) {
    if (!(b + sc.tie_tol >= 0.0)) throw ValidationError("r + tie_tol must be non-negative");
  }
  return sc;
}

OpinionState analysis_state(const Scenario& sc, const Flags& f) {
  return state_at_step(sc.state(), f.at_step, sc.tie_tol);
}

class Output {
 public:
  Output(const Flags& f, std::ostream& out, std::ostream& err) : dir_(f.out_dir), out_(out), err_(err) {
    if (dir_) std::filesystem::create_directories(*dir_);
  }

  void report(const std::string& name, const Json& json) {
    if (dir_) {
      write_atomic(std::filesystem::path(*dir_) / (name + ".json"), json.dump(2) + "\n");
    } else {
      out_ << json.dump(2) << '\n';
    }
  }

  void file(const std::string& name, std::string_view content) {
    if (dir_) write_atomic(std::filesystem::path(*dir_) / name, content);
  }

  bool writes_files() const { return dir_.has_value(); }
  std::ostream& summary() { return dir_ ? out_ : err_; }

 private:
  std::optional<std::string> dir_;
  std::ostream& out_;
  std::ostream& err_;
};

int cmd_simulate(const Flags& f, Output& o) {
  const Scenario sc = load_with_overrides(f);
  std::ostringstream csv;
  StepObserver observer;
  if (o.writes_files()) {
    write_csv_header(csv, sc.n());
    observer = [&csv](std::size_t t, std::span<const double> x) { write_csv_row(csv, t, x); };
  }
  const auto rep = simulate(sc.state(), sc.options(), observer);
  const auto tau = detect_tau(rep, sc.stability_window);
  o.report("trajectory", to_json(rep, tau));
  if (o.writes_files()) {
    o.file("trajectory.csv", csv.str());
    o.file("trajectory.svg", trajectory_svg(rep));
    const auto final_state = sc.state().with_opinions(rep.final_snapshot().opinions);
    const auto g = build_digraph(final_state, sc.tie_tol);
    o.file("final_digraph.txt", edge_list(g, analyze_structure(g)));
  }
  auto& s = o.summary();
  s << "simulate: " << rep.steps_run << " steps, " << (rep.converged ? "converged" : "not converged")
    << ", residual " << format_real(rep.final_residual) << ", " << rep.topology_changes.size() << " topology changes";
  if (tau) {
    s << ", tau = " << *tau << '\n';
  } else {
    s << ", tau not certified (candidate " << rep.tau_candidate.value_or(0) << ")\n";
  }
  return kExitOk;
}

int cmd_classify(const Flags& f, Output& o) {
  const Scenario sc = load_with_overrides(f);
  const auto state = analysis_state(sc, f);
  const auto g = build_digraph(state, sc.tie_tol);
  const auto s = analyze_structure(g);
  Json j = to_json(s, state);
  j["step"] = f.at_step;
  o.report("classify", j);
  o.file("digraph.txt", edge_list(g, s));
  o.summary() << "classify at t=" << f.at_step << ": " << s.sccs.size() << " SCCs (" << s.count(ComponentClass::ClosedMinded)
              << " closed, " << s.count(ComponentClass::ModerateMinded) << " moderate, "
              << s.count(ComponentClass::OpenMinded) << " open), " << s.wccs.size() << " weak components\n";
  return kExitOk;
}

int cmd_fvct(const Flags& f, Output& o) {
  const Scenario sc = load_with_overrides(f);
  const auto state = analysis_state(sc, f);
  const auto res = fvct(state, sc.tie_tol);
  Json j = to_json(res);
  j["step"] = f.at_step;
  o.report("fvct", j);
  auto& s = o.summary();
  s << "fvct at t=" << f.at_step << ":";
  for (double v : res.fvct) s << ' ' << format_real(v);
  s << (res.is_equilibrium_input ? " (input is an equilibrium)\n" : "\n");
  return kExitOk;
}

int cmd_thm1(const Flags& f, Output& o) {
  const Scenario sc = load_with_overrides(f);
  const auto y0 = analysis_state(sc, f);
  const bool given = sc.center.has_value();
  const OpinionState z = given ? *sc.center_state() : y0.with_opinions(fvct(y0, sc.tie_tol).fvct);
  const std::size_t horizon = f.horizon.value_or(500);
  const auto rep = check_theorem1(z, y0, horizon, sc.tie_tol);
  Json j = to_json(rep, neighborhood_spec(z, sc.tie_tol));
  j["center"] = std::vector<double>(z.opinions().begin(), z.opinions().end());
  j["center_source"] = given ? "scenario" : "fvct";
  j["center_is_equilibrium"] = is_equilibrium(z, kEquilibriumTol, sc.tie_tol);
  j["horizon"] = horizon;
  o.report("theorem1", j);
  o.summary() << "theorem 1: " << (rep.applicable ? "applicable" : "not applicable") << ", conclusions "
              << (rep.conclusions_verified ? "verified" : "not verified")
              << (rep.violation.empty() ? "" : " (" + rep.violation + ")") << '\n';
  return kExitOk;
}

int cmd_thm2(const Flags& f, Output& o) {
  const Scenario sc = load_with_overrides(f);
  const auto state = analysis_state(sc, f);
  const auto rep = check_theorem2(state, sc.tie_tol);
  Json j = to_json(rep, convergence_factors(state, sc.tie_tol));
  j["step"] = f.at_step;
  if (rep.all_hold) {
    const auto fwd = verify_theorem2_forward(state, f.horizon.value_or(500), sc.tie_tol);
    j["forward"] = {{"steps", fwd.steps},
                    {"digraph_constant", fwd.digraph_constant},
                    {"monotone", fwd.monotone},
                    {"distance_bound", fwd.distance_bound},
                    {"violation", fwd.violation}};
  }
  o.report("theorem2", j);
  auto& s = o.summary();
  s << "theorem 2 at t=" << f.at_step << ": conditions";
  for (std::size_t c = 0; c < rep.cond.size(); ++c) s << ' ' << c + 1 << '=' << (rep.cond[c] ? "yes" : "no");
  s << '\n';
  return kExitOk;
}

int cmd_thm3(const Flags& f, Output& o) {
  const Scenario sc = load_with_overrides(f);
  const auto state = analysis_state(sc, f);
  const auto rep = check_theorem3(state, f.horizon.value_or(10000), sc.tie_tol);
  Json j = to_json(rep);
  j["step"] = f.at_step;
  o.report("theorem3", j);
  o.summary() << "theorem 3 at t=" << f.at_step << ": " << to_string(rep.status) << " (" << rep.k_limits.size()
              << " rate limits, fvct " << (rep.fvct_constant ? "constant" : "not constant") << ")\n";
  return kExitOk;
}

int cmd_leaders(const Flags& f, Output& o) {
  const Scenario sc = load_with_overrides(f);
  const auto state = analysis_state(sc, f);
  const auto g = build_digraph(state, sc.tie_tol);
  const auto s = analyze_structure(g);
  const auto rep = leader_report(build_matrix(g), s);
  Json j;
  j["step"] = f.at_step;
  j["open_sccs"] = to_json(rep, s);
  o.report("leaders", j);
  auto& out = o.summary();
  out << "leaders at t=" << f.at_step << ": " << rep.entries.size() << " open-minded SCCs\n";
  for (const auto& e : rep.entries) {
    out << "  SCC " << e.scc + 1 << " (" << s.sccs[e.scc].size() << " agents) rho = " << format_real(*rep.rho[e.scc])
        << ", leader SCC " << e.leader + 1 << (e.tie ? " (tie)" : "") << '\n';
  }
  return kExitOk;
}

struct FuzzOutcome {
  std::size_t n = 0;
  bool converged = false;
  std::optional<std::size_t> tau;
  std::size_t changes = 0;
  std::vector<std::string> violations;
};

FuzzOutcome fuzz_one(const Flags& f, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint64_t>(f.seed), static_cast<std::uint64_t>(index)};
  Rng rng(seq);
  std::uniform_int_distribution<std::size_t> size_dist(f.n_min, f.n_max);
  FuzzOutcome res;
  res.n = size_dist(rng);
  const auto state = random_state(rng, res.n);
  SimulationOptions opts;
  opts.max_steps = f.max_steps.value_or(opts.max_steps);
  opts.convergence_tol = f.tol.value_or(opts.convergence_tol);
  opts.tie_tol = f.tie_tol.value_or(0.0);
  const auto rep = simulate(state, opts);
  res.converged = rep.converged;
  res.tau = detect_tau(rep, f.window.value_or(kDefaultStabilityWindow));
  res.changes = rep.topology_changes.size();
  for (const auto& v : structural_violations(state, opts.tie_tol)) res.violations.push_back("x(0): " + v);
  const auto last = state.with_opinions(rep.final_snapshot().opinions);
  for (const auto& v : structural_violations(last, opts.tie_tol)) res.violations.push_back("final: " + v);
  for (std::size_t k = 1; k < rep.snapshots.size(); ++k) {
    const auto& a = rep.snapshots[k - 1].opinions;
    const auto& b = rep.snapshots[k].opinions;
    if (*std::min_element(b.begin(), b.end()) < *std::min_element(a.begin(), a.end()) ||
        *std::max_element(b.begin(), b.end()) > *std::max_element(a.begin(), a.end())) {
      res.violations.push_back("opinion range grew at t=" + std::to_string(rep.snapshots[k].t));
      break;
    }
  }
  return res;
}

int cmd_fuzz(const Flags& f, Output& o) {
  if (f.n_min < 1 || f.n_min > f.n_max) throw ValidationError("--n-min must be in 1..n-max");
  std::vector<FuzzOutcome> results(f.count);
  const std::size_t workers = std::max<std::size_t>(
      1, std::min<std::size_t>(f.jobs ? f.jobs : std::thread::hardware_concurrency(), f.count));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < f.count; i += workers) results[i] = fuzz_one(f, i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<std::size_t> taus;
  std::size_t converged = 0;
  Json violations = Json::array();
  std::map<std::size_t, std::size_t> histogram;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    converged += r.converged ? 1 : 0;
    if (r.tau) {
      taus.push_back(*r.tau);
      ++histogram[*r.tau];
    }
    for (const auto& v : r.violations) violations.push_back({{"scenario", i}, {"n", r.n}, {"violation", v}});
  }
  std::sort(taus.begin(), taus.end());
  Json j;
  j["seed"] = f.seed;
  j["count"] = f.count;
  j["n_range"] = {f.n_min, f.n_max};
  j["converged"] = converged;
  j["tau_certified"] = taus.size();
  if (!taus.empty()) {
    j["tau"] = {{"min", taus.front()},
                {"median", taus[taus.size() / 2]},
                {"max", taus.back()},
                {"mean", std::accumulate(taus.begin(), taus.end(), 0.0) / static_cast<double>(taus.size())}};
    Json hist = Json::array();
    for (const auto& [tau, c] : histogram) hist.push_back({tau, c});
    j["tau_histogram"] = std::move(hist);
  }
  j["violations"] = violations;
  o.report("fuzz", j);
  o.summary() << "fuzz: " << f.count << " scenarios, " << converged << " converged, " << taus.size()
              << " with certified tau, " << violations.size() << " invariant violations\n";
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heterogeneous bounded-confidence opinion dynamics analysis", "hthk"};
  app.require_subcommand(1, 1);
  Flags f;

  const auto add_run_options = [&f](CLI::App* sub) {
    sub->add_option("--max-steps", f.max_steps, "Step limit of the simulation")->check(CLI::PositiveNumber);
    sub->add_option("--tol", f.tol, "Convergence tolerance on the step delta (max norm)");
    sub->add_option("--tie-tol", f.tie_tol, "Slack added to every confidence bound in the neighbor test");
    sub->add_option("--window", f.window, "Steps the digraph must stay fixed to certify tau")->check(CLI::PositiveNumber);
    sub->add_option("--out", f.out_dir, "Directory for report files");
  };
  const auto add_scenario = [&](CLI::App* sub) {
    sub->add_option("scenario", f.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    add_run_options(sub);
    sub->add_option("--mode", f.mode, "free or frozen")->check(CLI::IsMember({"free", "frozen"}));
  };
  const auto add_step = [&](CLI::App* sub) { sub->add_option("--at-step", f.at_step, "Analyse x(t) at this step"); };
  const auto add_horizon = [&](CLI::App* sub) {
    sub->add_option("--horizon", f.horizon, "Number of steps to check")->check(CLI::PositiveNumber);
  };

  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a scenario and report topology changes and tau");
  add_scenario(simulate_cmd);
  auto* classify_cmd = app.add_subcommand("classify", "SCC/WCC structure and component classes");
  add_scenario(classify_cmd);
  add_step(classify_cmd);
  auto* fvct_cmd = app.add_subcommand("fvct", "Final value at constant topology");
  add_scenario(fvct_cmd);
  add_step(fvct_cmd);
  auto* thm1_cmd = app.add_subcommand("check-thm1", "Invariant equi-topology neighborhood check");
  add_scenario(thm1_cmd);
  add_step(thm1_cmd);
  add_horizon(thm1_cmd);
  auto* thm2_cmd = app.add_subcommand("check-thm2", "Constant-topology sufficient conditions");
  add_scenario(thm2_cmd);
  add_step(thm2_cmd);
  add_horizon(thm2_cmd);
  auto* thm3_cmd = app.add_subcommand("check-thm3", "Frozen-topology rate limits and leader entrainment");
  add_scenario(thm3_cmd);
  add_step(thm3_cmd);
  add_horizon(thm3_cmd);
  auto* leaders_cmd = app.add_subcommand("leaders", "Leader SCC and spectral radius of each open-minded SCC");
  add_scenario(leaders_cmd);
  add_step(leaders_cmd);
  auto* fuzz_cmd = app.add_subcommand("fuzz", "Random scenarios: tau distribution and invariant checks");
  add_run_options(fuzz_cmd);
  fuzz_cmd->add_option("--seed", f.seed, "Seed of all randomness");
  fuzz_cmd->add_option("--count", f.count, "Number of scenarios")->check(CLI::PositiveNumber);
  fuzz_cmd->add_option("--jobs", f.jobs, "Worker threads (0 = hardware concurrency)");
  fuzz_cmd->add_option("--n-min", f.n_min, "Smallest number of agents");
  fuzz_cmd->add_option("--n-max", f.n_max, "Largest number of agents");

  std::vector<const char*> argv{"hthk"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "hthk: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    Output o(f, out, err);
    if (simulate_cmd->parsed()) return cmd_simulate(f, o);
    if (classify_cmd->parsed()) return cmd_classify(f, o);
    if (fvct_cmd->parsed()) return cmd_fvct(f, o);
    if (thm1_cmd->parsed()) return cmd_thm1(f, o);
    if (thm2_cmd->parsed()) return cmd_thm2(f, o);
    if (thm3_cmd->parsed()) return cmd_thm3(f, o);
    if (leaders_cmd->parsed()) return cmd_leaders(f, o);
    if (fuzz_cmd->parsed()) return cmd_fuzz(f, o);
  } catch (const std::exception& e) {
    err << "hthk: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace hthk::io
