#include "mfg/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mfg/chaos.hpp"
#include "mfg/equilibrium.hpp"
#include "mfg/error.hpp"
#include "mfg/hjb.hpp"
#include "mfg/io.hpp"
#include "mfg/meanfield.hpp"
#include "mfg/parallel.hpp"

#ifndef MFG_VERSION
#define MFG_VERSION "dev"
#endif

namespace mfg {

const char* code_version() { return MFG_VERSION; }

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

int exit_for(Errc code) {
  switch (code) {
    case Errc::kConfigError:
    case Errc::kBadParameter:
    case Errc::kUnknownModel:
    case Errc::kOutOfSimplex:
    case Errc::kInfeasibleN:
    case Errc::kInvalidShift:
    case Errc::kGridTooLarge:
    case Errc::kOracleTooLarge:
    case Errc::kNoActions:
      return kExitConfig;
    case Errc::kUnstableIntegration:
    case Errc::kConsistencyFailure:
      return kExitNonConvergence;
    case Errc::kRateBoundViolation:
    case Errc::kFlowLeftSimplex:
      return kExitValidation;
    case Errc::kIoError:
    case Errc::kIndexBug:
      return kExitFailure;
  }
  return kExitFailure;
}

std::size_t checked_action(int k, const ActionSet& set, const char* field) {
  if (k < 0 || static_cast<std::size_t>(k) >= set.size()) {
    throw Error(Errc::kConfigError, std::string("field '") + field + "': action index " + std::to_string(k) +
                                        " outside the action set of size " + std::to_string(set.size()));
  }
  return static_cast<std::size_t>(k);
}

PolicyProfile make_profile(const RunConfig& cfg, const ModelSpec& model, std::ostream& log, bool verbose) {
  PolicyProfile prof;
  const auto& p = cfg.policy;
  if (p.kind == "constant") {
    prof = constant_profile(checked_action(p.major, model.A0, "policy.major"),
                            checked_action(p.minor, model.A, "policy.minor"));
  } else if (p.kind == "equilibrium") {
    EquilibriumOptions o;
    o.K = cfg.K;
    o.time_steps = cfg.time_steps;
    o.damping = cfg.damping;
    o.tol = cfg.tol;
    o.max_iter = cfg.max_iter;
    const auto eq = solve_equilibrium(model, o);
    if (verbose) log << "policy: equilibrium after " << eq.iterations << " iterations, converged=" << eq.converged << "\n";
    prof = tabulated_profile(eq.phi0, eq.phi);
  } else {
    const auto sol = solve_master(model, cfg.K, cfg.time_steps);
    prof = tabulated_profile(sol.phi0, sol.phi);
  }
  if (p.deviant) prof.deviant = constant_minor(checked_action(*p.deviant, model.A, "policy.deviant"));
  return prof;
}

InitialState make_initial(const RunConfig& cfg, const ModelSpec& model, int N) {
  if (cfg.i0 > model.M0) throw Error(Errc::kConfigError, "field 'simulation.initial.i0': exceeds M0");
  if (cfg.i > model.M) throw Error(Errc::kConfigError, "field 'simulation.initial.i': exceeds M");
  InitialState init{cfg.i0 - 1, cfg.i - 1, cfg.x};
  if (init.x.empty()) {
    // spread the minors evenly; the last state takes the remainder
    init.x.assign(model.M - 1, 0.0);
    for (int c = 0; c < model.M - 1; ++c) init.x[c] = static_cast<double>(N / model.M) / N;
  }
  if (static_cast<int>(init.x.size()) != model.M - 1) {
    throw Error(Errc::kConfigError, "field 'simulation.initial.x': needs M-1 = " + std::to_string(model.M - 1) + " entries");
  }
  return init;
}

void write_jumps(const SimulationResult& res, const fs::path& path) {
  std::ostringstream out;
  out << "path,t,who,from,to\n";
  for (std::size_t p = 0; p < res.paths.size(); ++p) {
    for (const auto& j : res.paths[p].jumps) {
      const char* who = j.who == -1 ? "major" : (j.who == 0 ? "tagged" : "other");
      out << p << ',' << fmt17(j.t) << ',' << who << ',' << j.from + 1 << ',' << j.to + 1 << '\n';
    }
  }
  write_file(path, out.str());
}

std::string pdmp_costs_csv(const PdmpResult& res, PdmpMode mode) {
  std::ostringstream out;
  out << (mode == PdmpMode::kPair ? "path,major_cost,final_i0" : "path,major_cost,tagged_cost,final_i0");
  const std::size_t d = res.final_x.empty() ? 0 : res.final_x[0].size();
  for (std::size_t c = 1; c <= d; ++c) out << ",x_" << c;
  out << '\n';
  for (std::size_t p = 0; p < res.major_cost.size(); ++p) {
    out << p << ',' << fmt17(res.major_cost[p]);
    if (mode == PdmpMode::kTriple) out << ',' << fmt17(res.tagged_cost[p]);
    out << ',' << res.final_i0[p] + 1;
    for (double v : res.final_x[p]) out << ',' << fmt17(v);
    out << '\n';
  }
  return out.str();
}

json stats_json(const CostStats& s) { return {{"mean", s.mean}, {"se", s.se}}; }

int dispatch(const std::string& command, const RunConfig& cfg, const fs::path& out, bool verbose,
             std::ostream& log) {
  const ModelSpec model = config_model(cfg);
  const auto report = validate_rates(model);
  if (command == "validate" || !report.ok()) {
    write_file(out / "violations.csv", violations_csv(report, model.M));
    json doc = {{"model", model.name}, {"ok", report.ok()}, {"points_checked", report.points_checked},
                {"violations", report.violations.size()}};
    write_file(out / "validation.json", doc.dump(2) + "\n");
    if (!report.ok()) {
      log << "model validation failed: " << report.violations.front().describe() << "\n";
      return kExitValidation;
    }
    return kExitOk;
  }

  if (command == "solve-hjb") {
    const Role role = cfg.role == "major" ? Role::kMajor : Role::kMinor;
    const auto res = solve_hjb(model, role, make_profile(cfg, model, log, verbose), cfg.K, cfg.time_steps);
    write_file(out / "value.csv", value_csv(res.values));
    write_file(out / "policy.csv", policy_csv(*res.policy));
    json doc = {{"model", model.name}, {"role", cfg.role}, {"K", cfg.K}, {"time_steps", res.values.time().steps},
                {"tie_count", res.ties}, {"bound", res.values.bound}};
    write_file(out / "hjb.json", doc.dump(2) + "\n");
    return kExitOk;
  }
  if (command == "master") {
    write_results(solve_master(model, cfg.K, cfg.time_steps), model.name, out);
    return kExitOk;
  }
  if (command == "equilibrium") {
    EquilibriumOptions o;
    o.K = cfg.K;
    o.time_steps = cfg.time_steps;
    o.damping = cfg.damping;
    o.tol = cfg.tol;
    o.max_iter = cfg.max_iter;
    const auto res = solve_equilibrium(model, o);
    write_results(res, model.name, out);
    if (verbose) log << "equilibrium: " << res.iterations << " iterations, converged=" << res.converged << "\n";
    return res.converged ? kExitOk : kExitNonConvergence;
  }
  if (command == "simulate") {
    const PolicyProfile prof = make_profile(cfg, model, log, verbose);
    if (cfg.mode == "nplayer") {
      SimulationOptions o;
      o.N = cfg.N;
      o.n_paths = cfg.n_paths;
      o.seed = cfg.seed;
      o.record_paths = cfg.record_paths;
      const auto res = simulate_paths(model, prof, make_initial(cfg, model, cfg.N), o);
      write_file(out / "costs.csv", nplayer_csv(res, model.M, cfg.N));
      if (cfg.record_paths) write_jumps(res, out / "jumps.csv");
      json doc = {{"major", stats_json(res.major)}, {"tagged", stats_json(res.tagged)},
                  {"others", stats_json(res.others)}, {"n_paths", cfg.n_paths}, {"seed", cfg.seed}, {"N", cfg.N}};
      write_file(out / "summary.json", doc.dump(2) + "\n");
    } else {
      const PdmpMode mode = cfg.mode == "pair" ? PdmpMode::kPair : PdmpMode::kTriple;
      PdmpOptions o;
      o.n_paths = cfg.n_paths;
      o.seed = cfg.seed;
      o.record_paths = cfg.record_paths;
      const auto res = simulate_pdmp(model, mode, prof, make_initial(cfg, model, cfg.N), o);
      write_file(out / "costs.csv", pdmp_costs_csv(res, mode));
      if (cfg.record_paths) write_file(out / "paths.csv", pdmp_csv(res, mode, model.M));
      write_file(out / "summary.json",
                 cost_json(mode == PdmpMode::kPair ? res.major : res.tagged, cfg.n_paths, cfg.seed));
    }
    return kExitOk;
  }
  if (command == "chaos-study") {
    StudyOptions o;
    o.N_list = cfg.N_list;
    o.K_ref = cfg.K_ref;
    o.time_steps = cfg.time_steps;
    o.reference = cfg.reference == "plain" ? Reference::kPlain : Reference::kRichardson;
    const PolicyProfile prof = make_profile(cfg, model, log, verbose);
    const auto study = cfg.study == "cost" ? cost_convergence_study(model, prof, o)
                                           : value_convergence_study(model, prof, o);
    write_results(study, out);
    return kExitOk;
  }
  throw Error(Errc::kConfigError, "unknown command '" + command + "'");
}

}  // namespace

int run_command(const std::string& command, const RunConfig& config, const std::string& out_dir,
                bool verbose, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path out(out_dir);
  int status = kExitOk;
  std::string message;
  try {
    status = dispatch(command, config, out, verbose, log);
  } catch (const Error& e) {
    status = exit_for(e.code());
    message = e.what();
  } catch (const std::exception& e) {
    status = kExitFailure;
    message = e.what();
  }
  if (!message.empty()) log << "error: " << message << "\n";

  json manifest = {{"command", command},
                   {"config", json::parse(config_to_json(config))},
                   {"code_version", code_version()},
                   {"wall_time_s", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()},
                   {"threads", max_threads()},
                   {"exit_code", status}};
  if (!message.empty()) manifest["error"] = message;
  try {
    write_file(out / "manifest.json", manifest.dump(2) + "\n");
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    if (status == kExitOk) status = kExitFailure;
  }
  return status;
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Finite-state mean field games with a major player"};
  std::string command, config_path, out_dir;
  int threads = 0;
  bool verbose = false;
  app.add_option("command", command, "solve-hjb | master | equilibrium | simulate | chaos-study | validate")
      ->required()
      ->check(CLI::IsMember({"solve-hjb", "master", "equilibrium", "simulate", "chaos-study", "validate"}));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker thread cap")->check(CLI::PositiveNumber);
  app.add_flag("--verbose", verbose, "progress on stderr");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitConfig;
  }

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (out_dir.empty()) {
    if (const char* env = std::getenv("MFG_OUT_DIR"); env && *env) out_dir = env;
  }
  if (out_dir.empty()) out_dir = cfg.out_dir;
  if (threads > 0) set_threads(threads);
  return run_command(command, cfg, out_dir, verbose, std::cerr);
}

}  // namespace mfg
