#include "mfg/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mfg/error.hpp"

namespace mfg {

namespace {

using json = nlohmann::json;

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string x_header(int M) {
  std::string h;
  for (int c = 1; c < M; ++c) h += ",x_" + std::to_string(c);
  return h;
}

void put_x(std::ostringstream& out, StateView x) {
  for (double v : x) out << ',' << fmt17(v);
}

std::string states_header(Role role) { return role == Role::kMajor ? "t,i0" : "t,i0,i"; }

void put_states(std::ostringstream& out, Role role, int M, int s) {
  if (role == Role::kMajor) {
    out << s + 1;
  } else {
    out << s / M + 1 << ',' << s % M + 1;
  }
}

}  // namespace

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(Errc::kIoError, "cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::kIoError, "cannot open '" + path.string() + "' for writing");
  out << content;
  out.close();
  if (!out) throw Error(Errc::kIoError, "write to '" + path.string() + "' failed");
}

std::string value_csv(const ValueTable& table) {
  std::ostringstream out;
  const SimplexGrid& grid = table.grid();
  out << states_header(table.role()) << x_header(table.M()) << ",value\n";
  for (int n = 0; n < table.time().knots(); ++n) {
    const std::string t = fmt17(table.time().knot(n));
    for (int s = 0; s < table.n_states(); ++s) {
      for (std::size_t r = 0; r < grid.size(); ++r) {
        out << t << ',';
        put_states(out, table.role(), table.M(), s);
        put_x(out, grid.point(r));
        out << ',' << fmt17(table.at(n, s, r)) << '\n';
      }
    }
  }
  return out.str();
}

std::string policy_csv(const FeedbackPolicy& policy) {
  std::ostringstream out;
  const SimplexGrid& grid = policy.grid();
  out << states_header(policy.role()) << x_header(policy.M()) << ",action_index\n";
  for (int n = 0; n < policy.time().knots(); ++n) {
    const std::string t = fmt17(policy.time().knot(n));
    for (int s = 0; s < policy.n_states(); ++s) {
      for (std::size_t r = 0; r < grid.size(); ++r) {
        out << t << ',';
        put_states(out, policy.role(), policy.M(), s);
        put_x(out, grid.point(r));
        out << ',' << policy.at(n, s, r) << '\n';
      }
    }
  }
  return out.str();
}

std::string residuals_csv(const std::vector<IterationRecord>& history) {
  std::ostringstream out;
  out << "iteration,changed_fraction,eps_major,eps_minor\n";
  for (const auto& h : history) {
    out << h.iteration << ',' << fmt17(h.changed_fraction) << ',' << fmt17(h.eps.major) << ','
        << fmt17(h.eps.minor) << '\n';
  }
  return out.str();
}

std::string study_csv(const StudyResult& study) {
  std::ostringstream out;
  out << "N,error_major,error_minor\n";
  for (std::size_t k = 0; k < study.N_list.size(); ++k) {
    out << study.N_list[k] << ',' << fmt17(study.error_major[k]) << ',' << fmt17(study.error_minor[k]) << '\n';
  }
  return out.str();
}

std::string study_json(const StudyResult& study) {
  auto fit = [](const LogLogFit& f) {
    return json{{"slope", num(f.slope)}, {"intercept", num(f.intercept)}, {"defined", f.defined}};
  };
  const auto& c = study.config;
  json doc = {
      {"major", fit(study.fit_major)},
      {"minor", fit(study.fit_minor)},
      {"runtime_s", study.runtime_s},
      {"config",
       {{"N_list", c.N_list},
        {"K_ref", c.K_ref},
        {"time_steps", c.time_steps},
        {"reference", c.reference == Reference::kPlain ? "plain" : "richardson"}}},
  };
  return doc.dump(2) + "\n";
}

std::string violations_csv(const ValidationReport& report, int M) {
  std::ostringstream out;
  out << "kind,function,t,i,j,i0,action,action0" << x_header(M) << ",value\n";
  for (const auto& v : report.violations) {
    auto st = [](int k) { return k < 0 ? std::string() : std::to_string(k + 1); };
    auto ac = [](int k) { return k < 0 ? std::string() : std::to_string(k); };
    out << violation_name(v.kind) << ',' << v.function << ',' << fmt17(v.t) << ',' << st(v.i) << ','
        << st(v.j) << ',' << st(v.i0) << ',' << ac(v.action) << ',' << ac(v.action0);
    for (int c = 0; c < M - 1; ++c) out << ',' << (c < static_cast<int>(v.x.size()) ? fmt17(v.x[c]) : "");
    out << ',' << fmt17(v.value) << '\n';
  }
  return out.str();
}

std::string pdmp_csv(const PdmpResult& result, PdmpMode mode, int M) {
  std::ostringstream out;
  out << (mode == PdmpMode::kPair ? "path,t,i0" : "path,t,i0,i") << x_header(M) << '\n';
  for (std::size_t p = 0; p < result.paths.size(); ++p) {
    const auto& path = result.paths[p];
    for (std::size_t k = 0; k < path.times.size(); ++k) {
      out << p << ',' << fmt17(path.times[k]) << ',' << path.i0[k] + 1;
      if (mode == PdmpMode::kTriple) out << ',' << path.i[k] + 1;
      put_x(out, path.x[k]);
      out << '\n';
    }
  }
  return out.str();
}

std::string nplayer_csv(const SimulationResult& result, int M, int N) {
  const SimplexGrid grid(M, N);
  std::ostringstream out;
  out << "path,major_cost,tagged_cost,others_cost,jumps,final_i0,final_i" << x_header(M) << '\n';
  for (std::size_t p = 0; p < result.major_cost.size(); ++p) {
    out << p << ',' << fmt17(result.major_cost[p]) << ',' << fmt17(result.tagged_cost[p]) << ','
        << fmt17(result.others_cost[p]) << ',' << result.jump_count[p] << ',' << result.final_i0[p] + 1 << ','
        << result.final_i[p] + 1;
    put_x(out, grid.point(result.final_rank[p]));
    out << '\n';
  }
  return out.str();
}

std::string cost_json(const CostStats& stats, std::size_t n_paths, std::uint64_t seed) {
  json doc = {{"mean", num(stats.mean)}, {"se", num(stats.se)}, {"n_paths", n_paths}, {"seed", seed}};
  return doc.dump(2) + "\n";
}

namespace {

void write_tables(const ValueTable& V0, const ValueTable& V, const FeedbackPolicy& phi0,
                  const FeedbackPolicy& phi, const std::filesystem::path& dir) {
  write_file(dir / "value_major.csv", value_csv(V0));
  write_file(dir / "value_minor.csv", value_csv(V));
  write_file(dir / "policy_major.csv", policy_csv(phi0));
  write_file(dir / "policy_minor.csv", policy_csv(phi));
}

}  // namespace

void write_results(const MasterSolution& sol, const std::string& model_name,
                   const std::filesystem::path& dir) {
  write_tables(sol.V0, sol.V, sol.phi0, sol.phi, dir);
  json doc = {{"model", model_name},
              {"K", sol.V0.N()},
              {"time_steps", sol.V0.time().steps},
              {"tolerances", {{"tie", kTieTolerance}, {"integration", kIntegrationTol}}},
              {"tie_count", sol.ties},
              {"refreshed_steps", sol.refreshes}};
  write_file(dir / "master.json", doc.dump(2) + "\n");
}

void write_results(const EquilibriumResult& res, const std::string& model_name,
                   const std::filesystem::path& dir) {
  write_tables(res.V0, res.V, res.phi0, res.phi, dir);
  write_file(dir / "residuals.csv", residuals_csv(res.history));
  json doc = {{"model", model_name},
              {"K", res.V0.N()},
              {"time_steps", res.V0.time().steps},
              {"tolerances", {{"tie", kTieTolerance}, {"integration", kIntegrationTol}}},
              {"iterations", res.iterations},
              {"converged", res.converged},
              {"exploitability", {{"major", num(res.exploitability.major)}, {"minor", num(res.exploitability.minor)}}}};
  write_file(dir / "equilibrium.json", doc.dump(2) + "\n");
}

void write_results(const StudyResult& study, const std::filesystem::path& dir) {
  write_file(dir / "study.csv", study_csv(study));
  write_file(dir / "study.json", study_json(study));
}

}  // namespace mfg
