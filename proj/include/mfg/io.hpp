#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "mfg/chaos.hpp"
#include "mfg/equilibrium.hpp"
#include "mfg/hjb.hpp"
#include "mfg/meanfield.hpp"
#include "mfg/nplayer.hpp"

namespace mfg {

// Numbers are written with 17 significant digits; states are 1-based.
std::string fmt17(double v);

void write_file(const std::filesystem::path& path, const std::string& content);

// t, i0[, i], x_1..x_{M-1}, value
std::string value_csv(const ValueTable& table);
// t, i0[, i], x_1..x_{M-1}, action_index
std::string policy_csv(const FeedbackPolicy& policy);
// iteration, changed_fraction, eps_major, eps_minor
std::string residuals_csv(const std::vector<IterationRecord>& history);
// N, error_major, error_minor
std::string study_csv(const StudyResult& study);
std::string study_json(const StudyResult& study);
// kind, function, t, i, j, i0, action, action0, x_1..x_{M-1}, value
std::string violations_csv(const ValidationReport& report, int M);
// path, t, i0[, i], x_1..x_{M-1} on the output grid and at jump epochs
std::string pdmp_csv(const PdmpResult& result, PdmpMode mode, int M);
// path, major_cost, tagged_cost, others_cost, jumps, final_i0, final_i, final x
std::string nplayer_csv(const SimulationResult& result, int M, int N);
// {mean, se, n_paths, seed}
std::string cost_json(const CostStats& stats, std::size_t n_paths, std::uint64_t seed);

/// value_{major,minor}.csv, policy_{major,minor}.csv and master.json.
void write_results(const MasterSolution& sol, const std::string& model_name,
                   const std::filesystem::path& dir);
/// The master layout plus residuals.csv; equilibrium.json replaces master.json.
void write_results(const EquilibriumResult& res, const std::string& model_name,
                   const std::filesystem::path& dir);
/// study.csv and study.json.
void write_results(const StudyResult& study, const std::filesystem::path& dir);

}  // namespace mfg
