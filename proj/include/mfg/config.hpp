#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfg/model.hpp"

namespace mfg {

// Policies fed to commands that need fixed opponents (solve-hjb, simulate,
// chaos-study). "constant" uses the action indices below; "equilibrium" and
// "master" solve for them first on the grid section's K. Indices are 0-based
// positions in the model's action sets.
struct PolicyConfig {
  std::string kind = "constant";
  int major = 0;
  int minor = 0;
  std::optional<int> deviant;  // constant policy of player 1

  friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

struct RunConfig {
  // model
  std::string model = "two_two";
  ParamMap params;
  std::optional<double> horizon;
  // grid
  int K = 16;
  int time_steps = 0;  // 0: default per solve
  // solver
  double damping = 0.5;
  double tol = 0.0;
  int max_iter = 50;
  // simulation; states 1-based as in the CSV files
  std::size_t n_paths = 1000;
  std::uint64_t seed = 1;
  std::string mode = "nplayer";  // nplayer | pair | triple
  int N = 8;
  int i0 = 1;
  int i = 1;
  std::vector<double> x;  // empty: uniform over the minor states, rounded to P^N
  bool record_paths = false;
  // study
  std::vector<int> N_list{4, 8, 16, 32};
  int K_ref = 128;
  std::string study = "cost";        // cost | value
  std::string reference = "plain";   // plain | richardson
  // solve-hjb
  std::string role = "major";
  PolicyConfig policy;
  // output
  std::string out_dir = "mfg_out";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses and validates a JSON document. Unknown keys and out-of-range values
/// throw Error(kConfigError) naming the field.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Canonical JSON echo; parse_config(config_to_json(c)) == c.
std::string config_to_json(const RunConfig& config, int indent = 2);

/// Model the config selects (horizon override applied), not yet validated.
ModelSpec config_model(const RunConfig& config);

}  // namespace mfg
