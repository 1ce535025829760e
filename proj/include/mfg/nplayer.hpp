#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mfg/generator.hpp"
#include "mfg/model.hpp"
#include "mfg/simplex_grid.hpp"
#include "mfg/tables.hpp"

namespace mfg {

std::shared_ptr<const SimplexGrid> make_grid(int M, int N);

/// Jump part of the (N+1)-player generator applied to one table slice F at
/// time t: major-pair rows (i0, x) or minor-triple rows (i0, i, x).
std::vector<double> apply_generator(const ModelSpec& model, Role role,
                                    const PolicyProfile& profile,
                                    std::span<const double> F, double t,
                                    const SimplexGrid& grid);

struct BackwardResult {
  ValueTable values;
  std::optional<FeedbackPolicy> policy;  // argmin table (value solves only)
  std::size_t ties = 0;                  // argmin evaluations with a tie
};

/// Backward RK4 solve on `time`. With `optimize`, the role's own action is
/// the Hamiltonian argmin of the slice at the end of each step, held over the
/// step; otherwise the profile's action is used. `terminal` defaults to the
/// terminal cost.
BackwardResult solve_backward(const ModelSpec& model, Role role,
                              const PolicyProfile& profile,
                              std::shared_ptr<const SimplexGrid> grid,
                              TimeGrid time, bool optimize,
                              std::span<const double> terminal = {});

/// Expected cost J^{0,N} (major) or J^N (tagged minor) of the profile.
/// time_steps = 0 picks the default.
ValueTable solve_cost_ode(const ModelSpec& model, Role role,
                          const PolicyProfile& profile, int N, int time_steps = 0);

/// Value V^{0,N} (major, minors play profile.minor) or V^N (tagged minor
/// against profile.major / profile.minor) with its argmin policy.
BackwardResult solve_value_ode(const ModelSpec& model, Role role,
                               const PolicyProfile& profile, int N,
                               int time_steps = 0);

/// max over knots, states, x and k != l of N |F(x + e_kl / N) - F(x)|.
/// Policy the value solver would record from `table`: per step, the step
/// argmin against the profile's opponents, read off the table's own slices.
FeedbackPolicy argmin_policy(const ModelSpec& model, Role role, const PolicyProfile& profile,
                             const ValueTable& table, std::size_t* ties = nullptr);

double discrete_gradient(const ValueTable& table);

// ---------------------------------------------------------------------------
// Event-driven simulation of the (N+1)-player game.

struct InitialState {
  int i0 = 0;
  int i = 0;               // tagged minor player's state
  std::vector<double> x;   // empirical measure of all N minors (tagged included)
};

struct SimulationOptions {
  int N = 2;
  std::size_t n_paths = 1000;
  std::uint64_t seed = 0;
  double t0 = 0.0;
  bool record_paths = false;
};

struct JumpEvent {
  double t = 0.0;
  int who = -1;  // -1 major, 0 tagged minor, 1 another minor
  int from = 0;
  int to = 0;
  int i0 = 0;           // states after the jump
  int i = 0;
  std::size_t rank = 0;
};

struct PathRecord {
  std::uint64_t seed = 0;
  int i0 = 0;            // initial states
  int i = 0;
  std::size_t rank = 0;
  std::vector<JumpEvent> jumps;
  // Per class: major, tagged minor, average of the other N - 1 minors.
  double running[3] = {0.0, 0.0, 0.0};
  double terminal[3] = {0.0, 0.0, 0.0};
};

struct CostStats {
  double mean = 0.0;
  double se = 0.0;
};

CostStats mean_and_se(std::span<const double> samples);

struct SimulationResult {
  std::vector<PathRecord> paths;  // only with record_paths
  // Per path, in path order.
  std::vector<double> major_cost;
  std::vector<double> tagged_cost;
  std::vector<double> others_cost;
  std::vector<int> final_i0;
  std::vector<int> final_i;
  std::vector<std::size_t> final_rank;
  std::vector<std::size_t> jump_count;
  CostStats major;
  CostStats tagged;
  CostStats others;
};

SimulationResult simulate_paths(const ModelSpec& model, const PolicyProfile& profile,
                                const InitialState& init, const SimulationOptions& opts);

// ---------------------------------------------------------------------------
// Product-chain oracle over (X^0, X^1, ..., X^N); X^1 is the tagged player.

constexpr std::size_t kOracleCap = 4096;

struct ProductSpace {
  int M0 = 0;
  int M = 0;
  int N = 0;
  std::size_t size = 0;

  ProductSpace(const ModelSpec& model, int N);
  /// index = i0 + M0 * (s_1 + M * (s_2 + ...)).
  std::size_t encode(int i0, std::span<const int> players) const;
  void decode(std::size_t index, int& i0, std::vector<int>& players) const;
  /// Counts of states 1..M-1 (0-based 0..M-2) over all N players.
  std::vector<int> counts(std::span<const int> players) const;
};

struct OracleCosts {
  // Expected cost from every product state, per player (0 major, 1..N minors).
  std::vector<std::vector<double>> by_player;
};

/// Expected costs by backward Kolmogorov equations on the full product chain
/// (adaptive Dormand-Prince, tolerance 1e-12).
OracleCosts oracle_cost_table(const ModelSpec& model, const PolicyProfile& profile, int N,
                              double t0);

/// Per-player expected costs from one product state.
std::vector<double> oracle_expected_cost(const ModelSpec& model, const PolicyProfile& profile,
                                         int N, double t0, int i0, std::span<const int> players);

/// Law of the product state at T started from one product state at t0.
std::vector<double> oracle_terminal_law(const ModelSpec& model, const PolicyProfile& profile,
                                        int N, double t0, int i0, std::span<const int> players);

/// Dense product generator at time t, row-major, size^2 entries.
std::vector<double> product_generator(const ModelSpec& model, const PolicyProfile& profile,
                                      int N, double t);

}  // namespace mfg
