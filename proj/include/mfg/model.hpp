#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace mfg {

// States are 0-based in code (state 0 is the paper's state 1). The empirical
// measure is carried as its first M-1 coordinates; x_M = 1 - sum(x) is derived.
using ActionView = std::span<const double>;
using StateView = std::span<const double>;
using Action = std::vector<double>;

/// Finite, lexicographically ordered set of action points.
///
/// The order is fixed at construction, so "lexicographic-first" tie-breaking
/// by index is deterministic. Duplicates and empty sets are rejected.
class ActionSet {
 public:
  ActionSet() = default;
  explicit ActionSet(std::vector<Action> points);
  static ActionSet scalars(std::vector<double> values);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  std::size_t dim() const { return points_.empty() ? 0 : points_.front().size(); }
  ActionView operator[](std::size_t k) const { return points_[k]; }
  const std::vector<Action>& points() const { return points_; }

  friend bool operator==(const ActionSet&, const ActionSet&) = default;

 private:
  std::vector<Action> points_;
};

// Model plug-in signatures. Diagonal rates q(i,i) must be supplied too
// (rows are Q-matrices).
using MajorRate =
    std::function<double(double t, int i0, int j0, ActionView a0, StateView x)>;
using MinorRate = std::function<double(double t, int i, int j, ActionView a,
                                       int i0, ActionView a0, StateView x)>;
using MajorRunningCost =
    std::function<double(double t, int i0, ActionView a0, StateView x)>;
using MinorRunningCost = std::function<double(
    double t, int i, ActionView a, int i0, ActionView a0, StateView x)>;
using MajorTerminalCost = std::function<double(int i0, StateView x)>;
using MinorTerminalCost = std::function<double(int i, int i0, StateView x)>;

using ParamMap = std::map<std::string, double>;

struct ModelSpec {
  std::string name;
  ParamMap params;  // echo of the parameters a builtin was built from

  int M0 = 0;  // major states
  int M = 0;   // minor states
  double T = 1.0;
  ActionSet A0;
  ActionSet A;

  MajorRate q0;
  MinorRate q;
  MajorRunningCost f0;
  MinorRunningCost f;
  MajorTerminalCost g0;
  MinorTerminalCost g;

  double rate_bound = 1.0;      // C: |q|, |q0| <= C
  double extinction_eps = 0.0;  // 0 disables the extinction check
  bool alpha0_free = false;     // q and f ignore the major action
};

/// Wraps off-diagonal rate functions so that the diagonal entry is minus the
/// row sum of the off-diagonal entries.
MajorRate with_major_diagonal(MajorRate off_diagonal, int M0);
MinorRate with_minor_diagonal(MinorRate off_diagonal, int M);

/// Copy of `model` with g0 + delta0 and g + delta (used by monotonicity checks).
ModelSpec with_terminal_shift(const ModelSpec& model,
                              std::function<double(int, StateView)> delta0,
                              std::function<double(int, int, StateView)> delta);

// ---------------------------------------------------------------------------
// Hypothesis validation

enum class ViolationKind {
  kRowSumNonzero,
  kNegativeOffDiagonal,
  kRateBoundExceeded,
  kExtinctionViolated,
  kAlpha0DependenceDetected,
};

const char* violation_name(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string function;  // "q0", "q" or "f"
  double t = 0.0;
  int i = -1;  // row state (major state for q0)
  int j = -1;  // column state
  int i0 = -1;
  int action = -1;   // minor action index (or major action index for q0)
  int action0 = -1;  // major action index
  std::vector<double> x;
  double value = 0.0;

  std::string describe() const;
};

struct SamplePlan {
  int time_points = 5;       // uniform in [0, T]
  int grid_resolution = 6;   // all points of P^K with K = grid_resolution
  int random_points = 32;    // additional uniform points of P
  std::uint64_t seed = 12345;
  double row_sum_tol = 1e-12;
  std::size_t max_reported = 200;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::size_t points_checked = 0;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_rates(const ModelSpec& model, const SamplePlan& plan = {});

/// e_ij = 1[j != M] e_j - 1[i != M] e_i in R^{M-1}, states 0-based.
std::vector<int> e_shift(int i, int j, int M);

// ---------------------------------------------------------------------------
// Builtin models

std::vector<std::string> builtin_names();
ParamMap builtin_defaults(const std::string& name);

/// Builds a builtin model without running validate_rates.
ModelSpec build_builtin(const std::string& name, const ParamMap& overrides = {});

/// Builds and validates a builtin model. Unknown names throw kUnknownModel;
/// unknown keys or parameters producing an invalid model throw kBadParameter.
/// The key "T" overrides the horizon for every builtin.
ModelSpec load_builtin(const std::string& name, const ParamMap& overrides = {});

}  // namespace mfg
