#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "mfg/model.hpp"
#include "mfg/simplex_grid.hpp"

namespace mfg {

enum class Role { kMajor, kMinor };

const char* role_name(Role role);

/// Uniform time grid on [t0, T] with `steps` intervals (steps + 1 knots).
struct TimeGrid {
  double T = 1.0;
  int steps = 1;
  double t0 = 0.0;

  double h() const { return (T - t0) / steps; }
  double knot(int n) const { return n == steps ? T : t0 + n * h(); }
  int knots() const { return steps + 1; }
  /// Index of the step [t_n, t_{n+1}] containing t (clamped).
  int step_at(double t) const {
    if (!(T > t0)) return 0;
    const int n = static_cast<int>(std::floor((t - t0) / h()));
    return n < 0 ? 0 : (n >= steps ? steps - 1 : n);
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

/// Default step count max(100, 10 C T N): generator entries grow like N.
int default_time_steps(const ModelSpec& model, int N);

// Feedback functions in closed form. Action indices refer to the model's
// ActionSet ordering.
using MajorPolicy = std::function<std::size_t(double t, int i0, StateView x)>;
using MinorPolicy = std::function<std::size_t(double t, int i, int i0, StateView x)>;

MajorPolicy constant_major(std::size_t action);
MinorPolicy constant_minor(std::size_t action);

/// Index of a (state) tuple inside a table slice: major i0, minor i0 * M + i.
inline int state_index(Role role, int M, int i0, int i) {
  return role == Role::kMajor ? i0 : i0 * M + i;
}

/// A major or minor feedback function tabulated on (time knot, state(s), grid
/// point). Knot n + 1 governs the step [t_n, t_{n+1}]; knot 0 records the
/// minimizer at t = 0. Off-grid x uses the nearest node.
class FeedbackPolicy {
 public:
  FeedbackPolicy(Role role, TimeGrid time, std::shared_ptr<const SimplexGrid> grid, int M0,
                 ActionSet actions, std::size_t fill = 0);

  Role role() const { return role_; }
  const TimeGrid& time() const { return time_; }
  const SimplexGrid& grid() const { return *grid_; }
  std::shared_ptr<const SimplexGrid> grid_ptr() const { return grid_; }
  const ActionSet& actions() const { return actions_; }
  int M0() const { return M0_; }
  int M() const { return grid_->M(); }
  int n_states() const { return role_ == Role::kMajor ? M0_ : M0_ * M(); }
  std::size_t slice_size() const { return static_cast<std::size_t>(n_states()) * grid_->size(); }
  std::size_t size() const { return data_.size(); }

  std::size_t at(int knot, int state, std::size_t rank) const {
    return data_[knot * slice_size() + state * grid_->size() + rank];
  }
  void set(int knot, int state, std::size_t rank, std::size_t action) {
    data_[knot * slice_size() + state * grid_->size() + rank] = static_cast<std::uint16_t>(action);
  }
  std::span<const std::uint16_t> raw() const { return data_; }

  std::size_t major_action(double t, int i0, StateView x) const;
  std::size_t minor_action(double t, int i, int i0, StateView x) const;

  MajorPolicy major_fn() const;
  MinorPolicy minor_fn() const;

  /// Number of entries where the two policies differ (same shape required).
  std::size_t count_differences(const FeedbackPolicy& other) const;

 private:
  Role role_;
  TimeGrid time_;
  std::shared_ptr<const SimplexGrid> grid_;
  int M0_;
  ActionSet actions_;
  std::vector<std::uint16_t> data_;
};

// Callable wrappers returned by major_fn / minor_fn. Solvers recognize them
// and read the table directly when grids match.
struct TabulatedMajor {
  std::shared_ptr<const FeedbackPolicy> policy;
  std::size_t operator()(double t, int i0, StateView x) const { return policy->major_action(t, i0, x); }
};
struct TabulatedMinor {
  std::shared_ptr<const FeedbackPolicy> policy;
  std::size_t operator()(double t, int i, int i0, StateView x) const {
    return policy->minor_action(t, i, i0, x);
  }
};

/// Cost-to-go or value function on (time knot, state(s), grid point).
/// Serves as the N-player table (grid = P^N) and as the mean-field value grid
/// (grid = P^K with N := K).
class ValueTable {
 public:
  ValueTable(Role role, TimeGrid time, std::shared_ptr<const SimplexGrid> grid, int M0);

  Role role() const { return role_; }
  const TimeGrid& time() const { return time_; }
  const SimplexGrid& grid() const { return *grid_; }
  std::shared_ptr<const SimplexGrid> grid_ptr() const { return grid_; }
  int M0() const { return M0_; }
  int M() const { return grid_->M(); }
  int N() const { return grid_->K(); }
  int n_states() const { return role_ == Role::kMajor ? M0_ : M0_ * M(); }
  std::size_t slice_size() const { return static_cast<std::size_t>(n_states()) * grid_->size(); }

  std::span<double> slice(int knot) { return {data_.data() + knot * slice_size(), slice_size()}; }
  std::span<const double> slice(int knot) const {
    return {data_.data() + knot * slice_size(), slice_size()};
  }
  double at(int knot, int state, std::size_t rank) const {
    return data_[knot * slice_size() + state * grid_->size() + rank];
  }
  double& at(int knot, int state, std::size_t rank) {
    return data_[knot * slice_size() + state * grid_->size() + rank];
  }
  std::span<const double> raw() const { return data_; }
  std::span<double> raw() { return data_; }

  /// Off-grid evaluation at a knot via `interpolate`.
  double value(int knot, int state, StateView x) const;

  double sup_abs() const;

  // Bound ||g||_inf + T ||f||_inf, recorded by the solver from the cost values
  // it actually evaluated.
  double bound = 0.0;

 private:
  Role role_;
  TimeGrid time_;
  std::shared_ptr<const SimplexGrid> grid_;
  int M0_;
  std::vector<double> data_;
};

}  // namespace mfg
