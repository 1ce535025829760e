#include "mfg/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfg/error.hpp"

namespace mfg {

BackwardResult solve_hjb(const ModelSpec& model, Role role, const PolicyProfile& profile, int K,
                         int time_steps) {
  if (K < 2) throw Error(Errc::kBadParameter, "K must be >= 2");
  return solve_value_ode(model, role, profile, K, time_steps);
}

PolicyProfile tabulated_profile(const FeedbackPolicy& phi0, const FeedbackPolicy& phi) {
  return {phi0.major_fn(), phi.minor_fn(), nullptr};
}

namespace {

struct MasterStep {
  const ModelSpec& model;
  const SimplexGrid& grid;
  double t1;
  double h;
  std::span<const double> v0_next;
  std::span<const double> v_next;
  double* f0_sup;
  double* f_sup;

  // Each role's step argmin given the other's frozen actions in `in`.
  StepActions refresh(const StepActions& in, std::size_t* ties) const {
    StepActions major{in.major, in.minor, {}};
    const std::size_t t0 = step_argmin(model, Role::kMajor, grid, major, t1, h, v0_next, f0_sup);
    StepActions minor{in.major, in.minor, in.minor};
    const std::size_t t1_ = step_argmin(model, Role::kMinor, grid, minor, t1, h, v_next, f_sup);
    if (ties) *ties = t0 + t1_;
    return {std::move(major.major), std::move(minor.deviant), {}};
  }
};

constexpr int kMaxRefresh = 50;

void store(const StepActions& acts, FeedbackPolicy& phi0, FeedbackPolicy& phi, int knot) {
  const std::size_t G = phi0.grid().size();
  for (std::size_t row = 0; row < acts.major.size(); ++row) phi0.set(knot, static_cast<int>(row / G), row % G, acts.major[row]);
  for (std::size_t row = 0; row < acts.minor.size(); ++row) phi.set(knot, static_cast<int>(row / G), row % G, acts.minor[row]);
}

bool matches(const StepActions& acts, const FeedbackPolicy& phi0, const FeedbackPolicy& phi, int knot) {
  const std::size_t G = phi0.grid().size();
  for (std::size_t row = 0; row < acts.major.size(); ++row) {
    if (phi0.at(knot, static_cast<int>(row / G), row % G) != acts.major[row]) return false;
  }
  for (std::size_t row = 0; row < acts.minor.size(); ++row) {
    if (phi.at(knot, static_cast<int>(row / G), row % G) != acts.minor[row]) return false;
  }
  return true;
}

StepActions read_knot(const FeedbackPolicy& phi0, const FeedbackPolicy& phi, int knot) {
  StepActions acts;
  const std::size_t G = phi0.grid().size();
  acts.major.resize(phi0.slice_size());
  acts.minor.resize(phi.slice_size());
  for (std::size_t row = 0; row < acts.major.size(); ++row) {
    acts.major[row] = static_cast<std::uint16_t>(phi0.at(knot, static_cast<int>(row / G), row % G));
  }
  for (std::size_t row = 0; row < acts.minor.size(); ++row) {
    acts.minor[row] = static_cast<std::uint16_t>(phi.at(knot, static_cast<int>(row / G), row % G));
  }
  return acts;
}

// Argmins of both roles at one knot, minor first (its bracket ignores a0).
StepActions knot_argmin(const ModelSpec& model, const SimplexGrid& grid, double t,
                        std::span<const double> v0, std::span<const double> v, std::size_t* ties) {
  StepActions acts;
  acts.major.assign(v0.size(), 0);
  acts.minor.assign(v.size(), 0);
  std::size_t n = argmin_slice(model, Role::kMinor, grid, t, v, acts);
  acts.minor = acts.deviant;
  n += argmin_slice(model, Role::kMajor, grid, t, v0, acts);
  acts.deviant.clear();
  if (ties) *ties += n;
  return acts;
}

void check_stable(std::span<const double> slice, double bound, int steps, double t) {
  const double limit = 10.0 * bound + 1e-12;
  for (double v : slice) {
    if (!std::isfinite(v) || std::abs(v) > limit) {
      throw Error(Errc::kUnstableIntegration,
                  "value magnitude exceeds 10x the a-priori bound at t=" + std::to_string(t) +
                      "; retry with time_steps >= " + std::to_string(4 * steps));
    }
  }
}

}  // namespace

MasterSolution solve_master(const ModelSpec& model, int K, int time_steps) {
  if (K < 2) throw Error(Errc::kBadParameter, "K must be >= 2");
  if (!model.alpha0_free) throw Error(Errc::kBadParameter, "the master system needs a model with alpha0_free");
  const int steps = time_steps > 0 ? time_steps : default_time_steps(model, K);
  const auto grid = make_grid(model.M, K);
  const TimeGrid time{model.T, steps};
  MasterSolution sol{ValueTable(Role::kMajor, time, grid, model.M0),
                     ValueTable(Role::kMinor, time, grid, model.M0),
                     FeedbackPolicy(Role::kMajor, time, grid, model.M0, model.A0),
                     FeedbackPolicy(Role::kMinor, time, grid, model.M0, model.A)};

  double g0_sup = 0.0, g_sup = 0.0, f0_sup = 0.0, f_sup = 0.0;
  {
    const auto g0 = terminal_slice(model, Role::kMajor, *grid, &g0_sup);
    const auto g = terminal_slice(model, Role::kMinor, *grid, &g_sup);
    std::copy(g0.begin(), g0.end(), sol.V0.slice(steps).begin());
    std::copy(g.begin(), g.end(), sol.V.slice(steps).begin());
  }

  const double h = time.h();
  StepActions acts = knot_argmin(model, *grid, model.T, sol.V0.slice(steps), sol.V.slice(steps), nullptr);
  for (int n = steps - 1; n >= 0; --n) {
    const double t1 = time.knot(n + 1);
    const MasterStep step{model, *grid, t1, h, sol.V0.slice(n + 1), sol.V.slice(n + 1), &f0_sup, &f_sup};
    std::size_t ties = 0;
    int rounds = 0;
    while (true) {
      StepActions next = step.refresh(acts, &ties);
      const bool settled = next.major == acts.major && next.minor == acts.minor;
      acts = std::move(next);
      if (settled || ++rounds >= kMaxRefresh) break;
    }
    sol.ties += ties;
    if (rounds > 1) ++sol.refreshes;
    store(acts, sol.phi0, sol.phi, n + 1);

    const StepActions major_acts{acts.major, acts.minor, {}};
    const StepActions minor_acts{acts.major, acts.minor, acts.minor};
    rk4_backward_step(model, Role::kMajor, *grid, major_acts, t1, h, sol.V0.slice(n + 1), sol.V0.slice(n), &f0_sup);
    rk4_backward_step(model, Role::kMinor, *grid, minor_acts, t1, h, sol.V.slice(n + 1), sol.V.slice(n), &f_sup);
    check_stable(sol.V0.slice(n), g0_sup + model.T * f0_sup, steps, time.knot(n));
    check_stable(sol.V.slice(n), g_sup + model.T * f_sup, steps, time.knot(n));
  }
  store(knot_argmin(model, *grid, 0.0, sol.V0.slice(0), sol.V.slice(0), &sol.ties), sol.phi0, sol.phi, 0);
  sol.V0.bound = g0_sup + model.T * f0_sup;
  sol.V.bound = g_sup + model.T * f_sup;

  // Post-check: every stored pair is a fixed point of the refresh map on the
  // final tables, and knot 0 holds the plain argmins of the t = 0 slices.
  for (int n = steps - 1; n >= 0; --n) {
    const MasterStep step{model, *grid, time.knot(n + 1), h, sol.V0.slice(n + 1), sol.V.slice(n + 1), nullptr, nullptr};
    if (!matches(step.refresh(read_knot(sol.phi0, sol.phi, n + 1), nullptr), sol.phi0, sol.phi, n + 1)) {
      throw Error(Errc::kConsistencyFailure, "stored master policies are not the argmins of their own values at t=" +
                                                 std::to_string(time.knot(n + 1)));
    }
  }
  if (!matches(knot_argmin(model, *grid, 0.0, sol.V0.slice(0), sol.V.slice(0), nullptr), sol.phi0, sol.phi, 0)) {
    throw Error(Errc::kConsistencyFailure, "stored master policies at t=0 are not the argmins of the t=0 values");
  }
  return sol;
}

double dpp_check(const ModelSpec& model, Role role, const PolicyProfile& profile, int K, double t,
                 double s, int time_steps) {
  if (K < 2) throw Error(Errc::kBadParameter, "K must be >= 2");
  if (time_steps < 1) throw Error(Errc::kBadParameter, "time_steps must be >= 1");
  if (!(t >= 0.0 && t < s && s <= model.T)) throw Error(Errc::kBadParameter, "dpp_check needs 0 <= t < s <= T");
  const TimeGrid full_time{model.T, time_steps};
  auto knot_of = [&](double u) {
    const double k = u / full_time.h();
    const int n = static_cast<int>(std::lround(k));
    if (std::abs(k - n) > 1e-9) {
      throw Error(Errc::kBadParameter, "time " + std::to_string(u) + " is not a knot of the time grid");
    }
    return n;
  };
  const int nt = knot_of(t);
  const int ns = knot_of(s);
  const auto grid = make_grid(model.M, K);
  const auto full = solve_backward(model, role, profile, grid, full_time, true);
  const TimeGrid sub_time{full_time.knot(ns), ns - nt, full_time.knot(nt)};
  const auto sub = solve_backward(model, role, profile, grid, sub_time, true, full.values.slice(ns));
  const auto a = full.values.slice(nt);
  const auto b = sub.values.slice(0);
  double defect = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) defect = std::max(defect, std::abs(a[k] - b[k]));
  return defect;
}

}  // namespace mfg
