#include "mfg/nplayer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfg/error.hpp"
#include "mfg/parallel.hpp"

namespace mfg {

std::shared_ptr<const SimplexGrid> make_grid(int M, int N) {
  return std::make_shared<const SimplexGrid>(M, N);
}

std::vector<double> apply_generator(const ModelSpec& model, Role role, const PolicyProfile& profile,
                                    std::span<const double> F, double t, const SimplexGrid& grid) {
  const StepActions acts = tabulate_actions(model, grid, profile, t);
  std::vector<double> out(F.size());
  apply_jump(model, role, grid, acts, t, F, out);
  return out;
}

namespace {

void store_own(Role role, const StepActions& acts, FeedbackPolicy& policy, int knot) {
  const auto& own = role == Role::kMajor ? acts.major : acts.deviant;
  const std::size_t G = policy.grid().size();
  for (std::size_t row = 0; row < own.size(); ++row) policy.set(knot, static_cast<int>(row / G), row % G, own[row]);
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

BackwardResult solve_backward(const ModelSpec& model, Role role, const PolicyProfile& profile,
                              std::shared_ptr<const SimplexGrid> grid, TimeGrid time, bool optimize,
                              std::span<const double> terminal) {
  if (time.steps < 1) throw Error(Errc::kBadParameter, "time_steps must be >= 1");
  if (time.T < time.t0) throw Error(Errc::kBadParameter, "backward solve needs t0 <= T");
  if (grid->M() != model.M) throw Error(Errc::kBadParameter, "grid dimension does not match the model");
  if (optimize && role == Role::kMinor && !model.alpha0_free) {
    throw Error(Errc::kBadParameter, "the minor value problem needs a model with alpha0_free");
  }

  BackwardResult res{ValueTable(role, time, grid, model.M0), std::nullopt, 0};
  ValueTable& V = res.values;
  if (optimize) {
    res.policy.emplace(role, time, grid, model.M0, role == Role::kMajor ? model.A0 : model.A);
  }

  double g_sup = 0.0;
  double f_sup = 0.0;
  {
    auto last = V.slice(time.steps);
    if (terminal.empty()) {
      auto g = terminal_slice(model, role, *grid, &g_sup);
      std::copy(g.begin(), g.end(), last.begin());
    } else {
      if (terminal.size() != last.size()) throw Error(Errc::kBadParameter, "terminal slice has the wrong shape");
      for (double v : terminal) g_sup = std::max(g_sup, std::abs(v));
      std::copy(terminal.begin(), terminal.end(), last.begin());
    }
  }

  const double h = time.h();
  const double span_len = time.T - time.t0;
  for (int n = time.steps - 1; n >= 0; --n) {
    const double t1 = time.knot(n + 1);
    StepActions acts = tabulate_actions(model, *grid, profile, time.knot(n) + 0.5 * h);
    if (optimize) {
      res.ties += step_argmin(model, role, *grid, acts, t1, h, V.slice(n + 1), &f_sup);
      store_own(role, acts, *res.policy, n + 1);
    }
    rk4_backward_step(model, role, *grid, acts, t1, h, V.slice(n + 1), V.slice(n), &f_sup);
    check_stable(V.slice(n), g_sup + span_len * f_sup, time.steps, time.knot(n));
  }
  if (optimize) {
    StepActions acts = tabulate_actions(model, *grid, profile, time.t0);
    res.ties += argmin_slice(model, role, *grid, time.t0, V.slice(0), acts, &f_sup);
    store_own(role, acts, *res.policy, 0);
  }
  V.bound = g_sup + span_len * f_sup;
  return res;
}

ValueTable solve_cost_ode(const ModelSpec& model, Role role, const PolicyProfile& profile, int N,
                          int time_steps) {
  if (N < 1) throw Error(Errc::kBadParameter, "N must be >= 1");
  const int steps = time_steps > 0 ? time_steps : default_time_steps(model, N);
  return std::move(solve_backward(model, role, profile, make_grid(model.M, N), {model.T, steps}, false).values);
}

BackwardResult solve_value_ode(const ModelSpec& model, Role role, const PolicyProfile& profile, int N,
                               int time_steps) {
  if (N < 1) throw Error(Errc::kBadParameter, "N must be >= 1");
  const int steps = time_steps > 0 ? time_steps : default_time_steps(model, N);
  return solve_backward(model, role, profile, make_grid(model.M, N), {model.T, steps}, true);
}

FeedbackPolicy argmin_policy(const ModelSpec& model, Role role, const PolicyProfile& profile,
                             const ValueTable& table, std::size_t* ties) {
  const TimeGrid& time = table.time();
  const SimplexGrid& grid = table.grid();
  FeedbackPolicy policy(role, time, table.grid_ptr(), model.M0, role == Role::kMajor ? model.A0 : model.A);
  std::size_t n_ties = 0;
  const double h = time.h();
  for (int n = time.steps - 1; n >= 0; --n) {
    StepActions acts = tabulate_actions(model, grid, profile, time.knot(n) + 0.5 * h);
    n_ties += step_argmin(model, role, grid, acts, time.knot(n + 1), h, table.slice(n + 1));
    store_own(role, acts, policy, n + 1);
  }
  StepActions acts = tabulate_actions(model, grid, profile, time.t0);
  n_ties += argmin_slice(model, role, grid, time.t0, table.slice(0), acts);
  store_own(role, acts, policy, 0);
  if (ties) *ties = n_ties;
  return policy;
}

double discrete_gradient(const ValueTable& table) {
  const SimplexGrid& grid = table.grid();
  const std::size_t G = grid.size();
  const int M = grid.M();
  const double N = grid.K();
  double best = 0.0;
  for (int n = 0; n < table.time().knots(); ++n) {
    for (int s = 0; s < table.n_states(); ++s) {
      for (std::size_t r = 0; r < G; ++r) {
        const double here = table.at(n, s, r);
        for (int k = 0; k < M; ++k) {
          for (int l = 0; l < M; ++l) {
            if (k == l) continue;
            const std::size_t to = grid.shifted(r, k, l);
            if (to == SimplexGrid::npos) continue;
            best = std::max(best, N * std::abs(table.at(n, s, to) - here));
          }
        }
      }
    }
  }
  return best;
}

}  // namespace mfg
