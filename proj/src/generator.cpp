#include "mfg/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mfg/error.hpp"
#include "mfg/parallel.hpp"

namespace mfg {

PolicyProfile constant_profile(std::size_t major_action, std::size_t minor_action) {
  return {constant_major(major_action), constant_minor(minor_action), {}};
}

namespace {

std::uint16_t checked(std::size_t a, const ActionSet& set, const char* who) {
  if (a >= set.size()) {
    throw Error(Errc::kBadParameter, std::string(who) + " policy returned action index " +
                                         std::to_string(a) + " outside the action set");
  }
  return static_cast<std::uint16_t>(a);
}

void fill_major(const ModelSpec& model, const SimplexGrid& grid, const MajorPolicy& fn, double t,
                std::vector<std::uint16_t>& out) {
  const std::size_t G = grid.size();
  out.assign(model.M0 * G, 0);
  if (!fn) return;
  if (const auto* tab = fn.target<TabulatedMajor>();
      tab && tab->policy->grid() == grid && tab->policy->role() == Role::kMajor) {
    const auto& p = *tab->policy;
    const int knot = p.time().step_at(t) + 1;
    for (int i0 = 0; i0 < model.M0; ++i0) {
      for (std::size_t r = 0; r < G; ++r) out[i0 * G + r] = checked(p.at(knot, i0, r), model.A0, "major");
    }
    return;
  }
  for (int i0 = 0; i0 < model.M0; ++i0) {
    for (std::size_t r = 0; r < G; ++r) out[i0 * G + r] = checked(fn(t, i0, grid.point(r)), model.A0, "major");
  }
}

void fill_minor(const ModelSpec& model, const SimplexGrid& grid, const MinorPolicy& fn, double t,
                std::vector<std::uint16_t>& out) {
  const std::size_t G = grid.size();
  const int M = model.M;
  out.assign(static_cast<std::size_t>(model.M0) * M * G, 0);
  if (!fn) return;
  if (const auto* tab = fn.target<TabulatedMinor>();
      tab && tab->policy->grid() == grid && tab->policy->role() == Role::kMinor) {
    const auto& p = *tab->policy;
    const int knot = p.time().step_at(t) + 1;
    for (int s = 0; s < model.M0 * M; ++s) {
      for (std::size_t r = 0; r < G; ++r) out[s * G + r] = checked(p.at(knot, s, r), model.A, "minor");
    }
    return;
  }
  for (int i0 = 0; i0 < model.M0; ++i0) {
    for (int i = 0; i < M; ++i) {
      for (std::size_t r = 0; r < G; ++r) {
        out[(i0 * M + i) * G + r] = checked(fn(t, i, i0, grid.point(r)), model.A, "minor");
      }
    }
  }
}

// Major jump part at (i0, r) with major action a0: major jumps + minor field.
// The running cost f0 goes to *cost.
double major_jump(const ModelSpec& model, const SimplexGrid& grid, const StepActions& acts,
                     double t, int i0, std::size_t r, std::span<const double> F, std::size_t a0,
                     double* cost) {
  const std::size_t G = grid.size();
  const int M = model.M;
  const auto x = grid.point(r);
  const ActionView av0 = model.A0[a0];
  const double here = F[i0 * G + r];
  double acc = 0.0;
  for (int j0 = 0; j0 < model.M0; ++j0) {
    if (j0 == i0) continue;
    acc += (F[j0 * G + r] - here) * model.q0(t, i0, j0, av0, x);
  }
  for (int i = 0; i < M; ++i) {
    const int occ = grid.occupancy(r, i);
    if (occ == 0) continue;
    const ActionView a = model.A[acts.minor[(i0 * M + i) * G + r]];
    for (int j = 0; j < M; ++j) {
      if (j == i) continue;
      const std::size_t to = grid.shifted(r, i, j);
      if (to == SimplexGrid::npos) throw Error(Errc::kIndexBug, "major generator shift left P^N");
      acc += (F[i0 * G + to] - here) * occ * model.q(t, i, j, a, i0, av0, x);
    }
  }
  *cost = model.f0(t, i0, av0, x);
  return acc;
}

// Tagged player's own jumps at (i0, i, r) with action abar; f goes to *cost.
// A jump whose target leaves the grid (state i empty, so the row is not a
// consistent configuration) keeps x where it is.
double minor_own(const ModelSpec& model, const SimplexGrid& grid, double t, int i0, int i,
                 std::size_t r, std::span<const double> F, std::size_t abar, ActionView av0,
                 double* cost) {
  const std::size_t G = grid.size();
  const int M = model.M;
  const auto x = grid.point(r);
  const ActionView a = model.A[abar];
  const double here = F[(i0 * M + i) * G + r];
  double acc = 0.0;
  for (int j = 0; j < M; ++j) {
    if (j == i) continue;
    std::size_t to = grid.shifted(r, i, j);
    if (to == SimplexGrid::npos) to = r;
    acc += (F[(i0 * M + j) * G + to] - here) * model.q(t, i, j, a, i0, av0, x);
  }
  *cost = model.f(t, i, a, i0, av0, x);
  return acc;
}

// Major jumps and the field of the other N - 1 minors at (i0, i, r).
double minor_rest(const ModelSpec& model, const SimplexGrid& grid, const StepActions& acts, double t,
                  int i0, int i, std::size_t r, std::span<const double> F, ActionView av0) {
  const std::size_t G = grid.size();
  const int M = model.M;
  const auto x = grid.point(r);
  const int s = i0 * M + i;
  const double here = F[s * G + r];
  double acc = 0.0;
  for (int j0 = 0; j0 < model.M0; ++j0) {
    if (j0 == i0) continue;
    acc += (F[(j0 * M + i) * G + r] - here) * model.q0(t, i0, j0, av0, x);
  }
  for (int k = 0; k < M; ++k) {
    const int occ = std::max(0, grid.occupancy(r, k) - (k == i ? 1 : 0));
    if (occ == 0) continue;
    const ActionView a = model.A[acts.minor[(i0 * M + k) * G + r]];
    for (int j = 0; j < M; ++j) {
      if (j == k) continue;
      const std::size_t to = grid.shifted(r, k, j);
      if (to == SimplexGrid::npos) throw Error(Errc::kIndexBug, "minor generator shift left P^N");
      acc += (F[s * G + to] - here) * occ * model.q(t, k, j, a, i0, av0, x);
    }
  }
  return acc;
}

int state_count(const ModelSpec& model, Role role) {
  return role == Role::kMajor ? model.M0 : model.M0 * model.M;
}

}  // namespace

StepActions tabulate_actions(const ModelSpec& model, const SimplexGrid& grid,
                             const PolicyProfile& profile, double t) {
  StepActions acts;
  fill_major(model, grid, profile.major, t, acts.major);
  fill_minor(model, grid, profile.minor, t, acts.minor);
  fill_minor(model, grid, profile.tagged(), t, acts.deviant);
  return acts;
}

void apply_jump(const ModelSpec& model, Role role, const SimplexGrid& grid,
                const StepActions& acts, double t, std::span<const double> F,
                std::span<double> out, bool with_cost, double* cost_sup) {
  const std::size_t G = grid.size();
  const int M = model.M;
  const std::size_t rows = static_cast<std::size_t>(state_count(model, role)) * G;
  if (F.size() != rows || out.size() != rows) throw Error(Errc::kIndexBug, "apply_jump: slice shape");
  std::vector<double> costs(cost_sup ? rows : 0);

  parallel_for(rows, [&](std::size_t row) {
    const int s = static_cast<int>(row / G);
    const std::size_t r = row % G;
    double c = 0.0;
    double v;
    if (role == Role::kMajor) {
      v = major_jump(model, grid, acts, t, s, r, F, acts.major[row], &c);
    } else {
      const int i0 = s / M;
      const int i = s % M;
      const ActionView av0 = model.A0[acts.major[i0 * G + r]];
      v = minor_own(model, grid, t, i0, i, r, F, acts.deviant[row], av0, &c) +
          minor_rest(model, grid, acts, t, i0, i, r, F, av0);
    }
    out[row] = with_cost ? v + c : v;
    if (cost_sup) costs[row] = std::abs(c);
  });
  if (cost_sup) {
    for (double c : costs) *cost_sup = std::max(*cost_sup, c);
  }
}

HamiltonianMin hamiltonian_min(const ModelSpec& model, Role role, const SimplexGrid& grid,
                               double t, int i0, int i, std::size_t rank,
                               std::span<const double> slice, const StepActions& opp,
                               double* cost_sup) {
  const ActionSet& set = role == Role::kMajor ? model.A0 : model.A;
  if (set.empty()) throw Error(Errc::kNoActions, "hamiltonian_min over an empty action set");
  const std::size_t G = grid.size();
  HamiltonianMin best;
  best.value = std::numeric_limits<double>::infinity();
  std::vector<double> values(set.size());
  for (std::size_t a = 0; a < set.size(); ++a) {
    double c = 0.0;
    if (role == Role::kMajor) {
      values[a] = major_jump(model, grid, opp, t, i0, rank, slice, a, &c) + c;
    } else {
      const ActionView av0 = model.A0[opp.major[i0 * G + rank]];
      values[a] = minor_own(model, grid, t, i0, i, rank, slice, a, av0, &c) + c;
    }
    if (cost_sup) *cost_sup = std::max(*cost_sup, std::abs(c));
    if (values[a] < best.value) best.value = values[a];
  }
  // lowest index within tolerance of the minimum
  bool found = false;
  for (std::size_t a = 0; a < set.size(); ++a) {
    if (values[a] <= best.value + kTieTolerance) {
      if (!found) {
        best.action = a;
        best.value = values[a];
        found = true;
      } else {
        best.tie = true;
      }
    }
  }
  return best;
}

std::size_t argmin_slice(const ModelSpec& model, Role role, const SimplexGrid& grid, double t,
                         std::span<const double> slice, StepActions& acts, double* cost_sup) {
  const std::size_t G = grid.size();
  const int M = model.M;
  const std::size_t rows = slice.size();
  std::vector<char> tie(rows, 0);
  std::vector<double> csup(rows, 0.0);
  auto& own = role == Role::kMajor ? acts.major : acts.deviant;
  own.resize(rows);
  parallel_for(rows, [&](std::size_t row) {
    const int s = static_cast<int>(row / G);
    const std::size_t r = row % G;
    const int i0 = role == Role::kMajor ? s : s / M;
    const int i = role == Role::kMajor ? 0 : s % M;
    const auto h = hamiltonian_min(model, role, grid, t, i0, i, r, slice, acts, &csup[row]);
    own[row] = static_cast<std::uint16_t>(h.action);
    tie[row] = h.tie;
  });
  std::size_t ties = 0;
  for (std::size_t row = 0; row < rows; ++row) {
    ties += tie[row];
    if (cost_sup) *cost_sup = std::max(*cost_sup, csup[row]);
  }
  return ties;
}

std::size_t step_argmin(const ModelSpec& model, Role role, const SimplexGrid& grid,
                        StepActions& acts, double t1, double h, std::span<const double> next,
                        double* cost_sup) {
  argmin_slice(model, role, grid, t1, next, acts, cost_sup);
  std::vector<double> k1(next.size()), ym(next.size());
  apply_jump(model, role, grid, acts, t1, next, k1, true, cost_sup);
  for (std::size_t k = 0; k < ym.size(); ++k) ym[k] = next[k] + 0.5 * h * k1[k];
  return argmin_slice(model, role, grid, t1 - 0.5 * h, ym, acts, cost_sup);
}

std::vector<double> terminal_slice(const ModelSpec& model, Role role, const SimplexGrid& grid,
                                   double* sup) {
  const std::size_t G = grid.size();
  const int M = model.M;
  std::vector<double> out(static_cast<std::size_t>(state_count(model, role)) * G);
  for (std::size_t row = 0; row < out.size(); ++row) {
    const int s = static_cast<int>(row / G);
    const std::size_t r = row % G;
    out[row] = role == Role::kMajor ? model.g0(s, grid.point(r)) : model.g(s % M, s / M, grid.point(r));
    if (!std::isfinite(out[row])) throw Error(Errc::kBadParameter, "terminal cost is not finite");
    if (sup) *sup = std::max(*sup, std::abs(out[row]));
  }
  return out;
}

void rk4_backward_step(const ModelSpec& model, Role role, const SimplexGrid& grid,
                       const StepActions& acts, double t1, double h, std::span<const double> next,
                       std::span<double> out, double* cost_sup) {
  const std::size_t n = next.size();
  const double tm = t1 - 0.5 * h;
  const double t0 = t1 - h;
  std::vector<double> k1(n), k2(n), k3(n), k4(n), y(n);

  apply_jump(model, role, grid, acts, t1, next, k1, true, cost_sup);
  for (std::size_t k = 0; k < n; ++k) y[k] = next[k] + 0.5 * h * k1[k];
  apply_jump(model, role, grid, acts, tm, y, k2, true, cost_sup);
  for (std::size_t k = 0; k < n; ++k) y[k] = next[k] + 0.5 * h * k2[k];
  apply_jump(model, role, grid, acts, tm, y, k3, true, cost_sup);
  for (std::size_t k = 0; k < n; ++k) y[k] = next[k] + h * k3[k];
  apply_jump(model, role, grid, acts, t0, y, k4, true, cost_sup);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = next[k] + h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
  }
}

}  // namespace mfg
