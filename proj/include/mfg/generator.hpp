#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mfg/model.hpp"
#include "mfg/simplex_grid.hpp"
#include "mfg/tables.hpp"

namespace mfg {

/// Feedback functions of everybody in the game. `deviant` is the tagged minor
/// player (player 1); when empty it plays `minor`.
struct PolicyProfile {
  MajorPolicy major;
  MinorPolicy minor;
  MinorPolicy deviant;

  const MinorPolicy& tagged() const { return deviant ? deviant : minor; }
};

PolicyProfile constant_profile(std::size_t major_action, std::size_t minor_action);

/// Action indices frozen over one time step, per (state, grid rank):
/// major[i0 * G + r], minor[(i0 * M + k) * G + r], deviant likewise.
struct StepActions {
  std::vector<std::uint16_t> major;
  std::vector<std::uint16_t> minor;
  std::vector<std::uint16_t> deviant;
};

/// Evaluates the profile's feedback functions at time t on every grid node.
/// Tabulated policies on the same grid are read directly.
StepActions tabulate_actions(const ModelSpec& model, const SimplexGrid& grid,
                             const PolicyProfile& profile, double t);

/// out = (jump part of the generator) F [+ running cost]. F and out are one
/// table slice of the role's shape. `cost_sup`, when given, receives the
/// largest |running cost| evaluated.
void apply_jump(const ModelSpec& model, Role role, const SimplexGrid& grid,
                const StepActions& actions, double t, std::span<const double> F,
                std::span<double> out, bool with_cost = false,
                double* cost_sup = nullptr);

struct HamiltonianMin {
  std::size_t action = 0;
  double value = 0.0;
  bool tie = false;  // another action within 1e-12 of the minimum
};

constexpr double kTieTolerance = 1e-12;

/// Minimizes the role's Hamiltonian bracket over its own action set at one
/// index. For the major role the minors play `opp.minor`; for the minor role
/// the major plays `opp.major`. `slice` is the role's value slice.
HamiltonianMin hamiltonian_min(const ModelSpec& model, Role role,
                               const SimplexGrid& grid, double t, int i0, int i,
                               std::size_t rank, std::span<const double> slice,
                               const StepActions& opp,
                               double* cost_sup = nullptr);

/// Argmin of the role's bracket on every row of `slice`, written into the
/// role's own entry of `acts` (major, or deviant for the minor role).
/// Returns the number of rows with a near tie.
std::size_t argmin_slice(const ModelSpec& model, Role role, const SimplexGrid& grid, double t,
                         std::span<const double> slice, StepActions& acts,
                         double* cost_sup = nullptr);

/// Own actions frozen over the step [t1 - h, t1]: the argmin at the midpoint
/// of a half Euler step taken from `next` with the argmin at t1. The other
/// entries of `acts` are the opponents' actions for the step.
std::size_t step_argmin(const ModelSpec& model, Role role, const SimplexGrid& grid,
                        StepActions& acts, double t1, double h, std::span<const double> next,
                        double* cost_sup = nullptr);

/// Terminal slice of the role on the grid; `sup` receives max |g|.
std::vector<double> terminal_slice(const ModelSpec& model, Role role,
                                   const SimplexGrid& grid, double* sup = nullptr);

/// One classical RK4 step backward from t1 to t1 - h with frozen actions.
/// `next` is the slice at t1; the slice at t1 - h is written to `out`.
void rk4_backward_step(const ModelSpec& model, Role role, const SimplexGrid& grid,
                       const StepActions& actions, double t1, double h,
                       std::span<const double> next, std::span<double> out,
                       double* cost_sup);

}  // namespace mfg
