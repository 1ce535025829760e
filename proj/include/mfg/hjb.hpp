#pragma once

#include <cstddef>
#include <optional>

#include "mfg/generator.hpp"
#include "mfg/nplayer.hpp"
#include "mfg/tables.hpp"

namespace mfg {

// Reference tolerance of the time integrator, used by consistency checks
// ("within 5x / 10x integration tolerance").
constexpr double kIntegrationTol = 1e-9;

/// Mean-field value of the role on P^K: the N-player value system with N := K.
/// Major role: minors play profile.minor. Minor role: the major plays
/// profile.major and the field plays profile.minor.
BackwardResult solve_hjb(const ModelSpec& model, Role role, const PolicyProfile& profile, int K,
                         int time_steps = 0);

struct MasterSolution {
  ValueTable V0;
  ValueTable V;
  FeedbackPolicy phi0;
  FeedbackPolicy phi;
  std::size_t ties = 0;
  // Steps whose frozen action pair needed more than one refresh to settle.
  std::size_t refreshes = 0;
};

/// Both value systems in one backward sweep. Within every step the pair of
/// frozen actions is refreshed until each role's action is its own argmin
/// given the other's; the final tables are re-checked against the stored
/// policies (ConsistencyFailure on any mismatch).
MasterSolution solve_master(const ModelSpec& model, int K, int time_steps = 0);

/// sup |V(t) - [solve on [t, s] from V(s)]| for the role's value on P^K.
/// t and s must be knots of the uniform grid with `time_steps` steps on [0, T].
double dpp_check(const ModelSpec& model, Role role, const PolicyProfile& profile, int K, double t,
                 double s, int time_steps);

/// Profile whose major and minor parts read the given tables.
PolicyProfile tabulated_profile(const FeedbackPolicy& phi0, const FeedbackPolicy& phi);

}  // namespace mfg
