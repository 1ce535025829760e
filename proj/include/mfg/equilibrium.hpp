#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mfg/hjb.hpp"
#include "mfg/nplayer.hpp"
#include "mfg/tables.hpp"

namespace mfg {

struct Exploitability {
  double major = 0.0;
  double minor = 0.0;
};

struct BestResponse {
  BackwardResult major;  // V^0 against phi, with its argmin policy
  BackwardResult minor;  // V against (phi0, phi)
  const FeedbackPolicy& phi0() const { return *major.policy; }
  const FeedbackPolicy& phi() const { return *minor.policy; }
};

/// Argmin policies of the two mean-field problems against (phi0, phi).
BestResponse best_response(const ModelSpec& model, const FeedbackPolicy& phi0,
                           const FeedbackPolicy& phi, int K, int time_steps = 0);

/// sup over the t = 0 slice of J - V for each role (J from the cost solve
/// with N := K, V from solve_hjb).
Exploitability exploitability(const ModelSpec& model, const FeedbackPolicy& phi0,
                              const FeedbackPolicy& phi, int K, int time_steps = 0);

/// Same, reusing value tables already solved against (phi0, phi).
Exploitability exploitability(const ModelSpec& model, const FeedbackPolicy& phi0,
                              const FeedbackPolicy& phi, const ValueTable& V0, const ValueTable& V);

struct EquilibriumOptions {
  int K = 16;
  int time_steps = 0;  // 0: default_time_steps(model, K)
  double damping = 0.5;
  double tol = 0.0;
  int max_iter = 50;
  // Starting policies; lexicographic-first everywhere when absent.
  std::optional<FeedbackPolicy> init_phi0;
  std::optional<FeedbackPolicy> init_phi;
};

struct IterationRecord {
  int iteration = 0;
  double changed_fraction = 0.0;  // entries where the best response differs
  Exploitability eps;             // of the iterate the row was computed for
};

struct EquilibriumResult {
  FeedbackPolicy phi0;
  FeedbackPolicy phi;
  ValueTable V0;  // best-response values against the returned policies
  ValueTable V;
  std::vector<IterationRecord> history;
  Exploitability exploitability;
  int iterations = 0;
  bool converged = false;
};

/// Damped best-response iteration. The blend acts on the value tables; new
/// policies are read off the blended tables. Stops once the best response
/// changes at most a fraction `tol` of the policy entries.
EquilibriumResult solve_equilibrium(const ModelSpec& model, const EquilibriumOptions& opts);

}  // namespace mfg
