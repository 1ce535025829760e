#include "mfg/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfg/error.hpp"

namespace mfg {

BestResponse best_response(const ModelSpec& model, const FeedbackPolicy& phi0,
                           const FeedbackPolicy& phi, int K, int time_steps) {
  if (!model.alpha0_free) throw Error(Errc::kBadParameter, "best_response needs a model with alpha0_free");
  const PolicyProfile prof = tabulated_profile(phi0, phi);
  return {solve_hjb(model, Role::kMajor, prof, K, time_steps),
          solve_hjb(model, Role::kMinor, prof, K, time_steps)};
}

namespace {

double sup_gap_t0(const ValueTable& J, const ValueTable& V) {
  const auto a = J.slice(0);
  const auto b = V.slice(0);
  double gap = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < a.size(); ++k) gap = std::max(gap, a[k] - b[k]);
  return gap;
}

}  // namespace

Exploitability exploitability(const ModelSpec& model, const FeedbackPolicy& phi0,
                              const FeedbackPolicy& phi, const ValueTable& V0, const ValueTable& V) {
  const PolicyProfile prof = tabulated_profile(phi0, phi);
  const int K = V0.N();
  const int steps = V0.time().steps;
  const auto J0 = solve_cost_ode(model, Role::kMajor, prof, K, steps);
  const auto J = solve_cost_ode(model, Role::kMinor, prof, K, steps);
  return {sup_gap_t0(J0, V0), sup_gap_t0(J, V)};
}

Exploitability exploitability(const ModelSpec& model, const FeedbackPolicy& phi0,
                              const FeedbackPolicy& phi, int K, int time_steps) {
  const auto br = best_response(model, phi0, phi, K, time_steps);
  return exploitability(model, phi0, phi, br.major.values, br.minor.values);
}

EquilibriumResult solve_equilibrium(const ModelSpec& model, const EquilibriumOptions& opts) {
  if (!model.alpha0_free) throw Error(Errc::kBadParameter, "solve_equilibrium needs a model with alpha0_free");
  if (opts.K < 2) throw Error(Errc::kBadParameter, "K must be >= 2");
  if (!(opts.damping > 0.0 && opts.damping <= 1.0)) throw Error(Errc::kBadParameter, "damping must lie in (0, 1]");
  if (opts.max_iter < 0) throw Error(Errc::kBadParameter, "max_iter must be >= 0");
  const int steps = opts.time_steps > 0 ? opts.time_steps : default_time_steps(model, opts.K);
  const auto grid = make_grid(model.M, opts.K);
  const TimeGrid time{model.T, steps};

  FeedbackPolicy phi0 = opts.init_phi0 ? *opts.init_phi0 : FeedbackPolicy(Role::kMajor, time, grid, model.M0, model.A0);
  FeedbackPolicy phi = opts.init_phi ? *opts.init_phi : FeedbackPolicy(Role::kMinor, time, grid, model.M0, model.A);

  std::vector<IterationRecord> history;
  std::optional<ValueTable> W0, W;
  struct Snapshot {
    FeedbackPolicy phi0, phi;
    ValueTable V0, V;
    Exploitability eps;
  };
  std::optional<Snapshot> best;
  auto worse = [](const Exploitability& a, const Exploitability& b) {
    return std::max(a.major, a.minor) > std::max(b.major, b.minor);
  };

  for (int it = 1; it <= opts.max_iter; ++it) {
    auto br = best_response(model, phi0, phi, opts.K, steps);
    const Exploitability eps = exploitability(model, phi0, phi, br.major.values, br.minor.values);
    const std::size_t changed = br.phi0().count_differences(phi0) + br.phi().count_differences(phi);
    const double fraction = static_cast<double>(changed) / static_cast<double>(phi0.size() + phi.size());
    history.push_back({it, fraction, eps});
    if (!best || worse(best->eps, eps)) best = Snapshot{phi0, phi, br.major.values, br.minor.values, eps};
    if (fraction <= opts.tol) {
      return {std::move(phi0), std::move(phi), std::move(br.major.values), std::move(br.minor.values),
              std::move(history), eps, it, true};
    }

    const ValueTable& V0n = br.major.values;
    const ValueTable& Vn = br.minor.values;
    if (!W0) {
      W0 = V0n;
      W = Vn;
    } else {
      const double w = opts.damping;
      auto blend = [w](ValueTable& acc, const ValueTable& fresh) {
        auto a = acc.raw();
        const auto b = fresh.raw();
        for (std::size_t k = 0; k < a.size(); ++k) a[k] = (1.0 - w) * a[k] + w * b[k];
      };
      blend(*W0, V0n);
      blend(*W, Vn);
    }
    const PolicyProfile prof = tabulated_profile(phi0, phi);
    FeedbackPolicy next0 = argmin_policy(model, Role::kMajor, prof, *W0);
    FeedbackPolicy next = argmin_policy(model, Role::kMinor, prof, *W);
    phi0 = std::move(next0);
    phi = std::move(next);
  }

  // Not converged: compare the last iterate with the best one seen.
  auto br = best_response(model, phi0, phi, opts.K, steps);
  const Exploitability eps = exploitability(model, phi0, phi, br.major.values, br.minor.values);
  if (best && worse(eps, best->eps)) {
    return {std::move(best->phi0), std::move(best->phi), std::move(best->V0), std::move(best->V),
            std::move(history), best->eps, opts.max_iter, false};
  }
  return {std::move(phi0), std::move(phi), std::move(br.major.values), std::move(br.minor.values),
          std::move(history), eps, opts.max_iter, false};
}

}  // namespace mfg
