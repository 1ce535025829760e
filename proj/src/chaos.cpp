#include "mfg/chaos.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <string>

#include "mfg/error.hpp"

namespace mfg {

LogLogFit fit_loglog(const std::vector<int>& N, const std::vector<double>& errors) {
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < N.size() && k < errors.size(); ++k) {
    if (errors[k] >= 1e-10 && std::isfinite(errors[k])) {
      lx.push_back(std::log(static_cast<double>(N[k])));
      ly.push_back(std::log(errors[k]));
    }
  }
  LogLogFit fit;
  if (lx.size() < 2) {
    fit.slope = fit.intercept = std::nan("");
    return fit;
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.defined = true;
  return fit;
}

namespace {

double grid_count(int M, int K) {
  // binomial(K + M - 1, M - 1)
  double c = 1.0;
  for (int k = 1; k <= M - 1; ++k) c = c * (K + k) / k;
  return c;
}

using Solver = ValueTable (*)(const ModelSpec&, Role, const PolicyProfile&, int, int);

ValueTable cost_solver(const ModelSpec& m, Role role, const PolicyProfile& p, int N, int steps) {
  return solve_cost_ode(m, role, p, N, steps);
}

ValueTable value_solver(const ModelSpec& m, Role role, const PolicyProfile& p, int N, int steps) {
  return std::move(solve_value_ode(m, role, p, N, steps).values);
}

struct Reference_ {
  ValueTable fine;
  std::optional<ValueTable> coarse;

  double at(int state, StateView x) const {
    const double a = fine.value(0, state, x);
    return coarse ? 2.0 * a - coarse->value(0, state, x) : a;
  }
};

double sup_error(const ValueTable& J, const Reference_& ref) {
  const SimplexGrid& grid = J.grid();
  double err = 0.0;
  for (int s = 0; s < J.n_states(); ++s) {
    for (std::size_t r = 0; r < grid.size(); ++r) {
      err = std::max(err, std::abs(J.at(0, s, r) - ref.at(s, grid.point(r))));
    }
  }
  return err;
}

StudyResult run_study(const ModelSpec& model, const PolicyProfile& profile, const StudyOptions& opts,
                      Solver solve, bool with_minor) {
  if (opts.N_list.empty()) throw Error(Errc::kBadParameter, "N_list is empty");
  for (std::size_t k = 0; k < opts.N_list.size(); ++k) {
    if (opts.N_list[k] < 1) throw Error(Errc::kBadParameter, "N_list entries must be >= 1");
    if (k > 0 && opts.N_list[k] <= opts.N_list[k - 1]) {
      throw Error(Errc::kBadParameter, "N_list must be strictly increasing");
    }
  }
  const int n_max = opts.N_list.back();
  if (opts.K_ref < n_max) throw Error(Errc::kBadParameter, "K_ref must be >= max(N_list)");
  if (opts.reference == Reference::kRichardson && opts.K_ref % 2 != 0) {
    throw Error(Errc::kBadParameter, "Richardson reference needs an even K_ref");
  }
  const double cap = static_cast<double>(opts.grid_cap);
  for (int N : opts.N_list) {
    if (grid_count(model.M, N) > cap) {
      throw Error(Errc::kInfeasibleN, "N=" + std::to_string(N) + " exceeds the grid cap");
    }
  }
  if (grid_count(model.M, opts.K_ref) > cap) throw Error(Errc::kInfeasibleN, "K_ref exceeds the grid cap");

  auto make_ref = [&](Role role) {
    Reference_ ref{solve(model, role, profile, opts.K_ref, opts.time_steps), std::nullopt};
    if (opts.reference == Reference::kRichardson) {
      ref.coarse = solve(model, role, profile, opts.K_ref / 2, opts.time_steps);
    }
    return ref;
  };
  const Reference_ ref0 = make_ref(Role::kMajor);
  std::optional<Reference_> ref;
  if (with_minor) ref = make_ref(Role::kMinor);

  StudyResult out;
  out.N_list = opts.N_list;
  out.config = opts;
  for (int N : opts.N_list) {
    const auto start = std::chrono::steady_clock::now();
    out.error_major.push_back(sup_error(solve(model, Role::kMajor, profile, N, opts.time_steps), ref0));
    out.error_minor.push_back(with_minor ? sup_error(solve(model, Role::kMinor, profile, N, opts.time_steps), *ref)
                                         : std::nan(""));
    out.runtime_s.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  out.fit_major = fit_loglog(out.N_list, out.error_major);
  out.fit_minor = fit_loglog(out.N_list, out.error_minor);
  return out;
}

}  // namespace

StudyResult cost_convergence_study(const ModelSpec& model, const PolicyProfile& profile,
                                   const StudyOptions& opts) {
  return run_study(model, profile, opts, cost_solver, true);
}

StudyResult value_convergence_study(const ModelSpec& model, const PolicyProfile& profile,
                                    const StudyOptions& opts) {
  PolicyProfile p = profile;
  p.deviant = nullptr;
  return run_study(model, p, opts, value_solver, model.alpha0_free);
}

std::vector<DeviationGain> approx_nash_check(const ModelSpec& model, const PolicyProfile& equilibrium,
                                             int N, const std::vector<Deviation>& deviations,
                                             const InitialState& init, std::size_t n_paths,
                                             std::uint64_t seed) {
  PolicyProfile base = equilibrium;
  base.deviant = nullptr;
  SimulationOptions opts;
  opts.N = N;
  opts.n_paths = n_paths;
  opts.seed = seed;
  const auto ref = simulate_paths(model, base, init, opts);

  std::vector<DeviationGain> out;
  for (const auto& dev : deviations) {
    if (static_cast<bool>(dev.major) == static_cast<bool>(dev.minor)) {
      throw Error(Errc::kBadParameter, "deviation '" + dev.label + "' must set exactly one of major, minor");
    }
    PolicyProfile p = base;
    if (dev.major) {
      p.major = dev.major;
    } else {
      p.deviant = dev.minor;
    }
    const auto res = simulate_paths(model, p, init, opts);
    const auto& a = dev.major ? res.major_cost : res.tagged_cost;
    const auto& b = dev.major ? ref.major_cost : ref.tagged_cost;
    std::vector<double> diff(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) diff[k] = a[k] - b[k];
    const auto stats = mean_and_se(diff);
    out.push_back({dev.label, static_cast<bool>(dev.major), stats.mean, stats.se});
  }
  return out;
}

}  // namespace mfg
