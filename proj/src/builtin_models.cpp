#include <algorithm>
#include <cmath>

#include "mfg/error.hpp"
#include "mfg/model.hpp"

namespace mfg {
namespace {

ParamMap merge(const std::string& name, ParamMap defaults, const ParamMap& overrides) {
  for (const auto& [key, value] : overrides) {
    auto it = defaults.find(key);
    if (it == defaults.end()) {
      throw Error(Errc::kBadParameter, "model '" + name + "' has no parameter '" + key + "'");
    }
    if (!std::isfinite(value)) throw Error(Errc::kBadParameter, "parameter '" + key + "' is not finite");
    it->second = value;
  }
  if (defaults.at("T") < 0.0) throw Error(Errc::kBadParameter, "horizon T must be nonnegative");
  return defaults;
}

// Two major regimes (dormant / active attacker), two minor states
// (infected = 0, susceptible = 1). Minors choose protection a in {0, 1},
// the major chooses switching effort a0 in {0, 1}. x = fraction infected.
ParamMap two_two_defaults() {
  return {{"T", 1.0},
          {"beta_dormant", 0.8},  {"beta_active", 1.6},  // contact infection
          {"nu_dormant", 0.1},    {"nu_active", 0.4},    // direct attack infection
          {"protection", 0.6},                           // relative infection reduction
          {"recovery", 0.5},
          {"cost_infected", 1.0}, {"cost_protect", 0.15}, {"terminal_infected", 0.5},
          {"switch_base", 0.2},   {"switch_effort", 1.0},
          {"effort_cost", 0.2},   {"active_cost", 0.3},
          {"reward_infected", 1.0}, {"terminal_reward", 0.5},
          {"rate_bound", 2.0}};
}

ModelSpec make_two_two(const ParamMap& p) {
  ModelSpec m;
  m.name = "two_two";
  m.params = p;
  m.M0 = 2;
  m.M = 2;
  m.T = p.at("T");
  m.A0 = ActionSet::scalars({0.0, 1.0});
  m.A = ActionSet::scalars({0.0, 1.0});
  m.rate_bound = p.at("rate_bound");
  m.alpha0_free = true;

  const double beta[2] = {p.at("beta_dormant"), p.at("beta_active")};
  const double nu[2] = {p.at("nu_dormant"), p.at("nu_active")};
  const double eta = p.at("protection");
  const double rho = p.at("recovery");
  const double kappa = p.at("switch_base");
  const double gamma = p.at("switch_effort");

  m.q0 = with_major_diagonal(
      [kappa, gamma](double, int, int, ActionView a0, StateView) { return kappa + gamma * a0[0]; }, 2);
  m.q = with_minor_diagonal(
      [=](double, int i, int, ActionView a, int i0, ActionView, StateView x) {
        if (i == 0) return rho;
        return (beta[i0] * x[0] + nu[i0]) * (1.0 - eta * a[0]);
      },
      2);

  const double c_inf = p.at("cost_infected");
  const double c_prot = p.at("cost_protect");
  const double g_inf = p.at("terminal_infected");
  m.f = [c_inf, c_prot](double, int i, ActionView a, int, ActionView, StateView) {
    return (i == 0 ? c_inf : 0.0) + c_prot * a[0];
  };
  m.g = [g_inf](int i, int, StateView) { return i == 0 ? g_inf : 0.0; };

  const double c_eff = p.at("effort_cost");
  const double c_act = p.at("active_cost");
  const double w = p.at("reward_infected");
  const double w_T = p.at("terminal_reward");
  m.f0 = [=](double, int i0, ActionView a0, StateView x) {
    return c_eff * a0[0] + (i0 == 1 ? c_act : 0.0) - w * x[0];
  };
  m.g0 = [w_T](int, StateView x) { return -w_T * x[0]; };
  return m;
}

// Four minor states: 0 = defended/infected, 1 = defended/susceptible,
// 2 = undefended/infected, 3 = undefended/susceptible. Minor action 1 asks
// to switch defense level. Two attack regimes for the major player.
ParamMap cyber4_defaults() {
  return {{"T", 1.0},
          {"beta_UU", 0.3}, {"beta_UD", 0.4}, {"beta_DU", 0.3}, {"beta_DD", 0.4},
          {"recovery_D", 0.5}, {"recovery_U", 0.4},
          {"attack_D", 0.4}, {"attack_U", 0.3},
          {"attack_low", 0.2}, {"attack_high", 0.8},
          {"switch_speed", 0.8},
          {"cost_defended", 0.3}, {"cost_infected", 0.5},
          {"switch_base", 0.2}, {"switch_effort", 1.0},
          {"effort_cost", 0.2}, {"high_cost", 0.3},
          {"reward_infected", 1.0}, {"terminal_reward", 0.5},
          {"rate_bound", 2.0}};
}

ModelSpec make_cyber4(const ParamMap& p) {
  ModelSpec m;
  m.name = "cyber4";
  m.params = p;
  m.M0 = 2;
  m.M = 4;
  m.T = p.at("T");
  m.A0 = ActionSet::scalars({0.0, 1.0});
  m.A = ActionSet::scalars({0.0, 1.0});
  m.rate_bound = p.at("rate_bound");
  m.alpha0_free = true;

  const double bUU = p.at("beta_UU"), bUD = p.at("beta_UD"), bDU = p.at("beta_DU"), bDD = p.at("beta_DD");
  const double rD = p.at("recovery_D"), rU = p.at("recovery_U");
  const double atD = p.at("attack_D"), atU = p.at("attack_U");
  const double v[2] = {p.at("attack_low"), p.at("attack_high")};
  const double lambda = p.at("switch_speed");
  constexpr int DI = 0, DS = 1, UI = 2, US = 3;

  m.q = with_minor_diagonal(
      [=](double, int i, int j, ActionView a, int i0, ActionView, StateView x) {
        const double xDI = x[DI], xUI = x[UI];
        // defense switching, on request
        if ((i == DI && j == UI) || (i == UI && j == DI) || (i == DS && j == US) || (i == US && j == DS)) {
          return lambda * a[0];
        }
        if (i == DS && j == DI) return v[i0] * atD + bDD * xDI + bUD * xUI;
        if (i == US && j == UI) return v[i0] * atU + bUU * xUI + bDU * xDI;
        if (i == DI && j == DS) return rD;
        if (i == UI && j == US) return rU;
        return 0.0;
      },
      4);

  const double kD = p.at("cost_defended"), kI = p.at("cost_infected");
  m.f = [kD, kI](double, int i, ActionView, int, ActionView, StateView) {
    const bool defended = i == DI || i == DS;
    const bool infected = i == DI || i == UI;
    return (defended ? kD : 0.0) + (infected ? kI : 0.0);
  };
  m.g = [](int, int, StateView) { return 0.0; };

  const double kappa = p.at("switch_base"), gamma = p.at("switch_effort");
  m.q0 = with_major_diagonal(
      [kappa, gamma](double, int, int, ActionView a0, StateView) { return kappa + gamma * a0[0]; }, 2);
  const double c_eff = p.at("effort_cost"), c_high = p.at("high_cost");
  const double w = p.at("reward_infected"), w_T = p.at("terminal_reward");
  m.f0 = [=](double, int i0, ActionView a0, StateView x) {
    return c_eff * a0[0] + (i0 == 1 ? c_high : 0.0) - w * (x[DI] + x[UI]);
  };
  m.g0 = [w_T](int, StateView x) { return -w_T * (x[DI] + x[UI]); };
  return m;
}

// Minor dynamics and costs ignore (i0, x); major dynamics and costs ignore x.
// Two major states with three effort levels, three minor states with two actions.
ParamMap decoupled_defaults() {
  return {{"T", 1.0},
          {"major_switch_base", 0.3}, {"major_switch_effort", 0.9},
          {"major_cost_1", 1.0}, {"major_cost_2", 0.2}, {"major_effort_cost", 0.5},
          {"major_terminal_1", 0.5}, {"major_terminal_2", 0.0},
          {"minor_base", 0.4}, {"minor_boost", 0.8},
          {"minor_cost_1", 0.0}, {"minor_cost_2", 0.6}, {"minor_cost_3", 1.2},
          {"minor_action_cost", 0.25}, {"minor_terminal_3", 0.4},
          {"rate_bound", 3.0}};
}

ModelSpec make_decoupled(const ParamMap& p) {
  ModelSpec m;
  m.name = "decoupled";
  m.params = p;
  m.M0 = 2;
  m.M = 3;
  m.T = p.at("T");
  m.A0 = ActionSet::scalars({0.0, 0.5, 1.0});
  m.A = ActionSet::scalars({0.0, 1.0});
  m.rate_bound = p.at("rate_bound");
  m.alpha0_free = true;

  const double kappa = p.at("major_switch_base"), gamma = p.at("major_switch_effort");
  m.q0 = with_major_diagonal(
      [kappa, gamma](double, int, int, ActionView a0, StateView) { return kappa + gamma * a0[0]; }, 2);
  const double c0[2] = {p.at("major_cost_1"), p.at("major_cost_2")};
  const double ce = p.at("major_effort_cost");
  m.f0 = [=](double, int i0, ActionView a0, StateView) { return c0[i0] + ce * a0[0] * a0[0]; };
  const double g0v[2] = {p.at("major_terminal_1"), p.at("major_terminal_2")};
  m.g0 = [=](int i0, StateView) { return g0v[i0]; };

  const double base = p.at("minor_base"), boost = p.at("minor_boost");
  // Action 1 speeds up moves toward lower states, slows nothing else.
  m.q = with_minor_diagonal(
      [base, boost](double, int i, int j, ActionView a, int, ActionView, StateView) {
        const double r = base * (1.0 + 0.25 * (i + j));
        return j < i ? r + boost * a[0] : r;
      },
      3);
  const double c[3] = {p.at("minor_cost_1"), p.at("minor_cost_2"), p.at("minor_cost_3")};
  const double ca = p.at("minor_action_cost");
  m.f = [=](double, int i, ActionView a, int, ActionView, StateView) { return c[i] + ca * a[0]; };
  const double g3 = p.at("minor_terminal_3");
  m.g = [g3](int i, int, StateView) { return i == 2 ? g3 : 0.0; };
  return m;
}

}  // namespace

std::vector<std::string> builtin_names() { return {"cyber4", "decoupled", "two_two"}; }

ParamMap builtin_defaults(const std::string& name) {
  if (name == "two_two") return two_two_defaults();
  if (name == "cyber4") return cyber4_defaults();
  if (name == "decoupled") return decoupled_defaults();
  throw Error(Errc::kUnknownModel, "no builtin model named '" + name + "'");
}

ModelSpec build_builtin(const std::string& name, const ParamMap& overrides) {
  const ParamMap p = merge(name, builtin_defaults(name), overrides);
  ModelSpec m;
  if (name == "two_two") m = make_two_two(p);
  else if (name == "cyber4") m = make_cyber4(p);
  else m = make_decoupled(p);
  if (!(m.rate_bound > 0.0)) throw Error(Errc::kBadParameter, "rate_bound must be positive");
  return m;
}

ModelSpec load_builtin(const std::string& name, const ParamMap& overrides) {
  ModelSpec m = build_builtin(name, overrides);
  const auto report = validate_rates(m);
  if (!report.ok()) {
    throw Error(Errc::kBadParameter, "model '" + name + "' fails validation: " +
                                         report.violations.front().describe());
  }
  return m;
}

}  // namespace mfg
