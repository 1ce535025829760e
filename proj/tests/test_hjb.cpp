#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "mfg/equilibrium.hpp"
#include "mfg/error.hpp"
#include "mfg/hjb.hpp"
#include "support.hpp"

using namespace mfg;

namespace {

double sup_gap_on_coarse_nodes(const ValueTable& coarse, const ValueTable& fine) {
  double gap = 0.0;
  for (int s = 0; s < coarse.n_states(); ++s) {
    for (std::size_t r = 0; r < coarse.grid().size(); ++r) {
      gap = std::max(gap, std::abs(coarse.at(0, s, r) - fine.value(0, s, coarse.grid().point(r))));
    }
  }
  return gap;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

}  // namespace

TEST_CASE("hamiltonian_min: singleton action set") {
  auto m = load_builtin("two_two", {});
  m.A0 = ActionSet::scalars({1.0});
  const SimplexGrid grid(2, 4);
  const auto acts = tabulate_actions(m, grid, constant_profile(0, 1), 0.2);
  std::vector<double> slice(2 * grid.size());
  for (std::size_t k = 0; k < slice.size(); ++k) slice[k] = 0.1 * k;
  const auto h = hamiltonian_min(m, Role::kMajor, grid, 0.2, 1, 0, 3, slice, acts);
  CHECK(h.action == 0);
  CHECK_FALSE(h.tie);
  std::vector<double> out(slice.size());
  apply_jump(m, Role::kMajor, grid, acts, 0.2, slice, out, true);
  CHECK(h.value == doctest::Approx(out[grid.size() + 3]).epsilon(1e-14));
}

TEST_CASE("hamiltonian_min: costly action with no effect is dominated") {
  auto m = load_builtin("two_two", {});
  m.q0 = with_major_diagonal([](double, int, int, ActionView, StateView) { return 0.7; }, 2);
  m.f0 = [](double, int, ActionView a0, StateView) { return 0.4 * a0[0]; };
  const SimplexGrid grid(2, 5);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> slice(2 * grid.size());
  for (auto& v : slice) v = u(rng);
  const auto acts = tabulate_actions(m, grid, constant_profile(0, 0), 0.5);
  for (int i0 = 0; i0 < 2; ++i0) {
    for (std::size_t r = 0; r < grid.size(); ++r) {
      CHECK(hamiltonian_min(m, Role::kMajor, grid, 0.5, i0, 0, r, slice, acts).action == 0);
    }
  }
}

TEST_CASE("an empty action set is rejected") {
  CHECK_THROWS_WITH_AS(ActionSet::scalars({}), doctest::Contains("NoActions"), Error);
}

TEST_CASE("hamiltonian_min matches a direct evaluation of the bracket") {
  for (const char* name : {"two_two", "cyber4"}) {
    const auto m = load_builtin(name, {});
    const int K = 6;
    const SimplexGrid grid(m.M, K);
    const std::size_t G = grid.size();
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto prof = testing::hashed_profile(m, 8);
    for (int trial = 0; trial < 40; ++trial) {
      const double t = 0.5 * (u(rng) + 1.0) * m.T;
      const auto acts = tabulate_actions(m, grid, prof, t);
      const std::size_t r = rng() % G;
      const auto k = grid.unrank(r);
      std::vector<int> occ(k.begin(), k.end());
      occ.push_back(grid.last_count(r));
      const std::vector<double> x(grid.point(r).begin(), grid.point(r).end());
      auto rank_after = [&](int from, int to) {
        std::vector<int> c(occ);
        --c[from];
        ++c[to];
        if (c[from] < 0) return SimplexGrid::npos;
        return grid.rank(std::span<const int>(c.data(), m.M - 1));
      };

      // major
      std::vector<double> v0(m.M0 * G);
      for (auto& v : v0) v = u(rng);
      const int i0 = static_cast<int>(rng() % m.M0);
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t a0 = 0; a0 < m.A0.size(); ++a0) {
        double b = m.f0(t, i0, m.A0[a0], x);
        for (int j0 = 0; j0 < m.M0; ++j0) {
          if (j0 != i0) b += m.q0(t, i0, j0, m.A0[a0], x) * (v0[j0 * G + r] - v0[i0 * G + r]);
        }
        for (int i = 0; i < m.M; ++i) {
          const ActionView a = m.A[acts.minor[(i0 * m.M + i) * G + r]];
          for (int j = 0; j < m.M; ++j) {
            if (j == i || occ[i] == 0) continue;
            b += occ[i] * m.q(t, i, j, a, i0, m.A0[a0], x) * (v0[i0 * G + rank_after(i, j)] - v0[i0 * G + r]);
          }
        }
        if (b < best - 1e-12) {
          best = b;
          arg = a0;
        }
      }
      const auto hm = hamiltonian_min(m, Role::kMajor, grid, t, i0, 0, r, v0, acts);
      CHECK(hm.action == arg);
      CHECK(hm.value == doctest::Approx(best).epsilon(1e-12));

      // minor (own jumps only; the rest of the generator does not depend on the action)
      std::vector<double> v(m.M0 * m.M * G);
      for (auto& w : v) w = u(rng);
      const int i = static_cast<int>(rng() % m.M);
      const ActionView a0 = m.A0[acts.major[i0 * G + r]];
      best = std::numeric_limits<double>::infinity();
      arg = 0;
      for (std::size_t a = 0; a < m.A.size(); ++a) {
        double b = m.f(t, i, m.A[a], i0, a0, x);
        for (int j = 0; j < m.M; ++j) {
          if (j == i) continue;
          std::size_t to = rank_after(i, j);
          if (to == SimplexGrid::npos) to = r;
          b += m.q(t, i, j, m.A[a], i0, a0, x) * (v[(i0 * m.M + j) * G + to] - v[(i0 * m.M + i) * G + r]);
        }
        if (b < best - 1e-12) {
          best = b;
          arg = a;
        }
      }
      const auto hn = hamiltonian_min(m, Role::kMinor, grid, t, i0, i, r, v, acts);
      CHECK(hn.action == arg);
      CHECK(hn.value == doctest::Approx(best).epsilon(1e-12));
    }
  }
}

TEST_CASE("solve_hjb: zero costs") {
  const auto m = testing::zero_costs(load_builtin("cyber4", {}));
  for (Role role : {Role::kMajor, Role::kMinor}) {
    const auto res = solve_hjb(m, role, constant_profile(0, 0), 4);
    for (double v : res.values.raw()) CHECK(v == 0.0);
    for (auto a : res.policy->raw()) CHECK(a == 0);
  }
}

TEST_CASE("solve_hjb: K must be at least 2") {
  const auto m = load_builtin("two_two", {});
  CHECK_THROWS_WITH_AS(solve_hjb(m, Role::kMajor, constant_profile(0, 0), 1), doctest::Contains("BadParameter"),
                       Error);
}

TEST_CASE("solve_hjb on the decoupled model equals the finite-state control problems") {
  const auto m = load_builtin("decoupled", {});
  const auto major = testing::decoupled_major_oracle(m);
  const auto minor = testing::decoupled_minor_oracle(m);
  const auto prof = testing::hashed_profile(m, 12);
  const int K = 6;
  const auto V0 = solve_hjb(m, Role::kMajor, prof, K, 2000);
  const auto V = solve_hjb(m, Role::kMinor, prof, K, 2000);
  const std::size_t G = V0.values.grid().size();
  double gap0 = 0.0, gap = 0.0, spread = 0.0;
  for (int i0 = 0; i0 < m.M0; ++i0) {
    for (std::size_t r = 0; r < G; ++r) {
      gap0 = std::max(gap0, std::abs(V0.values.at(0, i0, r) - major[i0]));
      spread = std::max(spread, std::abs(V0.values.at(0, i0, r) - V0.values.at(0, i0, 0)));
      for (int i = 0; i < m.M; ++i) gap = std::max(gap, std::abs(V.values.at(0, i0 * m.M + i, r) - minor[i]));
    }
  }
  INFO("major gap " << gap0 << " minor gap " << gap);
  CHECK(spread <= 1e-12);
  CHECK(gap0 <= 1e-6);
  CHECK(gap <= 1e-6);
}

TEST_CASE("solve_hjb: successive K doublings shrink the gap on two_two") {
  const auto m = load_builtin("two_two", {});
  const PolicyProfile prof{constant_major(1), constant_minor(1), nullptr};
  for (Role role : {Role::kMajor, Role::kMinor}) {
    const auto v16 = solve_hjb(m, role, prof, 16).values;
    const auto v32 = solve_hjb(m, role, prof, 32).values;
    const auto v64 = solve_hjb(m, role, prof, 64).values;
    const double a = sup_gap_on_coarse_nodes(v16, v32);
    const double b = sup_gap_on_coarse_nodes(v32, v64);
    INFO(role_name(role) << ": " << a << " then " << b);
    CHECK(b < a);
  }
}

TEST_CASE("value tables respect the sup-norm bound on every builtin") {
  for (const auto& name : builtin_names()) {
    const auto m = load_builtin(name, {});
    const auto prof = testing::hashed_profile(m, 31);
    for (Role role : {Role::kMajor, Role::kMinor}) {
      const auto res = solve_hjb(m, role, prof, 5);
      CHECK(res.values.bound > 0.0);
      CHECK_MESSAGE(res.values.sup_abs() <= res.values.bound * (1 + 1e-12), name);
      const auto term = terminal_slice(m, role, res.values.grid());
      const auto last = res.values.slice(res.values.time().steps);
      CHECK(std::equal(term.begin(), term.end(), last.begin()));
    }
  }
}

TEST_CASE("raising the terminal cost never lowers the value") {
  const auto m = load_builtin("two_two", {});
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 0.7);
  std::vector<double> bump(4 * 32);
  for (auto& v : bump) v = u(rng);
  auto cell = [](StateView x) { return static_cast<int>(x[0] * 31); };
  const auto raised = with_terminal_shift(
      m, [&](int i0, StateView x) { return bump[i0 * 32 + cell(x)]; },
      [&](int i, int i0, StateView x) { return bump[64 + (i0 * 2 + i) % 2 * 32 + cell(x)]; });
  const auto prof = testing::hashed_profile(m, 2);
  for (Role role : {Role::kMajor, Role::kMinor}) {
    const auto a = solve_hjb(m, role, prof, 12).values;
    const auto b = solve_hjb(raised, role, prof, 12).values;
    for (std::size_t k = 0; k < a.raw().size(); ++k) CHECK(b.raw()[k] >= a.raw()[k] - 1e-12);
  }
}

TEST_CASE("a unit terminal shift with action-free costs adds exactly one") {
  auto m = load_builtin("two_two", {});
  m.f0 = [](double, int i0, ActionView, StateView x) { return 0.3 * i0 + x[0]; };
  m.f = [](double, int i, ActionView, int, ActionView, StateView) { return 0.5 * i; };
  const auto raised = with_terminal_shift(m, [](int, StateView) { return 1.0; }, [](int, int, StateView) { return 1.0; });
  const auto prof = constant_profile(0, 1);
  for (Role role : {Role::kMajor, Role::kMinor}) {
    const auto a = solve_hjb(m, role, prof, 8).values;
    const auto b = solve_hjb(raised, role, prof, 8).values;
    for (std::size_t k = 0; k < a.raw().size(); ++k) CHECK(b.raw()[k] - a.raw()[k] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("solve_master: zero costs") {
  const auto m = testing::zero_costs(load_builtin("two_two", {}));
  const auto sol = solve_master(m, 4);
  for (double v : sol.V0.raw()) CHECK(v == 0.0);
  for (double v : sol.V.raw()) CHECK(v == 0.0);
  for (auto a : sol.phi0.raw()) CHECK(a == 0);
  for (auto a : sol.phi.raw()) CHECK(a == 0);
}

TEST_CASE("solve_master on the decoupled model equals the two control problems") {
  const auto m = load_builtin("decoupled", {});
  const auto major = testing::decoupled_major_oracle(m);
  const auto minor = testing::decoupled_minor_oracle(m);
  const auto sol = solve_master(m, 5, 2000);
  const std::size_t G = sol.V0.grid().size();
  for (int i0 = 0; i0 < m.M0; ++i0) {
    for (std::size_t r = 0; r < G; ++r) {
      CHECK(std::abs(sol.V0.at(0, i0, r) - major[i0]) <= 1e-6);
      for (int i = 0; i < m.M; ++i) CHECK(std::abs(sol.V.at(0, i0 * m.M + i, r) - minor[i]) <= 1e-6);
    }
  }
}

TEST_CASE("solve_master needs a minor problem free of the major action") {
  auto m = load_builtin("two_two", {});
  m.alpha0_free = false;
  CHECK_THROWS_AS(solve_master(m, 4), Error);
}

TEST_CASE("master policies are a fixed point of the best response on two_two, T = 0.25") {
  const auto m = load_builtin("two_two", {{"T", 0.25}});
  const int K = 16;
  const auto sol = solve_master(m, K);
  const int steps = sol.V0.time().steps;
  const auto br = best_response(m, sol.phi0, sol.phi, K, steps);
  CHECK(br.phi0().count_differences(sol.phi0) == 0);
  CHECK(br.phi().count_differences(sol.phi) == 0);

  // each HJB re-solved against the master's opponents reproduces the master value
  CHECK(max_abs_diff(br.major.values.raw(), sol.V0.raw()) <= 5 * kIntegrationTol);
  CHECK(max_abs_diff(br.minor.values.raw(), sol.V.raw()) <= 5 * kIntegrationTol);
}

TEST_CASE("master values are attained by the master policies") {
  const auto m = load_builtin("cyber4", {{"T", 0.5}});
  const auto sol = solve_master(m, 4);
  const auto prof = tabulated_profile(sol.phi0, sol.phi);
  const int steps = sol.V0.time().steps;
  const auto J0 = solve_cost_ode(m, Role::kMajor, prof, 4, steps);
  const auto J = solve_cost_ode(m, Role::kMinor, prof, 4, steps);
  CHECK(max_abs_diff(J0.raw(), sol.V0.raw()) <= 5 * kIntegrationTol);
  CHECK(max_abs_diff(J.raw(), sol.V.raw()) <= 5 * kIntegrationTol);
}

TEST_CASE("dpp_check") {
  const auto m = load_builtin("two_two", {});
  const PolicyProfile prof{constant_major(0), constant_minor(1), nullptr};
  for (Role role : {Role::kMajor, Role::kMinor}) {
    CHECK(dpp_check(m, role, prof, 8, 0.5, 1.0, 400) == 0.0);
    const double whole = dpp_check(m, role, prof, 8, 0.3, 0.7, 400);
    CHECK(whole <= 1e-8);
    const double first = dpp_check(m, role, prof, 8, 0.3, 0.5, 400);
    const double second = dpp_check(m, role, prof, 8, 0.5, 0.7, 400);
    CHECK(std::abs(whole - std::max(first, second)) <= 10 * kIntegrationTol);
  }
  CHECK_THROWS_AS(dpp_check(m, Role::kMajor, prof, 8, 0.3001, 0.7, 400), Error);
  CHECK_THROWS_AS(dpp_check(m, Role::kMajor, prof, 8, 0.7, 0.3, 400), Error);
}
