#pragma once

// Shared helpers for the test binaries.

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "mfg/generator.hpp"
#include "mfg/model.hpp"
#include "mfg/rng.hpp"

namespace testing {

inline std::uint64_t mix(std::uint64_t seed, std::initializer_list<long long> parts) {
  std::uint64_t s = seed;
  std::uint64_t h = mfg::splitmix64(s);
  for (long long p : parts) {
    s ^= static_cast<std::uint64_t>(p) + 0x9e37ULL;
    h ^= mfg::splitmix64(s);
  }
  return h;
}

// Deterministic pseudo-random feedback functions: piecewise constant on cells
// of width 1/64 in x, time independent.
inline mfg::MajorPolicy hashed_major(std::uint64_t seed, std::size_t n) {
  return [seed, n](double, int i0, mfg::StateView x) {
    long long cell = 0;
    for (double v : x) cell = cell * 97 + static_cast<long long>(std::floor(v * 64));
    return static_cast<std::size_t>(mix(seed, {i0, cell}) % n);
  };
}

inline mfg::MinorPolicy hashed_minor(std::uint64_t seed, std::size_t n) {
  return [seed, n](double, int i, int i0, mfg::StateView x) {
    long long cell = 0;
    for (double v : x) cell = cell * 97 + static_cast<long long>(std::floor(v * 64));
    return static_cast<std::size_t>(mix(seed, {i, i0, cell}) % n);
  };
}

inline mfg::PolicyProfile hashed_profile(const mfg::ModelSpec& m, std::uint64_t seed) {
  return {hashed_major(seed, m.A0.size()), hashed_minor(seed + 1, m.A.size()),
          hashed_minor(seed + 2, m.A.size())};
}

inline mfg::ModelSpec zero_costs(mfg::ModelSpec m) {
  m.f0 = [](double, int, mfg::ActionView, mfg::StateView) { return 0.0; };
  m.f = [](double, int, mfg::ActionView, int, mfg::ActionView, mfg::StateView) { return 0.0; };
  m.g0 = [](int, mfg::StateView) { return 0.0; };
  m.g = [](int, int, mfg::StateView) { return 0.0; };
  return m;
}

inline mfg::ModelSpec no_minor_moves(mfg::ModelSpec m) {
  m.q = [](double, int, int, mfg::ActionView, int, mfg::ActionView, mfg::StateView) { return 0.0; };
  return m;
}

inline mfg::ModelSpec no_major_moves(mfg::ModelSpec m) {
  m.q0 = [](double, int, int, mfg::ActionView, mfg::StateView) { return 0.0; };
  return m;
}

// two_two with minor rates q(1,2) = a, q(2,1) = b regardless of anything else.
inline mfg::ModelSpec linear_two_state(double a, double b) {
  mfg::ModelSpec m = mfg::load_builtin("two_two", {});
  m.q = mfg::with_minor_diagonal(
      [a, b](double, int i, int, mfg::ActionView, int, mfg::ActionView, mfg::StateView) { return i == 0 ? a : b; },
      2);
  m.rate_bound = std::max({a, b, m.rate_bound});
  return m;
}

inline double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

using Rate = std::function<double(int i, int j, std::size_t a)>;
using Cost = std::function<double(int i, std::size_t a)>;

// Dense finite-state HJB -v' = min_a [f(i,a) + sum_j q(i,j,a)(v_j - v_i)],
// classical RK4 with the minimum taken at every stage.
inline std::vector<double> chain_hjb(int n, std::size_t actions, const Rate& q, const Cost& f,
                              std::vector<double> v, double T, int steps) {
  auto rhs = [&](const std::vector<double>& w) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < actions; ++a) {
        double b = f(i, a);
        for (int j = 0; j < n; ++j) {
          if (j != i) b += q(i, j, a) * (w[j] - w[i]);
        }
        best = std::min(best, b);
      }
      out[i] = best;
    }
    return out;
  };
  const double h = T / steps;
  for (int s = 0; s < steps; ++s) {
    auto axpy = [&](const std::vector<double>& k, double c) {
      std::vector<double> w(v);
      for (int i = 0; i < n; ++i) w[i] += c * k[i];
      return w;
    };
    const auto k1 = rhs(v);
    const auto k2 = rhs(axpy(k1, h / 2));
    const auto k3 = rhs(axpy(k2, h / 2));
    const auto k4 = rhs(axpy(k3, h));
    for (int i = 0; i < n; ++i) v[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  return v;
}

inline std::vector<double> decoupled_major_oracle(const mfg::ModelSpec& m) {
  const double x0[] = {0.0, 0.0};
  return chain_hjb(
      m.M0, m.A0.size(), [&](int i, int j, std::size_t a) { return m.q0(0.0, i, j, m.A0[a], x0); },
      [&](int i, std::size_t a) { return m.f0(0.0, i, m.A0[a], x0); }, {m.g0(0, x0), m.g0(1, x0)}, m.T, 20000);
}

inline std::vector<double> decoupled_minor_oracle(const mfg::ModelSpec& m) {
  const double x0[] = {0.0, 0.0};
  const mfg::ActionView a0 = m.A0[0];
  std::vector<double> g(m.M);
  for (int i = 0; i < m.M; ++i) g[i] = m.g(i, 0, x0);
  return chain_hjb(
      m.M, m.A.size(), [&](int i, int j, std::size_t a) { return m.q(0.0, i, j, m.A[a], 0, a0, x0); },
      [&](int i, std::size_t a) { return m.f(0.0, i, m.A[a], 0, a0, x0); }, g, m.T, 20000);
}

}  // namespace testing
