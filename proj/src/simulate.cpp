#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "mfg/error.hpp"
#include "mfg/nplayer.hpp"
#include "mfg/parallel.hpp"
#include "mfg/rng.hpp"

namespace mfg {

CostStats mean_and_se(std::span<const double> samples) {
  CostStats out;
  const std::size_t n = samples.size();
  if (n == 0) return out;
  if (std::all_of(samples.begin(), samples.end(), [&](double v) { return v == samples[0]; })) {
    out.mean = samples[0];
    return out;
  }
  double sum = 0.0;
  for (double v : samples) sum += v;
  out.mean = sum / n;
  if (n > 1) {
    double ss = 0.0;
    for (double v : samples) ss += (v - out.mean) * (v - out.mean);
    out.se = std::sqrt(ss / (n - 1) / n);
  }
  return out;
}

namespace {

// 5-point Gauss-Legendre rule on [-1, 1].
constexpr std::array<double, 5> kGlNodes = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                            0.5384693101056831, 0.9061798459386640};
constexpr std::array<double, 5> kGlWeights = {0.2369268850561891, 0.4786286704993665,
                                              0.5688888888888889, 0.4786286704993665,
                                              0.2369268850561891};

struct GameState {
  int i0;
  int i;
  std::vector<int> occ;  // all N minors, tagged included; size M
};

class PathSimulator {
 public:
  PathSimulator(const ModelSpec& model, const PolicyProfile& profile, int N)
      : model_(model), profile_(profile), N_(N), x_(model.M - 1) {}

  void set_x(const GameState& s) {
    for (int c = 0; c < model_.M - 1; ++c) x_[c] = static_cast<double>(s.occ[c]) / N_;
  }

  // Running cost rates (major, tagged, mean of others) at time t.
  std::array<double, 3> running(double t, const GameState& s) {
    set_x(s);
    const std::size_t a0 = profile_.major(t, s.i0, x_);
    const ActionView av0 = model_.A0[a0];
    std::array<double, 3> out{};
    out[0] = model_.f0(t, s.i0, av0, x_);
    out[1] = model_.f(t, s.i, model_.A[profile_.tagged()(t, s.i, s.i0, x_)], s.i0, av0, x_);
    if (N_ > 1) {
      double acc = 0.0;
      for (int k = 0; k < model_.M; ++k) {
        const int occ = s.occ[k] - (k == s.i ? 1 : 0);
        if (occ > 0) acc += occ * model_.f(t, k, model_.A[profile_.minor(t, k, s.i0, x_)], s.i0, av0, x_);
      }
      out[2] = acc / (N_ - 1);
    }
    return out;
  }

  std::array<double, 3> terminal(const GameState& s) {
    set_x(s);
    std::array<double, 3> out{};
    out[0] = model_.g0(s.i0, x_);
    out[1] = model_.g(s.i, s.i0, x_);
    if (N_ > 1) {
      double acc = 0.0;
      for (int k = 0; k < model_.M; ++k) {
        const int occ = s.occ[k] - (k == s.i ? 1 : 0);
        if (occ > 0) acc += occ * model_.g(k, s.i0, x_);
      }
      out[2] = acc / (N_ - 1);
    }
    return out;
  }

  void integrate(double a, double b, const GameState& s, double* acc) {
    if (!(b > a)) return;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (int k = 0; k < 5; ++k) {
      const auto r = running(mid + half * kGlNodes[k], s);
      for (int c = 0; c < 3; ++c) acc[c] += half * kGlWeights[k] * r[c];
    }
  }

  // Fills the event list (kind, from, to, rate) and returns the total rate.
  struct Event {
    int who;
    int from;
    int to;
    double rate;
  };
  double rates(double t, const GameState& s, std::vector<Event>& events) {
    events.clear();
    set_x(s);
    const ActionView av0 = model_.A0[profile_.major(t, s.i0, x_)];
    double total = 0.0;
    auto push = [&](int who, int from, int to, double r) {
      if (r < 0.0) throw Error(Errc::kRateBoundViolation, "negative jump rate during simulation");
      if (r > 0.0) {
        events.push_back({who, from, to, r});
        total += r;
      }
    };
    for (int j0 = 0; j0 < model_.M0; ++j0) {
      if (j0 != s.i0) push(-1, s.i0, j0, model_.q0(t, s.i0, j0, av0, x_));
    }
    const ActionView abar = model_.A[profile_.tagged()(t, s.i, s.i0, x_)];
    for (int j = 0; j < model_.M; ++j) {
      if (j != s.i) push(0, s.i, j, model_.q(t, s.i, j, abar, s.i0, av0, x_));
    }
    for (int k = 0; k < model_.M; ++k) {
      const int occ = s.occ[k] - (k == s.i ? 1 : 0);
      if (occ == 0) continue;
      const ActionView a = model_.A[profile_.minor(t, k, s.i0, x_)];
      for (int j = 0; j < model_.M; ++j) {
        if (j != k) push(1, k, j, occ * model_.q(t, k, j, a, s.i0, av0, x_));
      }
    }
    return total;
  }

 private:
  const ModelSpec& model_;
  const PolicyProfile& profile_;
  int N_;
  std::vector<double> x_;
};

std::vector<int> initial_counts(const ModelSpec& model, const InitialState& init, int N) {
  if (static_cast<int>(init.x.size()) != model.M - 1 || !in_simplex(init.x)) {
    throw Error(Errc::kOutOfSimplex, "initial measure is not a point of the simplex");
  }
  if (init.i0 < 0 || init.i0 >= model.M0 || init.i < 0 || init.i >= model.M) {
    throw Error(Errc::kBadParameter, "initial state out of range");
  }
  std::vector<int> occ(model.M, 0);
  int sum = 0;
  for (int c = 0; c < model.M - 1; ++c) {
    const double k = init.x[c] * N;
    occ[c] = static_cast<int>(std::lround(k));
    if (std::abs(k - occ[c]) > 1e-9 * std::max(1, N)) {
      throw Error(Errc::kBadParameter, "initial measure is not a point of P^N for N=" + std::to_string(N));
    }
    sum += occ[c];
  }
  if (sum > N) throw Error(Errc::kBadParameter, "initial measure is not a point of P^N");
  occ[model.M - 1] = N - sum;
  if (occ[init.i] < 1) {
    throw Error(Errc::kBadParameter, "initial measure puts nobody in the tagged player's state");
  }
  return occ;
}

}  // namespace

SimulationResult simulate_paths(const ModelSpec& model, const PolicyProfile& profile,
                                const InitialState& init, const SimulationOptions& opts) {
  const int N = opts.N;
  if (N < 1) throw Error(Errc::kBadParameter, "N must be >= 1");
  if (!profile.major || !profile.minor) throw Error(Errc::kBadParameter, "simulation needs major and minor policies");
  const std::vector<int> occ0 = initial_counts(model, init, N);
  const double T = model.T;
  // Exit rate of the whole system: |q0(i0,i0)| + sum over minors |q(k,k)| <= C (N + 1).
  const double envelope = model.rate_bound * (N + 1);
  const SimplexGrid grid(model.M, N);
  auto rank_of = [&](const std::vector<int>& occ) {
    return grid.rank(std::span<const int>(occ.data(), model.M - 1));
  };

  const std::size_t P = opts.n_paths;
  SimulationResult res;
  res.major_cost.assign(P, 0.0);
  res.tagged_cost.assign(P, 0.0);
  res.others_cost.assign(P, 0.0);
  res.final_i0.assign(P, 0);
  res.final_i.assign(P, 0);
  res.final_rank.assign(P, 0);
  res.jump_count.assign(P, 0);
  if (opts.record_paths) res.paths.resize(P);

  parallel_for(
      P,
      [&](std::size_t p) {
        Rng rng(opts.seed, "nplayer", p);
        PathSimulator sim(model, profile, N);
        std::vector<PathSimulator::Event> events;
        GameState s{init.i0, init.i, occ0};
        PathRecord* rec = opts.record_paths ? &res.paths[p] : nullptr;
        if (rec) {
          rec->seed = substream_seed(opts.seed, "nplayer", p);
          rec->i0 = s.i0;
          rec->i = s.i;
          rec->rank = rank_of(s.occ);
        }
        double acc[3] = {0.0, 0.0, 0.0};
        double t = opts.t0;
        double last = opts.t0;
        std::size_t jumps = 0;
        while (true) {
          t += rng.exponential(envelope);
          if (t >= T) break;
          const double total = sim.rates(t, s, events);
          if (total > envelope * (1.0 + 1e-12)) {
            throw Error(Errc::kRateBoundViolation, "total exit rate " + std::to_string(total) +
                                                      " exceeds (N+1) * rate_bound");
          }
          double v = rng.uniform() * envelope;
          if (v >= total) continue;
          sim.integrate(last, t, s, acc);
          last = t;
          std::size_t e = 0;
          while (e + 1 < events.size() && v >= events[e].rate) v -= events[e++].rate;
          const auto& ev = events[e];
          if (ev.who == -1) {
            s.i0 = ev.to;
          } else {
            --s.occ[ev.from];
            ++s.occ[ev.to];
            if (ev.who == 0) s.i = ev.to;
          }
          ++jumps;
          if (rec) rec->jumps.push_back({t, ev.who, ev.from, ev.to, s.i0, s.i, rank_of(s.occ)});
        }
        sim.integrate(last, T, s, acc);
        const auto term = sim.terminal(s);
        res.major_cost[p] = acc[0] + term[0];
        res.tagged_cost[p] = acc[1] + term[1];
        res.others_cost[p] = acc[2] + term[2];
        res.final_i0[p] = s.i0;
        res.final_i[p] = s.i;
        res.final_rank[p] = rank_of(s.occ);
        res.jump_count[p] = jumps;
        if (rec) {
          for (int c = 0; c < 3; ++c) {
            rec->running[c] = acc[c];
            rec->terminal[c] = term[c];
          }
        }
      },
      1);

  res.major = mean_and_se(res.major_cost);
  res.tagged = mean_and_se(res.tagged_cost);
  res.others = mean_and_se(res.others_cost);
  return res;
}

}  // namespace mfg
