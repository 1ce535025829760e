#include "mfg/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfg/error.hpp"
#include "mfg/parallel.hpp"
#include "mfg/rng.hpp"

namespace mfg {

namespace {

constexpr double kClipTol = 1e-9;
constexpr double kLeaveTol = 1e-6;

double excursion(StateView x) {
  double e = 0.0, sum = 0.0;
  for (double v : x) {
    e = std::max(e, -v);
    sum += v;
  }
  return std::max(e, sum - 1.0);
}

// Pulls x back onto P when the excursion is within rounding; larger
// excursions mean the model lets mass leave the simplex.
void settle(std::span<double> x, double t) {
  const double e = excursion(x);
  if (e <= 0.0) return;
  if (e > kLeaveTol) {
    throw Error(Errc::kFlowLeftSimplex, "measure left the simplex by " + std::to_string(e) +
                                            " at t=" + std::to_string(t));
  }
  if (e > kClipTol) return;
  double sum = 0.0;
  for (double& v : x) {
    v = std::max(v, 0.0);
    sum += v;
  }
  if (sum > 1.0) {
    for (double& v : x) v /= sum;
  }
}

void field_into(const ModelSpec& model, const MajorPolicy& phi0, const MinorPolicy& phi, double t,
                int i0, StateView x, std::span<double> out) {
  const int M = model.M;
  const ActionView a0 = model.A0[phi0(t, i0, x)];
  double last = 1.0;
  for (double v : x) last -= v;
  std::fill(out.begin(), out.end(), 0.0);
  for (int i = 0; i < M; ++i) {
    const double xi = i < M - 1 ? x[i] : last;
    if (xi == 0.0) continue;
    const ActionView a = model.A[phi(t, i, i0, x)];
    for (int j = 0; j < M - 1; ++j) out[j] += xi * model.q(t, i, j, a, i0, a0, x);
  }
}

}  // namespace

std::vector<double> vector_field(const ModelSpec& model, const MajorPolicy& phi0,
                                 const MinorPolicy& phi, double t, int i0, StateView x) {
  std::vector<double> v(model.M - 1);
  field_into(model, phi0, phi, t, i0, x, v);
  return v;
}

FlowPath flow(const ModelSpec& model, const MajorPolicy& phi0, const MinorPolicy& phi, int i0,
              std::vector<double> x0, double t0, double t1, double step) {
  if (static_cast<int>(x0.size()) != model.M - 1 || excursion(x0) > kClipTol) {
    throw Error(Errc::kOutOfSimplex, "flow start is not a point of the simplex");
  }
  if (!(step > 0.0)) throw Error(Errc::kBadParameter, "flow step must be positive");
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(t1 - t0) / step - 1e-12)));
  const double h = (t1 - t0) / n;
  const std::size_t d = x0.size();
  FlowPath path;
  path.t.push_back(t0);
  path.x.push_back(x0);
  std::vector<double> x = std::move(x0), y(d), k1(d), k2(d), k3(d), k4(d);
  for (int s = 0; s < n; ++s) {
    const double t = t0 + s * h;
    field_into(model, phi0, phi, t, i0, x, k1);
    for (std::size_t c = 0; c < d; ++c) y[c] = x[c] + 0.5 * h * k1[c];
    field_into(model, phi0, phi, t + 0.5 * h, i0, y, k2);
    for (std::size_t c = 0; c < d; ++c) y[c] = x[c] + 0.5 * h * k2[c];
    field_into(model, phi0, phi, t + 0.5 * h, i0, y, k3);
    for (std::size_t c = 0; c < d; ++c) y[c] = x[c] + h * k3[c];
    field_into(model, phi0, phi, t + h, i0, y, k4);
    for (std::size_t c = 0; c < d; ++c) x[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    const double tn = s + 1 == n ? t1 : t0 + (s + 1) * h;
    settle(x, tn);
    path.t.push_back(tn);
    path.x.push_back(x);
  }
  return path;
}

namespace {

// Augmented state: x (M - 1 entries), major cost, tagged cost.
class PdmpPathSim {
 public:
  PdmpPathSim(const ModelSpec& model, PdmpMode mode, const PolicyProfile& profile)
      : model_(model), mode_(mode), profile_(profile), d_(model.M - 1), dy_(4, std::vector<double>(d_ + 2)) {}

  void deriv(double t, int i0, int i, std::span<const double> y, std::span<double> dy) {
    const StateView x = y.first(d_);
    field_into(model_, profile_.major, profile_.minor, t, i0, x, dy.first(d_));
    const ActionView a0 = model_.A0[profile_.major(t, i0, x)];
    dy[d_] = model_.f0(t, i0, a0, x);
    dy[d_ + 1] = mode_ == PdmpMode::kTriple
                     ? model_.f(t, i, model_.A[profile_.tagged()(t, i, i0, x)], i0, a0, x)
                     : 0.0;
  }

  void rk4(double t, double h, int i0, int i, std::span<const double> y, std::span<double> out) {
    const std::size_t n = y.size();
    std::vector<double> tmp(n);
    deriv(t, i0, i, y, dy_[0]);
    for (std::size_t c = 0; c < n; ++c) tmp[c] = y[c] + 0.5 * h * dy_[0][c];
    deriv(t + 0.5 * h, i0, i, tmp, dy_[1]);
    for (std::size_t c = 0; c < n; ++c) tmp[c] = y[c] + 0.5 * h * dy_[1][c];
    deriv(t + 0.5 * h, i0, i, tmp, dy_[2]);
    for (std::size_t c = 0; c < n; ++c) tmp[c] = y[c] + h * dy_[2][c];
    deriv(t + h, i0, i, tmp, dy_[3]);
    for (std::size_t c = 0; c < n; ++c) {
      out[c] = y[c] + h / 6.0 * (dy_[0][c] + 2.0 * dy_[1][c] + 2.0 * dy_[2][c] + dy_[3][c]);
    }
    settle(out.first(d_), t + h);
  }

  struct Candidate {
    int who;
    int to;
    double rate;
  };

  double rates(double t, int i0, int i, StateView x, std::vector<Candidate>& out) {
    out.clear();
    double total = 0.0;
    const ActionView a0 = model_.A0[profile_.major(t, i0, x)];
    auto push = [&](int who, int to, double r) {
      if (r < 0.0) throw Error(Errc::kRateBoundViolation, "negative jump rate in the limit dynamics");
      if (r > 0.0) {
        out.push_back({who, to, r});
        total += r;
      }
    };
    for (int j0 = 0; j0 < model_.M0; ++j0) {
      if (j0 != i0) push(-1, j0, model_.q0(t, i0, j0, a0, x));
    }
    if (mode_ == PdmpMode::kTriple) {
      const ActionView a = model_.A[profile_.tagged()(t, i, i0, x)];
      for (int j = 0; j < model_.M; ++j) {
        if (j != i) push(0, j, model_.q(t, i, j, a, i0, a0, x));
      }
    }
    return total;
  }

 private:
  const ModelSpec& model_;
  PdmpMode mode_;
  const PolicyProfile& profile_;
  std::size_t d_;
  std::vector<std::vector<double>> dy_;
};

}  // namespace

PdmpResult simulate_pdmp(const ModelSpec& model, PdmpMode mode, const PolicyProfile& profile,
                         const InitialState& init, const PdmpOptions& opts) {
  if (!profile.major || !profile.minor) throw Error(Errc::kBadParameter, "simulation needs major and minor policies");
  if (static_cast<int>(init.x.size()) != model.M - 1 || excursion(init.x) > kClipTol) {
    throw Error(Errc::kOutOfSimplex, "initial measure is not a point of the simplex");
  }
  if (init.i0 < 0 || init.i0 >= model.M0 || init.i < 0 || init.i >= model.M) {
    throw Error(Errc::kBadParameter, "initial state out of range");
  }
  if (opts.output_points < 2) throw Error(Errc::kBadParameter, "output_points must be >= 2");
  if (!(opts.flow_step > 0.0)) throw Error(Errc::kBadParameter, "flow_step must be positive");
  const double T = model.T;
  const double t0 = opts.t0;
  if (t0 > T) throw Error(Errc::kBadParameter, "t0 must not exceed T");

  // Integration lattice: every output interval split into equal sub-steps.
  std::vector<double> lattice;
  std::vector<char> is_output;
  {
    const int P = opts.output_points;
    const double span = T - t0;
    const int sub = std::max(1, static_cast<int>(std::ceil(span / (P - 1) / opts.flow_step - 1e-12)));
    const int total = (P - 1) * sub;
    for (int k = 1; k <= total; ++k) {
      lattice.push_back(k == total ? T : t0 + span * k / total);
      is_output.push_back(k % sub == 0);
    }
  }
  const double envelope = model.rate_bound * (model.M0 + model.M);
  const std::size_t d = model.M - 1;
  const std::size_t n_paths = opts.n_paths;

  PdmpResult res;
  res.major_cost.assign(n_paths, 0.0);
  if (mode == PdmpMode::kTriple) res.tagged_cost.assign(n_paths, 0.0);
  res.final_i0.assign(n_paths, 0);
  res.final_x.assign(n_paths, {});
  if (opts.record_paths) res.paths.resize(n_paths);

  parallel_for(
      n_paths,
      [&](std::size_t p) {
        Rng rng(opts.seed, "pdmp", p);
        PdmpPathSim sim(model, mode, profile);
        std::vector<PdmpPathSim::Candidate> cands;
        PdmpPath* rec = opts.record_paths ? &res.paths[p] : nullptr;
        int i0 = init.i0;
        int i = init.i;
        std::vector<double> y(d + 2, 0.0), trial(d + 2);
        std::copy(init.x.begin(), init.x.end(), y.begin());
        auto record = [&](double t) {
          rec->times.push_back(t);
          rec->i0.push_back(i0);
          rec->i.push_back(i);
          rec->x.emplace_back(y.begin(), y.begin() + d);
        };
        if (rec) {
          rec->seed = substream_seed(opts.seed, "pdmp", p);
          record(t0);
        }
        double t = t0;
        double tp = t0 + rng.exponential(envelope);
        for (std::size_t k = 0; k < lattice.size();) {
          const double node = lattice[k];
          if (tp < node) {
            if (tp > t) {
              sim.rk4(t, tp - t, i0, i, y, trial);
            } else {
              trial = y;
            }
            const double total = sim.rates(tp, i0, i, StateView(trial.data(), d), cands);
            if (total > envelope * (1.0 + 1e-12)) {
              throw Error(Errc::kRateBoundViolation, "jump rate " + std::to_string(total) +
                                                        " exceeds rate_bound * (M0 + M)");
            }
            double v = rng.uniform() * envelope;
            if (v < total) {
              t = tp;
              y = trial;
              std::size_t e = 0;
              while (e + 1 < cands.size() && v >= cands[e].rate) v -= cands[e++].rate;
              const auto& c = cands[e];
              if (rec) rec->jumps.push_back({t, c.who, c.who == -1 ? i0 : i, c.to});
              if (c.who == -1) {
                i0 = c.to;
              } else {
                i = c.to;
              }
              if (rec) record(t);
            }
            tp += rng.exponential(envelope);
            continue;
          }
          sim.rk4(t, node - t, i0, i, y, trial);
          y.swap(trial);
          t = node;
          if (rec && is_output[k]) record(t);
          ++k;
        }
        const StateView x(y.data(), d);
        res.major_cost[p] = y[d] + model.g0(i0, x);
        if (mode == PdmpMode::kTriple) res.tagged_cost[p] = y[d + 1] + model.g(i, i0, x);
        res.final_i0[p] = i0;
        res.final_x[p].assign(y.begin(), y.begin() + d);
        if (rec) {
          rec->major_cost = res.major_cost[p];
          if (mode == PdmpMode::kTriple) rec->tagged_cost = res.tagged_cost[p];
        }
      },
      1);

  res.major = mean_and_se(res.major_cost);
  if (mode == PdmpMode::kTriple) res.tagged = mean_and_se(res.tagged_cost);
  return res;
}

CostStats mc_cost(const ModelSpec& model, PdmpMode mode, const PolicyProfile& profile,
                  const InitialState& init, std::size_t n_paths, std::uint64_t seed) {
  PdmpOptions opts;
  opts.n_paths = n_paths;
  opts.seed = seed;
  const auto res = simulate_pdmp(model, mode, profile, init, opts);
  return mode == PdmpMode::kPair ? res.major : res.tagged;
}

}  // namespace mfg
