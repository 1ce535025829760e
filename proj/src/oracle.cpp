#include <Eigen/Sparse>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <string>

#include "mfg/error.hpp"
#include "mfg/nplayer.hpp"

namespace mfg {

ProductSpace::ProductSpace(const ModelSpec& model, int N_) : M0(model.M0), M(model.M), N(N_) {
  if (N < 1) throw Error(Errc::kBadParameter, "N must be >= 1");
  std::size_t s = M0;
  for (int p = 0; p < N; ++p) {
    s *= M;
    if (s > kOracleCap) {
      throw Error(Errc::kOracleTooLarge, "product chain M0 * M^N exceeds " + std::to_string(kOracleCap));
    }
  }
  size = s;
}

std::size_t ProductSpace::encode(int i0, std::span<const int> players) const {
  std::size_t idx = 0;
  for (int p = N - 1; p >= 0; --p) idx = idx * M + players[p];
  return i0 + M0 * idx;
}

void ProductSpace::decode(std::size_t index, int& i0, std::vector<int>& players) const {
  i0 = static_cast<int>(index % M0);
  index /= M0;
  players.resize(N);
  for (int p = 0; p < N; ++p) {
    players[p] = static_cast<int>(index % M);
    index /= M;
  }
}

std::vector<int> ProductSpace::counts(std::span<const int> players) const {
  std::vector<int> k(M - 1, 0);
  for (int s : players) {
    if (s < M - 1) ++k[s];
  }
  return k;
}

namespace {

using SparseQ = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using State = std::vector<double>;

// Generator Q(t) with diagonal, and running costs per (state, player).
struct ProductChain {
  const ModelSpec& model;
  const PolicyProfile& profile;
  ProductSpace space;

  ProductChain(const ModelSpec& m, const PolicyProfile& p, int N) : model(m), profile(p), space(m, N) {
    if (!profile.major || !profile.minor) throw Error(Errc::kBadParameter, "oracle needs major and minor policies");
  }

  void build(double t, SparseQ& Q, Eigen::MatrixXd* costs) const {
    const int N = space.N;
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<int> players;
    std::vector<int> moved;
    std::vector<double> x(space.M - 1);
    if (costs) costs->setZero(space.size, N + 1);
    for (std::size_t idx = 0; idx < space.size; ++idx) {
      int i0;
      space.decode(idx, i0, players);
      const auto k = space.counts(players);
      for (int c = 0; c < space.M - 1; ++c) x[c] = static_cast<double>(k[c]) / N;
      const ActionView av0 = model.A0[profile.major(t, i0, x)];
      double out = 0.0;
      for (int j0 = 0; j0 < space.M0; ++j0) {
        if (j0 == i0) continue;
        const double r = model.q0(t, i0, j0, av0, x);
        if (r != 0.0) trip.emplace_back(idx, space.encode(j0, players), r);
        out += r;
      }
      if (costs) (*costs)(idx, 0) = model.f0(t, i0, av0, x);
      for (int p = 0; p < N; ++p) {
        const int s = players[p];
        const auto& fn = p == 0 ? profile.tagged() : profile.minor;
        const ActionView a = model.A[fn(t, s, i0, x)];
        for (int j = 0; j < space.M; ++j) {
          if (j == s) continue;
          const double r = model.q(t, s, j, a, i0, av0, x);
          if (r == 0.0) continue;
          moved = players;
          moved[p] = j;
          trip.emplace_back(idx, space.encode(i0, moved), r);
          out += r;
        }
        if (costs) (*costs)(idx, p + 1) = model.f(t, s, a, i0, av0, x);
      }
      trip.emplace_back(idx, idx, -out);
    }
    Q.resize(space.size, space.size);
    Q.setFromTriplets(trip.begin(), trip.end());
  }

  Eigen::MatrixXd terminal() const {
    const int N = space.N;
    Eigen::MatrixXd g(space.size, N + 1);
    std::vector<int> players;
    std::vector<double> x(space.M - 1);
    for (std::size_t idx = 0; idx < space.size; ++idx) {
      int i0;
      space.decode(idx, i0, players);
      const auto k = space.counts(players);
      for (int c = 0; c < space.M - 1; ++c) x[c] = static_cast<double>(k[c]) / N;
      g(idx, 0) = model.g0(i0, x);
      for (int p = 0; p < N; ++p) g(idx, p + 1) = model.g(players[p], i0, x);
    }
    return g;
  }
};

constexpr double kOracleTol = 1e-12;

template <class System>
void integrate(System sys, State& y, double length) {
  namespace ode = boost::numeric::odeint;
  if (!(length > 0.0)) return;
  auto stepper = ode::make_controlled(kOracleTol, kOracleTol, ode::runge_kutta_dopri5<State>());
  ode::integrate_adaptive(stepper, sys, y, 0.0, length, std::min(1e-3, length));
}

}  // namespace

OracleCosts oracle_cost_table(const ModelSpec& model, const PolicyProfile& profile, int N, double t0) {
  const ProductChain chain(model, profile, N);
  const std::size_t S = chain.space.size;
  const int P = N + 1;
  const double T = model.T;
  if (t0 > T) throw Error(Errc::kBadParameter, "oracle start time after the horizon");

  // Column-major (state, player) layout, matching Eigen::Map below.
  State y(S * P);
  Eigen::Map<Eigen::MatrixXd>(y.data(), S, P) = chain.terminal();

  // tau = T - t runs forward: dV/dtau = Q(t) V + c(t).
  auto sys = [&](const State& v, State& dv, double tau) {
    const double t = T - tau;
    SparseQ Q;
    Eigen::MatrixXd c;
    chain.build(t, Q, &c);
    Eigen::Map<const Eigen::MatrixXd> V(v.data(), S, P);
    Eigen::Map<Eigen::MatrixXd> D(dv.data(), S, P);
    D = Q * V + c;
  };
  integrate(sys, y, T - t0);

  OracleCosts out;
  out.by_player.assign(P, std::vector<double>(S));
  for (int p = 0; p < P; ++p) {
    for (std::size_t s = 0; s < S; ++s) out.by_player[p][s] = y[p * S + s];
  }
  return out;
}

std::vector<double> oracle_expected_cost(const ModelSpec& model, const PolicyProfile& profile, int N,
                                         double t0, int i0, std::span<const int> players) {
  const ProductSpace space(model, N);
  if (static_cast<int>(players.size()) != N) throw Error(Errc::kBadParameter, "need one state per minor player");
  const std::size_t idx = space.encode(i0, players);
  const auto table = oracle_cost_table(model, profile, N, t0);
  std::vector<double> out;
  for (const auto& col : table.by_player) out.push_back(col[idx]);
  return out;
}

std::vector<double> oracle_terminal_law(const ModelSpec& model, const PolicyProfile& profile, int N,
                                        double t0, int i0, std::span<const int> players) {
  const ProductChain chain(model, profile, N);
  const std::size_t S = chain.space.size;
  State p(S, 0.0);
  p[chain.space.encode(i0, players)] = 1.0;
  // Forward equation dp/dt = Q(t)^T p.
  auto sys = [&](const State& v, State& dv, double s) {
    SparseQ Q;
    chain.build(t0 + s, Q, nullptr);
    Eigen::Map<const Eigen::VectorXd> P(v.data(), S);
    Eigen::Map<Eigen::VectorXd> D(dv.data(), S);
    D = Q.transpose() * P;
  };
  integrate(sys, p, model.T - t0);
  return p;
}

std::vector<double> product_generator(const ModelSpec& model, const PolicyProfile& profile, int N,
                                      double t) {
  const ProductChain chain(model, profile, N);
  SparseQ Q;
  chain.build(t, Q, nullptr);
  const std::size_t S = chain.space.size;
  std::vector<double> dense(S * S, 0.0);
  for (int r = 0; r < Q.outerSize(); ++r) {
    for (SparseQ::InnerIterator it(Q, r); it; ++it) dense[r * S + it.col()] = it.value();
  }
  return dense;
}

}  // namespace mfg
