#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mfg/generator.hpp"
#include "mfg/model.hpp"
#include "mfg/nplayer.hpp"

namespace mfg {

/// v_j = sum_i x_i q(t, i, j, phi(t, i, i0, x), i0, phi0(t, i0, x), x), with
/// x_M = 1 - sum(x). Diagonal rates included.
std::vector<double> vector_field(const ModelSpec& model, const MajorPolicy& phi0,
                                 const MinorPolicy& phi, double t, int i0, StateView x);

struct FlowPath {
  std::vector<double> t;
  std::vector<std::vector<double>> x;
};

/// RK4 along the characteristic field with the major state held at i0, using
/// ceil(|t1 - t0| / step) equal steps. t1 < t0 integrates backward in time.
FlowPath flow(const ModelSpec& model, const MajorPolicy& phi0, const MinorPolicy& phi, int i0,
              std::vector<double> x0, double t0, double t1, double step);

enum class PdmpMode { kPair, kTriple };

struct PdmpOptions {
  std::size_t n_paths = 1000;
  std::uint64_t seed = 1;
  double t0 = 0.0;
  int output_points = 200;  // uniform on [t0, T], endpoints included
  double flow_step = 1e-3;
  bool record_paths = false;
};

struct PdmpJump {
  double t;
  int who;  // -1 major, 0 tagged minor
  int from;
  int to;
};

struct PdmpPath {
  std::uint64_t seed = 0;
  std::vector<PdmpJump> jumps;
  // Output grid plus jump epochs, in time order.
  std::vector<double> times;
  std::vector<int> i0;
  std::vector<int> i;
  std::vector<std::vector<double>> x;
  double major_cost = 0.0;
  double tagged_cost = 0.0;
};

struct PdmpResult {
  std::vector<PdmpPath> paths;  // only with record_paths
  std::vector<double> major_cost;
  std::vector<double> tagged_cost;  // triple mode only
  std::vector<int> final_i0;
  std::vector<std::vector<double>> final_x;
  CostStats major;
  CostStats tagged;
};

/// Piecewise-deterministic limit dynamics. The measure follows `flow`; the
/// major player (and, in triple mode, the tagged minor playing the profile's
/// tagged policy) jump by thinning against rate_bound * (M0 + M).
PdmpResult simulate_pdmp(const ModelSpec& model, PdmpMode mode, const PolicyProfile& profile,
                         const InitialState& init, const PdmpOptions& opts);

/// Mean and standard error of the major cost (pair mode) or of the tagged
/// minor's cost (triple mode).
CostStats mc_cost(const ModelSpec& model, PdmpMode mode, const PolicyProfile& profile,
                  const InitialState& init, std::size_t n_paths, std::uint64_t seed);

}  // namespace mfg
