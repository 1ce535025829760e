#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mfg/generator.hpp"
#include "mfg/nplayer.hpp"

namespace mfg {

enum class Reference {
  kPlain,       // the N := K_ref solve
  kRichardson,  // 2 J_{K_ref} - J_{K_ref / 2}
};

struct StudyOptions {
  std::vector<int> N_list;
  int K_ref = 128;
  int time_steps = 0;  // 0: default_time_steps per solve
  Reference reference = Reference::kPlain;
  std::size_t grid_cap = 1'000'000;  // largest admissible |P^N|
};

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  bool defined = false;  // needs two errors above 1e-10
};

struct StudyResult {
  std::vector<int> N_list;
  std::vector<double> error_major;
  std::vector<double> error_minor;
  std::vector<double> runtime_s;
  LogLogFit fit_major;
  LogLogFit fit_minor;
  StudyOptions config;
};

/// Least squares on (log N, log error), skipping errors below 1e-10.
LogLogFit fit_loglog(const std::vector<int>& N, const std::vector<double>& errors);

/// t = 0 sup-norm gap between the N-player cost tables and the reference,
/// over the nodes of P^N. The minor table uses the tagged player's policy.
StudyResult cost_convergence_study(const ModelSpec& model, const PolicyProfile& profile,
                                   const StudyOptions& opts);

/// Same for the value tables (major against profile.minor, minor against
/// (profile.major, profile.minor)).
StudyResult value_convergence_study(const ModelSpec& model, const PolicyProfile& profile,
                                    const StudyOptions& opts);

struct Deviation {
  std::string label;
  MajorPolicy major;  // set for a major deviation
  MinorPolicy minor;  // set for a deviation of player 1
};

struct DeviationGain {
  std::string label;
  bool major = false;
  double gain = 0.0;  // deviating cost minus equilibrium cost
  double se = 0.0;
};

/// Monte Carlo gains of unilateral deviations in the N-player game, with
/// common random numbers (the same path seeds for both runs).
std::vector<DeviationGain> approx_nash_check(const ModelSpec& model, const PolicyProfile& equilibrium,
                                             int N, const std::vector<Deviation>& deviations,
                                             const InitialState& init, std::size_t n_paths,
                                             std::uint64_t seed);

}  // namespace mfg
