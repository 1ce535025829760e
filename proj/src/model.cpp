#include "mfg/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mfg/error.hpp"
#include "mfg/simplex_grid.hpp"

namespace mfg {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::kInvalidShift: return "InvalidShift";
    case Errc::kGridTooLarge: return "GridTooLarge";
    case Errc::kOutOfSimplex: return "OutOfSimplex";
    case Errc::kUnknownModel: return "UnknownModel";
    case Errc::kBadParameter: return "BadParameter";
    case Errc::kIndexBug: return "IndexBug";
    case Errc::kUnstableIntegration: return "UnstableIntegration";
    case Errc::kRateBoundViolation: return "RateBoundViolation";
    case Errc::kOracleTooLarge: return "OracleTooLarge";
    case Errc::kFlowLeftSimplex: return "FlowLeftSimplex";
    case Errc::kNoActions: return "NoActions";
    case Errc::kConsistencyFailure: return "ConsistencyFailure";
    case Errc::kInfeasibleN: return "InfeasibleN";
    case Errc::kConfigError: return "ConfigError";
    case Errc::kIoError: return "IoError";
  }
  return "Unknown";
}

ActionSet::ActionSet(std::vector<Action> points) : points_(std::move(points)) {
  if (points_.empty()) throw Error(Errc::kNoActions, "action set is empty");
  const std::size_t d = points_.front().size();
  for (const auto& p : points_) {
    if (p.size() != d) throw Error(Errc::kBadParameter, "action points of mixed dimension");
  }
  std::sort(points_.begin(), points_.end());
  if (std::adjacent_find(points_.begin(), points_.end()) != points_.end()) {
    throw Error(Errc::kBadParameter, "duplicate action point");
  }
}

ActionSet ActionSet::scalars(std::vector<double> values) {
  std::vector<Action> pts;
  pts.reserve(values.size());
  for (double v : values) pts.push_back({v});
  return ActionSet(std::move(pts));
}

MajorRate with_major_diagonal(MajorRate off, int M0) {
  return [off = std::move(off), M0](double t, int i0, int j0, ActionView a0, StateView x) {
    if (i0 != j0) return off(t, i0, j0, a0, x);
    double s = 0.0;
    for (int k = 0; k < M0; ++k) {
      if (k != i0) s += off(t, i0, k, a0, x);
    }
    return -s;
  };
}

MinorRate with_minor_diagonal(MinorRate off, int M) {
  return [off = std::move(off), M](double t, int i, int j, ActionView a, int i0, ActionView a0,
                                   StateView x) {
    if (i != j) return off(t, i, j, a, i0, a0, x);
    double s = 0.0;
    for (int k = 0; k < M; ++k) {
      if (k != i) s += off(t, i, k, a, i0, a0, x);
    }
    return -s;
  };
}

ModelSpec with_terminal_shift(const ModelSpec& model, std::function<double(int, StateView)> delta0,
                              std::function<double(int, int, StateView)> delta) {
  ModelSpec out = model;
  if (delta0) {
    out.g0 = [g0 = model.g0, delta0](int i0, StateView x) { return g0(i0, x) + delta0(i0, x); };
  }
  if (delta) {
    out.g = [g = model.g, delta](int i, int i0, StateView x) { return g(i, i0, x) + delta(i, i0, x); };
  }
  return out;
}

std::vector<int> e_shift(int i, int j, int M) {
  if (i < 0 || j < 0 || i >= M || j >= M) {
    throw Error(Errc::kInvalidShift, "state index out of range");
  }
  if (i == j) throw Error(Errc::kInvalidShift, "e_shift needs i != j");
  std::vector<int> e(M - 1, 0);
  if (j != M - 1) e[j] += 1;
  if (i != M - 1) e[i] -= 1;
  return e;
}

const char* violation_name(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kRowSumNonzero: return "RowSumNonzero";
    case ViolationKind::kNegativeOffDiagonal: return "NegativeOffDiagonal";
    case ViolationKind::kRateBoundExceeded: return "RateBoundExceeded";
    case ViolationKind::kExtinctionViolated: return "ExtinctionViolated";
    case ViolationKind::kAlpha0DependenceDetected: return "Alpha0DependenceDetected";
  }
  return "Unknown";
}

std::string Violation::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << violation_name(kind) << " in " << function << " at t=" << t;
  if (i >= 0) os << " i=" << i + 1;
  if (j >= 0) os << " j=" << j + 1;
  if (i0 >= 0) os << " i0=" << i0 + 1;
  if (action >= 0) os << " action=" << action;
  if (action0 >= 0) os << " action0=" << action0;
  os << " x=(";
  for (std::size_t k = 0; k < x.size(); ++k) os << (k ? "," : "") << x[k];
  os << ") value=" << value;
  return os.str();
}

namespace {

std::vector<std::vector<double>> sample_points(int M, const SamplePlan& plan) {
  std::vector<std::vector<double>> pts;
  if (plan.grid_resolution > 0) {
    SimplexGrid grid(M, plan.grid_resolution);
    for (std::size_t r = 0; r < grid.size(); ++r) {
      auto p = grid.point(r);
      pts.emplace_back(p.begin(), p.end());
    }
  }
  // Uniform points of P from sorted uniforms (Dirichlet(1,...,1)).
  std::mt19937_64 rng(plan.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int n = 0; n < plan.random_points; ++n) {
    std::vector<double> u(M - 1);
    for (auto& v : u) v = unif(rng);
    std::sort(u.begin(), u.end());
    std::vector<double> x(M - 1);
    double prev = 0.0;
    for (int c = 0; c < M - 1; ++c) {
      x[c] = u[c] - prev;
      prev = u[c];
    }
    pts.push_back(std::move(x));
  }
  return pts;
}

class Recorder {
 public:
  Recorder(ValidationReport& report, std::size_t cap) : report_(report), cap_(cap) {}
  void add(Violation v) {
    if (report_.violations.size() < cap_) report_.violations.push_back(std::move(v));
  }

 private:
  ValidationReport& report_;
  std::size_t cap_;
};

}  // namespace

ValidationReport validate_rates(const ModelSpec& model, const SamplePlan& plan) {
  ValidationReport report;
  Recorder rec(report, plan.max_reported);
  const auto points = sample_points(model.M, plan);
  std::vector<double> times;
  const int nt = std::max(plan.time_points, 1);
  for (int n = 0; n < nt; ++n) times.push_back(nt == 1 ? 0.0 : model.T * n / (nt - 1));

  const double C = model.rate_bound;
  const double eps = model.extinction_eps;
  const int M = model.M;
  const int M0 = model.M0;

  auto make = [](ViolationKind kind, const char* fn, double t, int i, int j, int i0, int a, int a0,
                 const std::vector<double>& x, double value) {
    Violation v;
    v.kind = kind;
    v.function = fn;
    v.t = t;
    v.i = i;
    v.j = j;
    v.i0 = i0;
    v.action = a;
    v.action0 = a0;
    v.x = x;
    v.value = value;
    return v;
  };

  for (double t : times) {
    for (const auto& x : points) {
      ++report.points_checked;
      double xM = 1.0;
      for (double v : x) xM -= v;

      // Major Q-matrix.
      for (std::size_t a0 = 0; a0 < model.A0.size(); ++a0) {
        for (int i0 = 0; i0 < M0; ++i0) {
          double row = 0.0;
          for (int j0 = 0; j0 < M0; ++j0) {
            const double r = model.q0(t, i0, j0, model.A0[a0], x);
            row += r;
            if (j0 != i0 && r < 0.0) {
              rec.add(make(ViolationKind::kNegativeOffDiagonal, "q0", t, i0, j0, -1, static_cast<int>(a0), -1, x, r));
            }
            if (std::abs(r) > C) {
              rec.add(make(ViolationKind::kRateBoundExceeded, "q0", t, i0, j0, -1, static_cast<int>(a0), -1, x, r));
            }
          }
          if (std::abs(row) > plan.row_sum_tol) {
            rec.add(make(ViolationKind::kRowSumNonzero, "q0", t, i0, -1, -1, static_cast<int>(a0), -1, x, row));
          }
        }
      }

      // Minor Q-matrix, bound and extinction.
      for (int i0 = 0; i0 < M0; ++i0) {
        for (std::size_t a0 = 0; a0 < model.A0.size(); ++a0) {
          for (std::size_t a = 0; a < model.A.size(); ++a) {
            for (int i = 0; i < M; ++i) {
              double row = 0.0;
              for (int j = 0; j < M; ++j) {
                const double r = model.q(t, i, j, model.A[a], i0, model.A0[a0], x);
                row += r;
                const int ai = static_cast<int>(a);
                const int a0i = static_cast<int>(a0);
                if (j != i && r < 0.0) {
                  rec.add(make(ViolationKind::kNegativeOffDiagonal, "q", t, i, j, i0, ai, a0i, x, r));
                }
                if (std::abs(r) > C) {
                  rec.add(make(ViolationKind::kRateBoundExceeded, "q", t, i, j, i0, ai, a0i, x, r));
                }
                if (eps > 0.0 && j != i && r != 0.0) {
                  const bool small_source = (i < M - 1 && j < M - 1 && x[i] < eps) ||
                                            (i == M - 1 && j < M - 1 && xM < eps);
                  if (small_source) {
                    rec.add(make(ViolationKind::kExtinctionViolated, "q", t, i, j, i0, ai, a0i, x, r));
                  }
                }
              }
              if (std::abs(row) > plan.row_sum_tol) {
                rec.add(make(ViolationKind::kRowSumNonzero, "q", t, i, -1, i0, static_cast<int>(a),
                             static_cast<int>(a0), x, row));
              }
            }
          }
        }
      }

      // alpha0 independence of q and f.
      if (model.alpha0_free && model.A0.size() > 1) {
        for (int i0 = 0; i0 < M0; ++i0) {
          for (std::size_t a = 0; a < model.A.size(); ++a) {
            for (int i = 0; i < M; ++i) {
              const double f_ref = model.f(t, i, model.A[a], i0, model.A0[0], x);
              for (std::size_t a0 = 1; a0 < model.A0.size(); ++a0) {
                const double fv = model.f(t, i, model.A[a], i0, model.A0[a0], x);
                if (fv != f_ref) {
                  rec.add(make(ViolationKind::kAlpha0DependenceDetected, "f", t, i, -1, i0,
                               static_cast<int>(a), static_cast<int>(a0), x, fv - f_ref));
                }
                for (int j = 0; j < M; ++j) {
                  const double q_ref = model.q(t, i, j, model.A[a], i0, model.A0[0], x);
                  const double qv = model.q(t, i, j, model.A[a], i0, model.A0[a0], x);
                  if (qv != q_ref) {
                    rec.add(make(ViolationKind::kAlpha0DependenceDetected, "q", t, i, j, i0,
                                 static_cast<int>(a), static_cast<int>(a0), x, qv - q_ref));
                  }
                }
              }
            }
          }
        }
      }
    }
  }
  return report;
}

}  // namespace mfg
