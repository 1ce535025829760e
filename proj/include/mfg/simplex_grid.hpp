#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mfg/model.hpp"

namespace mfg {

/// The discrete simplex P^K = {k/K : k in N^{M-1}, sum k <= K}.
///
/// Points are stored in colexicographic order of their count vectors
/// (k_{M-1} varies slowest) and `rank` is the inverse of that enumeration.
/// Neighbor shifts x -> x + e_ij / K are precomputed so that generator
/// applications never search the grid.
class SimplexGrid {
 public:
  static constexpr std::size_t kDefaultMaxPoints = 20'000'000;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  SimplexGrid(int M, int K, std::size_t max_points = kDefaultMaxPoints);

  int M() const { return M_; }
  int K() const { return K_; }
  int dim() const { return M_ - 1; }
  std::size_t size() const { return size_; }

  /// Number of points for (M, K); saturates on overflow.
  static std::size_t count(int M, int K);

  std::span<const int> counts(std::size_t rank) const {
    return {counts_.data() + rank * dim(), static_cast<std::size_t>(dim())};
  }
  /// Count of the implied last state, K - sum(k).
  int last_count(std::size_t rank) const { return last_[rank]; }
  /// Occupancy of state s (0-based, s = M-1 is the implied one).
  int occupancy(std::size_t rank, int s) const {
    return s == M_ - 1 ? last_[rank] : counts_[rank * dim() + s];
  }

  std::span<const double> point(std::size_t rank) const {
    return {coords_.data() + rank * dim(), static_cast<std::size_t>(dim())};
  }

  std::size_t rank(std::span<const int> k) const;
  std::vector<int> unrank(std::size_t rank) const;

  /// Rank of x + e_ij / K, or npos when that point leaves P^K.
  std::size_t shifted(std::size_t rank, int i, int j) const {
    return shift_[(rank * M_ + i) * M_ + j];
  }

  /// Nearest grid node to x (x is clipped into P first).
  std::size_t nearest(StateView x) const;

  friend bool operator==(const SimplexGrid& a, const SimplexGrid& b) {
    return a.M_ == b.M_ && a.K_ == b.K_;
  }

 private:
  std::size_t binom(int n, int k) const;

  int M_;
  int K_;
  std::size_t size_;
  std::vector<std::size_t> binom_;  // (K + M) x M table
  std::vector<int> counts_;
  std::vector<int> last_;
  std::vector<double> coords_;
  std::vector<std::size_t> shift_;
};

constexpr double kSimplexTolerance = 1e-9;

/// True when x lies in P up to `tol`.
bool in_simplex(StateView x, double tol = kSimplexTolerance);

/// Multilinear interpolation on the cube cell of the grid containing x.
/// Corners outside P are dropped and the remaining weights renormalized.
/// Throws kOutOfSimplex when x is outside P by more than kSimplexTolerance.
double interpolate(const SimplexGrid& grid, std::span<const double> table,
                   StateView x);

}  // namespace mfg
