#include "mfg/simplex_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mfg/error.hpp"

namespace mfg {
namespace {

constexpr std::size_t kSaturated = std::numeric_limits<std::size_t>::max();

std::size_t sat_add(std::size_t a, std::size_t b) {
  return (a > kSaturated - b) ? kSaturated : a + b;
}

}  // namespace

std::size_t SimplexGrid::count(int M, int K) {
  // binomial(K + M - 1, M - 1) through Pascal's rule, saturating.
  const int d = M - 1;
  std::vector<std::size_t> row(d + 1, 0);
  // row[c] = C(n, c) for the current n
  row[0] = 1;
  for (int n = 1; n <= K + d; ++n) {
    for (int c = std::min(n, d); c >= 1; --c) row[c] = sat_add(row[c], row[c - 1]);
  }
  return row[d];
}

SimplexGrid::SimplexGrid(int M, int K, std::size_t max_points) : M_(M), K_(K) {
  if (M < 2) throw Error(Errc::kBadParameter, "simplex grid needs M >= 2, got " + std::to_string(M));
  if (K < 1) throw Error(Errc::kBadParameter, "simplex grid needs K >= 1, got " + std::to_string(K));
  size_ = count(M, K);
  if (size_ > max_points) {
    throw Error(Errc::kGridTooLarge, "P^K with M=" + std::to_string(M) + ", K=" + std::to_string(K) +
                                         " has more than " + std::to_string(max_points) + " points");
  }

  binom_.assign(static_cast<std::size_t>(K + M + 1) * (M + 1), 0);
  for (int n = 0; n <= K + M; ++n) {
    for (int c = 0; c <= std::min(n, M); ++c) {
      std::size_t v = 1;
      if (c > 0 && c < n) v = sat_add(binom_[(n - 1) * (M + 1) + c - 1], binom_[(n - 1) * (M + 1) + c]);
      binom_[n * (M + 1) + c] = v;
    }
  }

  const int d = dim();
  counts_.resize(size_ * d);
  last_.resize(size_);
  coords_.resize(size_ * d);

  // Odometer with k_1 fastest: this is colexicographic order.
  std::vector<int> k(d, 0);
  int sum = 0;
  for (std::size_t r = 0; r < size_; ++r) {
    std::copy(k.begin(), k.end(), counts_.begin() + r * d);
    last_[r] = K - sum;
    for (int c = 0; c < d; ++c) coords_[r * d + c] = static_cast<double>(k[c]) / K;
    for (int c = 0; c < d; ++c) {
      if (sum < K) {
        ++k[c];
        ++sum;
        break;
      }
      sum -= k[c];
      k[c] = 0;
    }
  }

  shift_.assign(size_ * M * M, npos);
  std::vector<int> moved(d);
  for (std::size_t r = 0; r < size_; ++r) {
    for (int i = 0; i < M; ++i) {
      if (occupancy(r, i) == 0) continue;
      for (int j = 0; j < M; ++j) {
        if (j == i) continue;
        auto base = counts(r);
        std::copy(base.begin(), base.end(), moved.begin());
        if (i != M - 1) --moved[i];
        if (j != M - 1) ++moved[j];
        shift_[(r * M + i) * M + j] = rank(moved);
      }
    }
  }
}

std::size_t SimplexGrid::binom(int n, int k) const {
  if (k < 0 || n < 0 || k > n) return 0;
  return binom_[static_cast<std::size_t>(n) * (M_ + 1) + k];
}

std::size_t SimplexGrid::rank(std::span<const int> k) const {
  const int d = dim();
  if (static_cast<int>(k.size()) != d) throw Error(Errc::kIndexBug, "rank: wrong dimension");
  int remaining = K_;
  std::size_t r = 0;
  for (int p = d; p >= 1; --p) {
    const int kp = k[p - 1];
    if (kp < 0 || kp > remaining) throw Error(Errc::kIndexBug, "rank: counts outside P^K");
    // tuples (k_1..k_{p-1}, v) with v < k_p and sum <= remaining
    for (int v = 0; v < kp; ++v) r += binom(remaining - v + p - 1, p - 1);
    remaining -= kp;
  }
  return r;
}

std::vector<int> SimplexGrid::unrank(std::size_t r) const {
  if (r >= size_) throw Error(Errc::kIndexBug, "unrank: rank out of range");
  auto c = counts(r);
  return {c.begin(), c.end()};
}

std::size_t SimplexGrid::nearest(StateView x) const {
  const int d = dim();
  std::vector<double> y(d);
  std::vector<int> k(d);
  int sum = 0;
  for (int c = 0; c < d; ++c) {
    y[c] = std::clamp(x[c], 0.0, 1.0) * K_;
    k[c] = static_cast<int>(std::lround(y[c]));
    sum += k[c];
  }
  while (sum > K_) {
    int worst = -1;
    double excess = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < d; ++c) {
      if (k[c] > 0 && k[c] - y[c] > excess) {
        excess = k[c] - y[c];
        worst = c;
      }
    }
    --k[worst];
    --sum;
  }
  return rank(k);
}

bool in_simplex(StateView x, double tol) {
  double sum = 0.0;
  for (double v : x) {
    if (!(v >= -tol)) return false;
    sum += v;
  }
  return sum <= 1.0 + tol;
}

double interpolate(const SimplexGrid& grid, std::span<const double> table, StateView x) {
  const int d = grid.dim();
  const int K = grid.K();
  if (static_cast<int>(x.size()) != d || !in_simplex(x)) {
    throw Error(Errc::kOutOfSimplex, "interpolation point outside the simplex");
  }

  std::vector<int> base(d);
  std::vector<double> frac(d);
  for (int c = 0; c < d; ++c) {
    const double y = std::max(x[c], 0.0) * K;
    base[c] = std::min(static_cast<int>(std::floor(y)), K);
    frac[c] = base[c] == K ? 0.0 : y - base[c];
  }

  std::vector<int> corner(d);
  double total = 0.0;
  double acc = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
    double w = 1.0;
    int sum = 0;
    bool inside = true;
    for (int c = 0; c < d; ++c) {
      const bool up = (mask >> c) & 1u;
      corner[c] = base[c] + (up ? 1 : 0);
      w *= up ? frac[c] : 1.0 - frac[c];
      sum += corner[c];
      if (corner[c] > K) inside = false;
    }
    if (!inside || sum > K || w == 0.0) continue;
    total += w;
    acc += w * table[grid.rank(corner)];
  }
  if (total == 0.0) return table[grid.nearest(x)];
  return acc / total;
}

}  // namespace mfg
