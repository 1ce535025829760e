#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mfg/error.hpp"
#include "mfg/model.hpp"
#include "mfg/simplex_grid.hpp"

using namespace mfg;

namespace {

// A two-state model whose q0 matrix is given verbatim (rows of a 2x2).
ModelSpec matrix_model(double a, double b, double c, double d) {
  ModelSpec m = load_builtin("two_two", {});
  m.q0 = [=](double, int i0, int j0, ActionView, StateView) {
    const double Q[2][2] = {{a, b}, {c, d}};
    return Q[i0][j0];
  };
  return m;
}

bool has(const ValidationReport& r, ViolationKind k) {
  for (const auto& v : r.violations) {
    if (v.kind == k) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("validate_rates: q0 = [[-1,1],[2,-2]] passes") {
  const auto r = validate_rates(matrix_model(-1, 1, 2, -2));
  CHECK(r.ok());
  CHECK(r.points_checked > 0);
}

TEST_CASE("validate_rates: negative off-diagonal q0 reported at (1,2)") {
  const auto r = validate_rates(matrix_model(0.5, -0.5, 0, 0));
  REQUIRE(has(r, ViolationKind::kNegativeOffDiagonal));
  for (const auto& v : r.violations) {
    if (v.kind != ViolationKind::kNegativeOffDiagonal) continue;
    CHECK(v.function == "q0");
    CHECK(v.i == 0);
    CHECK(v.j == 1);
    CHECK(v.value == -0.5);
  }
}

TEST_CASE("validate_rates: q row sum 0.1 reported with witness") {
  ModelSpec m = load_builtin("two_two", {});
  const MinorRate q = m.q;
  m.q = [q](double t, int i, int j, ActionView a, int i0, ActionView a0, StateView x) {
    return q(t, i, j, a, i0, a0, x) + (i == j ? 0.1 : 0.0);
  };
  const auto r = validate_rates(m);
  REQUIRE(has(r, ViolationKind::kRowSumNonzero));
  const auto& v = r.violations.front();
  CHECK(v.kind == ViolationKind::kRowSumNonzero);
  CHECK(v.function == "q");
  CHECK(v.value == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(v.x.size() == 1);
}

TEST_CASE("validate_rates: rate bound, extinction and alpha0 dependence") {
  ModelSpec m = load_builtin("two_two", {});
  m.rate_bound = 0.1;
  CHECK(has(validate_rates(m), ViolationKind::kRateBoundExceeded));

  ModelSpec e = load_builtin("two_two", {});
  e.extinction_eps = 0.2;  // susceptibles still get infected when almost none are left
  CHECK(has(validate_rates(e), ViolationKind::kExtinctionViolated));

  ModelSpec d = load_builtin("two_two", {});
  d.f = [](double, int, ActionView, int, ActionView a0, StateView) { return a0[0]; };
  CHECK(has(validate_rates(d), ViolationKind::kAlpha0DependenceDetected));
  d.alpha0_free = false;
  CHECK(validate_rates(d).ok());
}

TEST_CASE("e_shift examples") {
  CHECK(e_shift(0, 1, 3) == std::vector<int>{-1, 1});
  CHECK(e_shift(2, 0, 3) == std::vector<int>{1, 0});
  CHECK(e_shift(0, 1, 2) == std::vector<int>{-1});
  CHECK_THROWS_AS(e_shift(1, 1, 3), Error);
  try {
    e_shift(1, 1, 3);
  } catch (const Error& err) {
    CHECK(err.code() == Errc::kInvalidShift);
  }
}

TEST_CASE("e_shift antisymmetry") {
  for (int M = 2; M <= 5; ++M) {
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < M; ++j) {
        if (i == j) continue;
        auto a = e_shift(i, j, M);
        auto b = e_shift(j, i, M);
        for (int c = 0; c < M - 1; ++c) CHECK(a[c] == -b[c]);
      }
    }
  }
}

TEST_CASE("simplex_grid examples") {
  SimplexGrid g22(2, 2);
  REQUIRE(g22.size() == 3);
  CHECK(g22.point(0)[0] == 0.0);
  CHECK(g22.point(1)[0] == 0.5);
  CHECK(g22.point(2)[0] == 1.0);

  SimplexGrid g32(3, 2);
  CHECK(g32.size() == 6);
  bool found = false;
  for (std::size_t r = 0; r < g32.size(); ++r) {
    if (g32.point(r)[0] == 0.5 && g32.point(r)[1] == 0.5) found = true;
  }
  CHECK(found);

  SimplexGrid g41(4, 1);
  CHECK(g41.size() == 4);
  int vertices = 0;
  for (std::size_t r = 0; r < g41.size(); ++r) {
    double s = 0;
    for (double v : g41.point(r)) s += v;
    vertices += (s == 1.0 || s == 0.0);
  }
  CHECK(vertices == 4);

  CHECK_THROWS_AS(SimplexGrid(1, 3), Error);
  CHECK_THROWS_AS(SimplexGrid(3, 0), Error);
  try {
    SimplexGrid(6, 200, 1000);
    FAIL("expected GridTooLarge");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::kGridTooLarge);
  }
}

TEST_CASE("simplex_grid: size, membership and rank bijection up to M=4, K=40") {
  for (int M = 2; M <= 4; ++M) {
    for (int K : {1, 2, 7, 40}) {
      SimplexGrid g(M, K);
      // binomial(K + M - 1, M - 1)
      double b = 1;
      for (int c = 1; c <= M - 1; ++c) b = b * (K + c) / c;
      CHECK(g.size() == static_cast<std::size_t>(std::llround(b)));
      for (std::size_t r = 0; r < g.size(); ++r) {
        const auto k = g.unrank(r);
        REQUIRE(g.rank(k) == r);
        CHECK(in_simplex(g.point(r), 0.0));
      }
    }
  }
}

TEST_CASE("simplex_grid: colexicographic order") {
  SimplexGrid g(3, 3);
  for (std::size_t r = 1; r < g.size(); ++r) {
    const auto a = g.unrank(r - 1);
    const auto b = g.unrank(r);
    // compare from the last coordinate
    const bool less = a[1] < b[1] || (a[1] == b[1] && a[0] < b[0]);
    CHECK(less);
  }
}

TEST_CASE("simplex_grid: shifts match e_shift") {
  SimplexGrid g(3, 4);
  for (std::size_t r = 0; r < g.size(); ++r) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        if (i == j) continue;
        const std::size_t to = g.shifted(r, i, j);
        if (g.occupancy(r, i) == 0) {
          CHECK(to == SimplexGrid::npos);
          continue;
        }
        auto k = g.unrank(r);
        const auto e = e_shift(i, j, 3);
        for (int c = 0; c < 2; ++c) k[c] += e[c];
        CHECK(g.rank(k) == to);
      }
    }
  }
}

TEST_CASE("interpolate examples") {
  SimplexGrid g(2, 2);
  const std::vector<double> table = {0.0, 1.0, 2.0};
  const double x25[] = {0.25};
  CHECK(interpolate(g, table, x25) == doctest::Approx(0.5).epsilon(1e-15));
  for (std::size_t r = 0; r < g.size(); ++r) CHECK(interpolate(g, table, g.point(r)) == table[r]);

  SimplexGrid g3(3, 5);
  std::vector<double> c(g3.size(), 3.25);
  const double x[] = {0.13, 0.61};
  CHECK(interpolate(g3, c, x) == doctest::Approx(3.25).epsilon(1e-15));

  const double out[] = {0.7, 0.5};
  try {
    interpolate(g3, c, out);
    FAIL("expected OutOfSimplex");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::kOutOfSimplex);
  }
  const double nearly[] = {0.5, 0.5 + 5e-10};
  CHECK_NOTHROW(interpolate(g3, c, nearly));
}

TEST_CASE("interpolate reproduces affine functions inside P") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int M = 2; M <= 4; ++M) {
    const int K = 10;
    SimplexGrid g(M, K);
    std::vector<double> w(M);
    for (auto& v : w) v = u(rng) * 4 - 2;
    std::vector<double> table(g.size());
    for (std::size_t r = 0; r < g.size(); ++r) {
      double v = w[M - 1];
      for (int c = 0; c < M - 1; ++c) v += w[c] * g.point(r)[c];
      table[r] = v;
    }
    int tested = 0;
    while (tested < 200) {
      std::vector<double> x(M - 1);
      for (auto& v : x) v = u(rng) * 0.6;
      // keep cells whose upper corner is inside P
      int sum_up = 0;
      for (double v : x) sum_up += static_cast<int>(std::floor(v * K)) + 1;
      if (sum_up > K) continue;
      double expect = w[M - 1];
      for (int c = 0; c < M - 1; ++c) expect += w[c] * x[c];
      CHECK(interpolate(g, table, x) == doctest::Approx(expect).epsilon(1e-12));
      ++tested;
    }
  }
}

TEST_CASE("load_builtin") {
  for (const auto& name : builtin_names()) {
    const ModelSpec m = load_builtin(name, {});
    SamplePlan dense;
    dense.grid_resolution = 12;
    dense.random_points = 400;
    dense.time_points = 7;
    const auto r = validate_rates(m, dense);
    CHECK_MESSAGE(r.ok(), name);
  }
  const ModelSpec two = load_builtin("two_two", {});
  CHECK(two.M0 == 2);
  CHECK(two.M == 2);
  CHECK(two.A.size() == 2);
  CHECK(two.A0.size() == 2);
  const ModelSpec cy = load_builtin("cyber4", {});
  CHECK(cy.M == 4);
  CHECK(cy.M0 == 2);

  const ModelSpec dec = load_builtin("decoupled", {});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  for (int n = 0; n < 50; ++n) {
    const double x[] = {u(rng), u(rng)};
    const double y[] = {u(rng), u(rng)};
    for (int i = 0; i < 3; ++i) {
      CHECK(dec.g(i, 0, x) == dec.g(i, 1, y));
      for (int j = 0; j < 3; ++j) {
        CHECK(dec.q(0.3, i, j, dec.A[1], 0, dec.A0[0], x) == dec.q(0.3, i, j, dec.A[1], 1, dec.A0[0], y));
      }
      CHECK(dec.f(0.1, i, dec.A[0], 0, dec.A0[0], x) == dec.f(0.1, i, dec.A[0], 1, dec.A0[0], y));
    }
    CHECK(dec.q0(0.2, 0, 1, dec.A0[2], x) == dec.q0(0.2, 0, 1, dec.A0[2], y));
    CHECK(dec.f0(0.2, 1, dec.A0[1], x) == dec.f0(0.2, 1, dec.A0[1], y));
    CHECK(dec.g0(1, x) == dec.g0(1, y));
  }

  try {
    load_builtin("nonexistent", {});
    FAIL("expected UnknownModel");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::kUnknownModel);
  }
  try {
    load_builtin("two_two", {{"no_such_key", 1.0}});
    FAIL("expected BadParameter");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::kBadParameter);
  }
  try {
    load_builtin("two_two", {{"recovery", 5.0}});  // breaks the rate bound
    FAIL("expected BadParameter");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::kBadParameter);
  }
  CHECK(load_builtin("two_two", {{"T", 0.25}}).T == 0.25);
}

TEST_CASE("action sets are sorted, nonempty and duplicate free") {
  const ActionSet a({{1.0, 0.0}, {0.0, 2.0}, {0.0, 1.0}});
  CHECK(a[0][1] == 1.0);
  CHECK(a[1][1] == 2.0);
  CHECK(a[2][0] == 1.0);
  CHECK_THROWS_AS(ActionSet(std::vector<Action>{}), Error);
  CHECK_THROWS_AS(ActionSet::scalars({0.0, 0.0}), Error);
  CHECK_THROWS_AS(ActionSet({{0.0}, {0.0, 1.0}}), Error);
}
