#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fejer/equilibrium.hpp"
#include "support.hpp"

using namespace fejer;
using fejer::testing::random_vector;

namespace {

EquilibriumProblem identity_affine() { return EquilibriumProblem::affine_paired(Matrix{{1}}, Vector{0}); }

std::vector<EquilibriumProblem> families() {
  std::vector<EquilibriumProblem> out;
  out.push_back(EquilibriumProblem::zero(2));
  out.push_back(EquilibriumProblem::convex_minimization(weighted_one_norm(Vector{0.5, -1}, Vector{1, 2})));
  out.push_back(
      EquilibriumProblem::convex_minimization(quadratic(Matrix{{2, 0.5}, {0.5, 1}}, Vector{-1, 0.5}, 3.0)));
  out.push_back(EquilibriumProblem::affine_paired(Matrix{{1, 2}, {-2, 1}}, Vector{0.3, -0.1}));
  out.push_back(EquilibriumProblem::affine_paired(Matrix{{0, -1}, {1, 0}}, Vector{1, 1}));
  return out;
}

/// Brute-force maximum of f(., x) over the disc of radius r (N <= 2) on a
/// grid of the given spacing.
double brute_max(const EquilibriumProblem& p, const Vector& x, double r, double h) {
  double best = -INFINITY;
  const auto steps = static_cast<long>(std::floor(r / h));
  if (x.dim() == 1) {
    for (long i = -steps; i <= steps; ++i) best = std::max(best, p.eval(Vector{i * h}, x));
    return best;
  }
  for (long i = -steps; i <= steps; ++i)
    for (long j = -steps; j <= steps; ++j) {
      const Vector y{i * h, j * h};
      if (norm(y) <= r) best = std::max(best, p.eval(y, x));
    }
  return best;
}

}  // namespace

TEST(Equilibrium, FrozenEvaluations) {
  EXPECT_EQ(EquilibriumProblem::zero(1).eval(Vector{1}, Vector{2}), 0.0);
  EXPECT_EQ(fejer::testing::abs_problem().eval(Vector{2}, Vector{0}), -2.0);
  EXPECT_EQ(identity_affine().eval(Vector{1}, Vector{3}), 2.0);
}

TEST(Equilibrium, FrozenSubgradients) {
  EXPECT_EQ(EquilibriumProblem::zero(2).subgradient(Vector{1, 1}, Vector{2, 3}), (Vector{0, 0}));
  EXPECT_EQ(fejer::testing::abs_problem().subgradient(Vector{0}, Vector{2}), Vector{1});
  EXPECT_EQ(fejer::testing::abs_problem().subgradient(Vector{0}, Vector{0}), Vector{0});
  EXPECT_EQ(identity_affine().subgradient(Vector{5}, Vector{-9}), Vector{5});
}

TEST(Equilibrium, DimensionMismatch) {
  EXPECT_THROW(identity_affine().eval(Vector{1, 2}, Vector{1}), DimensionMismatch);
  EXPECT_THROW(EquilibriumProblem::zero(2).subgradient(Vector{1}, Vector{1, 1}), DimensionMismatch);
}

TEST(Equilibrium, DiagonalIsExactlyZero) {
  std::mt19937_64 rng(21);
  for (const auto& p : families())
    for (int i = 0; i < 1000; ++i) {
      const Vector x = random_vector(rng, p.dim(), -10, 10);
      EXPECT_EQ(p.eval(x, x), 0.0) << p.family();
    }
}

TEST(Equilibrium, SubgradientInequality) {
  std::mt19937_64 rng(22);
  for (const auto& p : families())
    for (int i = 0; i < 1000; ++i) {
      const Vector yf = random_vector(rng, p.dim(), -5, 5);
      const Vector x = random_vector(rng, p.dim(), -5, 5);
      const Vector u = random_vector(rng, p.dim(), -5, 5);
      const Vector xi = p.subgradient(yf, x);
      EXPECT_GE(p.eval(yf, u), p.eval(yf, x) + dot(u - x, xi) - 1e-10) << p.family();
    }
}

TEST(Equilibrium, AxiomValidation) {
  std::mt19937_64 rng(23);
  std::vector<AxiomSample> samples;
  for (int i = 0; i < 500; ++i)
    samples.push_back({random_vector(rng, 2, -3, 3), random_vector(rng, 2, -3, 3), random_vector(rng, 2, -3, 3)});
  const auto zero = validate_axioms(EquilibriumProblem::zero(2), samples);
  EXPECT_TRUE(zero.ok());
  EXPECT_EQ(zero.worst_diagonal, 0.0);
  EXPECT_EQ(zero.worst_convexity, 0.0);
  const auto quad = EquilibriumProblem::convex_minimization(quadratic(Matrix::identity(2), Vector{0, 0}));
  EXPECT_TRUE(validate_axioms(quad, samples).ok());
  for (const auto& p : families()) EXPECT_TRUE(validate_axioms(p, samples).ok()) << p.family();
  const auto broken = [](const Vector& x, const Vector& y) { return x == y ? 1.0 : 0.0; };
  const auto rep = validate_axioms(broken, std::span<const AxiomSample>(samples));
  EXPECT_FALSE(rep.diagonal_ok);
  EXPECT_FALSE(rep.ok());
}

TEST(Equilibrium, RejectsIndefiniteQuadratic) {
  EXPECT_THROW(quadratic(Matrix{{1, 0}, {0, -1}}, Vector{0, 0}), InvalidConfig);
  EXPECT_THROW(quadratic(Matrix{{1, 2}, {0, 1}}, Vector{0, 0}), InvalidConfig);
  EXPECT_THROW(weighted_one_norm(Vector{0}, Vector{-1}), InvalidConfig);
}

TEST(Equilibrium, MonotonicityDetection) {
  EXPECT_TRUE(std::get<AffinePaired>(EquilibriumProblem::affine_paired(Matrix{{0, -1}, {1, 0}}, Vector{0, 0}).variant()).monotone);
  EXPECT_FALSE(std::get<AffinePaired>(EquilibriumProblem::affine_paired(Matrix{{-1}}, Vector{0}).variant()).monotone);
}

TEST(ApproxMax, FrozenExamples) {
  const auto r = approx_max(fejer::testing::abs_problem(), Vector{1}, 2.0, 0.0);
  EXPECT_EQ(r.y, Vector{0});
  EXPECT_EQ(r.value, 1.0);
  EXPECT_EQ(r.gap, 0.0);

  const auto z = approx_max(EquilibriumProblem::zero(2), Vector{0.3, 0.4}, 1.0, 0.0);
  EXPECT_EQ(z.y, (Vector{0.3, 0.4}));
  EXPECT_EQ(z.value, 0.0);

  MaxOptions grid;
  grid.strategy = MaxStrategy::Grid;
  grid.modulus = Counterfunction::affine(5, 5);
  const auto g = approx_max(identity_affine(), Vector{1}, 2.0, 1e-3, grid);
  EXPECT_EQ(g.strategy, "grid");
  EXPECT_NEAR(g.y[0], 0.5, 0.01);
  EXPECT_NEAR(g.value, 0.25, 1e-3);
  EXPECT_LE(0.25 - g.value, 1e-3);
}

TEST(ApproxMax, Errors) {
  const auto p = identity_affine();
  MaxOptions grid;
  grid.strategy = MaxStrategy::Grid;
  grid.modulus = Counterfunction::affine(5, 5);
  EXPECT_THROW(approx_max(p, Vector{1}, 2.0, 0.0, grid), OracleFailure);
  EXPECT_THROW(approx_max(p, Vector{1}, 0.0, 0.1), OracleFailure);
  EXPECT_THROW(approx_max(p, Vector{3}, 2.0, 0.1), OracleFailure);
  MaxOptions no_modulus;
  no_modulus.strategy = MaxStrategy::Grid;
  EXPECT_THROW(approx_max(p, Vector{1}, 2.0, 0.1, no_modulus), OracleFailure);
  const auto p4 = EquilibriumProblem::affine_paired(Matrix::identity(4), Vector(4));
  EXPECT_THROW(approx_max(p4, Vector(4), 1.0, 0.1, grid), OracleFailure);
  MaxOptions tiny = grid;
  tiny.max_grid_points = 10;
  EXPECT_THROW(approx_max(p, Vector{1}, 2.0, 1e-3, tiny), OracleFailure);
}

TEST(ApproxMax, WeightedOneNormOutsideBall) {
  // Minimizer of |y1 - 3| + 2|y2 - 4| on the unit disc leans to the heavier axis.
  const auto p = EquilibriumProblem::convex_minimization(weighted_one_norm(Vector{3, 4}, Vector{1, 2}));
  const auto r = approx_max(p, Vector{0, 0}, 1.0, 0.0);
  EXPECT_LE(norm(r.y), 1.0 + 1e-12);
  EXPECT_NEAR(r.y[0], 1.0 / std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(r.y[1], 2.0 / std::sqrt(5.0), 1e-12);
  EXPECT_LE(brute_max(p, Vector{0, 0}, 1.0, 1e-3) - r.value, 1e-9);
}

TEST(ApproxMax, ContractAgainstBruteForce) {
  // A grid at spacing h misses the maximum by at most Lip(f(., x)) h sqrt(N),
  // so r.value >= brute - slack is a sound comparison and brute <= max.
  std::mt19937_64 rng(24);
  const auto fams = families();
  int calls = 0;
  for (int trial = 0; trial < 30; ++trial)
    for (const auto& p : fams) {
      const Vector x = random_vector(rng, p.dim(), -1, 1);
      const double radius = norm(x) + 1.0;
      const double eps = 1e-3;
      const auto r = approx_max(p, x, radius, eps);
      ++calls;
      EXPECT_LE(norm(r.y), radius + 1e-12);
      EXPECT_GE(r.value, -1e-12);
      EXPECT_NEAR(r.value, p.eval(r.y, x), 1e-12);
      const double brute = brute_max(p, x, radius, 0.01);
      EXPECT_LE(brute - r.value, eps + 1e-12) << p.family();
    }
  EXPECT_GE(calls, 100);
}

TEST(ApproxMax, GridContractAgainstHalfStep) {
  // y -> f(y, x) = <A y + d, x - y> has gradient A^T (x - y) - (A y + d), bounded
  // on the ball of radius R by |a| (|x| + 2R) + |d|, so m -> c (m + 1) with
  // c above that bound certifies the grid.
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = std::uniform_real_distribution<double>(-2, 2)(rng);
    const auto p = EquilibriumProblem::affine_paired(Matrix{{a}}, Vector{0.5});
    const Vector x = random_vector(rng, 1, -1, 1);
    const double radius = std::abs(x[0]) + 1.0;
    const double lip = std::abs(a) * (std::abs(x[0]) + 2.0 * radius) + 0.5;
    const auto c = static_cast<std::uint64_t>(std::ceil(lip)) + 1;
    MaxOptions grid;
    grid.strategy = MaxStrategy::Grid;
    grid.modulus = Counterfunction::affine(c, c);
    const auto r = approx_max(p, x, radius, 1e-2, grid);
    const double k = std::ceil(1.0 / 1e-2) - 1.0;
    const double h = 1.0 / (static_cast<double>(c) * (k + 1.0) + 1.0);
    EXPECT_LE(brute_max(p, x, radius, h / 2.0) - r.value, 1e-2 + 1e-12);
    EXPECT_GE(r.value, -1e-12);
  }
}

TEST(ApproxMax, GridTieBreakIsLexicographic) {
  // f identically zero but routed through the grid: the first grid point wins.
  MaxOptions grid;
  grid.strategy = MaxStrategy::Grid;
  grid.modulus = Counterfunction::constant(1);
  const auto p = EquilibriumProblem::affine_paired(Matrix{{0, 0}, {0, 0}}, Vector{0, 0});
  const auto a = approx_max(p, Vector{0, 0}, 1.0, 0.5, grid);
  const auto b = approx_max(p, Vector{0, 0}, 1.0, 0.5, grid);
  EXPECT_EQ(a.y, b.y);
  EXPECT_EQ(a.value, 0.0);
}
