#pragma once

// Shared fixtures: instances with analytically known solutions and random
// generators for the property tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fejer/equilibrium.hpp"
#include "fejer/exact.hpp"
#include "fejer/operators.hpp"
#include "fejer/rates.hpp"
#include "fejer/solver.hpp"

namespace fejer::testing {

/// f(x, y) = |y| - |x| on R, T = Identity. Omega = {0}, y_n = 0 and
/// x_n = (1 - lambda)^n x_0.
inline EquilibriumProblem abs_problem() {
  return EquilibriumProblem::convex_minimization(weighted_one_norm(Vector{0.0}, Vector{1.0}));
}

inline SolverConfig abs_config(double lambda, std::size_t steps) {
  SolverConfig cfg;
  cfg.a = lambda;
  cfg.b = lambda;
  cfg.M = 1.0;
  cfg.eps = ConstantEps{0.0};
  cfg.max_steps = steps;
  return cfg;
}

inline Trajectory abs_trajectory(double x0, double lambda, std::size_t steps) {
  return run(abs_problem(), FirmOp::identity(1), abs_config(lambda, steps), Vector{x0});
}

/// a = b = M = 1, L = 2, c_u = 1, e = 0, N = 1, tau = 0: alpha = 1, sigma = 5.
inline RateInputs unit_inputs() {
  RateInputs in;
  in.a = 1;
  in.b = 1;
  in.M = 1;
  in.L = 2;
  in.c_u = 1;
  in.e = 0;
  in.N = 1;
  in.tau = Counterfunction::constant(0);
  return in;
}

/// Rate inputs certified for the |.| instance started at x0 = 2^-j with
/// lambda fixed: c_u = 4^-j >= |x0|^2, L = 2 sqrt(c_u), e = sqrt(c_u/alpha).
inline RateInputs abs_inputs(unsigned j, const Rational& lambda) {
  RateInputs in;
  in.a = lambda;
  in.b = lambda;
  in.M = 1;
  in.c_u = Rational(1, Natural(1) << (2 * j));
  const auto d = rates::derived_constants(in.c_u, in.a, in.b, in.M);
  in.L = d.L_upper;
  in.e = d.e_upper;
  in.N = 1;
  in.tau = Counterfunction::constant(0);
  return in;
}

inline Vector random_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

inline Rational random_rational(std::mt19937_64& rng, std::int64_t max_num, std::int64_t max_den) {
  std::uniform_int_distribution<std::int64_t> num(0, max_num);
  std::uniform_int_distribution<std::int64_t> den(1, max_den);
  return Rational(Integer(num(rng)), Integer(den(rng)));
}

/// Naive iteration of n -> n + g(n), the oracle for the closed form.
inline Natural iterate_tilde(const Counterfunction& g, Natural start, const Natural& times) {
  for (Natural i = 0; i < times; ++i) start += g(start);
  return start;
}

}  // namespace fejer::testing
