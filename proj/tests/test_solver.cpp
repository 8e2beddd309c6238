#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fejer/solver.hpp"
#include "support.hpp"

using namespace fejer;
using fejer::testing::abs_config;
using fejer::testing::abs_problem;
using fejer::testing::abs_trajectory;

TEST(Solver, SingleStepOnAbs) {
  const auto [next, rec] = step(IterationState::initial(Vector{1}), abs_problem(), FirmOp::identity(1),
                                abs_config(0.5, 1));
  EXPECT_EQ(rec.y, Vector{0});
  EXPECT_EQ(rec.fval, 1.0);
  EXPECT_EQ(rec.xi, Vector{1});
  EXPECT_EQ(next.x, Vector{0.5});
  EXPECT_EQ(next.n, 1u);
  EXPECT_EQ(next.rho, 1.0);
}

TEST(Solver, EquilibriumIsStationary) {
  const auto [next, rec] = step(IterationState::initial(Vector{0}), abs_problem(), FirmOp::identity(1),
                                abs_config(0.5, 1));
  EXPECT_EQ(rec.fval, 0.0);
  EXPECT_EQ(next.x, Vector{0});
}

TEST(Solver, PicardIterationForZeroProblem) {
  SolverConfig cfg = abs_config(0.5, 1);
  const auto [next, rec] = step(IterationState::initial(Vector{2}), EquilibriumProblem::zero(1),
                                FirmOp::box(Vector{0}, Vector{1}), cfg);
  EXPECT_EQ(rec.fval, 0.0);
  EXPECT_EQ(next.x, Vector{1});

  cfg.max_steps = 3;
  const auto traj = run(EquilibriumProblem::zero(1), FirmOp::box(Vector{0}, Vector{1}), cfg, Vector{5});
  ASSERT_EQ(traj.size(), 4u);
  EXPECT_EQ(traj.x(0), Vector{5});
  EXPECT_EQ(traj.x(1), Vector{1});
  EXPECT_EQ(traj.x(2), Vector{1});
  EXPECT_EQ(traj.x(3), Vector{1});
  EXPECT_DOUBLE_EQ(diameter_bound(traj), 4.0);

  const auto constant = run(EquilibriumProblem::zero(2), FirmOp::identity(2), cfg, Vector{3, -1});
  for (const auto& r : constant) EXPECT_EQ(r.x, (Vector{3, -1}));
  EXPECT_EQ(diameter_bound(constant), 0.0);
}

TEST(Solver, AbsClosedForm) {
  const auto traj = abs_trajectory(1.0, 0.5, 3);
  ASSERT_EQ(traj.size(), 4u);
  const double expected[] = {1, 0.5, 0.25, 0.125};
  for (std::size_t n = 0; n < 4; ++n) EXPECT_EQ(traj.x(n)[0], expected[n]);
  EXPECT_DOUBLE_EQ(diameter_bound(traj), 0.875);
  for (double lambda : {0.25, 0.5, 0.75}) {
    const auto t = abs_trajectory(1.0, lambda, 60);
    for (std::size_t n = 0; n <= 60; ++n)
      EXPECT_NEAR(t.x(n)[0], std::pow(1.0 - lambda, static_cast<double>(n)), 1e-12);
  }
}

TEST(Solver, TrajectoryInvariants) {
  std::mt19937_64 rng(31);
  const auto p = EquilibriumProblem::convex_minimization(quadratic(Matrix{{2, 0.3}, {0.3, 1}}, Vector{-0.4, 0.2}));
  SolverConfig cfg;
  cfg.a = 0.1;
  cfg.b = 0.3;
  cfg.M = 2.0;
  cfg.eps = HarmonicEps{0.1};
  cfg.max_steps = 80;
  const auto traj = run(p, FirmOp::ball(Vector{0, 0}, 1.0), cfg, Vector{3, -2});
  for (std::size_t n = 0; n < traj.size(); ++n) {
    EXPECT_GE(traj.fval(n), -1e-12);
    EXPECT_LE(norm(traj.y(n)), traj[n].rho + 1.0 + 1e-12);
    if (n > 0) EXPECT_GE(traj[n].rho, traj[n - 1].rho);
    EXPECT_NEAR(traj[n].rho, n == 0 ? norm(traj.x(0)) : std::max(traj[n - 1].rho, norm(traj.x(n))), 0.0);
  }
}

TEST(Solver, RejectsBadConfig) {
  SolverConfig cfg = abs_config(0.5, 1);
  cfg.b = 2.0;
  EXPECT_THROW(cfg.validate(), InvalidConfig);
  cfg = abs_config(0.5, 1);
  cfg.lambda = ConstantLambda{0.9};
  EXPECT_THROW(run(abs_problem(), FirmOp::identity(1), cfg, Vector{1}), InvalidConfig);
  cfg = abs_config(0.5, 1);
  EXPECT_THROW(run(abs_problem(), FirmOp::identity(2), cfg, Vector{1}), DimensionMismatch);
  cfg.eps = GeometricEps{1.0, 1.5};
  EXPECT_THROW(cfg.validate(), InvalidConfig);
}

TEST(Solver, PartialTrajectoryKeptOnFailure) {
  // A non-monotone affine problem with no modulus fails at the first oracle call
  // after x leaves the origin.
  SolverConfig cfg = abs_config(0.5, 5);
  Trajectory out;
  EXPECT_THROW(run_into(out, EquilibriumProblem::affine_paired(Matrix{{-1}}, Vector{0}), FirmOp::identity(1), cfg,
                        Vector{1}),
               OracleFailure);
  EXPECT_EQ(out.size(), 0u);

  cfg.max_steps = 3;
  cfg.oracle.strategy = MaxStrategy::Grid;
  cfg.oracle.modulus = Counterfunction::affine(3, 3);
  cfg.eps = ConstantEps{0.05};
  const auto t = run(EquilibriumProblem::affine_paired(Matrix{{-1}}, Vector{0}), FirmOp::box(Vector{-1}, Vector{1}),
                     cfg, Vector{1});
  EXPECT_EQ(t.size(), 4u);
}

TEST(Schedules, TauIsARateOfConvergence) {
  const std::vector<EpsSchedule> schedules{ConstantEps{0.0}, HarmonicEps{1.0}, HarmonicEps{3.5},
                                           GeometricEps{2.0, 0.5}, GeometricEps{0.3, 0.9}};
  for (const auto& s : schedules) {
    const auto tau = tau_counterfunction(s);
    ASSERT_TRUE(tau.has_value());
    for (std::uint64_t k = 0; k < 60; ++k) {
      const auto t = tau_at(s, static_cast<double>(k));
      ASSERT_TRUE(t.has_value());
      const std::uint64_t from = tau->eval_u64(k);
      EXPECT_GE(static_cast<double>(from), *t);
      for (std::uint64_t n = static_cast<std::uint64_t>(*t); n < static_cast<std::uint64_t>(*t) + 200; ++n)
        EXPECT_LE(eps_at(s, n), 1.0 / (static_cast<double>(k) + 1.0) * (1.0 + 1e-12));
      for (std::uint64_t n = from; n < from + 50; ++n)
        EXPECT_LE(eps_at(s, n), 1.0 / (static_cast<double>(k) + 1.0) * (1.0 + 1e-12));
    }
  }
  EXPECT_FALSE(tau_counterfunction(ConstantEps{0.1}).has_value());
}

TEST(Csv, HeaderAndRoundTrip) {
  EXPECT_EQ(csv::header(2), "n,x[0],x[1],y[0],y[1],xi[0],xi[1],rho,lambda,eps,fval");
  const auto traj = abs_trajectory(0.7, 0.25, 10);
  std::stringstream ss;
  csv::write(ss, traj);
  const auto back = csv::read(ss);
  ASSERT_EQ(back.size(), traj.size());
  for (std::size_t n = 0; n < traj.size(); ++n) {
    EXPECT_EQ(back.x(n), traj.x(n));
    EXPECT_EQ(back.y(n), traj.y(n));
    EXPECT_EQ(back[n].xi, traj[n].xi);
    EXPECT_EQ(back[n].rho, traj[n].rho);
    EXPECT_EQ(back[n].fval, traj[n].fval);
    EXPECT_EQ(back[n].lambda, traj[n].lambda);
  }
}

TEST(Csv, RejectsMalformed) {
  std::stringstream bad("n,x\n0,1\n");
  EXPECT_THROW(csv::read(bad), InvalidConfig);
  std::stringstream short_row(csv::header(1) + "\n0,1,2\n");
  EXPECT_THROW(csv::read(short_row), InvalidConfig);
}
