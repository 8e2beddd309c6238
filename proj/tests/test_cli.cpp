#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>

#include "fejer_cli/commands.hpp"

using namespace fejer;
using namespace fejer::cli;
namespace fs = std::filesystem;

namespace {

std::string config_path(const std::string& name) { return std::string(FEJER_CONFIG_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fejer_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(const std::string& command, const std::string& config, Overrides o = {}) {
  std::ostringstream out, err;
  const int code = dispatch(command, config, o, out, err);
  return {code, out.str(), err.str()};
}

/// Writes the abs config with one field replaced.
std::string abs_variant(const std::string& name, const std::function<void(json&)>& edit) {
  json j = json::parse(slurp(config_path("abs_identity.json")));
  edit(j);
  const fs::path p = scratch(name) / "config.json";
  std::ofstream(p) << j.dump(2);
  return p.string();
}

}  // namespace

TEST(Cli, SolveWritesClosedFormCsv) {
  const auto cfg = abs_variant("solve10", [](json& j) { j["solver"]["max_steps"] = 10; });
  Overrides o;
  o.out = scratch("solve10_out");
  const auto r = call("solve", cfg, o);
  ASSERT_EQ(r.code, kPass) << r.err;
  std::ifstream in(*o.out / "trajectory.csv");
  const auto traj = csv::read(in);
  ASSERT_EQ(traj.size(), 11u);
  for (std::size_t n = 0; n <= 10; ++n) EXPECT_EQ(traj.x(n)[0], std::ldexp(1.0, -static_cast<int>(n)));
  const auto summary = json::parse(slurp(*o.out / "summary.json"));
  EXPECT_EQ(summary["final_x"][0].get<double>(), std::ldexp(1.0, -10));
  EXPECT_EQ(summary["final_rho"].get<double>(), 1.0);
}

TEST(Cli, ZeroProblemAtFixedPointIsConstant) {
  const auto r = call("solve", config_path("zero_fixed_point.json"));
  ASSERT_EQ(r.code, kPass) << r.err;
  std::istringstream in(r.out);
  const auto traj = csv::read(in);
  for (const auto& rec : traj) EXPECT_EQ(rec.x, (Vector{0.5, 0.25}));
}

TEST(Cli, MalformedRationalIsAFieldDiagnostic) {
  const auto cfg = abs_variant("bad_rational", [](json& j) { j["rates"]["c_u"] = "1/0"; });
  const auto r = call("rates", cfg);
  EXPECT_EQ(r.code, kConfigError);
  EXPECT_NE(r.err.find("rates.c_u"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("zero denominator"), std::string::npos) << r.err;

  const auto floaty = abs_variant("float_rational", [](json& j) { j["solver"]["a"] = 0.5; });
  const auto f = call("solve", floaty);
  EXPECT_EQ(f.code, kConfigError);
  EXPECT_NE(f.err.find("solver.a"), std::string::npos) << f.err;

  const auto missing = abs_variant("missing_field", [](json& j) { j["problem"].erase("family"); });
  EXPECT_NE(call("solve", missing).err.find("problem.family: missing"), std::string::npos);

  const auto dims = abs_variant("dims", [](json& j) { j["x0"] = json::array({1, 2}); });
  EXPECT_NE(call("solve", dims).err.find("x0: expected 1 entries"), std::string::npos);
}

TEST(Cli, BadRangeExitsTwo) {
  const auto r = call("rates", config_path("bad_range.json"));
  EXPECT_EQ(r.code, kConfigError);
  EXPECT_NE(r.err.find("lambda range not inside (0, 2/M^2)"), std::string::npos) << r.err;
}

TEST(Cli, RatesTableMatchesLibrary) {
  RunConfig cfg = load_config(config_path("abs_identity.json"));
  cfg.k = 0;
  cfg.g = Counterfunction::constant(2);
  const auto rows = rates_table(cfg);
  const auto find = [&rows](const std::string& name) {
    for (const auto& r : rows)
      if (r.name == name) return r;
    throw std::runtime_error("no row " + name);
  };
  const RateInputs& in = *cfg.rates;
  EXPECT_EQ(find("phi1").text, "2");
  EXPECT_EQ(find("phi").text, "20001");
  EXPECT_EQ(find("phi1").bound->value, rates::phi1(0, cfg.g, in.c_u).value);
  EXPECT_EQ(find("phi2").bound->value, rates::phi2(0, cfg.g, in.c_u, in).value);
  EXPECT_EQ(find("phi3").bound->value, rates::phi3(0, cfg.g, in.c_u, in).value);
  EXPECT_EQ(find("P").bound->value, rates::total_bdd_modulus(0, 1, in.L).value);
  EXPECT_EQ(find("sigma").bound->value, rates::sigma(in));
  EXPECT_EQ(find("regularity").bound->value, rates::regularity_convergence_rate(0, *cfg.psi, in).value);
  EXPECT_EQ(find("alpha").text, "3/4");
  // L defaults to the derived 2 sqrt(c_u).
  EXPECT_EQ(in.L, 2);
  EXPECT_GE(in.e * in.e, Rational(4, 3));

  const auto r = call("rates", config_path("abs_identity.json"));
  EXPECT_EQ(r.code, kPass);
  EXPECT_NE(r.out.find("phi          20001"), std::string::npos) << r.out;
}

TEST(Cli, ZeroCostRatesRow) {
  const auto cfg = abs_variant("cu0", [](json& j) {
    j["rates"]["c_u"] = "0";
    j["rates"]["L"] = "1";
    j["rates"]["e"] = "0";
  });
  const auto r = call("rates", cfg);
  ASSERT_EQ(r.code, kPass) << r.err;
  EXPECT_NE(r.out.find("phi1         0\n"), std::string::npos) << r.out;
}

TEST(Cli, VerifyExitCodes) {
  Overrides o;
  o.out = scratch("verify_abs");
  const auto ok = call("verify", config_path("abs_identity.json"), o);
  EXPECT_EQ(ok.code, kPass) << ok.out << ok.err;
  const auto report = json::parse(slurp(*o.out / "report.json"));
  EXPECT_EQ(report["summary"]["failed"].get<int>(), 0);
  bool meta_points_skipped = false;
  for (const auto& c : report["checks"])
    if (c["id"] == "meta_points") meta_points_skipped = c["status"] == "skipped";
  EXPECT_TRUE(meta_points_skipped);

  const auto bad = call("verify", config_path("abs_perturbed.json"));
  EXPECT_EQ(bad.code, kCheckFailed);
  EXPECT_NE(bad.out.find("fejer_decrease         fail"), std::string::npos) << bad.out;

  Overrides none;
  none.checks = "";
  const auto empty = call("verify", config_path("abs_identity.json"), none);
  EXPECT_EQ(empty.code, kConfigError);
  EXPECT_NE(empty.err.find("no checks selected"), std::string::npos);

  Overrides unknown;
  unknown.checks = "steps,bogus";
  EXPECT_EQ(call("verify", config_path("abs_identity.json"), unknown).code, kConfigError);
}

TEST(Cli, VerifyStoredTrajectory) {
  Overrides o;
  o.out = scratch("stored");
  ASSERT_EQ(call("solve", config_path("abs_identity.json"), o).code, kPass);
  Overrides v;
  v.trajectory = (*o.out / "trajectory.csv").string();
  v.checks = "steps,meta_norm_sq_to_u";
  EXPECT_EQ(call("verify", config_path("abs_identity.json"), v).code, kPass);
}

TEST(Cli, OracleFailureKeepsPartialCsv) {
  const auto cfg = abs_variant("oracle", [](json& j) {
    j["problem"] = {{"family", "affine_paired"}, {"A", {{1}}}, {"d", {0}}};
    j["solver"]["eps"] = {{"kind", "geometric"}, {"eps0", 0.5}, {"q", 0.5}};
    j["solver"]["oracle"] = {{"strategy", "grid"}, {"modulus", "affine:3:3"}, {"max_grid_points", 2000}};
  });
  Overrides o;
  o.out = scratch("oracle_out");
  const auto r = call("solve", cfg, o);
  EXPECT_EQ(r.code, kOracleError);
  std::ifstream in(*o.out / "trajectory.csv");
  const auto traj = csv::read(in);
  EXPECT_GT(traj.size(), 0u);
  EXPECT_LT(traj.size(), 61u);
  EXPECT_NE(slurp(*o.out / "summary.json").find("oracle failure"), std::string::npos);
}

TEST(Cli, Determinism) {
  for (const char* name : {"abs_identity.json", "quadratic_ball.json", "zero_fixed_point.json"}) {
    Overrides a, b;
    a.out = scratch(std::string("det_a_") + name);
    b.out = scratch(std::string("det_b_") + name);
    const auto ra = call("verify", config_path(name), a);
    const auto rb = call("verify", config_path(name), b);
    EXPECT_EQ(ra.code, rb.code);
    EXPECT_EQ(ra.out, rb.out);
    EXPECT_EQ(slurp(*a.out / "report.json"), slurp(*b.out / "report.json"));
    EXPECT_EQ(slurp(*a.out / "trajectory.csv"), slurp(*b.out / "trajectory.csv"));
  }
}

TEST(Cli, ShippedConfigsPass) {
  for (const char* name : {"abs_identity.json", "quadratic_ball.json", "zero_fixed_point.json", "affine_rotation.json"}) {
    const auto r = call("verify", config_path(name));
    EXPECT_EQ(r.code, kPass) << name << "\n" << r.out << r.err;
  }
}

TEST(Cli, CapFlagSkipsLargeBounds) {
  Overrides o;
  o.cap_digits = 1;
  o.checks = "approx_point,meta_fix_residuals";
  const auto r = call("verify", config_path("abs_identity.json"), o);
  EXPECT_EQ(r.code, kPass);
  EXPECT_NE(r.out.find("approx_point           skipped"), std::string::npos) << r.out;
}
