#pragma once

// The three subcommands as in-process functions over streams and an output
// directory. Exit codes: 0 pass, 1 a check failed, 2 configuration, 3 oracle.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fejer/rates.hpp"
#include "fejer/regularity.hpp"
#include "fejer/solver.hpp"
#include "fejer/verify.hpp"
#include "fejer_cli/config.hpp"

namespace fejer::cli {

enum ExitCode : int { kPass = 0, kCheckFailed = 1, kConfigError = 2, kOracleError = 3 };

struct Overrides {
  std::optional<std::uint64_t> k;
  std::optional<Counterfunction> g;
  std::optional<unsigned> cap_digits;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> checks;  // comma separated
  std::optional<std::string> trajectory;
  std::optional<std::filesystem::path> out;
};

inline void apply(RunConfig& cfg, const Overrides& o) {
  if (o.k) cfg.k = *o.k;
  if (o.g) cfg.g = *o.g;
  if (o.cap_digits) cfg.verify.cap = boost::multiprecision::pow(Natural(10), *o.cap_digits);
  if (o.seed) cfg.seed = *o.seed;
  if (o.checks) {
    std::vector<std::string> names;
    std::stringstream ss(*o.checks);
    for (std::string item; std::getline(ss, item, ',');)
      if (!item.empty()) names.push_back(item);
    cfg.verify.checks = std::move(names);
  }
}

inline const RateInputs& require_rates(const RunConfig& cfg) {
  if (!cfg.rates) throw InvalidConfig("rates: section required");
  return *cfg.rates;
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InvalidConfig(dir.string() + ": cannot create output directory");
}

inline std::string fmt(double v) { return csv::format_double(v); }

// ---------------------------------------------------------------------------
// solve

inline json run_summary(const Trajectory& traj, const std::string& status) {
  json s;
  s["status"] = status;
  s["records"] = traj.size();
  if (!traj.empty()) {
    const auto& last = traj[traj.size() - 1];
    s["final_x"] = last.x.values();
    s["final_rho"] = last.rho;
    std::vector<double> tail;
    for (std::size_t n = traj.size() - std::min<std::size_t>(traj.size(), 5); n < traj.size(); ++n)
      tail.push_back(traj.fval(n));
    s["fval_tail"] = tail;
  }
  return s;
}

/// Runs the solver. The CSV (complete or up to an oracle failure) goes to
/// out/trajectory.csv and the summary to out/summary.json, or both to the
/// streams when no directory is given.
inline int solve_cmd(const RunConfig& cfg, const Overrides& o, std::ostream& out, std::ostream& err) {
  Trajectory traj;
  int code = kPass;
  std::string status = "ok";
  try {
    run_into(traj, cfg.problem, cfg.op, cfg.solver, cfg.x0);
  } catch (const OracleFailure& e) {
    err << "oracle failure: " << e.what() << '\n';
    code = kOracleError;
    status = std::string("oracle failure: ") + e.what();
  }
  const json summary = run_summary(traj, status);
  if (o.out) {
    ensure_dir(*o.out);
    std::ofstream csv_out(*o.out / "trajectory.csv");
    if (!traj.empty()) csv::write(csv_out, traj);
    std::ofstream(*o.out / "summary.json") << summary.dump(2) << '\n';
    out << summary.dump(2) << '\n';
  } else {
    if (!traj.empty()) csv::write(out, traj);
    err << summary.dump(2) << '\n';
  }
  return code;
}

// ---------------------------------------------------------------------------
// rates

struct RateRow {
  std::string name;
  std::optional<Bound> bound;  // set for integer bounds
  std::string text;            // rendered value
};

inline std::string render_enclosure(const exact::Enclosure& e) {
  if (e.is_point()) return e.lo.str();
  std::ostringstream s;
  s << std::setprecision(17) << '[' << exact::to_double(e.lo) << ", " << exact::to_double(e.hi) << ']';
  return s.str();
}

/// The bound table at (k, g); rows whose value exceeds the digit budget say so.
inline std::vector<RateRow> rates_table(const RunConfig& cfg) {
  const RateInputs& in = require_rates(cfg);
  in.validate();
  const Natural k = cfg.k;
  const Counterfunction& g = cfg.g;
  std::vector<RateRow> rows;
  const auto c = rates::constants(in);
  rows.push_back({"alpha", std::nullopt, c.alpha.str()});
  rows.push_back({"beta", std::nullopt, render_enclosure(c.beta)});
  rows.push_back({"sigma", Bound{c.sigma, "sigma"}, c.sigma.str()});
  rows.push_back({"eta", std::nullopt, render_enclosure(c.eta)});
  rows.push_back({"L", std::nullopt, in.L.str()});
  rows.push_back({"e", std::nullopt, in.e.str()});
  rows.push_back({"tau", std::nullopt, in.tau.to_string()});

  const auto add = [&rows](const std::string& name, auto&& compute) {
    try {
      Bound b = compute();
      const std::string text = b.display();
      rows.push_back({name, std::move(b), text});
    } catch (const SizeOverflow& e) {
      rows.push_back({name, std::nullopt, std::string("exceeds budget: ") + e.what()});
    }
  };
  add("phi1", [&] { return rates::phi1(k, g, in.c_u, in.budget); });
  add("phi2", [&] { return rates::phi2(k, g, in.c_u, in); });
  add("phi3", [&] { return rates::phi3(k, g, in.c_u, in); });
  add("phi", [&] { return rates::approx_point_bound(k, in); });
  add("P", [&] { return rates::total_bdd_modulus(k, in.N, in.L, in.precision, in.budget); });
  add("Sigma", [&] { return rates::metastability_rate(k, g, in); });
  if (cfg.sigma_j) {
    const auto m = rates::uniform_closedness_moduli(cfg.k, *cfg.sigma_j);
    rows.push_back({"delta_uc", Bound{m.delta, "delta"}, m.delta.str()});
    rows.push_back({"omega_uc", Bound{m.omega, "omega"}, m.omega.str()});
    add("Sigma_uc", [&] { return rates::metastability_rate_uc(cfg.k, g, *cfg.sigma_j, in); });
  }
  if (cfg.psi) add("regularity", [&] { return rates::regularity_convergence_rate(k, *cfg.psi, in); });
  return rows;
}

inline int rates_cmd(const RunConfig& cfg, std::ostream& out) {
  const auto rows = rates_table(cfg);
  out << "k " << cfg.k << "  g " << cfg.g.to_string() << '\n';
  for (const auto& r : rows) {
    out << std::left << std::setw(12) << r.name << ' ' << r.text;
    if (r.bound && r.bound->digits() > 1000) out << "  (" << r.bound->digits() << " digits)";
    out << '\n';
  }
  return kPass;
}

// ---------------------------------------------------------------------------
// verify

inline const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names{"steps",         "fejer_modulus", "meta_fvals",
                                              "meta_fix_residuals", "meta_norm_sq_to_u", "meta_points",
                                              "approx_point",  "regularity",    "closedness"};
  return names;
}

/// The checks to run: the explicit selection, or every check whose inputs the
/// config provides.
inline std::vector<std::string> selected_checks(const RunConfig& cfg) {
  const auto needs = [&cfg](const std::string& name) -> std::string {
    if ((name == "steps" || name == "fejer_modulus" || name == "meta_norm_sq_to_u") && !cfg.u) return "u";
    if (name == "regularity" && !cfg.psi) return "psi";
    if (name == "regularity" && !cfg.x_star) return "x_star";
    if (name == "closedness" && !cfg.sigma_j) return "sigma_j";
    if (name == "closedness" && !cfg.u && !cfg.x_star) return "u";
    return {};
  };
  std::vector<std::string> out;
  if (!cfg.verify.checks) {
    for (const auto& n : check_names())
      if (needs(n).empty()) out.push_back(n);
    return out;
  }
  std::set<std::string> seen;
  for (const auto& n : *cfg.verify.checks) {
    if (std::find(check_names().begin(), check_names().end(), n) == check_names().end())
      throw InvalidConfig("verify.checks: unknown check \"" + n + "\"");
    if (const auto missing = needs(n); !missing.empty())
      throw InvalidConfig(missing + ": required by check \"" + n + "\"");
    if (seen.insert(n).second) out.push_back(n);
  }
  if (out.empty()) throw InvalidConfig("no checks selected");
  return out;
}

/// Candidates for the Fejer modulus check: a lattice around u plus uniform samples.
inline std::vector<Vector> fejer_candidates(const Vector& u, std::size_t samples, std::uint64_t seed) {
  std::vector<Vector> out;
  const std::size_t n = u.dim();
  if (n <= 2) {
    constexpr int steps = 20;
    std::vector<int> idx(n, -steps);
    while (true) {
      Vector p = u;
      for (std::size_t i = 0; i < n; ++i) p[i] += static_cast<double>(idx[i]) / steps;
      out.push_back(std::move(p));
      std::size_t i = 0;
      while (i < n && idx[i] == steps) idx[i++] = -steps;
      if (i == n) break;
      ++idx[i];
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (std::size_t s = 0; s < samples; ++s) {
    Vector p = u;
    for (std::size_t i = 0; i < n; ++i) p[i] += unit(rng);
    out.push_back(std::move(p));
  }
  return out;
}

inline CheckReport skipped(const std::string& id, const std::string& note) {
  CheckReport r;
  r.id = id;
  r.status = CheckStatus::Skipped;
  r.note = note;
  return r;
}

inline std::vector<CheckReport> run_checks(const RunConfig& cfg, const Trajectory& traj) {
  const RateInputs& in = require_rates(cfg);
  const auto names = selected_checks(cfg);
  const OmegaContext ctx(cfg.op, traj, cfg.problem);
  const auto& v = cfg.verify;
  WitnessOptions wopt;
  wopt.T = cfg.op;
  wopt.u = cfg.u;
  wopt.cap = v.cap;

  std::vector<CheckReport> out;
  for (const auto& name : names) {
    if (name == "steps") {
      for (auto& r : check_step_inequalities(traj, cfg.op, *cfg.u, in, v.tol)) out.push_back(std::move(r));
    } else if (name == "fejer_modulus") {
      try {
        out.push_back(check_fejer_modulus(traj, ctx, in, v.fejer.n, v.fejer.m, v.fejer.r,
                                          fejer_candidates(*cfg.u, v.fejer_samples, cfg.seed), v.tol));
      } catch (const HorizonExceeded& e) {
        out.push_back(skipped("fejer_modulus", e.what()));
      } catch (const SizeOverflow& e) {
        out.push_back(skipped("fejer_modulus", e.what()));
      }
    } else if (name.rfind("meta_", 0) == 0) {
      out.push_back(check_metastability(traj, parse_quantity(name.substr(5)), cfg.k, cfg.g, in, wopt));
    } else if (name == "approx_point") {
      out.push_back(check_approx_point_bound(traj, ctx, cfg.k, in, v.cap));
    } else if (name == "regularity") {
      out.push_back(check_regularity_rate(traj, *cfg.x_star, v.k_max, *cfg.psi, in, v.cap));
    } else if (name == "closedness") {
      const Vector& center = cfg.u ? *cfg.u : *cfg.x_star;
      try {
        const auto pairs = sample_closedness_pairs(cfg.k, *cfg.sigma_j, center, v.closedness_samples, cfg.seed);
        out.push_back(check_uniform_closedness(ctx, cfg.k, *cfg.sigma_j, pairs));
      } catch (const HorizonExceeded& e) {
        out.push_back(skipped("uniform_closedness", e.what()));
      }
    }
  }
  return out;
}

inline json report_json(const std::vector<CheckReport>& reports) {
  json checks = json::array();
  for (const auto& r : reports) {
    json c;
    c["id"] = r.id;
    c["status"] = to_string(r.status);
    c["margin"] = std::isfinite(r.worst_margin) ? json(r.worst_margin) : json(nullptr);
    c["step"] = r.step ? json(*r.step) : json(nullptr);
    c["bound_digits"] = r.bound_digits ? json(*r.bound_digits) : json(nullptr);
    c["bound"] = r.bound;
    c["note"] = r.note;
    checks.push_back(std::move(c));
  }
  const auto s = summarize(reports);
  return json{{"summary", {{"passed", s.passed}, {"failed", s.failed}, {"skipped", s.skipped}}},
              {"checks", std::move(checks)}};
}

inline Trajectory load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig(path + ": cannot open trajectory");
  try {
    return csv::read(in);
  } catch (const InvalidConfig& e) {
    throw InvalidConfig(path + ": " + e.what());
  }
}

inline int verify_cmd(const RunConfig& cfg, const Overrides& o, std::ostream& out, std::ostream& err) {
  require_rates(cfg);
  selected_checks(cfg);
  Trajectory traj;
  if (o.trajectory) {
    traj = load_trajectory(*o.trajectory);
    if (traj.dim() != cfg.problem.dim()) throw DimensionMismatch(cfg.problem.dim(), traj.dim());
  } else {
    try {
      run_into(traj, cfg.problem, cfg.op, cfg.solver, cfg.x0);
    } catch (const OracleFailure& e) {
      err << "oracle failure: " << e.what() << '\n';
      return kOracleError;
    }
  }
  if (cfg.verify.perturb) {
    try {
      perturb(traj, cfg.verify.perturb->step, cfg.verify.perturb->delta);
    } catch (const InvalidConfig& e) {
      throw InvalidConfig(std::string("verify.perturb.step: ") + e.what());
    }
  }
  auto reports = run_checks(cfg, traj);
  std::stable_sort(reports.begin(), reports.end(),
                   [](const CheckReport& a, const CheckReport& b) { return a.id < b.id; });
  const json report = report_json(reports);
  for (const auto& r : reports) {
    out << std::left << std::setw(22) << r.id << ' ' << std::setw(7) << to_string(r.status);
    if (std::isfinite(r.worst_margin)) out << " margin=" << fmt(r.worst_margin);
    if (r.step) out << " step=" << *r.step;
    if (r.bound_digits) out << " bound_digits=" << *r.bound_digits;
    if (!r.note.empty()) out << "  " << r.note;
    out << '\n';
  }
  const auto s = summarize(reports);
  out << "passed " << s.passed << "  failed " << s.failed << "  skipped " << s.skipped << '\n';
  if (o.out) {
    ensure_dir(*o.out);
    std::ofstream(*o.out / "report.json") << report.dump(2) << '\n';
    std::ofstream csv_out(*o.out / "trajectory.csv");
    csv::write(csv_out, traj);
  }
  return s.failed > 0 ? kCheckFailed : kPass;
}

// ---------------------------------------------------------------------------

/// Loads the config, applies the flags and runs one subcommand, mapping
/// library errors onto exit codes.
inline int dispatch(const std::string& command, const std::string& config_path, const Overrides& o,
                    std::ostream& out, std::ostream& err) {
  try {
    RunConfig cfg = load_config(config_path);
    apply(cfg, o);
    if (command == "solve") return solve_cmd(cfg, o, out, err);
    if (command == "rates") return rates_cmd(cfg, out);
    if (command == "verify") return verify_cmd(cfg, o, out, err);
    err << "unknown command " << command << '\n';
    return kConfigError;
  } catch (const InvalidConfig& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidRange& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DimensionMismatch& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const OracleFailure& e) {
    err << "oracle failure: " << e.what() << '\n';
    return kOracleError;
  }
}

}  // namespace fejer::cli
