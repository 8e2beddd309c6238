#pragma once

// Empirical checks of the per-step inequalities and of the computed bounds
// against recorded trajectories. A check that cannot run (bound above the
// cap, horizon too short) is Skipped and never counts as a pass.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fejer/counterfunction.hpp"
#include "fejer/equilibrium.hpp"
#include "fejer/errors.hpp"
#include "fejer/exact.hpp"
#include "fejer/operators.hpp"
#include "fejer/rates.hpp"
#include "fejer/regularity.hpp"
#include "fejer/solver.hpp"

namespace fejer {

enum class CheckStatus { Pass, Fail, Skipped };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Skipped: return "skipped";
  }
  return "?";
}

struct CheckReport {
  std::string id;
  CheckStatus status = CheckStatus::Skipped;
  /// Largest lhs - rhs seen (positive means violated), or witness - bound for searches.
  double worst_margin = -std::numeric_limits<double>::infinity();
  std::optional<std::size_t> step;
  std::optional<std::size_t> bound_digits;
  std::string bound;
  std::string note;

  bool passed() const { return status == CheckStatus::Pass; }
  bool failed() const { return status == CheckStatus::Fail; }
};

inline constexpr double default_tol = 1e-9;

namespace detail {

struct Accumulator {
  CheckReport report;
  double tol;
  std::size_t count = 0;

  Accumulator(std::string id, double t) : tol(t) { report.id = std::move(id); }

  /// Records lhs <= rhs + tol at the given step.
  void le(double lhs, double rhs, std::size_t step) {
    ++count;
    const double margin = lhs - rhs;
    if (!(margin <= report.worst_margin)) {
      report.worst_margin = std::isnan(margin) ? std::numeric_limits<double>::infinity() : margin;
      report.step = step;
    }
  }

  CheckReport finish() {
    if (count == 0) {
      report.status = CheckStatus::Skipped;
      report.note = "nothing to check";
    } else {
      report.status = report.worst_margin <= tol ? CheckStatus::Pass : CheckStatus::Fail;
    }
    return std::move(report);
  }
};

inline double rdouble(const Rational& q) { return exact::to_double(q); }

inline void set_bound(CheckReport& r, const Bound& b) {
  r.bound_digits = b.digits();
  r.bound = b.display();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Per-step inequalities

/// Evaluates at every recorded step, for u in Omega:
///   fejer_decrease  ||x_{n+1} - u||^2 <= ||x_n - u||^2
///   fejer_sharp     ||x_{n+1} - u||^2 <= ||x_n - u||^2 + lambda (M^2 lambda - 2) f^2
///   descent_gap     0 <= alpha f^2 <= D_n,  D_n = ||x_n - u||^2 - ||x_{n+1} - u||^2
///   step_length     ||x_n - x_{n+1}||^2 <= D_n + 2 M b f ||x_n - x_{n+1}||
///   residual_step   ||x_{n+1} - T x_{n+1}|| <= ||x_n - x_{n+1}|| + M b f
/// and the standing hypotheses ||xi_n|| <= M, f <= e, f >= 0, lambda_n in [a, b],
/// ||y_n|| <= rho_n + 1 and rho nondecreasing. Steps are indexed by n; the
/// fejer checks report the index n + 1 of the iterate that moved away.
inline std::vector<CheckReport> check_step_inequalities(const Trajectory& traj, const FirmOp& t, const Vector& u,
                                                        const RateInputs& in, double tol = default_tol) {
  using detail::Accumulator;
  const double a = detail::rdouble(in.a), b = detail::rdouble(in.b), M = detail::rdouble(in.M),
               e = detail::rdouble(in.e);
  const double al = detail::rdouble(rates::alpha(in));

  Accumulator fejer("fejer_decrease", tol), sharp("fejer_sharp", tol), gap_lo("descent_gap_nonneg", tol),
      gap("descent_gap", tol), len("step_length", tol), res("residual_step", tol), xi("subgradient_bound", tol),
      fb("f_bound", tol), fnn("f_nonneg", 1e-12), lam("lambda_range", 0.0), yb("y_in_ball", tol),
      rho("rho_monotone", 0.0);

  for (std::size_t n = 0; n < traj.size(); ++n) {
    const StepRecord& r = traj[n];
    const double f = r.fval;
    xi.le(norm(r.xi), M, n);
    fb.le(f, e, n);
    fnn.le(-f, 0.0, n);
    lam.le(std::max(a - r.lambda, r.lambda - b), 0.0, n);
    yb.le(norm(r.y), r.rho + 1.0, n);
    if (n + 1 == traj.size()) break;
    const StepRecord& s = traj[n + 1];
    rho.le(r.rho - s.rho, 0.0, n);
    const double d0 = norm_sq(r.x - u), d1 = norm_sq(s.x - u);
    const double delta = d0 - d1;
    fejer.le(d1, d0, n + 1);
    sharp.le(d1, d0 + r.lambda * (M * M * r.lambda - 2.0) * f * f, n + 1);
    gap_lo.le(0.0, al * f * f, n);
    gap.le(al * f * f, delta, n);
    const double step = distance(r.x, s.x);
    len.le(step * step, delta + 2.0 * M * b * f * step, n);
    res.le(fix_residual(t, s.x), step + M * b * f, n);
  }
  std::vector<CheckReport> out;
  for (Accumulator* acc : {&fejer, &sharp, &gap_lo, &gap, &len, &res, &xi, &fb, &fnn, &lam, &yb, &rho})
    out.push_back(acc->finish());
  return out;
}

/// Adds delta to every coordinate of x_n, leaving the rest of the record alone.
/// Used to inject violations.
inline void perturb(Trajectory& traj, std::size_t n, double delta) {
  if (n >= traj.size()) throw InvalidConfig("perturbation step " + std::to_string(n) + " outside the trajectory");
  Vector& x = traj[n].x;
  for (std::size_t i = 0; i < x.dim(); ++i) x[i] += delta;
}

// ---------------------------------------------------------------------------
// Uniform Fejer modulus

/// For k = chi(n, m, r) and every candidate u in Omega'_k:
/// ||x_{n+l} - u|| < ||x_n - u|| + 1/(r+1) for all l <= m.
inline CheckReport check_fejer_modulus(const Trajectory& traj, const OmegaContext& ctx, const RateInputs& in,
                                       std::size_t n, std::size_t m, std::size_t r,
                                       const std::vector<Vector>& candidates, double tol = default_tol) {
  const Natural k_big = rates::chi(n, m, r, in).value;
  if (k_big > Natural(ctx.horizon())) {
    const Natural top = std::numeric_limits<std::size_t>::max();
    throw HorizonExceeded(std::min(k_big, top).convert_to<std::size_t>(), ctx.horizon());
  }
  const auto k = k_big.convert_to<std::size_t>();
  if (n + m > traj.horizon()) throw HorizonExceeded(n + m, traj.horizon());
  detail::Accumulator acc("fejer_modulus", tol);
  const double slack = 1.0 / (static_cast<double>(r) + 1.0);
  std::size_t members = 0;
  for (const Vector& u : candidates) {
    if (!omega_prime_member(ctx, u, k)) continue;
    ++members;
    const double base = distance(traj.x(n), u);
    for (std::size_t l = 0; l <= m; ++l) acc.le(distance(traj.x(n + l), u), base + slack, n + l);
  }
  if (members == 0) {
    CheckReport rep;
    rep.id = "fejer_modulus";
    rep.status = CheckStatus::Pass;
    rep.worst_margin = 0.0;
    rep.note = "no members sampled";
    return rep;
  }
  // Strict inequality: equality with the slack counts as a violation.
  CheckReport rep = acc.finish();
  if (rep.status == CheckStatus::Pass && rep.worst_margin >= 0.0 && tol == 0.0) rep.status = CheckStatus::Fail;
  rep.note = std::to_string(members) + " members at k = " + std::to_string(k);
  return rep;
}

// ---------------------------------------------------------------------------
// Metastability witness searches

enum class Quantity { FVals, FixResiduals, NormSqToU, Points };

inline const char* to_string(Quantity q) {
  switch (q) {
    case Quantity::FVals: return "fvals";
    case Quantity::FixResiduals: return "fix_residuals";
    case Quantity::NormSqToU: return "norm_sq_to_u";
    case Quantity::Points: return "points";
  }
  return "?";
}

inline Quantity parse_quantity(const std::string& s) {
  if (s == "fvals") return Quantity::FVals;
  if (s == "fix_residuals") return Quantity::FixResiduals;
  if (s == "norm_sq_to_u") return Quantity::NormSqToU;
  if (s == "points") return Quantity::Points;
  throw InvalidConfig("unknown quantity \"" + s + "\"");
}

struct WitnessOptions {
  /// Needed for FixResiduals.
  std::optional<FirmOp> T;
  /// Needed for NormSqToU.
  std::optional<Vector> u;
  /// Bounds above the cap are not searched.
  Natural cap = 1'000'000;
};

namespace detail {

/// Whether the window [n, n + w] is stable to 1/(k+1) for quantity q:
///   FVals         f(y_i, x_i) < 1/(k+1)
///   FixResiduals  ||x_i - T x_i|| < 1/(k+1)
///   NormSqToU     | ||x_i - u||^2 - ||x_j - u||^2 | < 1/(k+1)
///   Points        ||x_i - x_j|| <= 1/(k+1)
class WindowTest {
 public:
  WindowTest(const Trajectory& traj, Quantity q, const WitnessOptions& opt) : traj_(traj), q_(q) {
    if (q == Quantity::FixResiduals) {
      if (!opt.T) throw InvalidConfig("fix_residuals witness search needs T");
      for (const auto& r : traj) scalar_.push_back(fix_residual(*opt.T, r.x));
    } else if (q == Quantity::NormSqToU) {
      if (!opt.u) throw InvalidConfig("norm_sq_to_u witness search needs u");
      for (const auto& r : traj) scalar_.push_back(norm_sq(r.x - *opt.u));
    } else if (q == Quantity::FVals) {
      for (const auto& r : traj) scalar_.push_back(r.fval);
    }
  }

  bool stable(std::size_t n, std::size_t w, double level) const {
    switch (q_) {
      case Quantity::FVals:
      case Quantity::FixResiduals:
        for (std::size_t i = n; i <= n + w; ++i)
          if (!(scalar_[i] < level)) return false;
        return true;
      case Quantity::NormSqToU: {
        double lo = scalar_[n], hi = scalar_[n];
        for (std::size_t i = n; i <= n + w; ++i) {
          lo = std::min(lo, scalar_[i]);
          hi = std::max(hi, scalar_[i]);
          if (!(hi - lo < level)) return false;
        }
        return true;
      }
      case Quantity::Points:
        for (std::size_t i = n; i <= n + w; ++i)
          for (std::size_t j = i + 1; j <= n + w; ++j)
            if (!(distance(traj_.x(i), traj_.x(j)) <= level)) return false;
        return true;
    }
    return false;
  }

 private:
  const Trajectory& traj_;
  Quantity q_;
  std::vector<double> scalar_;
};

}  // namespace detail

/// Smallest n <= max_n with n + g(n) <= H whose window [n, n + g(n)] is
/// stable to 1/(k+1), by linear scan from 0.
inline std::optional<std::size_t> minimal_witness(const Trajectory& traj, std::uint64_t k, const Counterfunction& g,
                                                  Quantity q, const WitnessOptions& opt,
                                                  std::size_t max_n = std::numeric_limits<std::size_t>::max()) {
  if (traj.empty()) return std::nullopt;
  const detail::WindowTest test(traj, q, opt);
  const double level = 1.0 / (static_cast<double>(k) + 1.0);
  const Natural H = traj.horizon();
  for (std::size_t n = 0; n <= max_n && n <= traj.horizon(); ++n) {
    const Natural end = Natural(n) + g(n);
    if (end > H) break;  // g is nondecreasing, so later windows do not fit either
    if (test.stable(n, (end - n).convert_to<std::size_t>(), level)) return n;
  }
  return std::nullopt;
}

/// Looks for a witness of the metastability statement at or below bound.
inline CheckReport witness_search_metastability(const Trajectory& traj, std::uint64_t k, const Counterfunction& g,
                                                const Bound& bound, Quantity q, const WitnessOptions& opt = {}) {
  CheckReport rep;
  rep.id = std::string("meta_") + to_string(q);
  detail::set_bound(rep, bound);
  if (bound.value > opt.cap) {
    rep.status = CheckStatus::Skipped;
    rep.note = "bound exceeds cap";
    return rep;
  }
  const auto witness = minimal_witness(traj, k, g, q, opt);
  if (witness) {
    rep.step = *witness;
    rep.worst_margin = static_cast<double>(*witness) - bound.value.convert_to<double>();
    rep.status = Natural(*witness) <= bound.value ? CheckStatus::Pass : CheckStatus::Fail;
    rep.note = "minimal witness " + std::to_string(*witness);
    return rep;
  }
  // No stable window at all within the horizon. That refutes the bound only
  // when every window starting at or below the bound was inspected.
  if (bound.value + g(bound.value) <= Natural(traj.horizon())) {
    rep.status = CheckStatus::Fail;
    rep.note = "no witness up to the bound";
  } else {
    rep.status = CheckStatus::Skipped;
    rep.note = "horizon too short for the bound";
  }
  return rep;
}

/// The bound each quantity is checked against: Phi_1 for ||x_n - u||^2,
/// Phi_2 at k^2 + 2k for f(y_n, x_n), Phi_3 for ||x_n - T x_n|| and Sigma for x_n.
inline Bound metastability_bound(Quantity q, std::uint64_t k, const Counterfunction& g, const RateInputs& in) {
  in.validate();
  const Natural kk = k;
  switch (q) {
    case Quantity::NormSqToU: return rates::phi1(kk, g, in.c_u, in.budget);
    case Quantity::FVals: return rates::phi2(kk * kk + 2 * kk, g, in.c_u, in);
    case Quantity::FixResiduals: return rates::phi3(kk, g, in.c_u, in);
    case Quantity::Points: return rates::metastability_rate(kk, g, in);
  }
  throw InvalidConfig("unknown quantity");
}

/// Computes the bound for q and searches for a witness; a bound that blows the
/// digit budget is reported skipped. The budget is tightened to a little above
/// the cap, since anything larger is skipped anyway.
inline CheckReport check_metastability(const Trajectory& traj, Quantity q, std::uint64_t k, const Counterfunction& g,
                                       const RateInputs& in, const WitnessOptions& opt = {}) {
  RateInputs capped = in;
  capped.budget.max_digits = std::min(in.budget.max_digits, std::max<std::size_t>(2 * exact::decimal_digits(opt.cap), 1000));
  try {
    return witness_search_metastability(traj, k, g, metastability_bound(q, k, g, capped), q, opt);
  } catch (const SizeOverflow& e) {
    CheckReport rep;
    rep.id = std::string("meta_") + to_string(q);
    rep.status = CheckStatus::Skipped;
    rep.note = e.what();
    return rep;
  }
}

// ---------------------------------------------------------------------------
// Approximate Omega-points and the regularity rate

/// Some n <= Phi(k) has x_n in Omega'_k.
inline CheckReport check_approx_point_bound(const Trajectory& traj, const OmegaContext& ctx, std::size_t k,
                                            const RateInputs& in, const Natural& cap = 1'000'000) {
  CheckReport rep;
  rep.id = "approx_point";
  Bound bound;
  try {
    bound = rates::approx_point_bound(k, in);
  } catch (const SizeOverflow& e) {
    rep.note = e.what();
    return rep;
  }
  detail::set_bound(rep, bound);
  if (bound.value > cap) {
    rep.note = "bound exceeds cap";
    return rep;
  }
  if (k > ctx.horizon()) {
    rep.note = "horizon shorter than k";
    return rep;
  }
  const Natural last = std::min(bound.value, Natural(traj.horizon()));
  const auto last_n = last.convert_to<std::size_t>();
  for (std::size_t n = 0; n <= last_n; ++n) {
    if (omega_prime_member(ctx, traj.x(n), k)) {
      rep.status = CheckStatus::Pass;
      rep.step = n;
      rep.worst_margin = static_cast<double>(n) - bound.value.convert_to<double>();
      rep.note = "first entry at " + std::to_string(n);
      return rep;
    }
  }
  if (bound.value <= Natural(traj.horizon())) {
    rep.status = CheckStatus::Fail;
    rep.note = "no iterate in Omega'_k up to the bound";
  } else {
    rep.note = "horizon too short for the bound";
  }
  return rep;
}

/// For each k <= k_max whose rate fits both the cap and the horizon:
/// ||x_n - x_star|| < 1/(k+1) for every recorded n >= rate(k).
inline CheckReport check_regularity_rate(const Trajectory& traj, const Vector& x_star, std::size_t k_max,
                                         const PsiModulus& psi, const RateInputs& in,
                                         const Natural& cap = 1'000'000) {
  CheckReport rep;
  rep.id = "regularity_rate";
  std::size_t checked = 0, skipped = 0;
  bool failed = false;
  for (std::size_t k = 0; k <= k_max; ++k) {
    Bound rate;
    try {
      rate = rates::regularity_convergence_rate(k, psi, in);
    } catch (const SizeOverflow&) {
      ++skipped;
      continue;
    }
    if (k == 0) detail::set_bound(rep, rate);
    if (rate.value > cap || rate.value > Natural(traj.horizon())) {
      ++skipped;
      continue;
    }
    ++checked;
    const double level = 1.0 / (static_cast<double>(k) + 1.0);
    for (auto n = rate.value.convert_to<std::size_t>(); n <= traj.horizon(); ++n) {
      const double margin = distance(traj.x(n), x_star) - level;
      if (margin > rep.worst_margin) {
        rep.worst_margin = margin;
        rep.step = n;
      }
      if (!(margin < 0.0)) failed = true;
    }
  }
  rep.note = std::to_string(checked) + " k checked, " + std::to_string(skipped) + " skipped";
  if (failed)
    rep.status = CheckStatus::Fail;
  else
    rep.status = checked > 0 ? CheckStatus::Pass : CheckStatus::Skipped;
  return rep;
}

// ---------------------------------------------------------------------------
// Uniform closedness

struct ClosednessPair {
  Vector u;
  Vector u_prime;
};

/// For pairs with u' in Omega'_{delta(k)} and ||u - u'|| <= 1/(omega(k)+1): u in Omega'_k.
inline CheckReport check_uniform_closedness(const OmegaContext& ctx, std::size_t k,
                                            const CounterfunctionFamily& sigma_j,
                                            const std::vector<ClosednessPair>& pairs, double tol = 1e-12) {
  const auto moduli = rates::uniform_closedness_moduli(k, sigma_j);
  const auto delta = moduli.delta.convert_to<std::size_t>();
  ctx.require_index(delta);
  const double radius = 1.0 / (moduli.omega.convert_to<double>() + 1.0);
  CheckReport rep;
  rep.id = "uniform_closedness";
  std::size_t premises = 0, failures = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    if (!(distance(p.u, p.u_prime) <= radius)) continue;
    if (!omega_prime_member(ctx, p.u_prime, delta, tol)) continue;
    ++premises;
    if (!omega_prime_member(ctx, p.u, k, tol)) {
      if (failures++ == 0) rep.step = i;
    }
  }
  rep.worst_margin = static_cast<double>(failures);
  rep.note = std::to_string(premises) + " pairs met the premises";
  if (failures > 0)
    rep.status = CheckStatus::Fail;
  else
    rep.status = premises > 0 ? CheckStatus::Pass : CheckStatus::Skipped;
  return rep;
}

/// Pairs around center: u' uniform in the cube of half-width 1/(delta(k)+1)
/// and u = u' + v with ||v|| <= 1/(omega(k)+1). Pairs whose u' misses
/// Omega'_{delta(k)} are kept; the check filters them.
inline std::vector<ClosednessPair> sample_closedness_pairs(std::size_t k, const CounterfunctionFamily& sigma_j,
                                                           const Vector& center, std::size_t count,
                                                           std::uint64_t seed) {
  const auto moduli = rates::uniform_closedness_moduli(k, sigma_j);
  const double half = 1.0 / (moduli.delta.convert_to<double>() + 1.0);
  const double radius = 1.0 / (moduli.omega.convert_to<double>() + 1.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  std::vector<ClosednessPair> out;
  out.reserve(count);
  const std::size_t n = center.dim();
  for (std::size_t s = 0; s < count; ++s) {
    Vector up = center;
    for (std::size_t i = 0; i < n; ++i) up[i] += half * unit(rng);
    Vector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = unit(rng);
    const double len = norm(v);
    // Every fourth pair sits exactly on the distance boundary.
    const double scale = (s % 4 == 0 ? 1.0 : frac(rng)) * radius / (len > 0.0 ? len : 1.0);
    out.push_back({up + v * scale, up});
  }
  return out;
}

// ---------------------------------------------------------------------------

struct VerifySummary {
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::size_t skipped = 0;
};

inline VerifySummary summarize(const std::vector<CheckReport>& reports) {
  VerifySummary s;
  for (const auto& r : reports) {
    if (r.status == CheckStatus::Pass) ++s.passed;
    else if (r.status == CheckStatus::Fail) ++s.failed;
    else ++s.skipped;
  }
  return s;
}

}  // namespace fejer
