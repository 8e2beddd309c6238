#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "fejer/counterfunction.hpp"
#include "fejer/equilibrium.hpp"
#include "fejer/errors.hpp"
#include "fejer/exact.hpp"
#include "fejer/operators.hpp"
#include "fejer/solver.hpp"

namespace fejer {

/// The data the approximation sets Omega'_k depend on: T, f and the recorded
/// y_0, ..., y_H.
struct OmegaContext {
  FirmOp T;
  std::vector<Vector> ys;
  EquilibriumProblem P;

  OmegaContext(FirmOp t, std::vector<Vector> y, EquilibriumProblem p)
      : T(std::move(t)), ys(std::move(y)), P(std::move(p)) {
    if (ys.empty()) throw InvalidConfig("omega context needs at least one recorded y");
  }
  OmegaContext(FirmOp t, const Trajectory& traj, EquilibriumProblem p) : OmegaContext(std::move(t), traj.ys(), std::move(p)) {}

  std::size_t horizon() const noexcept { return ys.size() - 1; }

  void require_index(std::size_t k) const {
    if (k > horizon()) throw HorizonExceeded(k, horizon());
  }
};

inline double inv_succ(std::size_t k) { return 1.0 / (static_cast<double>(k) + 1.0); }

/// x in Omega'_k: ||x - Tx|| <= 1/(k+1) and f(y_j, x) <= 1/(k+1) for all j <= k.
inline bool omega_prime_member(const OmegaContext& ctx, const Vector& x, std::size_t k, double tol = 1e-12) {
  ctx.require_index(k);
  const double level = inv_succ(k) + tol;
  if (fix_residual(ctx.T, x) > level) return false;
  for (std::size_t j = 0; j <= k; ++j)
    if (ctx.P.eval(ctx.ys[j], x) > level) return false;
  return true;
}

/// k in gamma(x): f(y_j, x) > 1/(k+1) for some j <= k.
inline bool gamma_contains(const OmegaContext& ctx, const Vector& x, std::size_t k) {
  ctx.require_index(k);
  const double level = inv_succ(k);
  for (std::size_t j = 0; j <= k; ++j)
    if (ctx.P.eval(ctx.ys[j], x) > level) return true;
  return false;
}

struct GValue {
  double value = 0.0;
  /// No k <= H lies in gamma(x); the value 0 holds only for the recorded prefix.
  bool truncated = false;
  /// inf gamma(x) when found.
  std::optional<std::size_t> inf;
};

/// G(x) = 0 if gamma(x) is empty, 2 if 0 is in gamma(x), 1/inf gamma(x) otherwise.
/// gamma is upward closed, so the first member found settles the value.
inline GValue G_value(const OmegaContext& ctx, const Vector& x) {
  double running = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= ctx.horizon(); ++k) {
    running = std::max(running, ctx.P.eval(ctx.ys[k], x));
    if (running > inv_succ(k)) {
      if (k == 0) return {2.0, false, 0};
      return {1.0 / static_cast<double>(k), false, k};
    }
  }
  return {0.0, true, std::nullopt};
}

inline double require_decided(const GValue& g) {
  if (g.truncated) throw Undecided("gamma has no member up to the recorded horizon");
  return g.value;
}

struct FValue {
  double value = 0.0;
  double residual = 0.0;
  GValue g;
};

/// F(x) = max{||x - Tx||, G(x)}
inline FValue F_value(const OmegaContext& ctx, const Vector& x) {
  const double res = fix_residual(ctx.T, x);
  const GValue g = G_value(ctx, x);
  return {std::max(res, g.value), res, g};
}

// ---------------------------------------------------------------------------
// Moduli of regularity

using RationalModulus = std::function<Rational(const Rational&)>;

/// A modulus psi on the ball of radius r around center.
struct RegularityModulus {
  PsiModulus psi;
  Rational radius;
  Vector center;
};

/// phi(eps) = 1/(psi(eps) + 1)
inline RationalModulus psi_to_phi(PsiModulus psi) {
  return [psi = std::move(psi)](const Rational& eps) { return Rational(1) / Rational(psi(eps) + 1); };
}

/// ceil(1/phi(eps)): points of Omega' at this index lie within eps of Omega.
inline Natural phi_to_psi_index(const RationalModulus& phi, const Rational& eps) {
  const Rational v = phi(eps);
  if (!(v > 0)) throw InvalidRange("phi must be positive");
  return exact::ceil(Rational(1) / v);
}

}  // namespace fejer
