#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fejer/counterfunction.hpp"
#include "fejer/errors.hpp"
#include "fejer/vector.hpp"

namespace fejer {

/// h(x) = sum_i w_i |x_i - z_i|, w_i >= 0.
struct WeightedOneNorm {
  Vector center;
  Vector weights;
};

/// h(x) = 1/2 x^T Q x + <q, x> + c with Q symmetric positive semidefinite.
struct Quadratic {
  Matrix q_mat;
  Vector q_lin;
  double constant = 0.0;
};

using ConvexFunction = std::variant<WeightedOneNorm, Quadratic>;

namespace detail {

inline bool sampled_psd(const Matrix& q, double rel_tol = 1e-12) {
  const std::size_t n = q.rows();
  const double scale = std::max(1.0, q.frobenius());
  const auto form = [&](const Vector& v) { return dot(v, q * v); };
  std::vector<Vector> probes;
  for (std::size_t i = 0; i < n; ++i) {
    Vector e(n);
    e[i] = 1.0;
    probes.push_back(e);
    for (std::size_t j = i + 1; j < n; ++j) {
      Vector p = e, m = e;
      p[j] = 1.0;
      m[j] = -1.0;
      probes.push_back(p);
      probes.push_back(m);
    }
  }
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> gauss;
  for (int s = 0; s < 256; ++s) {
    Vector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = gauss(rng);
    probes.push_back(v);
  }
  return std::all_of(probes.begin(), probes.end(),
                     [&](const Vector& v) { return form(v) >= -rel_tol * scale * norm_sq(v); });
}

inline bool is_symmetric(const Matrix& q, double tol = 1e-12) {
  if (q.rows() != q.cols()) return false;
  for (std::size_t i = 0; i < q.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(q(i, j) - q(j, i)) > tol * std::max(1.0, std::abs(q(i, j)))) return false;
  return true;
}

}  // namespace detail

inline ConvexFunction weighted_one_norm(Vector center, Vector weights) {
  center.require_same_dim(weights);
  if (center.dim() == 0) throw InvalidConfig("weighted_one_norm: dimension must be >= 1");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidConfig("weighted_one_norm: weights must be >= 0");
  return WeightedOneNorm{std::move(center), std::move(weights)};
}

inline ConvexFunction quadratic(Matrix q, Vector lin, double constant = 0.0) {
  if (q.rows() != q.cols() || q.rows() != lin.dim() || lin.dim() == 0)
    throw InvalidConfig("quadratic: shape mismatch");
  if (!detail::is_symmetric(q)) throw InvalidConfig("quadratic: matrix must be symmetric");
  if (!detail::sampled_psd(q)) throw InvalidConfig("quadratic: matrix is not positive semidefinite");
  return Quadratic{std::move(q), std::move(lin), constant};
}

inline std::size_t dim_of(const ConvexFunction& h) {
  if (const auto* w = std::get_if<WeightedOneNorm>(&h)) return w->center.dim();
  return std::get<Quadratic>(h).q_lin.dim();
}

inline double eval(const ConvexFunction& h, const Vector& x) {
  if (const auto* w = std::get_if<WeightedOneNorm>(&h)) {
    x.require_same_dim(w->center);
    double s = 0.0;
    for (std::size_t i = 0; i < x.dim(); ++i) s += w->weights[i] * std::abs(x[i] - w->center[i]);
    return s;
  }
  const auto& quad = std::get<Quadratic>(h);
  return 0.5 * dot(x, quad.q_mat * x) + dot(quad.q_lin, x) + quad.constant;
}

/// A subgradient of h at x. On a kink of |x_i - z_i| the selection is 0.
inline Vector subgradient(const ConvexFunction& h, const Vector& x) {
  if (const auto* w = std::get_if<WeightedOneNorm>(&h)) {
    x.require_same_dim(w->center);
    Vector g(x.dim());
    for (std::size_t i = 0; i < x.dim(); ++i) {
      const double d = x[i] - w->center[i];
      g[i] = d > 0.0 ? w->weights[i] : (d < 0.0 ? -w->weights[i] : 0.0);
    }
    return g;
  }
  const auto& quad = std::get<Quadratic>(h);
  return quad.q_mat * x + quad.q_lin;
}

struct ZeroProblem {
  std::size_t dim;
};

/// f(x, y) = h(y) - h(x)
struct ConvexMinimization {
  ConvexFunction h;
};

/// f(x, y) = <A x + d, y - x>
struct AffinePaired {
  Matrix a;
  Vector d;
  bool monotone;  // (A + A^T)/2 positive semidefinite
};

/// An equilibrium function f on R^N together with its subgradient oracle.
class EquilibriumProblem {
 public:
  using Variant = std::variant<ZeroProblem, ConvexMinimization, AffinePaired>;

  static EquilibriumProblem zero(std::size_t dim) {
    if (dim == 0) throw InvalidConfig("zero problem: dimension must be >= 1");
    return EquilibriumProblem(ZeroProblem{dim});
  }
  static EquilibriumProblem convex_minimization(ConvexFunction h) {
    return EquilibriumProblem(ConvexMinimization{std::move(h)});
  }
  static EquilibriumProblem affine_paired(Matrix a, Vector d) {
    if (a.rows() != a.cols() || a.rows() != d.dim() || d.dim() == 0)
      throw InvalidConfig("affine_paired: shape mismatch");
    Matrix sym(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
      for (std::size_t j = 0; j < a.cols(); ++j) sym(i, j) = 0.5 * (a(i, j) + a(j, i));
    const bool monotone = detail::sampled_psd(sym);
    return EquilibriumProblem(AffinePaired{std::move(a), std::move(d), monotone});
  }

  const Variant& variant() const noexcept { return v_; }

  std::string family() const {
    static constexpr const char* names[] = {"zero", "convex_min", "affine_paired"};
    return names[v_.index()];
  }

  std::size_t dim() const {
    if (const auto* z = std::get_if<ZeroProblem>(&v_)) return z->dim;
    if (const auto* c = std::get_if<ConvexMinimization>(&v_)) return dim_of(c->h);
    return std::get<AffinePaired>(v_).d.dim();
  }

  double eval(const Vector& x, const Vector& y) const {
    check_dim(x);
    check_dim(y);
    if (std::holds_alternative<ZeroProblem>(v_)) return 0.0;
    if (const auto* c = std::get_if<ConvexMinimization>(&v_)) {
      if (x == y) return 0.0;
      return fejer::eval(c->h, y) - fejer::eval(c->h, x);
    }
    const auto& ap = std::get<AffinePaired>(v_);
    return dot(ap.a * x + ap.d, y - x);
  }

  double operator()(const Vector& x, const Vector& y) const { return eval(x, y); }

  /// Some xi in the subdifferential of x' -> f(y_fixed, x') at x.
  Vector subgradient(const Vector& y_fixed, const Vector& x) const {
    check_dim(y_fixed);
    check_dim(x);
    if (std::holds_alternative<ZeroProblem>(v_)) return Vector(x.dim());
    if (const auto* c = std::get_if<ConvexMinimization>(&v_)) return fejer::subgradient(c->h, x);
    const auto& ap = std::get<AffinePaired>(v_);
    return ap.a * y_fixed + ap.d;
  }

 private:
  explicit EquilibriumProblem(Variant v) : v_(std::move(v)) {}

  void check_dim(const Vector& x) const {
    if (x.dim() != dim()) throw DimensionMismatch(dim(), x.dim());
  }

  Variant v_;
};

// ---------------------------------------------------------------------------
// Approximate maximization of y -> f(y, x) over the closed ball of radius R.

enum class MaxStrategy { Auto, Grid };

struct MaxOptions {
  MaxStrategy strategy = MaxStrategy::Auto;
  /// Modulus of uniform continuity of f(., x) on the ball, required by the grid.
  std::optional<Counterfunction> modulus;
  std::size_t max_grid_points = 10'000'000;
  std::size_t max_grid_dim = 3;
  std::size_t max_descent_iterations = 200'000;
};

struct MaxResult {
  Vector y;
  double value = 0.0;
  /// Certified upper bound on max - value.
  double gap = 0.0;
  std::string strategy;
};

namespace detail {

inline Vector project_ball(const Vector& y, double radius) {
  const double r = norm(y);
  return r <= radius ? y : y * (radius / r);
}

/// argmin over ||y|| <= R of sum w_i |y_i - z_i|. KKT: y_i = sign(z_i)
/// min(|z_i|, w_i / mu) with mu chosen so that ||y|| = R when z is outside.
inline Vector weighted_l1_ball_argmin(const WeightedOneNorm& h, double radius) {
  const Vector& z = h.center;
  if (norm(z) <= radius) return z;
  const std::size_t n = z.dim();
  // ||y(t)||^2 = sum min(z_i^2, w_i^2 t^2) with t = 1/mu, nondecreasing in t.
  std::vector<double> breaks;
  for (std::size_t i = 0; i < n; ++i)
    if (h.weights[i] > 0.0) breaks.push_back(std::abs(z[i]) / h.weights[i]);
  std::sort(breaks.begin(), breaks.end());
  const auto norm_sq_at = [&](double t) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = std::min(std::abs(z[i]), h.weights[i] * t);
      s += c * c;
    }
    return s;
  };
  // Locate the segment where the norm crosses R, then solve exactly on it:
  // sum_{saturated} z_i^2 + t^2 sum_{free} w_i^2 = R^2.
  double lo = 0.0;
  for (double b : breaks) {
    if (norm_sq_at(b) >= radius * radius) break;
    lo = b;
  }
  double sat = 0.0, free_w = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (h.weights[i] > 0.0 && std::abs(z[i]) / h.weights[i] <= lo)
      sat += z[i] * z[i];
    else
      free_w += h.weights[i] * h.weights[i];
  }
  double t = free_w > 0.0 ? std::sqrt(std::max(0.0, radius * radius - sat) / free_w) : lo;
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mag = std::min(std::abs(z[i]), h.weights[i] * t);
    y[i] = std::copysign(mag, z[i]);
  }
  return project_ball(y, radius);
}

/// Minimizes 1/2 y^T Q y + <l, y> over the ball by projected gradient with
/// the Frank-Wolfe gap <grad, y> + R ||grad|| as the certificate.
inline std::optional<std::pair<Vector, double>> minimize_quadratic_on_ball(const Matrix& q, const Vector& l,
                                                                          double radius, double eps,
                                                                          std::size_t max_iter) {
  const double lip = q.frobenius();
  const double step = lip > 0.0 ? 1.0 / lip : 1.0;
  Vector y(l.dim());
  const auto grad = [&](const Vector& v) { return q * v + l; };
  for (std::size_t it = 0; it <= max_iter; ++it) {
    const Vector g = grad(y);
    const double gap = std::max(0.0, dot(g, y) + radius * norm(g));
    if (gap <= eps) return std::make_pair(y, gap);
    if (lip == 0.0) {
      // Linear objective: the minimizer is -R g / ||g||.
      y = g * (-radius / norm(g));
      const Vector g2 = grad(y);
      const double gap2 = std::max(0.0, dot(g2, y) + radius * norm(g2));
      if (gap2 <= eps) return std::make_pair(y, gap2);
      return std::nullopt;
    }
    y = project_ball(y - g * step, radius);
  }
  return std::nullopt;
}

}  // namespace detail

/// Finds y with ||y|| <= radius, f(y, x) >= 0 and max_{||y'|| <= radius}
/// f(y', x) <= f(y, x) + eps. Requires ||x|| <= radius so that y = x is a
/// candidate with value 0.
inline MaxResult approx_max(const EquilibriumProblem& p, const Vector& x, double radius, double eps,
                            const MaxOptions& opts = {}) {
  if (!(radius > 0.0)) throw OracleFailure("approx_max: radius must be > 0");
  if (!(eps >= 0.0)) throw OracleFailure("approx_max: eps must be >= 0");
  if (x.dim() != p.dim()) throw DimensionMismatch(p.dim(), x.dim());
  if (norm(x) > radius) throw OracleFailure("approx_max: x lies outside the search ball");

  // y = x has value f(x, x) = 0, so the returned value is never negative.
  // Falling back to x keeps the certificate: max - 0 <= max - r.value.
  const auto finish = [&x](MaxResult r) {
    if (r.value < 0.0) {
      r.gap = std::max(0.0, r.gap + r.value);
      r.y = x;
      r.value = 0.0;
    }
    return r;
  };

  if (std::holds_alternative<ZeroProblem>(p.variant())) return MaxResult{x, 0.0, 0.0, "exact"};

  if (opts.strategy == MaxStrategy::Auto) {
    if (const auto* cm = std::get_if<ConvexMinimization>(&p.variant())) {
      if (const auto* w = std::get_if<WeightedOneNorm>(&cm->h)) {
        Vector y = detail::weighted_l1_ball_argmin(*w, radius);
        const double v = p.eval(y, x);
        return finish({std::move(y), v, 0.0, "exact"});
      }
      const auto& quad = std::get<Quadratic>(cm->h);
      auto sol = detail::minimize_quadratic_on_ball(quad.q_mat, quad.q_lin, radius, eps,
                                                    opts.max_descent_iterations);
      if (!sol) throw OracleFailure("approx_max: projected gradient could not certify the gap");
      const double v = p.eval(sol->first, x);
      return finish({std::move(sol->first), v, sol->second, "projected_gradient"});
    }
    const auto& ap = std::get<AffinePaired>(p.variant());
    if (ap.monotone) {
      // -f(y, x) = 1/2 y^T (A + A^T) y + <d - A^T x, y> - <d, x>.
      Matrix q(ap.a.rows(), ap.a.cols());
      for (std::size_t i = 0; i < q.rows(); ++i)
        for (std::size_t j = 0; j < q.cols(); ++j) q(i, j) = ap.a(i, j) + ap.a(j, i);
      const Vector l = ap.d - ap.a.transpose_times(x);
      auto sol = detail::minimize_quadratic_on_ball(q, l, radius, eps, opts.max_descent_iterations);
      if (!sol) throw OracleFailure("approx_max: projected gradient could not certify the gap");
      const double v = p.eval(sol->first, x);
      return finish({std::move(sol->first), v, sol->second, "projected_gradient"});
    }
  }

  // Uniform grid. Every point of the ball lies within spacing*sqrt(N) of a
  // grid point inside the ball, and spacing*sqrt(N) = 1/(modulus(k)+1) with
  // 1/(k+1) <= eps, so the grid maximum is within eps of the true maximum.
  if (eps <= 0.0) throw OracleFailure("approx_max: the grid strategy needs eps > 0");
  if (!opts.modulus) throw OracleFailure("approx_max: the grid strategy needs a modulus of uniform continuity");
  const std::size_t n = x.dim();
  if (n > opts.max_grid_dim) throw OracleFailure("approx_max: grid strategy limited to N <= 3");
  const double inv_eps = std::ceil(1.0 / eps);
  if (!(inv_eps < 1e15)) throw OracleFailure("approx_max: eps too small for the grid");
  const auto k = static_cast<std::uint64_t>(inv_eps) - 1;
  const double omega = static_cast<double>(opts.modulus->eval_u64(k));
  const double spacing = 1.0 / ((omega + 1.0) * std::sqrt(static_cast<double>(n)));
  const double per_axis = 2.0 * std::floor(radius / spacing) + 1.0;
  if (std::pow(per_axis, static_cast<double>(n)) > static_cast<double>(opts.max_grid_points))
    throw OracleFailure("approx_max: grid would exceed the point budget");
  const auto half = static_cast<std::int64_t>(std::floor(radius / spacing));

  std::vector<std::int64_t> idx(n, -half);
  Vector y(n);
  std::optional<MaxResult> grid_best;
  const double r2 = radius * radius;
  while (true) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<double>(idx[i]) * spacing;
      s += y[i] * y[i];
    }
    if (s <= r2) {
      const double v = p.eval(y, x);
      if (!grid_best || v > grid_best->value) grid_best = MaxResult{y, v, eps, "grid"};
    }
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (idx[i] < half) {
        ++idx[i];
        break;
      }
      idx[i] = -half;
      if (i == 0) {
        i = n + 1;
        break;
      }
    }
    if (i == n + 1) break;
  }
  return finish(std::move(*grid_best));
}

// ---------------------------------------------------------------------------

struct AxiomSample {
  Vector x;
  Vector y1;
  Vector y2;
};

struct AxiomReport {
  double worst_diagonal = 0.0;      // max |f(x, x)|
  double worst_convexity = 0.0;     // max f(x, mid) - (f(x, y1) + f(x, y2)) / 2
  double worst_continuity = 0.0;    // max |f(x + delta, y1) - f(x, y1)|
  bool diagonal_ok = true;
  bool convexity_ok = true;
  bool continuity_ok = true;
  bool ok() const { return diagonal_ok && convexity_ok && continuity_ok; }
};

struct AxiomTolerances {
  double diagonal = 0.0;
  double convexity = 1e-10;
  double perturbation = 1e-7;
  double continuity = 1e-4;
};

/// Worst sampled violations of f(x,x) = 0, midpoint convexity of f(x, .) and
/// a small-perturbation continuity proxy for f(., y). Generic over the
/// evaluator so that arbitrary (possibly broken) functions can be probed.
template <class F>
AxiomReport validate_axioms(const F& f, std::span<const AxiomSample> samples, const AxiomTolerances& tol = {}) {
  AxiomReport r;
  for (const auto& s : samples) {
    r.worst_diagonal = std::max(r.worst_diagonal, std::abs(f(s.x, s.x)));
    const Vector mid = (s.y1 + s.y2) * 0.5;
    r.worst_convexity = std::max(r.worst_convexity, f(s.x, mid) - 0.5 * (f(s.x, s.y1) + f(s.x, s.y2)));
    Vector xp = s.x;
    for (std::size_t i = 0; i < xp.dim(); ++i) xp[i] += tol.perturbation * (i % 2 == 0 ? 1.0 : -1.0);
    r.worst_continuity = std::max(r.worst_continuity, std::abs(f(xp, s.y1) - f(s.x, s.y1)));
  }
  r.diagonal_ok = r.worst_diagonal <= tol.diagonal;
  r.convexity_ok = r.worst_convexity <= tol.convexity;
  r.continuity_ok = r.worst_continuity <= tol.continuity;
  return r;
}

inline AxiomReport validate_axioms(const EquilibriumProblem& p, std::span<const AxiomSample> samples,
                                   const AxiomTolerances& tol = {}) {
  return validate_axioms([&p](const Vector& x, const Vector& y) { return p.eval(x, y); }, samples, tol);
}

}  // namespace fejer
