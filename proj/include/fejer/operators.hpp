#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fejer/errors.hpp"
#include "fejer/vector.hpp"

namespace fejer {

class FirmOp;

// Firmly nonexpansive variants. Each is only constructible through the
// factories on FirmOp, which validate the data so the map stays firm.

struct IdentityOp {
  std::size_t dim;
};

/// Projection onto the box [lower, upper].
struct BoxProjection {
  Vector lower;
  Vector upper;
};

struct BallProjection {
  Vector center;
  double radius;
};

/// Projection onto {x : <normal, x> <= offset}.
struct HalfspaceProjection {
  Vector normal;
  double offset;
};

/// Projection onto anchor + span(basis); basis is orthonormal.
struct AffineProjection {
  Vector anchor;
  std::vector<Vector> basis;
};

/// x -> 2 T x - x for a firmly nonexpansive T; nonexpansive with Fix = Fix(T).
struct Reflection {
  std::shared_ptr<const FirmOp> inner;
};

/// x -> center + Q (x - center) with Q orthogonal.
struct Rotation {
  Vector center;
  Matrix q;
};

using NonexpansiveMap = std::variant<Reflection, Rotation>;

/// x -> (x + S x) / 2 for a nonexpansive S.
struct HalfAveraged {
  NonexpansiveMap inner;
};

Vector apply(const NonexpansiveMap& s, const Vector& x);
std::size_t dim_of(const NonexpansiveMap& s);

class FirmOp {
 public:
  using Variant = std::variant<IdentityOp, BoxProjection, BallProjection, HalfspaceProjection,
                               AffineProjection, HalfAveraged>;

  static FirmOp identity(std::size_t dim) {
    if (dim == 0) throw InvalidConfig("identity: dimension must be >= 1");
    return FirmOp(IdentityOp{dim});
  }

  static FirmOp box(Vector lower, Vector upper) {
    lower.require_same_dim(upper);
    if (lower.dim() == 0) throw InvalidConfig("box: dimension must be >= 1");
    for (std::size_t i = 0; i < lower.dim(); ++i) {
      if (std::isnan(lower[i]) || std::isnan(upper[i]) || lower[i] > upper[i])
        throw InvalidConfig("box: need lower[i] <= upper[i] at coordinate " + std::to_string(i));
    }
    return FirmOp(BoxProjection{std::move(lower), std::move(upper)});
  }

  static FirmOp ball(Vector center, double radius) {
    if (center.dim() == 0 || !center.is_finite()) throw InvalidConfig("ball: bad center");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidConfig("ball: radius must be > 0");
    return FirmOp(BallProjection{std::move(center), radius});
  }

  static FirmOp halfspace(Vector normal, double offset) {
    if (normal.dim() == 0 || !normal.is_finite() || !std::isfinite(offset))
      throw InvalidConfig("halfspace: bad data");
    if (norm_sq(normal) == 0.0) throw InvalidConfig("halfspace: normal must be nonzero");
    return FirmOp(HalfspaceProjection{std::move(normal), offset});
  }

  static FirmOp affine(Vector anchor, std::vector<Vector> basis, double tol = 1e-9) {
    if (anchor.dim() == 0 || !anchor.is_finite()) throw InvalidConfig("affine: bad anchor");
    for (std::size_t i = 0; i < basis.size(); ++i) {
      anchor.require_same_dim(basis[i]);
      for (std::size_t j = 0; j <= i; ++j) {
        const double expected = i == j ? 1.0 : 0.0;
        if (std::abs(dot(basis[i], basis[j]) - expected) > tol)
          throw InvalidConfig("affine: basis is not orthonormal");
      }
    }
    return FirmOp(AffineProjection{std::move(anchor), std::move(basis)});
  }

  static FirmOp half_averaged(NonexpansiveMap inner) {
    if (const auto* rot = std::get_if<Rotation>(&inner)) {
      const Matrix& q = rot->q;
      if (q.rows() != q.cols() || q.rows() != rot->center.dim() || q.rows() == 0)
        throw InvalidConfig("rotation: matrix shape does not match center");
      for (std::size_t i = 0; i < q.cols(); ++i)
        for (std::size_t j = 0; j < q.cols(); ++j) {
          double s = 0.0;
          for (std::size_t r = 0; r < q.rows(); ++r) s += q(r, i) * q(r, j);
          if (std::abs(s - (i == j ? 1.0 : 0.0)) > 1e-9)
            throw InvalidConfig("rotation: matrix is not orthogonal");
        }
    } else if (!std::get<Reflection>(inner).inner) {
      throw InvalidConfig("reflection: missing inner operator");
    }
    return FirmOp(HalfAveraged{std::move(inner)});
  }

  static NonexpansiveMap reflection(FirmOp inner) {
    return Reflection{std::make_shared<const FirmOp>(std::move(inner))};
  }
  static NonexpansiveMap rotation(Vector center, Matrix q) {
    return Rotation{std::move(center), std::move(q)};
  }

  const Variant& variant() const noexcept { return v_; }

  std::size_t dim() const {
    return std::visit(
        [](const auto& op) -> std::size_t {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, IdentityOp>) return op.dim;
          else if constexpr (std::is_same_v<T, BoxProjection>) return op.lower.dim();
          else if constexpr (std::is_same_v<T, BallProjection>) return op.center.dim();
          else if constexpr (std::is_same_v<T, HalfspaceProjection>) return op.normal.dim();
          else if constexpr (std::is_same_v<T, AffineProjection>) return op.anchor.dim();
          else return dim_of(op.inner);
        },
        v_);
  }

  bool is_projection() const { return !std::holds_alternative<HalfAveraged>(v_); }

  std::string name() const {
    static constexpr const char* names[] = {"identity", "box", "ball", "halfspace", "affine",
                                            "half_averaged"};
    return names[v_.index()];
  }

  Vector operator()(const Vector& x) const { return apply(x); }

  Vector apply(const Vector& x) const {
    if (x.dim() != dim()) throw DimensionMismatch(dim(), x.dim());
    return std::visit([&](const auto& op) { return apply_impl(op, x); }, v_);
  }

  /// A member of Fix(T) known in closed form.
  Vector known_fixed_point() const {
    return std::visit(
        [this](const auto& op) -> Vector {
          using T = std::decay_t<decltype(op)>;
          if constexpr (std::is_same_v<T, IdentityOp>) return Vector(op.dim);
          else if constexpr (std::is_same_v<T, BallProjection>) return op.center;
          else if constexpr (std::is_same_v<T, AffineProjection>) return op.anchor;
          else if constexpr (std::is_same_v<T, HalfAveraged>) {
            if (const auto* rot = std::get_if<Rotation>(&op.inner)) return rot->center;
            return std::get<Reflection>(op.inner).inner->known_fixed_point();
          } else {
            return apply(Vector(dim()));
          }
        },
        v_);
  }

 private:
  explicit FirmOp(Variant v) : v_(std::move(v)) {}

  static Vector apply_impl(const IdentityOp&, const Vector& x) { return x; }

  static Vector apply_impl(const BoxProjection& b, const Vector& x) {
    Vector out = x;
    for (std::size_t i = 0; i < x.dim(); ++i) out[i] = std::clamp(x[i], b.lower[i], b.upper[i]);
    return out;
  }

  static Vector apply_impl(const BallProjection& b, const Vector& x) {
    const Vector d = x - b.center;
    const double r = norm(d);
    if (r <= b.radius) return x;
    return b.center + d * (b.radius / r);
  }

  static Vector apply_impl(const HalfspaceProjection& h, const Vector& x) {
    const double excess = dot(h.normal, x) - h.offset;
    if (excess <= 0.0) return x;
    return x - h.normal * (excess / norm_sq(h.normal));
  }

  static Vector apply_impl(const AffineProjection& a, const Vector& x) {
    const Vector d = x - a.anchor;
    Vector out = a.anchor;
    for (const Vector& e : a.basis) out += e * dot(e, d);
    return out;
  }

  static Vector apply_impl(const HalfAveraged& h, const Vector& x) {
    return (x + fejer::apply(h.inner, x)) * 0.5;
  }

  Variant v_;
};

inline Vector apply(const NonexpansiveMap& s, const Vector& x) {
  if (const auto* refl = std::get_if<Reflection>(&s)) return refl->inner->apply(x) * 2.0 - x;
  const auto& rot = std::get<Rotation>(s);
  return rot.center + rot.q * (x - rot.center);
}

inline std::size_t dim_of(const NonexpansiveMap& s) {
  if (const auto* refl = std::get_if<Reflection>(&s)) return refl->inner->dim();
  return std::get<Rotation>(s).center.dim();
}

inline double fix_residual(const FirmOp& t, const Vector& x) { return distance(x, t.apply(x)); }

struct SamplePair {
  Vector x;
  Vector y;
};

/// Outcome of a sampled inequality check. worst_violation is the largest
/// amount by which the inequality failed (<= 0 when it held everywhere).
struct FirmReport {
  bool ok = true;
  double worst_violation = -std::numeric_limits<double>::infinity();
  std::size_t worst_index = 0;
};

/// Checks ||Tx - Ty||^2 <= <x - y, Tx - Ty> + tol on every pair. Accepts any
/// callable so that maps outside the FirmOp zoo can be probed.
template <class Map>
FirmReport check_firm(const Map& t, std::span<const SamplePair> samples, double tol) {
  if (samples.empty()) throw InvalidConfig("check_firm: samples must be nonempty");
  FirmReport report;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Vector tx = t(samples[i].x);
    const Vector ty = t(samples[i].y);
    const Vector d = tx - ty;
    const double violation = norm_sq(d) - dot(samples[i].x - samples[i].y, d);
    if (violation > report.worst_violation) {
      report.worst_violation = violation;
      report.worst_index = i;
    }
    if (violation > tol) report.ok = false;
  }
  return report;
}

/// Checks ||Sx - Sy|| <= ||x - y|| + tol on every pair.
template <class Map>
FirmReport check_nonexpansive(const Map& s, std::span<const SamplePair> samples, double tol) {
  if (samples.empty()) throw InvalidConfig("check_nonexpansive: samples must be nonempty");
  FirmReport report;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double violation =
        distance(s(samples[i].x), s(samples[i].y)) - distance(samples[i].x, samples[i].y);
    if (violation > report.worst_violation) {
      report.worst_violation = violation;
      report.worst_index = i;
    }
    if (violation > tol) report.ok = false;
  }
  return report;
}

}  // namespace fejer
