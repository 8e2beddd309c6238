#pragma once

// JSON run configuration. Every rejection names the offending field.

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fejer/counterfunction.hpp"
#include "fejer/equilibrium.hpp"
#include "fejer/errors.hpp"
#include "fejer/exact.hpp"
#include "fejer/operators.hpp"
#include "fejer/rates.hpp"
#include "fejer/solver.hpp"

namespace fejer::cli {

using json = nlohmann::json;

struct FejerWindow {
  std::size_t n = 0;
  std::size_t m = 2;
  std::size_t r = 0;
};

struct Perturbation {
  std::size_t step = 0;
  double delta = 0.0;
};

struct VerifyOptions {
  Natural cap = 1'000'000;
  double tol = 1e-9;
  std::optional<std::vector<std::string>> checks;
  std::size_t k_max = 20;
  FejerWindow fejer;
  std::size_t fejer_samples = 200;
  std::size_t closedness_samples = 1000;
  std::optional<Perturbation> perturb;
};

struct RunConfig {
  EquilibriumProblem problem;
  FirmOp op;
  Vector x0;
  SolverConfig solver;
  std::optional<RateInputs> rates;
  std::uint64_t k = 0;
  Counterfunction g = Counterfunction::constant(1);
  std::optional<PsiModulus> psi;
  std::optional<CounterfunctionFamily> sigma_j;
  std::optional<Vector> u;
  std::optional<Vector> x_star;
  VerifyOptions verify;
  std::uint64_t seed = 0;
};

namespace detail {

/// A JSON node together with its dotted path for diagnostics.
class Field {
 public:
  Field(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& what) const { throw InvalidConfig(path_ + ": " + what); }

  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key) && !j_.at(key).is_null(); }

  Field at(const std::string& key) const {
    if (!j_.is_object()) fail("expected an object");
    if (!has(key)) throw InvalidConfig(child_path(key) + ": missing");
    return {j_.at(key), child_path(key)};
  }
  Field at(std::size_t i) const { return {j_.at(i), path_ + "[" + std::to_string(i) + "]"}; }

  std::optional<Field> get(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return at(key);
  }

  std::size_t size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }

  std::string str() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  std::uint64_t natural() const {
    if (!j_.is_number_unsigned() && !(j_.is_number_integer() && j_.get<std::int64_t>() >= 0))
      fail("expected a nonnegative integer");
    return j_.get<std::uint64_t>();
  }

  /// A rational as "p/q", an exact decimal string, or a JSON integer. JSON
  /// floats are refused so that no bound input passes through binary parsing.
  Rational rational() const {
    if (j_.is_number_integer()) return Rational(Integer(j_.get<std::int64_t>()));
    if (!j_.is_string()) fail("expected a rational string such as \"1/2\"");
    try {
      return exact::parse_rational(j_.get<std::string>());
    } catch (const InvalidConfig& e) {
      fail(e.what());
    }
  }

  Vector vector() const {
    std::vector<double> v(size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = at(i).number();
    if (v.empty()) fail("expected a nonempty array");
    return Vector(std::move(v));
  }

  Matrix matrix() const {
    const std::size_t rows = size();
    if (rows == 0) fail("expected a nonempty array of rows");
    const std::size_t cols = at(0).size();
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      const Field row = at(r);
      if (row.size() != cols) row.fail("ragged matrix");
      for (std::size_t c = 0; c < cols; ++c) m(r, c) = row.at(c).number();
    }
    return m;
  }

  Counterfunction counterfunction() const {
    try {
      return Counterfunction::parse(str());
    } catch (const InvalidConfig& e) {
      fail(e.what());
    }
  }

  /// Runs fn and prefixes any library rejection with this path.
  template <class Fn>
  auto guard(Fn&& fn) const -> decltype(fn()) {
    try {
      return fn();
    } catch (const InvalidConfig& e) {
      fail(e.what());
    } catch (const InvalidRange& e) {
      fail(e.what());
    } catch (const DimensionMismatch& e) {
      fail(e.what());
    }
  }

 private:
  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
};

inline ConvexFunction parse_convex(const Field& f) {
  const std::string kind = f.at("kind").str();
  if (kind == "weighted_l1") {
    const Vector c = f.at("center").vector();
    const Vector w = f.at("weights").vector();
    return f.guard([&] { return weighted_one_norm(c, w); });
  }
  if (kind == "quadratic") {
    const Matrix q = f.at("Q").matrix();
    const Vector l = f.at("lin").vector();
    const double c = f.has("constant") ? f.at("constant").number() : 0.0;
    return f.guard([&] { return quadratic(q, l, c); });
  }
  f.at("kind").fail("unknown function kind \"" + kind + "\"");
}

inline EquilibriumProblem parse_problem(const Field& f) {
  const std::string family = f.at("family").str();
  if (family == "zero") {
    const auto dim = f.at("dim").natural();
    return f.guard([&] { return EquilibriumProblem::zero(dim); });
  }
  if (family == "convex_min") return EquilibriumProblem::convex_minimization(parse_convex(f.at("function")));
  if (family == "affine_paired") {
    const Matrix a = f.at("A").matrix();
    const Vector d = f.at("d").vector();
    return f.guard([&] { return EquilibriumProblem::affine_paired(a, d); });
  }
  f.at("family").fail("unknown problem family \"" + family + "\"");
}

inline FirmOp parse_operator(const Field& f) {
  const std::string kind = f.at("kind").str();
  if (kind == "identity") {
    const auto dim = f.at("dim").natural();
    return f.guard([&] { return FirmOp::identity(dim); });
  }
  if (kind == "box") {
    const Vector lo = f.at("lower").vector();
    const Vector hi = f.at("upper").vector();
    return f.guard([&] { return FirmOp::box(lo, hi); });
  }
  if (kind == "ball") {
    const Vector c = f.at("center").vector();
    const double r = f.at("radius").number();
    return f.guard([&] { return FirmOp::ball(c, r); });
  }
  if (kind == "halfspace") {
    const Vector nrm = f.at("normal").vector();
    const double off = f.at("offset").number();
    return f.guard([&] { return FirmOp::halfspace(nrm, off); });
  }
  if (kind == "affine") {
    const Vector anchor = f.at("anchor").vector();
    std::vector<Vector> basis;
    if (const auto b = f.get("basis"))
      for (std::size_t i = 0; i < b->size(); ++i) basis.push_back(b->at(i).vector());
    return f.guard([&] { return FirmOp::affine(anchor, basis); });
  }
  if (kind == "half_rotation") {
    const Vector c = f.at("center").vector();
    const Matrix q = f.at("Q").matrix();
    return f.guard([&] { return FirmOp::half_averaged(FirmOp::rotation(c, q)); });
  }
  if (kind == "half_reflection") {
    FirmOp inner = parse_operator(f.at("inner"));
    return f.guard([&] { return FirmOp::half_averaged(FirmOp::reflection(std::move(inner))); });
  }
  f.at("kind").fail("unknown operator kind \"" + kind + "\"");
}

inline EpsSchedule parse_eps(const Field& f) {
  const std::string kind = f.at("kind").str();
  EpsSchedule s;
  if (kind == "constant")
    s = ConstantEps{f.at("value").number()};
  else if (kind == "harmonic")
    s = HarmonicEps{f.at("eps0").number()};
  else if (kind == "geometric")
    s = GeometricEps{f.at("eps0").number(), f.at("q").number()};
  else
    f.at("kind").fail("unknown eps schedule \"" + kind + "\"");
  f.guard([&] { fejer::validate(s); });
  return s;
}

struct SolverPart {
  SolverConfig cfg;
  Rational a, b, M;
};

inline SolverPart parse_solver(const Field& f) {
  SolverPart out;
  out.a = f.at("a").rational();
  out.b = f.at("b").rational();
  out.M = f.at("M").rational();
  out.cfg.a = exact::to_double(out.a);
  out.cfg.b = exact::to_double(out.b);
  out.cfg.M = exact::to_double(out.M);
  if (const auto l = f.get("lambda")) out.cfg.lambda = ConstantLambda{l->number()};
  if (const auto e = f.get("eps")) out.cfg.eps = parse_eps(*e);
  if (const auto s = f.get("max_steps")) out.cfg.max_steps = s->natural();
  if (const auto o = f.get("oracle")) {
    if (const auto st = o->get("strategy")) {
      const std::string name = st->str();
      if (name == "auto")
        out.cfg.oracle.strategy = MaxStrategy::Auto;
      else if (name == "grid")
        out.cfg.oracle.strategy = MaxStrategy::Grid;
      else
        st->fail("unknown oracle strategy \"" + name + "\"");
    }
    if (const auto m = o->get("modulus")) out.cfg.oracle.modulus = m->counterfunction();
    if (const auto m = o->get("max_grid_points")) out.cfg.oracle.max_grid_points = m->natural();
  }
  f.guard([&] { out.cfg.validate(); });
  if (out.cfg.lambda) {
    const double l = std::get<ConstantLambda>(*out.cfg.lambda).value;
    if (!(l >= out.cfg.a && l <= out.cfg.b)) f.at("lambda").fail("lambda must lie in [a, b]");
  }
  return out;
}

inline RateInputs parse_rates(const Field& f, const SolverPart& solver, std::size_t dim) {
  RateInputs in;
  in.a = f.has("a") ? f.at("a").rational() : solver.a;
  in.b = f.has("b") ? f.at("b").rational() : solver.b;
  in.M = f.has("M") ? f.at("M").rational() : solver.M;
  in.c_u = f.at("c_u").rational();
  in.N = f.has("N") ? static_cast<unsigned>(f.at("N").natural()) : static_cast<unsigned>(dim);
  if (const auto b = f.get("max_digits")) in.budget.max_digits = b->natural();
  if (const auto b = f.get("max_levels")) in.budget.max_levels = b->natural();
  if (const auto t = f.get("tau")) {
    in.tau = t->counterfunction();
  } else if (const auto tau = tau_counterfunction(solver.cfg.eps)) {
    in.tau = *tau;
  } else {
    throw InvalidConfig(f.path() + ".tau: eps schedule does not tend to 0; give tau explicitly");
  }
  // Range errors on a, b, M, c_u surface before the derived constants need alpha.
  RateInputs probe = in;
  probe.L = 1;
  probe.e = 0;
  f.guard([&] { probe.validate(); });
  const auto derived = f.guard([&] { return rates::derived_constants(in.c_u, in.a, in.b, in.M, in.precision); });
  in.L = f.has("L") ? f.at("L").rational() : derived.L_upper;
  in.e = f.has("e") ? f.at("e").rational() : derived.e_upper;
  f.guard([&] { in.validate(); });
  return in;
}

inline VerifyOptions parse_verify(const Field& f) {
  VerifyOptions v;
  if (const auto c = f.get("cap")) v.cap = c->natural();
  if (const auto t = f.get("tol")) {
    v.tol = t->number();
    if (v.tol < 0.0) t->fail("tolerance must be >= 0");
  }
  if (const auto c = f.get("checks")) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < c->size(); ++i) names.push_back(c->at(i).str());
    v.checks = std::move(names);
  }
  if (const auto k = f.get("k_max")) v.k_max = k->natural();
  if (const auto w = f.get("fejer")) {
    if (const auto n = w->get("n")) v.fejer.n = n->natural();
    if (const auto m = w->get("m")) v.fejer.m = m->natural();
    if (const auto r = w->get("r")) v.fejer.r = r->natural();
  }
  if (const auto s = f.get("fejer_samples")) v.fejer_samples = s->natural();
  if (const auto s = f.get("closedness_samples")) v.closedness_samples = s->natural();
  if (const auto p = f.get("perturb")) v.perturb = Perturbation{p->at("step").natural(), p->at("delta").number()};
  return v;
}

inline Vector sized(const Field& f, std::size_t dim) {
  Vector v = f.vector();
  if (v.dim() != dim) f.fail("expected " + std::to_string(dim) + " entries, got " + std::to_string(v.dim()));
  return v;
}

}  // namespace detail

inline RunConfig parse_config(const json& root) {
  using detail::Field;
  const Field f(root, "");
  if (!root.is_object()) throw InvalidConfig("config: expected a JSON object");
  EquilibriumProblem problem = detail::parse_problem(f.at("problem"));
  const std::size_t dim = problem.dim();
  FirmOp op = detail::parse_operator(f.at("operator"));
  if (op.dim() != dim)
    f.at("operator").fail("dimension " + std::to_string(op.dim()) + " does not match the problem's " +
                          std::to_string(dim));
  Vector x0 = detail::sized(f.at("x0"), dim);
  const auto solver = detail::parse_solver(f.at("solver"));

  RunConfig cfg{std::move(problem), std::move(op), std::move(x0), solver.cfg};
  if (const auto r = f.get("rates")) cfg.rates = detail::parse_rates(*r, solver, dim);
  if (const auto k = f.get("k")) cfg.k = k->natural();
  if (const auto g = f.get("g")) cfg.g = g->counterfunction();
  if (const auto p = f.get("psi")) cfg.psi = PsiModulus{p->counterfunction()};
  if (const auto s = f.get("sigma_j")) {
    std::vector<Counterfunction> members;
    for (std::size_t i = 0; i < s->size(); ++i) members.push_back(s->at(i).counterfunction());
    cfg.sigma_j = s->guard([&] { return CounterfunctionFamily(members); });
  }
  if (const auto u = f.get("u")) cfg.u = detail::sized(*u, dim);
  if (const auto x = f.get("x_star")) cfg.x_star = detail::sized(*x, dim);
  if (const auto v = f.get("verify")) cfg.verify = detail::parse_verify(*v);
  if (const auto s = f.get("seed")) cfg.seed = s->natural();
  return cfg;
}

inline RunConfig parse_config_text(const std::string& text, const std::string& origin = "config") {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidConfig(origin + ": " + e.what());
  }
  return parse_config(root);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig(path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

}  // namespace fejer::cli
