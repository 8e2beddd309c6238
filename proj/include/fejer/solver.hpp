#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fejer/counterfunction.hpp"
#include "fejer/equilibrium.hpp"
#include "fejer/errors.hpp"
#include "fejer/operators.hpp"
#include "fejer/vector.hpp"

namespace fejer {

// ---------------------------------------------------------------------------
// Step-size and accuracy schedules

/// lambda_n = value for all n.
struct ConstantLambda {
  double value;
};

using LambdaSchedule = std::variant<ConstantLambda>;

inline double lambda_at(const LambdaSchedule& s, std::size_t /*n*/) { return std::get<ConstantLambda>(s).value; }

struct ConstantEps {
  double value;
};
/// eps_n = eps0 / (n + 1)
struct HarmonicEps {
  double eps0;
};
/// eps_n = eps0 q^n, 0 < q < 1
struct GeometricEps {
  double eps0;
  double q;
};

using EpsSchedule = std::variant<ConstantEps, HarmonicEps, GeometricEps>;

inline double eps_at(const EpsSchedule& s, std::size_t n) {
  const auto nd = static_cast<double>(n);
  if (const auto* c = std::get_if<ConstantEps>(&s)) return c->value;
  if (const auto* h = std::get_if<HarmonicEps>(&s)) return h->eps0 / (nd + 1.0);
  const auto& g = std::get<GeometricEps>(s);
  return g.eps0 * std::pow(g.q, nd);
}

/// tau(k) with eps_n <= 1/(k+1) for all n >= tau(k), as given by the
/// schedule's closed form; nullopt when eps_n does not tend to 0.
inline std::optional<double> tau_at(const EpsSchedule& s, double k) {
  if (const auto* c = std::get_if<ConstantEps>(&s)) {
    if (c->value == 0.0) return 0.0;
    return std::nullopt;
  }
  if (const auto* h = std::get_if<HarmonicEps>(&s)) return std::max(0.0, std::ceil(h->eps0 * (k + 1.0)));
  const auto& g = std::get<GeometricEps>(s);
  return std::max(0.0, std::ceil(std::log(g.eps0 * (k + 1.0)) / std::log(1.0 / g.q)));
}

/// A nondecreasing counterfunction dominating tau_at, for the exact bounds.
inline std::optional<Counterfunction> tau_counterfunction(const EpsSchedule& s) {
  if (const auto* c = std::get_if<ConstantEps>(&s)) {
    if (c->value == 0.0) return Counterfunction::constant(0);
    return std::nullopt;
  }
  if (const auto* h = std::get_if<HarmonicEps>(&s)) {
    const auto c = static_cast<unsigned long long>(std::max(0.0, std::ceil(h->eps0)));
    return Counterfunction::affine(c, c);
  }
  // ln(eps0 (k+1)) <= ln eps0 + k
  const auto& g = std::get<GeometricEps>(s);
  const double inv_rate = 1.0 / std::log(1.0 / g.q);
  const auto slope = static_cast<unsigned long long>(std::ceil(inv_rate));
  const auto offset = static_cast<unsigned long long>(std::max(0.0, std::ceil(std::log(g.eps0) * inv_rate)) + 1.0);
  return Counterfunction::affine(slope, offset);
}

inline void validate(const EpsSchedule& s) {
  const auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (const auto* c = std::get_if<ConstantEps>(&s)) {
    if (!finite_nonneg(c->value)) throw InvalidConfig("eps schedule: value must be >= 0");
  } else if (const auto* h = std::get_if<HarmonicEps>(&s)) {
    if (!finite_nonneg(h->eps0)) throw InvalidConfig("eps schedule: eps0 must be >= 0");
  } else {
    const auto& g = std::get<GeometricEps>(s);
    if (!(g.eps0 > 0.0) || !std::isfinite(g.eps0)) throw InvalidConfig("eps schedule: eps0 must be > 0");
    if (!(g.q > 0.0 && g.q < 1.0)) throw InvalidConfig("eps schedule: q must lie in (0, 1)");
  }
}

// ---------------------------------------------------------------------------

struct SolverConfig {
  double a = 0.0;
  double b = 0.0;
  double M = 1.0;
  std::optional<LambdaSchedule> lambda;  // defaults to (a + b) / 2
  EpsSchedule eps = ConstantEps{0.0};
  std::size_t max_steps = 100;
  MaxOptions oracle;
  std::size_t memory_cap = 1'000'000;

  LambdaSchedule lambda_schedule() const { return lambda.value_or(ConstantLambda{0.5 * (a + b)}); }

  void validate() const {
    if (!(M > 0.0) || !std::isfinite(M)) throw InvalidConfig("M must be > 0");
    if (!(a > 0.0) || !(a <= b)) throw InvalidConfig("need 0 < a <= b");
    if (!(b * M * M < 2.0)) throw InvalidConfig("lambda range not inside (0, 2/M^2)");
    fejer::validate(eps);
  }
};

struct IterationState {
  std::size_t n = 0;
  Vector x;
  double rho = 0.0;

  static IterationState initial(Vector x0) {
    if (!x0.is_finite()) throw InvalidConfig("x0 must be finite");
    const double rho = norm(x0);
    return {0, std::move(x0), rho};
  }
};

/// Everything the method computes at iteration n.
struct StepRecord {
  std::size_t n = 0;
  Vector x;
  Vector y;
  Vector xi;
  double rho = 0.0;
  double lambda = 0.0;
  double eps = 0.0;
  double fval = 0.0;  // f(y_n, x_n)
};

class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<StepRecord> records) : records_(std::move(records)) {}

  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  /// Index of the last record.
  std::size_t horizon() const { return records_.empty() ? 0 : records_.size() - 1; }
  std::size_t dim() const { return records_.empty() ? 0 : records_.front().x.dim(); }

  const StepRecord& operator[](std::size_t n) const { return records_[n]; }
  StepRecord& operator[](std::size_t n) { return records_[n]; }
  const Vector& x(std::size_t n) const { return records_[n].x; }
  const Vector& y(std::size_t n) const { return records_[n].y; }
  double fval(std::size_t n) const { return records_[n].fval; }

  void push_back(StepRecord r) { records_.push_back(std::move(r)); }
  const std::vector<StepRecord>& records() const noexcept { return records_; }

  auto begin() const noexcept { return records_.begin(); }
  auto end() const noexcept { return records_.end(); }

  std::vector<Vector> ys() const {
    std::vector<Vector> out;
    out.reserve(records_.size());
    for (const auto& r : records_) out.push_back(r.y);
    return out;
  }

 private:
  std::vector<StepRecord> records_;
};

/// Oracle part of an iteration: y_n from the ball of radius rho_n + 1, xi_n
/// and f(y_n, x_n). Does not advance the state.
inline StepRecord evaluate(const IterationState& state, const EquilibriumProblem& p, const SolverConfig& cfg) {
  StepRecord r;
  r.n = state.n;
  r.x = state.x;
  r.rho = state.rho;
  r.lambda = lambda_at(cfg.lambda_schedule(), state.n);
  r.eps = eps_at(cfg.eps, state.n);
  if (!(r.lambda >= cfg.a && r.lambda <= cfg.b))
    throw InvalidConfig("lambda_" + std::to_string(state.n) + " outside [a, b]");
  MaxResult m = approx_max(p, state.x, state.rho + 1.0, r.eps, cfg.oracle);
  r.y = std::move(m.y);
  r.fval = m.value;
  r.xi = p.subgradient(r.y, r.x);
  return r;
}

/// x_{n+1} = T(x_n - lambda_n f(y_n, x_n) xi_n), rho_{n+1} = max(rho_n, ||x_{n+1}||).
inline std::pair<IterationState, StepRecord> step(const IterationState& state, const EquilibriumProblem& p,
                                                  const FirmOp& t, const SolverConfig& cfg) {
  StepRecord r = evaluate(state, p, cfg);
  Vector next = t.apply(r.x - r.xi * (r.lambda * r.fval));
  const double rho = std::max(state.rho, norm(next));
  return {IterationState{state.n + 1, std::move(next), rho}, std::move(r)};
}

/// Runs max_steps iterations, handing max_steps + 1 records to sink in order
/// (the last record carries y, xi and f at the final iterate). Errors
/// propagate after the records produced so far have been delivered.
template <class Sink>
void iterate(const EquilibriumProblem& p, const FirmOp& t, const SolverConfig& cfg, const Vector& x0, Sink&& sink) {
  cfg.validate();
  if (x0.dim() != p.dim()) throw DimensionMismatch(p.dim(), x0.dim());
  if (t.dim() != p.dim()) throw DimensionMismatch(p.dim(), t.dim());
  IterationState state = IterationState::initial(x0);
  for (std::size_t n = 0; n < cfg.max_steps; ++n) {
    auto [next, record] = step(state, p, t, cfg);
    sink(std::move(record));
    state = std::move(next);
  }
  sink(evaluate(state, p, cfg));
}

/// Like iterate() but collects the records; on failure the records produced
/// so far remain in out.
inline void run_into(Trajectory& out, const EquilibriumProblem& p, const FirmOp& t, const SolverConfig& cfg,
                     const Vector& x0) {
  if (cfg.max_steps + 1 > cfg.memory_cap)
    throw InvalidConfig("max_steps exceeds the in-memory cap; stream the trajectory instead");
  iterate(p, t, cfg, x0, [&out](StepRecord r) { out.push_back(std::move(r)); });
}

inline Trajectory run(const EquilibriumProblem& p, const FirmOp& t, const SolverConfig& cfg, const Vector& x0) {
  Trajectory traj;
  run_into(traj, p, t, cfg, x0);
  return traj;
}

/// Largest pairwise distance among the recorded iterates.
inline double diameter_bound(const Trajectory& traj) {
  if (traj.empty()) throw InvalidConfig("diameter_bound: empty trajectory");
  if (traj.dim() == 1) {
    double lo = traj.x(0)[0], hi = lo;
    for (const auto& r : traj) {
      lo = std::min(lo, r.x[0]);
      hi = std::max(hi, r.x[0]);
    }
    return hi - lo;
  }
  double best = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i)
    for (std::size_t j = i + 1; j < traj.size(); ++j) best = std::max(best, distance(traj.x(i), traj.x(j)));
  return best;
}

// ---------------------------------------------------------------------------
// CSV: n,x[0..N-1],y[0..N-1],xi[0..N-1],rho,lambda,eps,fval with 17
// significant digits.

namespace csv {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string header(std::size_t dim) {
  std::string h = "n";
  for (const char* name : {"x", "y", "xi"})
    for (std::size_t i = 0; i < dim; ++i) h += "," + std::string(name) + "[" + std::to_string(i) + "]";
  return h + ",rho,lambda,eps,fval";
}

inline std::string row(const StepRecord& r) {
  std::string s = std::to_string(r.n);
  for (const Vector* v : {&r.x, &r.y, &r.xi})
    for (double c : *v) s += "," + format_double(c);
  for (double c : {r.rho, r.lambda, r.eps, r.fval}) s += "," + format_double(c);
  return s;
}

/// Writes header then rows as records arrive.
class Writer {
 public:
  Writer(std::ostream& out, std::size_t dim) : out_(out) { out_ << header(dim) << '\n'; }
  void operator()(const StepRecord& r) { out_ << row(r) << '\n'; }

 private:
  std::ostream& out_;
};

inline void write(std::ostream& out, const Trajectory& traj) {
  Writer w(out, traj.dim());
  for (const auto& r : traj) w(r);
}

inline Trajectory read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidConfig("trajectory csv: missing header");
  const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (columns < 8 || (columns - 5) % 3 != 0) throw InvalidConfig("trajectory csv: bad header");
  const std::size_t dim = (columns - 5) / 3;
  if (line != header(dim)) throw InvalidConfig("trajectory csv: bad header");
  Trajectory traj;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw InvalidConfig("trajectory csv: bad number on line " + std::to_string(lineno));
      }
    }
    if (vals.size() != columns) throw InvalidConfig("trajectory csv: wrong column count on line " + std::to_string(lineno));
    StepRecord r;
    r.n = static_cast<std::size_t>(vals[0]);
    const auto take = [&](std::size_t off) {
      return Vector(std::vector<double>(vals.begin() + static_cast<std::ptrdiff_t>(off),
                                        vals.begin() + static_cast<std::ptrdiff_t>(off + dim)));
    };
    r.x = take(1);
    r.y = take(1 + dim);
    r.xi = take(1 + 2 * dim);
    r.rho = vals[1 + 3 * dim];
    r.lambda = vals[2 + 3 * dim];
    r.eps = vals[3 + 3 * dim];
    r.fval = vals[4 + 3 * dim];
    traj.push_back(std::move(r));
  }
  return traj;
}

}  // namespace csv
}  // namespace fejer
