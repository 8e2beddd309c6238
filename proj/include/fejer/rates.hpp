#pragma once

// Certified bounds for the subgradient-type method: rates of metastability,
// approximate-point bounds, Fejer moduli and the regularity-based rate of
// convergence. Inputs are exact rationals, outputs are exact naturals. The
// irrational constants (square and fourth roots) enter through rational
// enclosures; a ceiling or floor the enclosure cannot settle is rounded up,
// which is sound because every bound is nondecreasing in those constants.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "fejer/counterfunction.hpp"
#include "fejer/errors.hpp"
#include "fejer/exact.hpp"

namespace fejer {

struct Budget {
  /// Largest decimal size of any bound before SizeOverflow.
  std::size_t max_digits = 1'000'000;
  /// Largest recursion depth P(k) the metastability recursion will unfold.
  std::uint64_t max_levels = 10'000'000;

  std::size_t max_bits() const { return static_cast<std::size_t>(static_cast<double>(max_digits) * 3.3219280948873623) + 1; }
};

struct Bound {
  Natural value;
  std::string formula;

  std::size_t digits() const { return exact::decimal_digits(value); }
  /// Decimal string, or "<d digits>" once the value exceeds 10^3 digits.
  std::string display(std::size_t max_shown_digits = 1000) const {
    if (exact::bit_length(value) < 3300 || digits() <= max_shown_digits) return value.str();
    return "<" + std::to_string(digits()) + " digits>";
  }
};

struct RateInputs {
  Rational a;
  Rational b;
  Rational M;
  Rational L;
  Rational c_u;
  Rational e;
  unsigned N = 1;
  Counterfunction tau;
  exact::Precision precision;
  Budget budget;

  void validate() const {
    if (!(a > 0)) throw InvalidRange("a must be > 0");
    if (!(a <= b)) throw InvalidRange("need a <= b");
    if (!(M > 0)) throw InvalidRange("M must be > 0");
    if (!(M * M * b < 2)) throw InvalidRange("lambda range not inside (0, 2/M^2)");
    if (!(L > 0)) throw InvalidRange("L must be > 0");
    if (c_u < 0) throw InvalidRange("c_u must be >= 0");
    if (e < 0) throw InvalidRange("e must be >= 0");
    if (N < 1) throw InvalidRange("N must be >= 1");
  }
};

namespace rates {

// ---------------------------------------------------------------------------
// Constants

/// alpha = -a (M^2 b - 2), exact.
inline Rational alpha(const Rational& a, const Rational& b, const Rational& M) {
  const Rational v = -a * (M * M * b - 2);
  if (!(v > 0)) throw InvalidRange("lambda range not inside (0, 2/M^2): alpha <= 0");
  return v;
}
inline Rational alpha(const RateInputs& in) { return alpha(in.a, in.b, in.M); }

/// beta = (1 + sqrt(2 b e (1 + M)))^2
inline exact::Enclosure beta_enclosure(const RateInputs& in, unsigned bits) {
  const auto root = exact::sqrt_enclosure(2 * in.b * in.e * (1 + in.M), bits) + Rational(1);
  return root * root;
}

namespace detail {
// sqrt(2 M b L) / alpha^(1/4)
inline exact::Enclosure diameter_term(const RateInputs& in, unsigned bits) {
  const Rational al = alpha(in);
  unsigned b = bits;
  while (true) {
    const auto r4 = exact::root4_enclosure(al, b);
    if (r4.lo > 0) return exact::sqrt_enclosure(2 * in.M * in.b * in.L, bits) / r4;
    b *= 2;
  }
}
inline exact::Enclosure sqrt_alpha(const RateInputs& in, unsigned bits) {
  const Rational al = alpha(in);
  unsigned b = bits;
  while (true) {
    auto r = exact::sqrt_enclosure(al, b);
    if (r.lo > 0) return r;
    b *= 2;
  }
}
}  // namespace detail

/// sqrt(2MbL)/alpha^(1/4) + (Mb + 1)/sqrt(alpha) + 1, the quantity under sigma's ceiling.
inline exact::Enclosure sigma_inner_enclosure(const RateInputs& in, unsigned bits) {
  return detail::diameter_term(in, bits) + (in.M * in.b + 1) / detail::sqrt_alpha(in, bits) + Rational(1);
}

/// sigma = ceil(sqrt(2MbL)/alpha^(1/4) + (Mb + 1)/sqrt(alpha) + 1)
inline Natural sigma(const RateInputs& in) {
  return exact::certified_ceil([&](unsigned bits) { return sigma_inner_enclosure(in, bits); }, in.precision);
}

/// eta = sqrt(2MbL)/alpha^(1/4) + Mb/sqrt(alpha) + 1
inline exact::Enclosure eta_enclosure(const RateInputs& in, unsigned bits) {
  return detail::diameter_term(in, bits) + (in.M * in.b) / detail::sqrt_alpha(in, bits) + Rational(1);
}

struct Constants {
  Rational alpha;
  exact::Enclosure beta;
  exact::Enclosure sigma_inner;
  Natural sigma;
  exact::Enclosure eta;
};

/// All constants; enclosures at the inputs' initial precision, sigma certified.
inline Constants constants(const RateInputs& in) {
  in.validate();
  const unsigned bits = in.precision.initial_bits;
  return {alpha(in), beta_enclosure(in, bits), sigma_inner_enclosure(in, bits), sigma(in), eta_enclosure(in, bits)};
}

struct DerivedConstants {
  Rational L_upper;  // >= 2 sqrt(c_u)
  Rational e_upper;  // >= sqrt(c_u / alpha)
};

/// Upper bounds for the diameter bound L := 2 sqrt(c_u) and the f-bound
/// e := sqrt(c_u / alpha).
inline DerivedConstants derived_constants(const Rational& c_u, const Rational& a, const Rational& b,
                                          const Rational& M, const exact::Precision& prec = {}) {
  if (c_u < 0) throw InvalidRange("c_u must be >= 0");
  const Rational al = alpha(a, b, M);
  return {2 * exact::sqrt_enclosure(c_u, prec.initial_bits).hi, exact::sqrt_enclosure(c_u / al, prec.initial_bits).hi};
}

// ---------------------------------------------------------------------------
// Metastability of monotone sequences

namespace detail {
inline void check_bits(std::size_t bits, const Budget& budget, const char* what) {
  if (bits > budget.max_bits())
    throw SizeOverflow(std::string(what) + " exceeds the digit budget of " + std::to_string(budget.max_digits) +
                       " digits");
}
}  // namespace detail

/// Phi'_1(k, g, c_u, K): the ceil(c_u (k+1))-fold iterate of n -> n + g(n) from K.
inline Bound phi1_prime(const Natural& k, const Counterfunction& g, const Rational& c_u, const Natural& K,
                        const Budget& budget = {}) {
  if (c_u < 0) throw InvalidRange("c_u must be >= 0");
  const Natural t = exact::ceil(c_u * (k + 1));
  const Counterfunction step = g.tilde();  // n -> (p+1) n + c
  const Natural& A = step.slope();
  const Natural& c = step.offset();
  if (A == 1) return {K + t * c, "phi1_prime"};
  // A^t K + c (A^t - 1)/(A - 1)
  const double est = static_cast<double>(t > Natural(1'000'000'000'000ULL) ? 1e12 : t.convert_to<double>()) *
                     static_cast<double>(exact::bit_length(A) - 1);
  if (t > Natural(1'000'000'000'000ULL) || est > static_cast<double>(budget.max_bits()))
    throw SizeOverflow("phi1_prime exceeds the digit budget of " + std::to_string(budget.max_digits) + " digits");
  const Natural At = boost::multiprecision::pow(A, t.convert_to<unsigned>());
  Natural v = At * K + c * ((At - 1) / (A - 1));
  detail::check_bits(exact::bit_length(v), budget, "phi1_prime");
  return {std::move(v), "phi1_prime"};
}

inline Bound phi1(const Natural& k, const Counterfunction& g, const Rational& c_u, const Budget& budget = {}) {
  Bound b = phi1_prime(k, g, c_u, 0, budget);
  b.formula = "phi1";
  return b;
}

/// Phi_2(k, g, c_u) = Phi_1(ceil((k+1)/alpha) - 1, g + 1, c_u). Callers
/// wanting accuracy 1/(k+1) on f(y_n, x_n) pass k^2 + 2k.
inline Bound phi2(const Natural& k, const Counterfunction& g, const Rational& c_u, const RateInputs& in) {
  const Rational al = alpha(in);
  const Natural idx = exact::ceil(Rational(k + 1) / al) - 1;
  Bound b = phi1(idx, g.plus_one(), c_u, in.budget);
  b.formula = "phi2";
  return b;
}

/// Phi_3(k, g, c_u) = Phi_1(ceil(eta^4 (k+1)^4) - 1, g', c_u) + 1, g'(n) = g(n+1) + 1.
inline Bound phi3(const Natural& k, const Counterfunction& g, const Rational& c_u, const RateInputs& in) {
  alpha(in);
  const Natural k4 = boost::multiprecision::pow(Natural(k + 1), 4);
  const Natural idx =
      exact::certified_ceil([&](unsigned bits) { return exact::pow(eta_enclosure(in, bits), 4) * Rational(k4); },
                            in.precision, static_cast<unsigned>(exact::bit_length(k4))) -
      1;
  Bound b = phi1(idx, g.shifted(), c_u, in.budget);
  b.value += 1;
  b.formula = "phi3";
  return b;
}

// ---------------------------------------------------------------------------
// Approximate Omega-points, Fejer modulus, total boundedness

/// Phi(k) = 2 ceil(c_u sigma^4 16 (k+1)^4) + max{k, tau(2k+1)} + 1, with sigma given.
namespace detail {
/// Throws when Phi(k) would exceed the budget; the estimate is monotone in k.
inline void check_approx_point_size(const Natural& k, const Natural& sigma_value, const RateInputs& in) {
  const std::size_t est = 4 * exact::bit_length(k + 1) + 4 * exact::bit_length(sigma_value) + 5 +
                          exact::bit_length(exact::ceil(in.c_u));
  check_bits(est, in.budget, "approx_point_bound");
}
}  // namespace detail

inline Natural approx_point_bound_with_sigma(const Natural& k, const Natural& sigma_value, const RateInputs& in) {
  const Natural k1 = k + 1;
  detail::check_approx_point_size(k, sigma_value, in);
  const Natural s4 = boost::multiprecision::pow(sigma_value, 4);
  const Natural k4 = (k1 * k1) * (k1 * k1);
  const Natural first = 2 * exact::ceil_div(exact::numerator(in.c_u) * (s4 * 16 * k4), exact::denominator(in.c_u));
  return first + std::max(k, in.tau(2 * k + 1)) + 1;
}

inline Bound approx_point_bound(const Natural& k, const RateInputs& in) {
  in.validate();
  return {approx_point_bound_with_sigma(k, sigma(in), in), "approx_point_bound"};
}

/// chi(n, m, r) = max{n + m, floor((r+1)^2 m^2 beta)}
inline Bound chi(const Natural& n, const Natural& m, const Natural& r, const RateInputs& in) {
  const Natural scale = (r + 1) * (r + 1) * m * m;
  Natural second = 0;
  if (scale != 0) {
    second = exact::certified_floor([&](unsigned bits) { return beta_enclosure(in, bits) * Rational(scale); },
                                    in.precision, static_cast<unsigned>(exact::bit_length(scale)));
  }
  return {std::max(Natural(n + m), second), "chi"};
}

/// chi_g(n, k) = chi(n, g(n), k)
inline Bound chi_g(const Natural& n, const Natural& k, const Counterfunction& g, const RateInputs& in) {
  Bound b = chi(n, g(n), k, in);
  b.formula = "chi_g";
  return b;
}

/// max_{i <= n} chi_g(i, k); equals chi_g(n, k) because g is nondecreasing.
inline Bound chi_g_max(const Natural& n, const Natural& k, const Counterfunction& g, const RateInputs& in) {
  Bound b = chi_g(n, k, g, in);
  b.formula = "chi_g_max";
  return b;
}

/// The literal max-scan over i <= n.
inline Bound chi_g_max_scan(std::uint64_t n, const Natural& k, const Counterfunction& g, const RateInputs& in) {
  Natural best = 0;
  for (std::uint64_t i = 0; i <= n; ++i) best = std::max(best, chi_g(i, k, g, in).value);
  return {std::move(best), "chi_g_max_scan"};
}

/// P(k) = ceil((8k + 8) sqrt(N) L)^N
inline Bound total_bdd_modulus(const Natural& k, unsigned N, const Rational& L,
                               const exact::Precision& prec = {}, const Budget& budget = {}) {
  if (N < 1) throw InvalidRange("N must be >= 1");
  if (!(L > 0)) throw InvalidRange("L must be > 0");
  const Rational factor = Rational(8 * k + 8) * L;
  const Natural base = exact::certified_ceil(
      [&](unsigned bits) { return exact::sqrt_enclosure(Rational(N), bits) * factor; }, prec,
      static_cast<unsigned>(exact::bit_length(exact::ceil(factor))));
  detail::check_bits(exact::bit_length(base) * N, budget, "total_bdd_modulus");
  return {boost::multiprecision::pow(base, N), "total_bdd_modulus"};
}

namespace detail {

/// Sigma_0(levels, k, g, chi', Phi) where chi'(n, m, r) = max{floor_value, chi(n, m, r)}.
inline Natural sigma0(const Natural& levels, const Natural& k, const Counterfunction& g, const Natural& floor_value,
                      const RateInputs& in) {
  if (levels > Natural(in.budget.max_levels))
    throw SizeOverflow("metastability recursion depth " + levels.str() + " exceeds the level budget");
  const Natural sig = sigma(in);
  const Natural r = 4 * k + 3;
  const auto n_levels = levels.convert_to<std::uint64_t>();
  Natural s = 0;
  for (std::uint64_t level = 0; level < n_levels; ++level) {
    // beta >= 1, so (r+1)^2 g(s)^2 bounds chi from below; overflow shows before the costly enclosure.
    const Natural m = g(s);
    check_approx_point_size(std::max(Natural(s + m), Natural((r + 1) * (r + 1) * m * m)), sig, in);
    const Natural j = std::max(floor_value, chi_g_max(s, r, g, in).value);
    s = approx_point_bound_with_sigma(j, sig, in);
  }
  return s;
}

}  // namespace detail

/// Sigma(k, g) = Sigma_0(P(k), k, g, chi, Phi), the rate of metastability of (x_n).
inline Bound metastability_rate(const Natural& k, const Counterfunction& g, const RateInputs& in) {
  in.validate();
  const Natural levels = total_bdd_modulus(k, in.N, in.L, in.precision, in.budget).value;
  return {detail::sigma0(levels, k, g, 0, in), "metastability_rate"};
}

struct ClosednessModuli {
  Natural delta;  // 2k + 1
  Natural omega;  // max{4k + 3, sigma^max_k(2k + 1)}
};

inline ClosednessModuli uniform_closedness_moduli(std::uint64_t k, const CounterfunctionFamily& sigma_j) {
  const Natural kk = k;
  return {2 * kk + 1, std::max(Natural(4 * kk + 3), sigma_j.max_upto(k, 2 * kk + 1))};
}

/// k_0 = max{k, ceil((omega(k) - 1)/2)}
inline Natural uc_index(std::uint64_t k, const CounterfunctionFamily& sigma_j) {
  const auto m = uniform_closedness_moduli(k, sigma_j);
  return std::max(Natural(k), exact::ceil(Rational(m.omega - 1, 2)));
}

/// Sigma~(k, g) = Sigma_0(P(k_0), k_0, g, chi_k, Phi) with chi_k = max{delta(k), chi}.
inline Bound metastability_rate_uc(std::uint64_t k, const Counterfunction& g, const CounterfunctionFamily& sigma_j,
                                   const RateInputs& in) {
  in.validate();
  const auto m = uniform_closedness_moduli(k, sigma_j);
  const Natural k0 = uc_index(k, sigma_j);
  const Natural levels = total_bdd_modulus(k0, in.N, in.L, in.precision, in.budget).value;
  return {detail::sigma0(levels, k0, g, m.delta, in), "metastability_rate_uc"};
}

// ---------------------------------------------------------------------------
// Rate of convergence under a modulus of regularity

/// phi(eps) = 1/(psi(eps) + 1)
inline Rational phi_of_psi(const PsiModulus& psi, const Rational& eps) { return Rational(1) / Rational(psi(eps) + 1); }

/// Phi(eps) = 2 ceil(c_u sigma^4 16 (ceil(1/eps) + 1)^4) + max{ceil(1/eps), tau(2 ceil(1/eps) + 1)} + 1
inline Natural approx_zero_bound(const Rational& eps, const RateInputs& in) {
  if (!(eps > 0)) throw InvalidRange("eps must be > 0");
  return approx_point_bound_with_sigma(exact::ceil(Rational(1) / eps), sigma(in), in);
}

/// n from which ||x_n - x|| < 1/(k+1): Phi(phi(1/(2(k+1)))).
inline Bound regularity_convergence_rate(const Natural& k, const PsiModulus& psi, const RateInputs& in) {
  in.validate();
  const Rational phi = phi_of_psi(psi, Rational(1) / Rational(2 * (k + 1)));
  return {approx_zero_bound(phi, in), "regularity_convergence_rate"};
}

}  // namespace rates
}  // namespace fejer
