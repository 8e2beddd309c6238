#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "fejer/errors.hpp"
#include "fejer/exact.hpp"

namespace fejer {

/// g(n) = slope * n + offset with natural coefficients. Constant(c) is
/// slope 0. The family is nondecreasing and closed under the transforms the
/// bounds apply: g + 1, n -> g(n+1) + 1 and n -> n + g(n).
class Counterfunction {
 public:
  Counterfunction() = default;
  Counterfunction(Natural slope, Natural offset) : slope_(std::move(slope)), offset_(std::move(offset)) {
    if (slope_ < 0 || offset_ < 0) throw InvalidConfig("counterfunction coefficients must be natural");
  }

  static Counterfunction constant(Natural c) { return {0, std::move(c)}; }
  static Counterfunction affine(Natural slope, Natural offset) {
    return {std::move(slope), std::move(offset)};
  }

  const Natural& slope() const noexcept { return slope_; }
  const Natural& offset() const noexcept { return offset_; }
  bool is_constant() const { return slope_ == 0; }

  Natural operator()(const Natural& n) const { return slope_ * n + offset_; }

  /// Evaluation in machine words; throws SizeOverflow when the value does not fit.
  std::uint64_t eval_u64(std::uint64_t n) const {
    const Natural v = (*this)(Natural(n));
    if (v > std::numeric_limits<std::uint64_t>::max())
      throw SizeOverflow("counterfunction value exceeds 64 bits");
    return v.convert_to<std::uint64_t>();
  }

  /// n -> g(n) + 1
  Counterfunction plus_one() const { return {slope_, offset_ + 1}; }
  /// n -> g(n + 1) + 1
  Counterfunction shifted() const { return {slope_, slope_ + offset_ + 1}; }
  /// n -> n + g(n)
  Counterfunction tilde() const { return {slope_ + 1, offset_}; }

  /// Pointwise g <= h on all of N.
  bool pointwise_le(const Counterfunction& h) const { return slope_ <= h.slope_ && offset_ <= h.offset_; }

  std::string to_string() const {
    if (is_constant()) return "constant:" + offset_.str();
    return "affine:" + slope_.str() + ":" + offset_.str();
  }

  /// "constant:C" or "affine:P:C" (value P*n + C).
  static Counterfunction parse(std::string_view text) {
    const auto bad = [&] { return InvalidConfig("malformed counterfunction \"" + std::string(text) + "\""); };
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
      const auto colon = text.find(':', start);
      parts.push_back(text.substr(start, colon - start));
      if (colon == std::string_view::npos) break;
      start = colon + 1;
    }
    const auto natural = [&](std::string_view s) {
      if (s.empty()) throw bad();
      for (char ch : s)
        if (ch < '0' || ch > '9') throw bad();
      return Natural(std::string(s));
    };
    if (parts[0] == "constant" && parts.size() == 2) return constant(natural(parts[1]));
    if (parts[0] == "affine" && parts.size() == 3) return affine(natural(parts[1]), natural(parts[2]));
    throw bad();
  }

  friend bool operator==(const Counterfunction&, const Counterfunction&) = default;

 private:
  Natural slope_ = 0;
  Natural offset_ = 0;
};

/// An indexed family sigma_j of counterfunctions; indices past the end reuse
/// the last entry, so a single entry means one uniform modulus.
class CounterfunctionFamily {
 public:
  CounterfunctionFamily() = default;
  explicit CounterfunctionFamily(std::vector<Counterfunction> members) : members_(std::move(members)) {
    if (members_.empty()) throw InvalidConfig("counterfunction family must be nonempty");
  }
  static CounterfunctionFamily uniform(Counterfunction g) { return CounterfunctionFamily({std::move(g)}); }

  const Counterfunction& operator[](std::size_t j) const {
    return members_[std::min(j, members_.size() - 1)];
  }
  std::size_t size() const noexcept { return members_.size(); }

  /// max_{i <= j} sigma_i(m)
  Natural max_upto(std::size_t j, const Natural& m) const {
    Natural best = 0;
    const std::size_t last = std::min(j, members_.size() - 1);
    for (std::size_t i = 0; i <= last; ++i) best = std::max(best, members_[i](m));
    return best;
  }

 private:
  std::vector<Counterfunction> members_;
};

/// A modulus psi(eps) := h(ceil(1/eps)) on positive rationals; nonincreasing in
/// eps because h is nondecreasing.
struct PsiModulus {
  Counterfunction h;

  Natural operator()(const Rational& eps) const {
    if (eps <= 0) throw InvalidRange("psi: eps must be positive");
    return h(exact::ceil(1 / eps));
  }
};

}  // namespace fejer
