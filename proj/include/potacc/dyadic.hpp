#ifndef POTACC_DYADIC_HPP
#define POTACC_DYADIC_HPP

#include <cstdint>
#include <compare>
#include <string>

namespace potacc {

// Exact dyadic rational num / 2^exp. Quantization levels are sums of
// powers of two, so a Dyadic holds any of them without rounding.
class Dyadic {
 public:
  constexpr Dyadic() = default;
  constexpr Dyadic(std::int64_t num, int exp) : num_(num), exp_(exp) {
    normalize();
  }
  static constexpr Dyadic from_int(std::int64_t v) { return Dyadic(v, 0); }
  // 2^-k for k >= 0, 2^k for k < 0.
  static constexpr Dyadic pow2(int k) {
    return k >= 0 ? Dyadic(1, k) : Dyadic(std::int64_t{1} << (-k), 0);
  }

  constexpr std::int64_t num() const { return num_; }
  constexpr int exp() const { return exp_; }
  constexpr bool is_zero() const { return num_ == 0; }

  constexpr Dyadic operator+(const Dyadic &o) const {
    int e = exp_ > o.exp_ ? exp_ : o.exp_;
    return Dyadic((num_ << (e - exp_)) + (o.num_ << (e - o.exp_)), e);
  }
  constexpr Dyadic operator-() const { return Dyadic(-num_, exp_); }
  constexpr Dyadic operator-(const Dyadic &o) const { return *this + (-o); }
  constexpr Dyadic operator*(std::int64_t k) const {
    return Dyadic(num_ * k, exp_);
  }

  constexpr bool operator==(const Dyadic &o) const {
    return num_ == o.num_ && exp_ == o.exp_;
  }
  constexpr auto operator<=>(const Dyadic &o) const {
    int e = exp_ > o.exp_ ? exp_ : o.exp_;
    return (num_ << (e - exp_)) <=> (o.num_ << (e - o.exp_));
  }

  constexpr Dyadic abs() const { return num_ < 0 ? -*this : *this; }

  // Exact: dyadics with |num| < 2^53 convert to double without rounding.
  double to_double() const {
    double d = static_cast<double>(num_);
    for (int i = 0; i < exp_; ++i) d *= 0.5;
    return d;
  }

  // Exact finite decimal representation, e.g. 3/16 -> "0.1875".
  std::string to_decimal_string() const;

 private:
  constexpr void normalize() {
    if (num_ == 0) {
      exp_ = 0;
      return;
    }
    while (exp_ > 0 && (num_ & 1) == 0) {
      num_ >>= 1;
      --exp_;
    }
  }

  std::int64_t num_ = 0;
  int exp_ = 0;  // always >= 0
};

}  // namespace potacc

#endif  // POTACC_DYADIC_HPP
