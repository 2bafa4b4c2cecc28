#pragma once

// Extended nonnegative reals [0, inf] with the measure-theoretic conventions
// inf * 0 = 0 and inf + x = inf.

#include "evidence_kit/rational.hpp"

#include <compare>
#include <limits>
#include <stdexcept>
#include <string>

namespace evidence_kit {

template <class T>
class Extended {
 public:
  Extended() = default;
  Extended(T value) : value_(std::move(value)) {}  // NOLINT(google-explicit-constructor)
  Extended(int value) : value_(value) {}           // NOLINT(google-explicit-constructor)

  static Extended infinity() {
    Extended e;
    e.infinite_ = true;
    return e;
  }

  bool is_infinite() const { return infinite_; }
  bool is_finite() const { return !infinite_; }
  bool is_zero() const { return !infinite_ && value_ == 0; }

  const T& value() const {
    if (infinite_) throw Error(ErrorCode::value_out_of_range, "finite value requested from infinity");
    return value_;
  }

  double to_double() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : evidence_kit::to_double(value_);
  }

  std::string text() const { return infinite_ ? std::string("inf") : to_text(value_); }

  friend Extended operator+(const Extended& a, const Extended& b) {
    if (a.infinite_ || b.infinite_) return infinity();
    return Extended(a.value_ + b.value_);
  }
  Extended& operator+=(const Extended& b) { return *this = *this + b; }

  friend Extended operator*(const Extended& a, const Extended& b) {
    if (a.is_zero() || b.is_zero()) return Extended(T(0));
    if (a.infinite_ || b.infinite_) return infinity();
    return Extended(a.value_ * b.value_);
  }

  friend bool operator==(const Extended& a, const Extended& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }
  friend bool operator<(const Extended& a, const Extended& b) {
    if (a.infinite_) return false;
    if (b.infinite_) return true;
    return a.value_ < b.value_;
  }
  friend bool operator>(const Extended& a, const Extended& b) { return b < a; }
  friend bool operator<=(const Extended& a, const Extended& b) { return !(b < a); }
  friend bool operator>=(const Extended& a, const Extended& b) { return !(a < b); }

 private:
  T value_{};
  bool infinite_ = false;
};

// Quotient for the factorization g = f / h: 0/0 = 0, x/0 = inf for x > 0,
// x/inf = 0 for finite x, inf/inf = 1.
template <class T>
Extended<T> divide(const Extended<T>& num, const Extended<T>& den) {
  if (den.is_infinite()) return num.is_infinite() ? Extended<T>(T(1)) : Extended<T>(T(0));
  if (den.is_zero()) return num.is_zero() ? Extended<T>(T(0)) : Extended<T>::infinity();
  if (num.is_infinite()) return Extended<T>::infinity();
  return Extended<T>(num.value() / den.value());
}

template <class T>
Extended<T> reciprocal(const Extended<T>& x) {
  return divide(Extended<T>(T(1)), x);
}

}  // namespace evidence_kit
