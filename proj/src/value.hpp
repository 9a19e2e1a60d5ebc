#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace odecalc {

// Exact signed integer. All engine arithmetic goes through this type;
// there is no modular or fixed-width fallback anywhere.
class Value {
 public:
  Value() : z_(0) {}
  Value(int v) : z_(v) {}
  Value(long v) : z_(static_cast<signed long>(v)) {}
  Value(unsigned long v) : z_(v) {}
  explicit Value(mpz_class z) : z_(std::move(z)) {}

  // Accepts decimal literals and 0b-prefixed binary literals, each with
  // an optional leading '-'.
  static Value parse(std::string_view text);

  // Canonical decimal rendering.
  std::string str() const { return z_.get_str(); }

  // Number of binary digits of |v|; 1 for v = 0.
  std::size_t bit_length() const { return mpz_sizeinbase(z_.get_mpz_t(), 2); }

  bool is_zero() const { return sgn(z_) == 0; }
  bool is_negative() const { return sgn(z_) < 0; }
  int sign() const { return sgn(z_); }

  bool fits_u64() const;
  std::uint64_t to_u64() const;  // throws DomainError when out of range
  long to_long() const;          // throws DomainError when out of range

  const mpz_class& raw() const { return z_; }

  Value& operator+=(const Value& o) { z_ += o.z_; return *this; }
  Value& operator-=(const Value& o) { z_ -= o.z_; return *this; }
  Value& operator*=(const Value& o) { z_ *= o.z_; return *this; }
  Value& operator++() { ++z_; return *this; }
  Value& operator--() { --z_; return *this; }

  friend Value operator+(const Value& a, const Value& b) { return Value(mpz_class(a.z_ + b.z_)); }
  friend Value operator-(const Value& a, const Value& b) { return Value(mpz_class(a.z_ - b.z_)); }
  friend Value operator*(const Value& a, const Value& b) { return Value(mpz_class(a.z_ * b.z_)); }
  friend Value operator-(const Value& a) { return Value(mpz_class(-a.z_)); }

  friend bool operator==(const Value& a, const Value& b) { return cmp(a.z_, b.z_) == 0; }
  friend bool operator!=(const Value& a, const Value& b) { return cmp(a.z_, b.z_) != 0; }
  friend bool operator<(const Value& a, const Value& b) { return cmp(a.z_, b.z_) < 0; }
  friend bool operator<=(const Value& a, const Value& b) { return cmp(a.z_, b.z_) <= 0; }
  friend bool operator>(const Value& a, const Value& b) { return cmp(a.z_, b.z_) > 0; }
  friend bool operator>=(const Value& a, const Value& b) { return cmp(a.z_, b.z_) >= 0; }

 private:
  mpz_class z_;
};

// sign: 1 for x > 0, else 0.
Value sg(const Value& x);

// complement sign, literally (1 - sg(x)) * (1 - sg(-x)): 1 iff x = 0.
Value cosg(const Value& x);

// z + cosg(x) * (y - z): y when x = 0, z otherwise.
Value cond(const Value& x, const Value& y, const Value& z);

// Binary length of |x| as a Value; length(0) = 1.
Value length(const Value& x);

// 2^e for e >= 0. Exponents above kMaxPow2Exponent are rejected so a
// single misuse cannot allocate unbounded memory.
inline constexpr std::uint64_t kMaxPow2Exponent = std::uint64_t(1) << 26;
Value pow2(const Value& e);

// Fixed-arity tuple of values. Componentwise operations require equal
// arity.
class ValueVector {
 public:
  ValueVector() = default;
  explicit ValueVector(std::size_t arity) : comps_(arity) {}
  explicit ValueVector(std::vector<Value> comps) : comps_(std::move(comps)) {}
  ValueVector(std::initializer_list<Value> comps) : comps_(comps) {}

  std::size_t arity() const { return comps_.size(); }
  const Value& operator[](std::size_t i) const { return comps_[i]; }
  Value& operator[](std::size_t i) { return comps_[i]; }

  ValueVector& operator+=(const ValueVector& o);
  ValueVector& operator-=(const ValueVector& o);
  friend ValueVector operator+(ValueVector a, const ValueVector& b) { a += b; return a; }
  friend ValueVector operator-(ValueVector a, const ValueVector& b) { a -= b; return a; }
  friend ValueVector operator*(const Value& s, const ValueVector& v);
  friend bool operator==(const ValueVector& a, const ValueVector& b) { return a.comps_ == b.comps_; }

  std::string str() const;  // space-separated decimal components

  auto begin() const { return comps_.begin(); }
  auto end() const { return comps_.end(); }

 private:
  std::vector<Value> comps_;
};

// Named bindings. Lookup of an unbound name is an error, never a
// default.
class Valuation {
 public:
  Valuation() = default;

  const Value& get(std::string_view name) const;
  bool contains(std::string_view name) const;
  void set(std::string name, Value v);
  std::size_t size() const { return bindings_.size(); }

 private:
  std::map<std::string, Value, std::less<>> bindings_;
};

}  // namespace odecalc
