#include "value.hpp"

#include <sstream>

namespace odecalc {

Value Value::parse(std::string_view text) {
  std::string_view body = text;
  bool negative = false;
  if (!body.empty() && (body[0] == '-' || body[0] == '+')) {
    negative = body[0] == '-';
    body.remove_prefix(1);
  }
  if (body.empty()) throw SyntaxError("empty integer literal", 1, 1);

  int base = 10;
  if (body.size() > 2 && body[0] == '0' && (body[1] == 'b' || body[1] == 'B')) {
    base = 2;
    body.remove_prefix(2);
  }
  for (char c : body) {
    bool ok = base == 10 ? (c >= '0' && c <= '9') : (c == '0' || c == '1');
    if (!ok)
      throw SyntaxError("invalid digit '" + std::string(1, c) +
                            "' in integer literal '" + std::string(text) + "'",
                        1, 1);
  }
  mpz_class z;
  if (mpz_set_str(z.get_mpz_t(), std::string(body).c_str(), base) != 0)
    throw SyntaxError("invalid integer literal '" + std::string(text) + "'", 1, 1);
  if (negative) z = -z;
  return Value(std::move(z));
}

bool Value::fits_u64() const {
  return sgn(z_) >= 0 && mpz_sizeinbase(z_.get_mpz_t(), 2) <= 64;
}

std::uint64_t Value::to_u64() const {
  if (!fits_u64()) throw DomainError("value " + str() + " does not fit in uint64");
  std::uint64_t lo = mpz_get_ui(z_.get_mpz_t());
  if (mpz_sizeinbase(z_.get_mpz_t(), 2) > 8 * sizeof(unsigned long)) {
    mpz_class hi = z_ >> 32;
    lo |= static_cast<std::uint64_t>(mpz_get_ui(hi.get_mpz_t())) << 32;
  }
  return lo;
}

long Value::to_long() const {
  if (!z_.fits_slong_p()) throw DomainError("value " + str() + " does not fit in long");
  return z_.get_si();
}

Value sg(const Value& x) { return x.sign() > 0 ? Value(1) : Value(0); }

Value cosg(const Value& x) {
  return (Value(1) - sg(x)) * (Value(1) - sg(-x));
}

Value cond(const Value& x, const Value& y, const Value& z) {
  return z + cosg(x) * (y - z);
}

Value length(const Value& x) {
  return Value(static_cast<unsigned long>(x.bit_length()));
}

Value pow2(const Value& e) {
  if (e.is_negative()) throw DomainError("pow2 of negative exponent " + e.str());
  if (!e.fits_u64() || e.to_u64() > kMaxPow2Exponent)
    throw DomainError("pow2 exponent " + e.str() + " too large");
  mpz_class z;
  mpz_setbit(z.get_mpz_t(), static_cast<mp_bitcnt_t>(e.to_u64()));
  return Value(std::move(z));
}

ValueVector& ValueVector::operator+=(const ValueVector& o) {
  if (arity() != o.arity())
    throw DomainError("vector arity mismatch: " + std::to_string(arity()) +
                      " vs " + std::to_string(o.arity()));
  for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] += o.comps_[i];
  return *this;
}

ValueVector& ValueVector::operator-=(const ValueVector& o) {
  if (arity() != o.arity())
    throw DomainError("vector arity mismatch: " + std::to_string(arity()) +
                      " vs " + std::to_string(o.arity()));
  for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] -= o.comps_[i];
  return *this;
}

ValueVector operator*(const Value& s, const ValueVector& v) {
  ValueVector out(v.arity());
  for (std::size_t i = 0; i < v.arity(); ++i) out[i] = s * v[i];
  return out;
}

std::string ValueVector::str() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < comps_.size(); ++i) {
    if (i) os << ' ';
    os << comps_[i].str();
  }
  return os.str();
}

const Value& Valuation::get(std::string_view name) const {
  auto it = bindings_.find(name);
  if (it == bindings_.end()) throw UnboundTermError(std::string(name));
  return it->second;
}

bool Valuation::contains(std::string_view name) const {
  return bindings_.find(name) != bindings_.end();
}

void Valuation::set(std::string name, Value v) {
  auto it = bindings_.find(name);
  if (it == bindings_.end())
    bindings_.emplace(std::move(name), std::move(v));
  else
    it->second = std::move(v);
}

}  // namespace odecalc
