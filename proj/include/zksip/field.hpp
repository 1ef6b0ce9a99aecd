#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include "json.hpp"
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "zksip/errors.hpp"
#include "zksip/random.hpp"

namespace zksip {

enum class FieldKind { prime, binary_extension };

class Element;

namespace detail {

// Polynomials over GF(2) packed into integers, bit i = coefficient of x^i.
inline int gf2_degree(std::uint64_t a) { return a == 0 ? -1 : 63 - __builtin_clzll(a); }

inline std::uint64_t gf2_mod(std::uint64_t a, std::uint64_t f) {
  const int df = gf2_degree(f);
  for (int da = gf2_degree(a); da >= df; da = gf2_degree(a)) a ^= f << (da - df);
  return a;
}

// a, b reduced modulo f with deg f <= 32, so the product fits in 64 bits.
inline std::uint64_t gf2_mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t f) {
  std::uint64_t r = 0;
  while (b) {
    if (b & 1) r ^= a;
    b >>= 1;
    a <<= 1;
  }
  return gf2_mod(r, f);
}

inline std::uint64_t gf2_gcd(std::uint64_t a, std::uint64_t b) {
  while (b) {
    a = gf2_mod(a, b);
    std::swap(a, b);
  }
  return a;
}

// Rabin's test.
inline bool gf2_irreducible(std::uint64_t f) {
  const int k = gf2_degree(f);
  if (k < 1) return false;
  auto frob = [&](int times) {
    std::uint64_t h = 2;  // x
    for (int i = 0; i < times; ++i) h = gf2_mulmod(h, h, f);
    return h;
  };
  if (gf2_mod(frob(k) ^ 2, f) != 0) return false;
  int rest = k;
  for (int r = 2; r <= rest; ++r) {
    if (rest % r) continue;
    while (rest % r == 0) rest /= r;
    if (gf2_gcd(f, gf2_mod(frob(k / r) ^ 2, f)) != 1) return false;
  }
  return true;
}

// Smallest integer encoding of an irreducible polynomial of degree k.
inline std::uint64_t canonical_irreducible(unsigned k) {
  const std::uint64_t top = std::uint64_t{1} << k;
  for (std::uint64_t c = 0; c < top; ++c)
    if (gf2_irreducible(top | c)) return top | c;
  throw ParameterError("no irreducible polynomial of degree " + std::to_string(k));
}

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

}  // namespace detail

// A finite field F_p or GF(2^k) with 2 <= q <= 2^31. Instances are interned,
// so a Field reference stays valid for the whole process and two elements
// share a field iff they point at the same Field.
class Field {
 public:
  static constexpr std::uint64_t max_order = std::uint64_t{1} << 31;

  static const Field& prime(std::uint64_t p) {
    if (p < 2 || p > max_order) throw ParameterError("field order out of range");
    if (!detail::is_prime(p)) throw ParameterError(std::to_string(p) + " is not prime");
    return intern(FieldKind::prime, p, 1);
  }

  static const Field& binary(unsigned degree) {
    if (degree < 1 || degree > 31) throw ParameterError("binary field degree must be in [1, 31]");
    return intern(FieldKind::binary_extension, 2, degree);
  }

  // Prime order gives F_p, a power of two gives GF(2^k); anything else is rejected.
  static const Field& with_order(std::uint64_t q) {
    if (q >= 2 && (q & (q - 1)) == 0) return binary(static_cast<unsigned>(__builtin_ctzll(q)));
    if (detail::is_prime(q)) return prime(q);
    throw ParameterError("unsupported field order " + std::to_string(q));
  }

  static const Field& from_json(const nlohmann::json& j) {
    const auto kind = j.at("kind").get<std::string>();
    const auto p = j.at("characteristic").get<std::uint64_t>();
    const auto k = j.at("degree").get<unsigned>();
    if (kind == "prime") {
      if (k != 1) throw ParameterError("prime field with degree != 1");
      return prime(p);
    }
    if (kind == "binary-extension") {
      if (p != 2) throw ParameterError("only characteristic-2 extensions are supported");
      return binary(k);
    }
    throw ParameterError("unknown field kind " + kind);
  }

  nlohmann::json to_json() const {
    return {{"kind", kind_ == FieldKind::prime ? "prime" : "binary-extension"},
            {"characteristic", characteristic_},
            {"degree", degree_}};
  }

  FieldKind kind() const { return kind_; }
  std::uint64_t characteristic() const { return characteristic_; }
  unsigned degree() const { return degree_; }
  std::uint64_t order() const { return order_; }
  // Reduction polynomial for GF(2^k), 0 for prime fields.
  std::uint64_t modulus() const { return modulus_; }
  // ceil(log2 q): bits to store one element.
  unsigned bits() const { return bits_; }
  unsigned bytes() const { return (bits_ + 7) / 8; }
  std::string name() const {
    return kind_ == FieldKind::prime ? "F_" + std::to_string(order_) : "GF(2^" + std::to_string(degree_) + ")";
  }

  inline Element element(std::uint64_t repr) const;
  inline Element zero() const;
  inline Element one() const;
  // Integer i in [0, q) maps to the element with the same binary representation.
  inline Element embed_index(std::uint64_t i) const;
  // Integers (possibly negative) mapped into F_p by reduction; prime fields only.
  inline Element from_integer(std::int64_t v) const;
  inline Element sample(Rng& rng) const;
  inline Element sample(const RandomString& r, std::uint64_t index) const;
  inline Element sample_excluding(Rng& rng, std::span<const Element> excluded) const;

  // Arithmetic on representatives.
  std::uint32_t add(std::uint32_t a, std::uint32_t b) const {
    if (kind_ == FieldKind::binary_extension) return a ^ b;
    const std::uint64_t s = std::uint64_t{a} + b;
    return static_cast<std::uint32_t>(s >= order_ ? s - order_ : s);
  }
  std::uint32_t neg(std::uint32_t a) const {
    if (kind_ == FieldKind::binary_extension || a == 0) return a;
    return static_cast<std::uint32_t>(order_ - a);
  }
  std::uint32_t sub(std::uint32_t a, std::uint32_t b) const { return add(a, neg(b)); }
  std::uint32_t mul(std::uint32_t a, std::uint32_t b) const {
    if (kind_ == FieldKind::prime) return static_cast<std::uint32_t>(std::uint64_t{a} * b % order_);
    if (a == 0 || b == 0) return 0;
    if (!log_.empty()) {
      std::uint32_t e = log_[a] + log_[b];
      if (e >= order_ - 1) e -= static_cast<std::uint32_t>(order_ - 1);
      return exp_[e];
    }
    return static_cast<std::uint32_t>(detail::gf2_mulmod(a, b, modulus_));
  }
  std::uint32_t inv(std::uint32_t a) const {
    if (a == 0) throw DivisionByZero("inverse of zero in " + name());
    if (kind_ == FieldKind::prime) {
      std::int64_t t = 0, nt = 1, r = static_cast<std::int64_t>(order_), nr = a;
      while (nr) {
        const std::int64_t qt = r / nr;
        std::tie(t, nt) = std::pair{nt, t - qt * nt};
        std::tie(r, nr) = std::pair{nr, r - qt * nr};
      }
      if (t < 0) t += static_cast<std::int64_t>(order_);
      return static_cast<std::uint32_t>(t);
    }
    if (!log_.empty()) return exp_[(order_ - 1 - log_[a]) % (order_ - 1)];
    return pow(a, order_ - 2);
  }
  std::uint32_t pow(std::uint32_t a, std::uint64_t e) const {
    std::uint32_t r = 1;
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }

  bool operator==(const Field& o) const { return this == &o; }

 private:
  Field(FieldKind kind, std::uint64_t p, unsigned k) : kind_(kind), characteristic_(p), degree_(k) {
    order_ = kind == FieldKind::prime ? p : (std::uint64_t{1} << k);
    bits_ = 0;
    while ((std::uint64_t{1} << bits_) < order_) ++bits_;
    if (kind == FieldKind::binary_extension) {
      modulus_ = detail::canonical_irreducible(k);
      if (k <= 16) build_tables();
    }
  }

  void build_tables() {
    const std::uint64_t n = order_ - 1;
    if (n == 1) {  // GF(2)
      exp_ = {1, 1};
      log_ = {0, 0};
      return;
    }
    for (std::uint64_t g = 2; g < order_; ++g) {
      std::vector<std::uint32_t> ex(2 * n), lg(order_, 0);
      std::uint64_t x = 1;
      bool full = true;
      for (std::uint64_t i = 0; i < n; ++i) {
        if (i > 0 && x == 1) {
          full = false;
          break;
        }
        ex[i] = static_cast<std::uint32_t>(x);
        lg[x] = static_cast<std::uint32_t>(i);
        x = detail::gf2_mulmod(x, g, modulus_);
      }
      if (!full || x != 1) continue;
      for (std::uint64_t i = n; i < 2 * n; ++i) ex[i] = ex[i - n];
      exp_ = std::move(ex);
      log_ = std::move(lg);
      return;
    }
    throw ParameterError("no generator found");
  }

  static const Field& intern(FieldKind kind, std::uint64_t p, unsigned k) {
    static std::mutex mu;
    static std::map<std::pair<std::uint64_t, unsigned>, std::unique_ptr<Field>> registry;
    std::lock_guard lock(mu);
    auto& slot = registry[{p, k}];
    if (!slot) slot.reset(new Field(kind, p, k));
    return *slot;
  }

  FieldKind kind_;
  std::uint64_t characteristic_;
  unsigned degree_;
  std::uint64_t order_ = 0;
  std::uint64_t modulus_ = 0;
  unsigned bits_ = 0;
  std::vector<std::uint32_t> exp_, log_;
};

// Immutable field element. A default-constructed element is unbound and any
// arithmetic on it is a usage error.
class Element {
 public:
  Element() = default;
  Element(const Field& f, std::uint32_t repr) : field_(&f), repr_(repr) {}

  const Field& field() const {
    if (!field_) throw UsageError("unbound field element");
    return *field_;
  }
  bool bound() const { return field_ != nullptr; }
  std::uint32_t repr() const { return repr_; }
  bool is_zero() const { return repr_ == 0; }
  bool is_one() const { return repr_ == 1; }

  Element operator+(const Element& o) const { return {same(o), field_->add(repr_, o.repr_)}; }
  Element operator-(const Element& o) const { return {same(o), field_->sub(repr_, o.repr_)}; }
  Element operator*(const Element& o) const { return {same(o), field_->mul(repr_, o.repr_)}; }
  Element operator/(const Element& o) const {
    const Field& f = same(o);
    return {f, f.mul(repr_, f.inv(o.repr_))};
  }
  Element operator-() const { return {field(), field_->neg(repr_)}; }
  Element& operator+=(const Element& o) { return *this = *this + o; }
  Element& operator-=(const Element& o) { return *this = *this - o; }
  Element& operator*=(const Element& o) { return *this = *this * o; }
  Element& operator/=(const Element& o) { return *this = *this / o; }
  Element inverse() const { return {field(), field_->inv(repr_)}; }
  Element pow(std::uint64_t e) const { return {field(), field_->pow(repr_, e)}; }

  friend bool operator==(const Element& a, const Element& b) {
    return a.field_ == b.field_ && a.repr_ == b.repr_;
  }
  friend bool operator<(const Element& a, const Element& b) {
    if (a.field_ != b.field_) return std::less<const Field*>()(a.field_, b.field_);
    return a.repr_ < b.repr_;
  }

 private:
  const Field& same(const Element& o) const {
    if (!field_ || !o.field_) throw UsageError("unbound field element");
    if (field_ != o.field_) throw UsageError("field mismatch: " + field_->name() + " vs " + o.field_->name());
    return *field_;
  }

  const Field* field_ = nullptr;
  std::uint32_t repr_ = 0;
};

inline Element Field::element(std::uint64_t repr) const {
  if (repr >= order_) throw RangeError("representative out of range for " + name());
  return {*this, static_cast<std::uint32_t>(repr)};
}
inline Element Field::zero() const { return {*this, 0}; }
inline Element Field::one() const { return {*this, 1}; }
inline Element Field::embed_index(std::uint64_t i) const {
  if (i >= order_) throw RangeError("index " + std::to_string(i) + " does not embed into " + name());
  return {*this, static_cast<std::uint32_t>(i)};
}
inline Element Field::from_integer(std::int64_t v) const {
  if (kind_ != FieldKind::prime) throw UsageError("integer reduction needs a prime field");
  const auto q = static_cast<std::int64_t>(order_);
  std::int64_t r = v % q;
  if (r < 0) r += q;
  return {*this, static_cast<std::uint32_t>(r)};
}
inline Element Field::sample(Rng& rng) const { return {*this, static_cast<std::uint32_t>(rng.below(order_))}; }
inline Element Field::sample(const RandomString& r, std::uint64_t index) const {
  return {*this, static_cast<std::uint32_t>(r.below(index, order_))};
}
inline Element Field::sample_excluding(Rng& rng, std::span<const Element> excluded) const {
  std::vector<std::uint32_t> ex;
  for (const auto& e : excluded) {
    if (&e.field() != this) throw UsageError("excluded element from another field");
    ex.push_back(e.repr());
  }
  std::sort(ex.begin(), ex.end());
  ex.erase(std::unique(ex.begin(), ex.end()), ex.end());
  if (ex.size() >= order_) throw EmptySupport("every element of " + name() + " is excluded");
  // Draw the u-th allowed representative.
  std::uint64_t u = rng.below(order_ - ex.size());
  for (auto x : ex) {
    if (x <= u) ++u;
    else break;
  }
  return {*this, static_cast<std::uint32_t>(u)};
}

inline std::vector<Element> embed_range(const Field& f, std::uint64_t lo, std::uint64_t hi) {
  std::vector<Element> out;
  for (std::uint64_t i = lo; i <= hi; ++i) out.push_back(f.embed_index(i));
  return out;
}

inline Element dot(std::span<const Element> a, std::span<const Element> b) {
  if (a.size() != b.size()) throw UsageError("dot: length mismatch");
  if (a.empty()) throw UsageError("dot: empty vectors");
  Element acc = a[0].field().zero();
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace zksip

template <>
struct std::hash<zksip::Element> {
  std::size_t operator()(const zksip::Element& e) const noexcept { return e.repr(); }
};
