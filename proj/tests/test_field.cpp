#include <gtest/gtest.h>

#include <set>

#include "zksip/field.hpp"

using namespace zksip;

namespace {

// Schoolbook GF(2)[x] product reduced by long division.
std::uint64_t naive_gf2_mul(std::uint64_t a, std::uint64_t b, std::uint64_t f) {
  std::uint64_t prod = 0;
  for (int i = 0; i < 32; ++i)
    if ((b >> i) & 1) prod ^= a << i;
  int df = 63;
  while (!((f >> df) & 1)) --df;
  for (int i = 63; i >= df; --i)
    if ((prod >> i) & 1) prod ^= f << (i - df);
  return prod;
}

bool naive_irreducible(std::uint64_t f, int k) {
  for (std::uint64_t g = 2; g < (std::uint64_t{1} << (k / 2 + 1)); ++g) {
    int dg = 63;
    while (!((g >> dg) & 1)) --dg;
    if (dg == 0 || dg > k / 2) continue;
    std::uint64_t r = f;
    for (int i = k; i >= dg; --i)
      if ((r >> i) & 1) r ^= g << (i - dg);
    if (r == 0) return false;
  }
  return true;
}

}  // namespace

TEST(Field, Gf4MatchesHandTable) {
  const Field& f = Field::binary(2);
  EXPECT_EQ(f.modulus(), 0b111u);
  // x * (x + 1) = x^2 + x = 1 modulo x^2 + x + 1
  EXPECT_EQ((f.element(2) * f.element(3)).repr(), 1u);
  EXPECT_EQ((f.element(2) * f.element(2)).repr(), 3u);
  EXPECT_EQ((f.element(3) + f.element(1)).repr(), 2u);
}

TEST(Field, CanonicalIrreducibleIsSmallest) {
  for (unsigned k = 2; k <= 12; ++k) {
    const Field& f = Field::binary(k);
    const std::uint64_t top = std::uint64_t{1} << k;
    std::uint64_t expect = 0;
    for (std::uint64_t c = 0; c < top && !expect; ++c)
      if (naive_irreducible(top | c, static_cast<int>(k))) expect = top | c;
    EXPECT_EQ(f.modulus(), expect) << "k=" << k;
  }
  EXPECT_EQ(Field::binary(8).modulus(), 0x11Bu);
}

TEST(Field, ExhaustiveSmallBinaryFieldsMatchNaiveArithmetic) {
  for (unsigned k = 1; k <= 5; ++k) {
    const Field& f = Field::binary(k);
    for (std::uint32_t a = 0; a < f.order(); ++a)
      for (std::uint32_t b = 0; b < f.order(); ++b) {
        EXPECT_EQ(f.mul(a, b), naive_gf2_mul(a, b, f.modulus()));
        EXPECT_EQ(f.add(a, b), a ^ b);
      }
  }
}

TEST(Field, ExhaustiveSmallPrimeFieldsMatchIntegerArithmetic) {
  for (std::uint32_t p : {2u, 3u, 5u, 7u, 11u, 13u}) {
    const Field& f = Field::prime(p);
    for (std::uint32_t a = 0; a < p; ++a) {
      for (std::uint32_t b = 0; b < p; ++b) {
        EXPECT_EQ(f.mul(a, b), a * b % p);
        EXPECT_EQ(f.add(a, b), (a + b) % p);
        EXPECT_EQ(f.sub(a, b), (a + p - b) % p);
      }
      if (a) EXPECT_EQ(f.mul(a, f.inv(a)), 1u);
    }
  }
}

TEST(Field, FieldAxiomsOnLargeFields) {
  Rng rng(7);
  for (const Field* f : {&Field::binary(20), &Field::binary(31), &Field::prime(2147483647), &Field::prime(257)}) {
    for (int t = 0; t < 2000; ++t) {
      const Element a = f->sample(rng), b = f->sample(rng), c = f->sample(rng);
      EXPECT_EQ((a * b) * c, a * (b * c));
      EXPECT_EQ(a * (b + c), a * b + a * c);
      EXPECT_EQ(a + b - b, a);
      if (!a.is_zero()) {
        EXPECT_EQ(a * a.inverse(), f->one());
        EXPECT_EQ(a.pow(f->order() - 1), f->one());
      }
    }
  }
}

TEST(Field, ErrorsAreTyped) {
  const Field& f5 = Field::prime(5);
  EXPECT_THROW(f5.zero().inverse(), DivisionByZero);
  EXPECT_THROW(f5.one() / f5.zero(), DivisionByZero);
  EXPECT_THROW(f5.one() + Field::prime(7).one(), UsageError);
  EXPECT_THROW(f5.embed_index(6), RangeError);
  EXPECT_THROW(f5.embed_index(5), RangeError);
  EXPECT_EQ(f5.embed_index(3).repr(), 3u);
  EXPECT_THROW(Field::prime(9), ParameterError);
  EXPECT_THROW(Field::with_order(12), ParameterError);
  EXPECT_THROW(Element() + f5.one(), UsageError);
}

TEST(Field, InterningAndJsonRoundTrip) {
  EXPECT_EQ(&Field::with_order(256), &Field::binary(8));
  EXPECT_EQ(&Field::with_order(257), &Field::prime(257));
  for (const Field* f : {&Field::binary(8), &Field::prime(257)}) {
    EXPECT_EQ(&Field::from_json(f->to_json()), f);
  }
  EXPECT_EQ(Field::binary(8).to_json().dump(), R"({"characteristic":2,"degree":8,"kind":"binary-extension"})");
}

TEST(Field, SampleExcludingNeverHitsExcluded) {
  const Field& f = Field::prime(5);
  Rng rng(1);
  const std::vector<Element> ex{f.element(1), f.element(2), f.element(3)};
  std::set<std::uint32_t> seen;
  for (int i = 0; i < 200; ++i) seen.insert(f.sample_excluding(rng, ex).repr());
  EXPECT_EQ(seen, (std::set<std::uint32_t>{0, 4}));
  const std::vector<Element> all{f.element(0), f.element(1), f.element(2), f.element(3), f.element(4)};
  EXPECT_THROW(f.sample_excluding(rng, all), EmptySupport);
}
