#include <gtest/gtest.h>

#include <random>

#include "esc/arith.hpp"
#include "oracle.hpp"

using namespace esc;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no esc::Error thrown";
  return ErrorKind::InvalidArgument;
}

Factorization fact(std::initializer_list<std::pair<u64, unsigned>> l) {
  Factorization f;
  for (auto [p, e] : l) f.push_back({p, e});
  return f;
}

}  // namespace

TEST(Gcd, Examples) {
  EXPECT_EQ(gcd(Natural(12), Natural(18)), 6);
  EXPECT_EQ(gcd(Natural(0), Natural(5)), 5);
  EXPECT_EQ(gcd(Natural(840), Natural("25878772920")), 840);
  EXPECT_EQ(gcd(u64{12}, u64{18}), 6u);
}

TEST(ModInverse, Examples) {
  EXPECT_EQ(mod_inverse(Natural(4), Natural(7)), 2);
  EXPECT_EQ(mod_inverse(Natural(2), Natural(15)), 8);
  EXPECT_EQ(kind_of([] { mod_inverse(Natural(6), Natural(9)); }), ErrorKind::NotInvertible);
  EXPECT_EQ(mod_inverse(u64{4}, u64{7}), 2u);
  EXPECT_EQ(kind_of([] { mod_inverse(u64{6}, u64{9}); }), ErrorKind::NotInvertible);
}

TEST(ModInverse, RandomProductsAreOne) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const u64 m = rng() % (u64{1} << 62) + 2;
    const u64 a = rng() % m;
    if (std::gcd(a, m) != 1) continue;
    EXPECT_EQ(mul_mod(a, mod_inverse(a, m), m), 1u % m);
  }
}

TEST(Crt, Examples) {
  const ModClass c = crt_combine(crt_combine(ModClass(1, 24), ModClass(4, 5)), ModClass(2, 7));
  EXPECT_EQ(c, ModClass(289, 840));
  EXPECT_EQ(crt_combine(ModClass(1, 24), ModClass(3, 5)), ModClass(73, 120));
  EXPECT_EQ(kind_of([] { crt_combine(ModClass(0, 2), ModClass(1, 2)); }), ErrorKind::ModuliNotCoprime);
}

TEST(Crt, ResultLiesInBothClasses) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const u64 m1 = rng() % 1000 + 1, m2 = rng() % 1000 + 1;
    if (std::gcd(m1, m2) != 1) continue;
    const ModClass a(rng() % m1, m1), b(rng() % m2, m2);
    const ModClass c = crt_combine(a, b);
    EXPECT_EQ(c.modulus, m1 * m2);
    EXPECT_TRUE(a.contains(c.residue));
    EXPECT_TRUE(b.contains(c.residue));
  }
}

TEST(IsPrime, Examples) {
  EXPECT_TRUE(is_prime(u64{29}));
  EXPECT_FALSE(is_prime(u64{561}));
  EXPECT_TRUE(is_prime(u64{1009}));
  EXPECT_FALSE(is_prime(u64{0}));
  EXPECT_FALSE(is_prime(u64{1}));
  EXPECT_TRUE(is_prime(u64{2}));
}

TEST(IsPrime, AgreesWithTrialDivision) {
  for (u64 n = 0; n < 100000; ++n) ASSERT_EQ(is_prime(n), oracle::is_prime(n)) << n;
}

TEST(IsPrime, StrongPseudoprimesAndLargeValues) {
  // strong pseudoprimes to several small bases
  for (u64 n : {3215031751ull, 2152302898747ull, 3474749660383ull, 341550071728321ull, 3825123056546413051ull}) {
    EXPECT_FALSE(is_prime(n)) << n;
  }
  EXPECT_TRUE(is_prime(u64{18446744073709551557ull}));  // largest 64-bit prime
  EXPECT_FALSE(is_prime(u64{18446744073709551615ull}));
  EXPECT_TRUE(is_prime(Natural("170141183460469231731687303715884105727")));  // 2^127 - 1
  EXPECT_FALSE(is_prime(Natural("3317044064679887385961981")));
  EXPECT_EQ(is_prime_deterministic_bound(), Natural("3317044064679887385961981"));
}

TEST(IsPrime, NaturalAndU64Agree) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 3000; ++i) {
    const u64 n = rng() >> (rng() % 60);
    EXPECT_EQ(is_prime(n), is_prime(to_natural(n))) << n;
  }
}

TEST(Factorize, Examples) {
  EXPECT_EQ(factorize(Natural(840)), fact({{2, 3}, {3, 1}, {5, 1}, {7, 1}}));
  EXPECT_EQ(factorize(Natural("25878772920")),
            fact({{2, 3}, {3, 1}, {5, 1}, {7, 1}, {11, 1}, {13, 1}, {17, 1}, {19, 1}, {23, 1}, {29, 1}}));
  EXPECT_EQ(factorize(Natural(97)), fact({{97, 1}}));
}

TEST(Factorize, Errors) {
  EXPECT_EQ(kind_of([] { factorize(Natural(1)); }), ErrorKind::Unit);
  EXPECT_EQ(kind_of([] { factorize(Natural(0)); }), ErrorKind::Unit);
  EXPECT_EQ(kind_of([] { factorize(u64{1}); }), ErrorKind::Unit);
  Natural big = 1;
  big <<= 64;
  EXPECT_EQ(factorize(big), fact({{2, 64}}));
  EXPECT_EQ(kind_of([&] { factorize(Natural(big + 1)); }), ErrorKind::TooLarge);
}

TEST(Factorize, AgreesWithTrialDivision) {
  for (u64 n = 2; n < 20000; ++n) {
    const auto expected = oracle::factorize(n);
    const auto got = factorize(n);
    ASSERT_EQ(got.size(), expected.size()) << n;
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].prime, expected[i].first);
      EXPECT_EQ(got[i].exponent, expected[i].second);
    }
  }
}

TEST(Factorize, SemiprimesNeedingRho) {
  const u64 p = 4294967291ull, q = 4294967279ull;  // two primes just below 2^32
  EXPECT_EQ(factorize(p * q), fact({{q, 1}, {p, 1}}));
  const u64 r = 1000000007ull;
  EXPECT_EQ(factorize(r * r * 3), fact({{3, 1}, {r, 2}}));
}

TEST(Factorize, ProductReconstructsInput) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    const u64 n = (rng() >> (rng() % 62)) | 2;
    u64 back = 1;
    u64 last = 0;
    for (const auto& pp : factorize(n)) {
      EXPECT_TRUE(is_prime(pp.prime));
      EXPECT_GT(pp.prime, last);
      last = pp.prime;
      for (unsigned e = 0; e < pp.exponent; ++e) back *= pp.prime;
    }
    EXPECT_EQ(back, n);
  }
}

TEST(DivisorsOfSquare, Examples) {
  EXPECT_EQ(divisors_of_square(6), (std::vector<u64>{1, 2, 3, 4, 6, 9, 12, 18, 36}));
  EXPECT_EQ(divisors_of_square(1), (std::vector<u64>{1}));
  EXPECT_EQ(divisors_of_square(5), (std::vector<u64>{1, 5, 25}));
}

TEST(DivisorsOfSquare, AgreesWithBruteForce) {
  for (u64 x = 1; x <= 300; ++x) ASSERT_EQ(divisors_of_square(x), oracle::divisors_of_square(x)) << x;
}

TEST(DivisorsOfSquare, Bound) {
  EXPECT_NO_THROW(divisors_of_square((u64{1} << 32) - 1));
  EXPECT_EQ(kind_of([] { divisors_of_square(u64{1} << 32); }), ErrorKind::TooLarge);
  EXPECT_EQ(kind_of([] { divisors_of_square(0); }), ErrorKind::InvalidArgument);
}

TEST(Helpers, CheckedMulAndConversions) {
  EXPECT_EQ(checked_mul(u64{1} << 31, u64{1} << 32), u64{1} << 63);
  EXPECT_EQ(kind_of([] { checked_mul(u64{1} << 32, u64{1} << 32); }), ErrorKind::TooLarge);
  EXPECT_EQ(to_u64(Natural("18446744073709551615")), 18446744073709551615ull);
  EXPECT_EQ(kind_of([] { to_u64(Natural("18446744073709551616")); }), ErrorKind::TooLarge);
  EXPECT_EQ(parse_natural("123456789012345678901234567890"), Natural("123456789012345678901234567890"));
  EXPECT_EQ(kind_of([] { parse_natural("12x"); }), ErrorKind::Format);
  EXPECT_EQ(kind_of([] { parse_natural("-5"); }), ErrorKind::Format);
  EXPECT_EQ(pow_mod(3, 200, 1000000007), 136318165u);
  EXPECT_EQ(primes_up_to(30), (std::vector<u64>{2, 3, 5, 7, 11, 13, 17, 19, 23, 29}));
}
