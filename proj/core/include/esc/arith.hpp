// Exact integer substrate.
//
// Natural is GMP's mpz_class; anything that can exceed 64 bits (solution
// components, products of moduli, batch members near 10^18 and above) goes
// through it. The hot loops use the std::uint64_t overloads, which are exact
// as long as their stated bounds hold and throw TooLarge otherwise.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "esc/error.hpp"

namespace esc {

using Natural = mpz_class;
using u64 = std::uint64_t;
using u128 = unsigned __int128;

/// A residue class `residue mod modulus` with 0 <= residue < modulus.
struct ModClass {
  Natural residue;
  Natural modulus;

  ModClass() : residue(0), modulus(1) {}
  ModClass(Natural r, Natural m);

  bool contains(const Natural& n) const;
  std::string to_string() const;

  friend bool operator==(const ModClass& a, const ModClass& b) {
    return a.residue == b.residue && a.modulus == b.modulus;
  }
};

struct PrimePower {
  u64 prime;
  unsigned exponent;

  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// Primes strictly ascending; the product of prime^exponent is the factored value.
using Factorization = std::vector<PrimePower>;

Natural gcd(const Natural& a, const Natural& b);
u64 gcd(u64 a, u64 b);

/// t with a*t = 1 (mod m), 0 < t < m. Throws NotInvertible if gcd(a, m) > 1.
Natural mod_inverse(const Natural& a, const Natural& m);
u64 mod_inverse(u64 a, u64 m);

/// Unique class mod m1*m2 reducing to both inputs. Throws ModuliNotCoprime.
ModClass crt_combine(const ModClass& c1, const ModClass& c2);

/// Deterministic below 3.3e24 (first thirteen prime bases); above that the
/// answer is probabilistic, see is_prime_deterministic_bound().
bool is_prime(const Natural& n);
bool is_prime(u64 n);
const Natural& is_prime_deterministic_bound();

/// Complete factorization for 2 <= n <= 2^64. Throws Unit for n < 2 and
/// TooLarge above 2^64.
Factorization factorize(const Natural& n);
Factorization factorize(u64 n);

/// All divisors of x^2, ascending. Throws TooLarge for x >= 2^32.
std::vector<u64> divisors_of_square(u64 x);

/// Divisors of n from its factorization, ascending.
std::vector<u64> divisors_from(const Factorization& f);

u64 mul_mod(u64 a, u64 b, u64 m);
u64 pow_mod(u64 base, u64 exp, u64 m);

/// a*b, throwing TooLarge on overflow.
u64 checked_mul(u64 a, u64 b);

u64 to_u64(const Natural& n);
bool fits_u64(const Natural& n);
Natural to_natural(u64 v);
Natural parse_natural(const std::string& text);

/// Primes up to limit (inclusive) by a sieve of Eratosthenes.
std::vector<u64> primes_up_to(u64 limit);

}  // namespace esc
