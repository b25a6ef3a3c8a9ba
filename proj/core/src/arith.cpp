#include "esc/arith.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace esc {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotInvertible: return "NotInvertible";
    case ErrorKind::ModuliNotCoprime: return "ModuliNotCoprime";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::Unit: return "Unit";
    case ErrorKind::NotADivisor: return "NotADivisor";
    case ErrorKind::ClassMismatch: return "ClassMismatch";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::ConditionNotMet: return "ConditionNotMet";
    case ErrorKind::Format: return "Format";
    case ErrorKind::Io: return "Io";
    case ErrorKind::CheckpointMismatch: return "CheckpointMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

ModClass::ModClass(Natural r, Natural m) : residue(std::move(r)), modulus(std::move(m)) {
  if (modulus < 1) throw Error(ErrorKind::InvalidArgument, "modulus must be >= 1");
  mpz_fdiv_r(residue.get_mpz_t(), residue.get_mpz_t(), modulus.get_mpz_t());
}

bool ModClass::contains(const Natural& n) const {
  Natural r;
  mpz_fdiv_r(r.get_mpz_t(), n.get_mpz_t(), modulus.get_mpz_t());
  return r == residue;
}

std::string ModClass::to_string() const {
  return residue.get_str() + " mod " + modulus.get_str();
}

Natural gcd(const Natural& a, const Natural& b) {
  Natural g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return g;
}

u64 gcd(u64 a, u64 b) { return std::gcd(a, b); }

Natural mod_inverse(const Natural& a, const Natural& m) {
  if (m < 2) throw Error(ErrorKind::InvalidArgument, "modulus must be >= 2");
  Natural t;
  if (mpz_invert(t.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) == 0) {
    throw Error(ErrorKind::NotInvertible, a.get_str() + " mod " + m.get_str());
  }
  return t;
}

u64 mod_inverse(u64 a, u64 m) {
  if (m < 2) throw Error(ErrorKind::InvalidArgument, "modulus must be >= 2");
  // extended Euclid on signed 128-bit to keep the Bezout coefficients exact
  __int128 old_r = static_cast<__int128>(a % m), r = m;
  __int128 old_s = 1, s = 0;
  while (r != 0) {
    const __int128 q = old_r / r;
    std::tie(old_r, r) = std::pair{r, old_r - q * r};
    std::tie(old_s, s) = std::pair{s, old_s - q * s};
  }
  if (old_r != 1) {
    throw Error(ErrorKind::NotInvertible, std::to_string(a) + " mod " + std::to_string(m));
  }
  old_s %= static_cast<__int128>(m);
  if (old_s < 0) old_s += m;
  return static_cast<u64>(old_s);
}

ModClass crt_combine(const ModClass& c1, const ModClass& c2) {
  if (gcd(c1.modulus, c2.modulus) != 1) {
    throw Error(ErrorKind::ModuliNotCoprime, c1.to_string() + " and " + c2.to_string());
  }
  const Natural m = c1.modulus * c2.modulus;
  if (c1.modulus == 1) return ModClass(c2.residue, m);
  if (c2.modulus == 1) return ModClass(c1.residue, m);
  // r = r1 + m1 * ((r2 - r1) * m1^-1 mod m2)
  const Natural inv = mod_inverse(c1.modulus, c2.modulus);
  Natural t = (c2.residue - c1.residue) * inv;
  mpz_fdiv_r(t.get_mpz_t(), t.get_mpz_t(), c2.modulus.get_mpz_t());
  return ModClass(c1.residue + c1.modulus * t, m);
}

u64 mul_mod(u64 a, u64 b, u64 m) {
  return static_cast<u64>(static_cast<u128>(a) * b % m);
}

u64 pow_mod(u64 base, u64 exp, u64 m) {
  u64 result = 1 % m;
  base %= m;
  while (exp) {
    if (exp & 1) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return result;
}

u64 checked_mul(u64 a, u64 b) {
  u64 out;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw Error(ErrorKind::TooLarge, std::to_string(a) + " * " + std::to_string(b) + " exceeds 64 bits");
  }
  return out;
}

namespace {

constexpr std::array<u64, 13> kWitnesses = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41};
constexpr int kProbabilisticRounds = 64;

bool strong_probable_prime(u64 n, u64 a, u64 d, unsigned s) {
  u64 x = pow_mod(a, d, n);
  if (x == 1 || x == n - 1) return true;
  for (unsigned i = 1; i < s; ++i) {
    x = mul_mod(x, x, n);
    if (x == n - 1) return true;
  }
  return false;
}

bool strong_probable_prime(const Natural& n, const Natural& a, const Natural& d, unsigned long s) {
  const Natural n1 = n - 1;
  Natural x;
  mpz_powm(x.get_mpz_t(), a.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
  if (x == 1 || x == n1) return true;
  for (unsigned long i = 1; i < s; ++i) {
    x = x * x % n;
    if (x == n1) return true;
  }
  return false;
}

}  // namespace

const Natural& is_prime_deterministic_bound() {
  // smallest strong pseudoprime to the first 13 prime bases
  static const Natural bound("3317044064679887385961981");
  return bound;
}

bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 p : kWitnesses) {
    if (n % p == 0) return n == p;
  }
  if (n < 41 * 41) return true;
  u64 d = n - 1;
  unsigned s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  // the first 12 bases already cover every 64-bit n
  for (std::size_t i = 0; i < 12; ++i) {
    if (!strong_probable_prime(n, kWitnesses[i], d, s)) return false;
  }
  return true;
}

bool is_prime(const Natural& n) {
  if (fits_u64(n)) return is_prime(to_u64(n));
  for (u64 p : kWitnesses) {
    if (mpz_divisible_ui_p(n.get_mpz_t(), p)) return false;
  }
  Natural d = n - 1;
  const unsigned long s = mpz_scan1(d.get_mpz_t(), 0);
  mpz_fdiv_q_2exp(d.get_mpz_t(), d.get_mpz_t(), s);
  for (u64 p : kWitnesses) {
    if (!strong_probable_prime(n, Natural(p), d, s)) return false;
  }
  if (n < is_prime_deterministic_bound()) return true;
  // fixed seed so the answer is reproducible
  gmp_randclass rng(gmp_randinit_mt);
  rng.seed(0x45534331UL);
  const Natural span = n - 3;
  for (int i = 0; i < kProbabilisticRounds; ++i) {
    const Natural a = rng.get_z_range(span) + 2;
    if (!strong_probable_prime(n, a, d, s)) return false;
  }
  return true;
}

namespace {

// Brent's variant of Pollard rho; n must be odd and composite.
u64 rho_split(u64 n) {
  for (u64 c = 1;; ++c) {
    auto f = [&](u64 v) { return static_cast<u64>((static_cast<u128>(v) * v + c) % n); };
    u64 y = 2, x = 2, g = 1, q = 1, ys = 2;
    const u64 block = 128;
    for (u64 r = 1; g == 1; r <<= 1) {
      x = y;
      for (u64 i = 0; i < r; ++i) y = f(y);
      for (u64 k = 0; k < r && g == 1; k += block) {
        ys = y;
        const u64 lim = std::min(block, r - k);
        for (u64 i = 0; i < lim; ++i) {
          y = f(y);
          q = mul_mod(q, x > y ? x - y : y - x, n);
        }
        g = std::gcd(q, n);
      }
    }
    if (g == n) {
      do {
        ys = f(ys);
        g = std::gcd(x > ys ? x - ys : ys - x, n);
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

void factor_into(u64 n, std::vector<u64>& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    out.push_back(n);
    return;
  }
  const u64 d = rho_split(n);
  factor_into(d, out);
  factor_into(n / d, out);
}

}  // namespace

Factorization factorize(u64 n) {
  if (n < 2) throw Error(ErrorKind::Unit, "cannot factor " + std::to_string(n));
  std::vector<u64> primes;
  for (u64 p : {2ULL, 3ULL, 5ULL}) {
    while (n % p == 0) {
      primes.push_back(p);
      n /= p;
    }
  }
  // wheel mod 30 trial division up to a small cutoff, rho for the rest
  static constexpr std::array<u64, 8> kWheel = {4, 2, 4, 2, 4, 6, 2, 6};
  u64 p = 7;
  for (std::size_t i = 0; p <= 1000 && p * p <= n; p += kWheel[i++ & 7]) {
    while (n % p == 0) {
      primes.push_back(p);
      n /= p;
    }
  }
  if (n > 1) {
    if (p * p > n) {
      primes.push_back(n);
    } else {
      factor_into(n, primes);
    }
  }
  std::sort(primes.begin(), primes.end());
  Factorization f;
  for (u64 q : primes) {
    if (!f.empty() && f.back().prime == q) {
      ++f.back().exponent;
    } else {
      f.push_back({q, 1});
    }
  }
  return f;
}

Factorization factorize(const Natural& n) {
  if (n < 2) throw Error(ErrorKind::Unit, "cannot factor " + n.get_str());
  static const Natural two64 = Natural(1) << 64;
  if (n > two64) throw Error(ErrorKind::TooLarge, n.get_str() + " exceeds 2^64");
  if (n == two64) return {{2, 64}};
  return factorize(to_u64(n));
}

std::vector<u64> divisors_from(const Factorization& f) {
  std::vector<u64> divs{1};
  for (const auto& [p, e] : f) {
    const std::size_t base = divs.size();
    u64 pk = 1;
    for (unsigned k = 1; k <= e; ++k) {
      pk *= p;
      for (std::size_t i = 0; i < base; ++i) divs.push_back(divs[i] * pk);
    }
  }
  std::sort(divs.begin(), divs.end());
  return divs;
}

std::vector<u64> divisors_of_square(u64 x) {
  if (x == 0) throw Error(ErrorKind::InvalidArgument, "x must be >= 1");
  if (x >= (u64{1} << 32)) throw Error(ErrorKind::TooLarge, std::to_string(x) + " squared exceeds 64 bits");
  if (x == 1) return {1};
  Factorization f = factorize(x);
  for (auto& pe : f) pe.exponent *= 2;
  return divisors_from(f);
}

bool fits_u64(const Natural& n) {
  return n >= 0 && mpz_sizeinbase(n.get_mpz_t(), 2) <= 64;
}

u64 to_u64(const Natural& n) {
  if (!fits_u64(n)) throw Error(ErrorKind::TooLarge, n.get_str() + " does not fit 64 bits");
  u64 out = 0;
  mpz_export(&out, nullptr, -1, sizeof(out), 0, 0, n.get_mpz_t());
  return out;
}

Natural to_natural(u64 v) {
  Natural n;
  mpz_import(n.get_mpz_t(), 1, -1, sizeof(v), 0, 0, &v);
  return n;
}

Natural parse_natural(const std::string& text) {
  if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorKind::Format, "not a natural number: '" + text + "'");
  }
  return Natural(text);
}

std::vector<u64> primes_up_to(u64 limit) {
  std::vector<u64> primes;
  if (limit < 2) return primes;
  std::vector<bool> composite(limit + 1, false);
  for (u64 i = 2; i <= limit; ++i) {
    if (composite[i]) continue;
    primes.push_back(i);
    for (u64 j = i * i; j <= limit; j += i) composite[j] = true;
  }
  return primes;
}

}  // namespace esc
