#include "esc/bradford.hpp"

#include <istream>
#include <numeric>
#include <ostream>

#include "esc/fileio.hpp"
#include "esc/parallel.hpp"

namespace esc {

const char* to_string(SolutionType t) noexcept {
  return t == SolutionType::Type1 ? "Type1" : "Type2";
}

BradfordRange bradford_range(u64 p) {
  if (p < 5 || !is_prime(p)) {
    throw Error(ErrorKind::DomainError, std::to_string(p) + " is not a prime >= 5");
  }
  return {(p + 3) / 4, (p + 1) / 2};
}

ConditionSet candidate_conditions(u64 p, u64 x, u64 d) {
  const u64 a = 4 * x - p;
  const u64 x2 = x * x;
  const u64 dc = x2 / d;
  const u64 px = mul_mod(p, x, a);
  const u64 pp = mul_mod(p, p, a);
  ConditionSet c;
  c.type1 = (px + d % a) % a == 0 && (px + mul_mod(pp, dc % a, a)) % a == 0;
  c.type2 = (x % a + d % a) % a == 0 && (x % a + dc % a) % a == 0;
  return c;
}

SolutionTriple construct_solution(u64 p, u64 x, u64 d, SolutionType type) {
  if (4 * x <= p || d == 0 || (x * x) % d != 0 || !candidate_conditions(p, x, d).contains(type)) {
    throw Error(ErrorKind::ConditionNotMet, "p=" + std::to_string(p) + " x=" + std::to_string(x) +
                                                " d=" + std::to_string(d) + " " + to_string(type));
  }
  const Natural P = to_natural(p), X = to_natural(x), D = to_natural(d);
  const Natural a = 4 * X - P;
  if (type == SolutionType::Type1) {
    const Natural y = (P * X + D) / a;
    const Natural z = P * X * (P * X + D) / (a * D);
    return {P, X, y, z};
  }
  const Natural y = P * (X + D) / a;
  const Natural z = P * X * (X + D) / (a * D);
  return {P, X, y, z};
}

CountResult count_solutions(u64 p, const CandidateSink& sink) {
  if (p >= (u64{1} << 32)) throw Error(ErrorKind::DomainError, std::to_string(p) + " is beyond the counting range");
  const auto [lo, hi] = bradford_range(p);
  CountResult r;
  r.p = p;
  for (u64 x = lo; x <= hi; ++x) {
    const auto divs = divisors_of_square(x);
    r.divisors_examined += divs.size();
    for (u64 d : divs) {
      const ConditionSet c = candidate_conditions(p, x, d);
      if (c.type1) ++r.f1;
      if (c.type2) ++r.f2;
      if (c.type1 && c.type2) ++r.overlap;
      if (sink) {
        for (SolutionType t : {SolutionType::Type1, SolutionType::Type2}) {
          if (!c.contains(t)) continue;
          const SolutionTriple s = construct_solution(p, x, d, t);
          sink({p, x, d, t, s.y, s.z});
        }
      }
    }
  }
  r.f = r.f1 + r.f2;
  return r;
}

std::vector<CountResult> count_many(std::span<const u64> primes, unsigned workers) {
  std::vector<CountResult> out(primes.size());
  parallel_for(primes.size(), workers, [&](std::size_t i) { out[i] = count_solutions(primes[i]); });
  return out;
}

std::vector<u64> difficult_primes(u64 limit) {
  std::vector<u64> out;
  for (u64 base = 0; base <= limit; base += 840) {
    for (u64 r : kMordellResidues) {
      const u64 n = base + r;
      if (n > limit) break;
      if (is_prime(n)) out.push_back(n);
    }
  }
  return out;
}

std::vector<u64> first_difficult_primes(std::size_t count) {
  std::vector<u64> out;
  out.reserve(count);
  for (u64 base = 0; out.size() < count; base += 840) {
    for (u64 r : kMordellResidues) {
      if (out.size() < count && is_prime(base + r)) out.push_back(base + r);
    }
  }
  return out;
}

AggregateStats aggregate(std::span<const CountResult> results) {
  AggregateStats s;
  for (const auto& r : results) {
    ++s.N;
    s.T += r.divisors_examined;
    s.S1 += r.f1;
    s.S2 += r.f2;
    s.overlap += r.overlap;
  }
  s.S = s.S1 + s.S2;
  return s;
}

void write_plot_data(std::ostream& out, std::span<const CountResult> results) {
  out << "i,p,f1,f2,f\n";
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    out << i + 1 << ',' << r.p << ',' << r.f1 << ',' << r.f2 << ',' << r.f << '\n';
  }
}

namespace {

std::vector<std::vector<u64>> read_csv_rows(std::istream& in, const std::string& header, std::size_t columns) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != header) {
    throw Error(ErrorKind::Format, "line 1: expected header '" + header + "'");
  }
  std::vector<std::vector<u64>> rows;
  for (std::size_t no = 2; std::getline(in, line); ++no) {
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(no);
    const auto cells = split(trim(line), ',');
    if (cells.size() != columns) throw Error(ErrorKind::Format, where + ": expected " + std::to_string(columns) + " columns");
    std::vector<u64> row;
    for (const auto& c : cells) row.push_back(parse_u64(c, where));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<CountResult> read_plot_data(std::istream& in) {
  std::vector<CountResult> out;
  std::size_t i = 0;
  for (const auto& row : read_csv_rows(in, "i,p,f1,f2,f", 5)) {
    ++i;
    if (row[0] != i || row[2] + row[3] != row[4]) {
      throw Error(ErrorKind::Format, "line " + std::to_string(i + 1) + ": inconsistent row");
    }
    CountResult r;
    r.p = row[1];
    r.f1 = row[2];
    r.f2 = row[3];
    r.f = row[4];
    out.push_back(r);
  }
  return out;
}

void write_count_table(std::ostream& out, std::span<const CountResult> results) {
  out << "p,f,f1,f2,divisors_examined,overlap\n";
  for (const auto& r : results) {
    out << r.p << ',' << r.f << ',' << r.f1 << ',' << r.f2 << ',' << r.divisors_examined << ',' << r.overlap << '\n';
  }
}

std::vector<CountResult> read_count_table(std::istream& in) {
  std::vector<CountResult> out;
  std::size_t line = 1;
  for (const auto& row : read_csv_rows(in, "p,f,f1,f2,divisors_examined,overlap", 6)) {
    ++line;
    if (row[2] + row[3] != row[1]) throw Error(ErrorKind::Format, "line " + std::to_string(line) + ": f != f1 + f2");
    out.push_back({row[0], row[1], row[2], row[3], row[4], row[5]});
  }
  return out;
}

std::optional<SolutionTriple> bradford_first(u64 p) {
  if (p >= (u64{1} << 33)) throw Error(ErrorKind::TooLarge, std::to_string(p) + " is beyond the sweep range");
  const auto [lo, hi] = bradford_range(p);
  for (u64 x = lo; x <= hi; ++x) {
    for (u64 d : divisors_of_square(x)) {
      const ConditionSet c = candidate_conditions(p, x, d);
      if (c.type1) return construct_solution(p, x, d, SolutionType::Type1);
      if (c.type2) return construct_solution(p, x, d, SolutionType::Type2);
    }
  }
  return std::nullopt;
}

namespace {

Natural wide(u128 v) {
  return (to_natural(static_cast<u64>(v >> 64)) << 64) + to_natural(static_cast<u64>(v));
}

}  // namespace

std::optional<SolutionTriple> naive_search(u64 n) {
  if (n >= (u64{1} << 31)) throw Error(ErrorKind::TooLarge, std::to_string(n) + " is beyond the naive search range");
  if (n < 2) return std::nullopt;
  for (u64 x = n / 4 + 1; 4 * x <= 3 * n; ++x) {
    // 1/y + 1/z = a/b in lowest terms
    const u64 g = std::gcd(4 * x - n, n * x);
    const u128 a = (4 * x - n) / g, b = n * x / g;
    for (u128 y = std::max<u128>(x, b / a + 1); a * y <= 2 * b; ++y) {
      const u128 t = a * y - b;
      const u128 num = b * y;
      if (num % t == 0) {
        return SolutionTriple{to_natural(n), to_natural(x), wide(y), wide(num / t)};
      }
    }
  }
  return std::nullopt;
}

std::optional<SolutionTriple> direct_search(const Natural& n) {
  if (n < 2) return std::nullopt;
  if (is_prime(n) && n >= 5) return bradford_first(to_u64(n));
  if (n < (Natural(1) << 31)) return naive_search(to_u64(n));
  // large composite: solve its least prime factor and scale
  const Factorization f = factorize(n);
  const u64 q = f.front().prime;
  auto base = direct_search(to_natural(q));
  if (!base) return std::nullopt;
  const Natural k = n / to_natural(q);
  return SolutionTriple{n, k * base->x, k * base->y, k * base->z};
}

}  // namespace esc
