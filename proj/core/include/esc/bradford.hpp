// Solution counting over the Bradford x-range.
//
// For prime p >= 5 every solution of 4/p = 1/x + 1/y + 1/z with p | z has
// ceil(p/4) <= x <= ceil(p/2). With a = 4x - p the remaining pair satisfies
// (ay - px)(az - px) = p^2 x^2, so solutions correspond to divisors d of x^2:
//   Type1 (p does not divide y): ay - px = d,   az - px = p^2 x^2 / d
//   Type2 (p divides y):         ay - px = p d, az - px = p x^2 / d
// f(p) is the number of (x, d, type) for which both y and z come out integral.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "esc/arith.hpp"
#include "esc/identity.hpp"

namespace esc {

enum class SolutionType { Type1, Type2 };

const char* to_string(SolutionType t) noexcept;

struct BradfordRange {
  u64 lo;
  u64 hi;
};

/// (ceil(p/4), ceil(p/2)). Throws DomainError unless p is a prime >= 5.
BradfordRange bradford_range(u64 p);

struct ConditionSet {
  bool type1 = false;
  bool type2 = false;

  bool empty() const { return !type1 && !type2; }
  bool contains(SolutionType t) const { return t == SolutionType::Type1 ? type1 : type2; }
  friend bool operator==(const ConditionSet&, const ConditionSet&) = default;
};

/// Which divisibility conditions the divisor d of x^2 meets. p must be below
/// 2^33 so that x fits the divisor enumeration.
ConditionSet candidate_conditions(u64 p, u64 x, u64 d);

/// Throws ConditionNotMet when `type` is not among candidate_conditions.
SolutionTriple construct_solution(u64 p, u64 x, u64 d, SolutionType type);

struct CountResult {
  u64 p = 0;
  u64 f = 0;
  u64 f1 = 0;
  u64 f2 = 0;
  u64 divisors_examined = 0;
  /// divisors meeting both conditions; they add to f1 and to f2
  u64 overlap = 0;

  friend bool operator==(const CountResult&, const CountResult&) = default;
};

/// One counted candidate, for the --per-x audit output.
struct CandidateRow {
  u64 p;
  u64 x;
  u64 d;
  SolutionType type;
  Natural y;
  Natural z;
};

using CandidateSink = std::function<void(const CandidateRow&)>;

/// f(p) with its Type1/Type2 split. Throws DomainError unless p is a prime in
/// [5, 2^32).
CountResult count_solutions(u64 p, const CandidateSink& sink = {});

/// count_solutions over many primes, results in input order.
std::vector<CountResult> count_many(std::span<const u64> primes, unsigned workers);

/// Residues mod 840 left open by Mordell's identities.
inline constexpr std::array<u64, 6> kMordellResidues = {1, 121, 169, 289, 361, 529};

/// Primes p <= limit with p mod 840 in kMordellResidues, ascending.
std::vector<u64> difficult_primes(u64 limit);
/// The first `count` difficult primes.
std::vector<u64> first_difficult_primes(std::size_t count);

struct AggregateStats {
  u64 N = 0;
  u64 T = 0;
  u64 S = 0;
  u64 S1 = 0;
  u64 S2 = 0;
  u64 overlap = 0;

  friend bool operator==(const AggregateStats&, const AggregateStats&) = default;
};

AggregateStats aggregate(std::span<const CountResult> results);

/// CSV `i,p,f1,f2,f`, i being the 1-based position in `results`.
void write_plot_data(std::ostream& out, std::span<const CountResult> results);
/// Parses write_plot_data output; divisors_examined is not part of the format
/// and reads back as zero. Throws Format naming the line.
std::vector<CountResult> read_plot_data(std::istream& in);

/// Full count CSV `p,f,f1,f2,divisors_examined,overlap`, the input of `stats`.
void write_count_table(std::ostream& out, std::span<const CountResult> results);
std::vector<CountResult> read_count_table(std::istream& in);

/// First solution in sweep order: x ascending, then d ascending, Type1 before
/// Type2. Requires a prime p in [5, 2^33).
std::optional<SolutionTriple> bradford_first(u64 p);

/// Bounded enumeration x <= y <= z with n/4 < x <= 3n/4, z solved exactly.
/// n must be below 2^31.
std::optional<SolutionTriple> naive_search(u64 n);

/// Fallback solver: the Bradford sweep for primes >= 5, naive enumeration
/// for composites and n < 5. Composites too large for the naive search are
/// reduced through their least prime factor. None when no solution exists
/// (only n = 1 among positive integers, as far as anyone knows).
std::optional<SolutionTriple> direct_search(const Natural& n);

}  // namespace esc
