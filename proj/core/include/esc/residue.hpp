#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "esc/arith.hpp"
#include "esc/filter.hpp"
#include "esc/identity.hpp"

namespace esc {

/// Surviving classes R mod G of a set of pairwise coprime filters.
struct ResidueSystem {
  u64 G = 1;
  std::vector<u64> moduli;
  std::vector<u64> residues;  // strictly ascending, in [0, G)
  /// how the cross-filter pass was configured; not serialized
  std::string basis;

  friend bool operator==(const ResidueSystem& a, const ResidueSystem& b) {
    return a.G == b.G && a.moduli == b.moduli && a.residues == b.residues;
  }
};

/// Translates r + kG of every surviving residue.
struct Batch {
  u64 k = 0;
  std::vector<u64> members;  // ascending
};

/// CRT product of every filter's non-members, then pruned by each identity of
/// `db` whose modulus divides G. Throws ModuliNotCoprime.
ResidueSystem build_system(std::span<const FilterSet> filters, const IdentityDB& db, unsigned workers = 1);

/// Identities of `db` with modulus dividing G that can meet a CRT product of
/// the filters' non-members, ascending by (modulus, residue).
std::vector<Identity> dividing_identities(std::span<const FilterSet> filters, const IdentityDB& db, u64 G);

/// Drops residues lying in any of the identity classes. The result does not
/// depend on the order of `identities`.
std::vector<u64> cross_filter(std::vector<u64> residues, std::span<const Identity> identities, unsigned workers = 1);

/// Throws TooLarge when r + kG overflows 64 bits.
Batch batch(const ResidueSystem& sys, u64 k);

/// Largest batch index that can hold a member n <= limit: floor((limit-1)/G).
u64 k_range_for_limit(const ResidueSystem& sys, const Natural& limit);

/// G / |R| exactly. Throws DomainError for an empty system.
mpq_class efficiency(const ResidueSystem& sys);
std::string efficiency_decimal(const ResidueSystem& sys, int digits = 1);

/// Text format: `G=<G>`, `moduli=<list>`, `count=<|R|>`, then one residue per
/// line ascending.
void write_system_file(std::ostream& out, const ResidueSystem& sys);
ResidueSystem read_system_file(std::istream& in);

}  // namespace esc
