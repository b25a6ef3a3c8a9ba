// Parametric identities that certify whole residue classes.
//
// T1(u, v, w): M = 4uvw - 1, n = -v/u (mod M). With q = (nu + v)/M,
//   4/n = 1/(nuwq) + 1/(vwq) + 1/(nuvw).
// T2(u, v, a), a | u + v: M = 4uv, n = -a (mod M). With t = (n + a)/M,
//   4/n = 1/(uvt) + 1/(nut(u+v)/a) + 1/(nvt(u+v)/a).
// GcdRule(g): every n divisible by g inherits a scaled copy of a solution for g.
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "esc/arith.hpp"

namespace esc {

/// 4/n = 1/x + 1/y + 1/z, held exactly.
struct SolutionTriple {
  Natural n;
  Natural x;
  Natural y;
  Natural z;

  std::string to_string() const;
  friend bool operator==(const SolutionTriple&, const SolutionTriple&) = default;
};

/// True iff 4xyz = n(xy + yz + zx) and every component is positive.
bool check_solution(const SolutionTriple& t);

enum class IdentityKind { T1, T2, Gcd };

class Identity {
 public:
  static Identity t1(u64 u, u64 v, u64 w);
  /// Throws NotADivisor when a does not divide u + v.
  static Identity t2(u64 u, u64 v, u64 a);
  /// Throws InvalidArgument unless base is a valid solution with n >= 2.
  static Identity gcd_rule(SolutionTriple base);

  IdentityKind kind() const { return kind_; }
  const std::array<u64, 3>& params() const { return params_; }
  u64 modulus() const { return modulus_; }
  u64 residue() const { return residue_; }
  /// Base solution of a GcdRule; empty triple otherwise.
  const SolutionTriple& base() const { return base_; }

  ModClass mod_class() const { return ModClass(to_natural(residue_), to_natural(modulus_)); }
  bool matches(u64 residue, u64 modulus) const;

  /// Text form used by the identity file: `T1 u v w`, `T2 u v a`, `GCD g x y z`.
  std::string to_string() const;

  /// Lexicographic on (kind, parameters).
  friend bool operator<(const Identity& a, const Identity& b) {
    if (a.kind_ != b.kind_) return a.kind_ < b.kind_;
    return a.params_ < b.params_;
  }
  friend bool operator==(const Identity& a, const Identity& b) {
    return a.kind_ == b.kind_ && a.params_ == b.params_;
  }

 private:
  Identity() = default;

  IdentityKind kind_ = IdentityKind::T1;
  std::array<u64, 3> params_{};
  u64 modulus_ = 1;
  u64 residue_ = 0;
  SolutionTriple base_;
};

ModClass t1_class(u64 u, u64 v, u64 w);
ModClass t2_class(u64 u, u64 v, u64 a);

/// Builds the witness for n. Throws ClassMismatch when n is outside the
/// identity's class (for GcdRule: when g does not divide n).
SolutionTriple instantiate(const Identity& id, const Natural& n);

/// One (residue, identity) pair of a fixed modulus.
struct IdentityEntry {
  u64 residue;
  Identity identity;
};

/// Identities keyed by (modulus, residue), keeping the lexicographically least
/// generator per class.
///
/// A generated database answers every modulus query on demand and is exactly
/// the set enumerate_db(bound) would materialize: T1 with uvw <= bound has
/// modulus <= 4*bound - 1 and T2 with uv <= bound has modulus <= 4*bound. A
/// loaded database holds only what its file listed. Lookups are safe from
/// many threads.
class IdentityDB {
 public:
  using Table = std::vector<IdentityEntry>;  // ascending residue

  IdentityDB() = default;
  explicit IdentityDB(u64 bound);
  IdentityDB(IdentityDB&& other) noexcept;
  IdentityDB& operator=(IdentityDB&& other) noexcept;

  /// Entries of exactly this modulus; empty when there are none.
  const Table& lookup(u64 modulus) const;

  /// Adds an entry unless its class is already held by a lexicographically
  /// smaller identity. GcdRule identities go to the gcd-rule map.
  void insert(const Identity& id);

  u64 bound() const { return bound_; }
  bool generated() const { return generated_; }

  /// Base solution for g from a stored GcdRule, if any.
  std::optional<SolutionTriple> gcd_base(u64 g) const;

  /// Every held identity sorted by (modulus, residue), GcdRules last by g.
  /// For a generated database this forces enumeration of all moduli up to
  /// 4*bound.
  std::vector<Identity> entries() const;

  std::size_t size() const;

 private:
  const Table& generate(u64 modulus) const;

  u64 bound_ = 0;
  bool generated_ = false;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<u64, std::unique_ptr<Table>> tables_;
  std::map<u64, Identity> gcd_rules_;
};

/// Every T1 with uvw <= bound and every T2 with uv <= bound, materialized.
IdentityDB enumerate_db(u64 bound);

/// Identity file I/O. Lines: `T1 u v w`, `T2 u v a`, `GCD g x0 y0 z0`, `#`
/// comments. Output is sorted by derived (modulus, residue).
void write_identity_file(std::ostream& out, const IdentityDB& db);
/// Rejects (Format error naming the line) unknown records, bad numbers,
/// identities whose derived invariants or sample instantiations fail.
IdentityDB read_identity_file(std::istream& in);

}  // namespace esc
