// Modular filters S_m: residues r mod m such that every n = r (mod m) is
// provably solvable.
//
// A class is covered when an identity of modulus m' | M matches it, when its
// residue shares a factor g >= 2 with the modulus (every member is a multiple
// of g, whose solution scales), or when all q lifts r + iM (mod qM) for the
// next configured prime q are covered within the remaining depth. A class
// that is not covered has simply not been proven at this budget; it may well
// be coverable with a larger basis or deeper refinement.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "esc/arith.hpp"
#include "esc/identity.hpp"

namespace esc {

/// Proof tree for the coverage of one class.
struct CoverageCertificate {
  enum class Kind { IdentityHit, GcdHit, Refine };

  Kind kind = Kind::IdentityHit;
  u64 residue = 0;
  u64 modulus = 1;
  /// IdentityHit: the matching identity. GcdHit: the GcdRule for g.
  std::optional<Identity> identity;
  /// Refine: q and the q lifted children, child i covering residue + i*modulus.
  u64 prime = 0;
  std::vector<CoverageCertificate> children;

  /// Witness for a member n of this class, following the tree.
  SolutionTriple replay(const Natural& n) const;
  /// Structural check: leaves match their class, Refine nodes have q children
  /// covering every lift.
  bool well_formed() const;

  /// `(T1 u v w)`, `(T2 u v a)`, `(GCD g x y z)`, `(REFINE q child...)`.
  std::string to_sexpr() const;
  static CoverageCertificate parse_sexpr(const std::string& text, u64 residue, u64 modulus);

  std::size_t node_count() const;
};

struct CoverageConfig {
  std::vector<u64> primes = {2, 2, 2, 3, 5, 7, 11, 13};
  unsigned depth = 5;
  /// Identity bound B: T1 with uvw <= B, T2 with uv <= B.
  u64 identity_bound = 1u << 20;
  /// Verdicts of nodes with modulus at or below this are memoized.
  u64 memo_modulus_cap = 1u << 22;

  void validate() const;
};

struct FilterSet {
  u64 modulus = 1;
  std::vector<u64> members;  // ascending
  std::map<u64, CoverageCertificate> certificates;
  u64 basis_bound = 0;
  unsigned basis_depth = 0;

  bool contains(u64 residue) const;
};

/// True iff n mod f.modulus is a member.
bool filter_accepts(const FilterSet& f, const Natural& n);
bool filter_accepts(const FilterSet& f, u64 n);

/// Coverage search over one identity database and configuration. Verdicts
/// and gcd base solutions are cached and shared by every query; all methods
/// are safe to call concurrently.
class CoverageEngine {
 public:
  CoverageEngine(const IdentityDB& db, CoverageConfig cfg);

  const CoverageConfig& config() const { return cfg_; }
  const IdentityDB& db() const { return db_; }

  /// Certificate for the class, or nullopt when it is not covered at this
  /// budget. Requires modulus >= 2.
  std::optional<CoverageCertificate> is_covered(const ModClass& c) const;
  std::optional<CoverageCertificate> is_covered(u64 residue, u64 modulus) const;

  /// Verdict only; cheaper than building the certificate.
  bool covered(u64 residue, u64 modulus) const;

  /// members = {r : r mod m is covered}. Parallel over residues; the result
  /// does not depend on `workers`.
  FilterSet build_filter(u64 m, unsigned workers = 1, bool keep_certificates = true) const;

  /// Solution for g used by gcd hits: the database's GcdRule if present,
  /// otherwise the direct solver for g <= 10^4 (cached). nullopt above that.
  std::optional<SolutionTriple> gcd_base(u64 g) const;

 private:
  bool covered_at(u64 r, u64 m, unsigned level) const;
  std::optional<CoverageCertificate> certify_at(u64 r, u64 m, unsigned level) const;
  std::optional<Identity> identity_hit(u64 r, u64 m) const;
  std::optional<u64> gcd_hit(u64 r, u64 m) const;
  const std::vector<u64>& useful_divisors(u64 m) const;

  const IdentityDB& db_;
  CoverageConfig cfg_;
  unsigned max_level_;

  struct MemoKey {
    u64 residue;
    u64 modulus;
    unsigned level;
    friend bool operator==(const MemoKey&, const MemoKey&) = default;
  };
  struct MemoHash {
    std::size_t operator()(const MemoKey& k) const noexcept;
  };
  static constexpr std::size_t kShards = 64;
  struct Shard {
    std::shared_mutex mutex;
    std::unordered_map<MemoKey, bool, MemoHash> verdicts;
  };
  mutable std::unique_ptr<Shard[]> memo_;

  mutable std::shared_mutex divisor_mutex_;
  mutable std::unordered_map<u64, std::unique_ptr<std::vector<u64>>> divisor_cache_;

  mutable std::shared_mutex base_mutex_;
  mutable std::unordered_map<u64, std::optional<SolutionTriple>> base_cache_;
};

/// Largest g for which a gcd hit may fetch its base solution from the solver.
inline constexpr u64 kGcdBaseLimit = 10000;

struct AuditEntry {
  u64 residue;
  std::size_t checks;
  std::size_t failures;
  /// first failing sample, if any
  std::optional<Natural> counterexample;
};

struct AuditReport {
  u64 modulus = 0;
  std::vector<AuditEntry> classes;
  std::size_t checks = 0;
  std::size_t failures = 0;

  bool ok() const { return failures == 0; }
};

/// Replays each member's certificate on `samples_per_class` random members
/// n <= 10^12 of its class. Members without a stored certificate get one from
/// `engine` when given, and count as failures otherwise.
AuditReport audit_filter(const FilterSet& f, std::size_t samples_per_class, std::uint64_t seed,
                         const CoverageEngine* engine = nullptr);

/// Filter file: `FILTER m=<m> count=<k> basis=<B>,<D>` then the comma
/// separated members on one line.
void write_filter_file(std::ostream& out, const FilterSet& f);
FilterSet read_filter_file(std::istream& in);
/// Certificate sidecar: one `<residue>: <sexpr>` line per member.
void write_certificate_file(std::ostream& out, const FilterSet& f);
void read_certificate_file(std::istream& in, FilterSet& f);

}  // namespace esc
