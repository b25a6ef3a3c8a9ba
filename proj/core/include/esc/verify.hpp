// Batch verification against a filter bank.
//
// Every member n >= 2 of a batch is probed against the bank in its current
// order; the first accepting filter takes the hit. Members no filter accepts
// are escapees: composites are benign (a prime factor below n was verified
// earlier), primes get a fallback solver run and are reported as filter gaps,
// and a prime with no solution at all is a counterexample.
//
// Batches are processed in segments of `reorder_interval` consecutive k. The
// bank order is fixed within a segment and re-sorted between segments by
// cumulative hits, so results never depend on thread timing.
#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "esc/arith.hpp"
#include "esc/filter.hpp"
#include "esc/identity.hpp"
#include "esc/residue.hpp"

namespace esc {

struct FilterBank {
  std::vector<FilterSet> filters;  // probe order
  std::vector<u64> hits;           // cumulative, parallel to filters
  u64 reorder_interval = 100;      // batches between re-sorts; 0 disables

  static FilterBank from(std::vector<FilterSet> filters, u64 reorder_interval = 100);
  std::vector<u64> moduli() const;
};

/// Stable sort by cumulative hits, descending. Counters travel with their filters.
FilterBank reorder_filters(FilterBank bank);

enum class Verdict { Filtered, CompositeEscapee, PrimeEscapeeSolved, Counterexample };

const char* to_string(Verdict v) noexcept;

struct Classification {
  Verdict verdict;
  /// bank position of the accepting filter
  std::optional<std::size_t> filter_index;
  std::optional<SolutionTriple> triple;
  /// filters probed before deciding
  std::size_t probes = 0;
};

/// Requires n >= 2.
Classification classify(u64 n, const FilterBank& bank, const IdentityDB& db);

struct Escapee {
  u64 n = 0;
  u64 k = 0;
  bool is_prime = false;
  std::optional<SolutionTriple> triple;

  friend bool operator==(const Escapee&, const Escapee&) = default;
};

struct BatchReport {
  u64 k = 0;
  u64 checked = 0;
  std::vector<u64> hits;  // by bank position
  u64 probes = 0;         // summed over filtered members only
  std::vector<Escapee> escapees;
  bool counterexample = false;

  u64 filtered() const;
};

/// Classifies every member n >= 2 of `b` against the bank order as given.
BatchReport verify_batch(const Batch& b, const FilterBank& bank, const IdentityDB& db);

/// Fallback solver for prime escapees: the Bradford sweep where it applies,
/// otherwise a scan for a matching database identity.
std::optional<SolutionTriple> fallback_solve(u64 n, const IdentityDB& db);

struct VerifyReport {
  u64 first_k = 0;
  u64 next_k = 0;  // one past the last completed batch
  u64 checked = 0;
  u64 filtered = 0;
  u64 probes = 0;
  u64 reorders = 0;
  std::vector<std::pair<u64, u64>> filter_hits;  // (modulus, hits) in final bank order
  std::vector<Escapee> escapees;                 // ascending n

  std::vector<Escapee> prime_escapees() const;
  std::vector<Escapee> anomalies() const;        // prime escapees with a fallback triple
  std::vector<Escapee> counterexamples() const;  // prime escapees without one
  bool ok() const { return counterexamples().empty(); }
  /// Mean filters probed per filtered integer.
  double mean_probes() const;

  friend bool operator==(const VerifyReport&, const VerifyReport&) = default;
};

struct VerifyOptions {
  Natural limit = 1;
  /// first batch index (a prior campaign may already cover 0 .. start_k-1)
  u64 start_k = 0;
  unsigned workers = 1;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> escapee_log;  // default: <checkpoint>.escapees.csv
  /// stop after this many batches in this call (used to split a run)
  std::optional<u64> max_batches;
  /// called after each segment with the report so far
  std::function<void(const VerifyReport&)> progress;
};

/// Digest of the system, the bank contents (order independent) and the basis
/// bounds; stored in checkpoints.
std::string run_fingerprint(const ResidueSystem& sys, const FilterBank& bank, const IdentityDB& db);

/// Verifies batches 0 .. k_range_for_limit(limit), resuming from the
/// checkpoint when it exists. Throws CheckpointMismatch when the checkpoint
/// belongs to another system or bank. Stops early at the first segment that
/// produced a counterexample.
VerifyReport run_verification(const ResidueSystem& sys, FilterBank bank, const IdentityDB& db,
                              const VerifyOptions& opts);

/// key=value summary, one `hits` line per filter, one `escapee` line each.
void write_verify_report(std::ostream& out, const VerifyReport& r);

/// Escapee log CSV `n,k,is_prime,x,y,z`.
void write_escapee_log(std::ostream& out, std::span<const Escapee> escapees);
std::vector<Escapee> read_escapee_log(std::istream& in);

struct Checkpoint {
  std::string fingerprint;
  u64 next_k = 0;
  std::vector<std::pair<u64, u64>> completed;  // inclusive k ranges
  std::vector<std::pair<u64, u64>> hits;       // (modulus, count) in bank order
  u64 probes = 0;
  u64 reorders = 0;
  std::string escapee_log;
};

void write_checkpoint(std::ostream& out, const Checkpoint& c);
Checkpoint read_checkpoint(std::istream& in);

}  // namespace esc
