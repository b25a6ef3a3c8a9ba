#include "esc/verify.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "esc/bradford.hpp"
#include "esc/fileio.hpp"
#include "esc/parallel.hpp"

namespace esc {

FilterBank FilterBank::from(std::vector<FilterSet> filters, u64 reorder_interval) {
  FilterBank bank;
  bank.hits.assign(filters.size(), 0);
  bank.filters = std::move(filters);
  bank.reorder_interval = reorder_interval;
  return bank;
}

std::vector<u64> FilterBank::moduli() const {
  std::vector<u64> out;
  for (const auto& f : filters) out.push_back(f.modulus);
  return out;
}

FilterBank reorder_filters(FilterBank bank) {
  std::vector<std::size_t> order(bank.filters.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return bank.hits[a] > bank.hits[b]; });
  FilterBank out;
  out.reorder_interval = bank.reorder_interval;
  out.filters.reserve(order.size());
  out.hits.reserve(order.size());
  for (std::size_t i : order) {
    out.filters.push_back(std::move(bank.filters[i]));
    out.hits.push_back(bank.hits[i]);
  }
  return out;
}

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Filtered: return "Filtered";
    case Verdict::CompositeEscapee: return "CompositeEscapee";
    case Verdict::PrimeEscapeeSolved: return "PrimeEscapeeSolved";
    case Verdict::Counterexample: return "Counterexample";
  }
  return "Unknown";
}

std::optional<SolutionTriple> fallback_solve(u64 n, const IdentityDB& db) {
  if (n < (u64{1} << 33)) return direct_search(to_natural(n));
  const Natural big = to_natural(n);
  if (db.generated()) {
    const u64 top = std::min<u64>(4 * db.bound(), u64{1} << 22);
    for (u64 m = 3; m <= top; ++m) {
      const auto& table = db.lookup(m);
      if (table.empty()) continue;
      const u64 r = n % m;
      auto it = std::lower_bound(table.begin(), table.end(), r, [](const IdentityEntry& e, u64 v) { return e.residue < v; });
      if (it != table.end() && it->residue == r) return instantiate(it->identity, big);
    }
    return std::nullopt;
  }
  for (const auto& id : db.entries()) {
    if (id.kind() != IdentityKind::Gcd && n % id.modulus() == id.residue()) return instantiate(id, big);
  }
  return std::nullopt;
}

Classification classify(u64 n, const FilterBank& bank, const IdentityDB& db) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "cannot classify n < 2");
  for (std::size_t i = 0; i < bank.filters.size(); ++i) {
    if (filter_accepts(bank.filters[i], n)) return {Verdict::Filtered, i, std::nullopt, i + 1};
  }
  Classification c{Verdict::CompositeEscapee, std::nullopt, std::nullopt, bank.filters.size()};
  if (!is_prime(n)) return c;
  c.triple = fallback_solve(n, db);
  if (c.triple && !check_solution(*c.triple)) c.triple.reset();
  c.verdict = c.triple ? Verdict::PrimeEscapeeSolved : Verdict::Counterexample;
  return c;
}

u64 BatchReport::filtered() const { return std::accumulate(hits.begin(), hits.end(), u64{0}); }

BatchReport verify_batch(const Batch& b, const FilterBank& bank, const IdentityDB& db) {
  if (bank.filters.empty()) throw Error(ErrorKind::InvalidArgument, "filter bank is empty");
  BatchReport r;
  r.k = b.k;
  r.hits.assign(bank.filters.size(), 0);
  for (u64 n : b.members) {
    if (n < 2) continue;
    ++r.checked;
    const Classification c = classify(n, bank, db);
    if (c.verdict == Verdict::Filtered) {
      ++r.hits[*c.filter_index];
      r.probes += c.probes;
      continue;
    }
    r.escapees.push_back({n, b.k, c.verdict != Verdict::CompositeEscapee, c.triple});
    if (c.verdict == Verdict::Counterexample) r.counterexample = true;
  }
  return r;
}

std::vector<Escapee> VerifyReport::prime_escapees() const {
  std::vector<Escapee> out;
  std::copy_if(escapees.begin(), escapees.end(), std::back_inserter(out), [](const Escapee& e) { return e.is_prime; });
  return out;
}

std::vector<Escapee> VerifyReport::anomalies() const {
  std::vector<Escapee> out;
  std::copy_if(escapees.begin(), escapees.end(), std::back_inserter(out),
               [](const Escapee& e) { return e.is_prime && e.triple; });
  return out;
}

std::vector<Escapee> VerifyReport::counterexamples() const {
  std::vector<Escapee> out;
  std::copy_if(escapees.begin(), escapees.end(), std::back_inserter(out),
               [](const Escapee& e) { return e.is_prime && !e.triple; });
  return out;
}

double VerifyReport::mean_probes() const {
  return filtered == 0 ? 0.0 : static_cast<double>(probes) / static_cast<double>(filtered);
}

std::string run_fingerprint(const ResidueSystem& sys, const FilterBank& bank, const IdentityDB& db) {
  std::ostringstream text;
  write_system_file(text, sys);
  std::vector<const FilterSet*> sorted;
  for (const auto& f : bank.filters) sorted.push_back(&f);
  std::stable_sort(sorted.begin(), sorted.end(), [](const FilterSet* a, const FilterSet* b) {
    return std::tie(a->modulus, a->members) < std::tie(b->modulus, b->members);
  });
  text << "--bank--\n";
  for (const auto* f : sorted) write_filter_file(text, *f);
  text << "--basis--\nbound=" << db.bound() << " generated=" << db.generated()
       << " reorder=" << bank.reorder_interval << '\n';
  return sha256_hex(text.str());
}

namespace {

std::string format_ranges(const std::vector<std::pair<u64, u64>>& ranges) {
  std::string out;
  for (const auto& [a, b] : ranges) {
    if (!out.empty()) out += ',';
    out += std::to_string(a) + "-" + std::to_string(b);
  }
  return out;
}

// Puts the bank in checkpoint order and restores its counters.
void restore_bank(FilterBank& bank, const Checkpoint& cp) {
  if (cp.hits.size() != bank.filters.size()) {
    throw Error(ErrorKind::CheckpointMismatch, "checkpoint lists a different number of filters");
  }
  std::vector<bool> used(bank.filters.size(), false);
  FilterBank restored;
  restored.reorder_interval = bank.reorder_interval;
  for (const auto& [m, n] : cp.hits) {
    std::size_t i = 0;
    while (i < bank.filters.size() && (used[i] || bank.filters[i].modulus != m)) ++i;
    if (i == bank.filters.size()) throw Error(ErrorKind::CheckpointMismatch, "checkpoint names unknown filter m=" + std::to_string(m));
    used[i] = true;
    restored.filters.push_back(std::move(bank.filters[i]));
    restored.hits.push_back(n);
  }
  bank = std::move(restored);
}

void save_state(const std::filesystem::path& checkpoint, const std::filesystem::path& log, const std::string& fingerprint,
                const FilterBank& bank, const VerifyReport& rep) {
  atomic_write(log, [&](std::ostream& out) { write_escapee_log(out, rep.escapees); });
  Checkpoint cp;
  cp.fingerprint = fingerprint;
  cp.next_k = rep.next_k;
  if (rep.next_k > rep.first_k) cp.completed.push_back({rep.first_k, rep.next_k - 1});
  for (std::size_t i = 0; i < bank.filters.size(); ++i) cp.hits.push_back({bank.filters[i].modulus, bank.hits[i]});
  cp.probes = rep.probes;
  cp.reorders = rep.reorders;
  cp.escapee_log = log.string();
  atomic_write(checkpoint, [&](std::ostream& out) { write_checkpoint(out, cp); });
}

void refresh_totals(VerifyReport& rep, const FilterBank& bank) {
  rep.filter_hits.clear();
  rep.filtered = 0;
  for (std::size_t i = 0; i < bank.filters.size(); ++i) {
    rep.filter_hits.push_back({bank.filters[i].modulus, bank.hits[i]});
    rep.filtered += bank.hits[i];
  }
  rep.checked = rep.filtered + rep.escapees.size();
}

}  // namespace

VerifyReport run_verification(const ResidueSystem& sys, FilterBank bank, const IdentityDB& db,
                              const VerifyOptions& opts) {
  if (bank.filters.empty()) throw Error(ErrorKind::InvalidArgument, "filter bank is empty");
  if (sys.residues.empty()) throw Error(ErrorKind::InvalidArgument, "residue system is empty");
  const std::string fingerprint = run_fingerprint(sys, bank, db);
  const u64 k_max = k_range_for_limit(sys, opts.limit);
  const u64 segment = bank.reorder_interval ? bank.reorder_interval : 100;

  std::filesystem::path log_path;
  if (opts.checkpoint) {
    log_path = opts.escapee_log ? *opts.escapee_log : std::filesystem::path(opts.checkpoint->string() + ".escapees.csv");
  }

  VerifyReport rep;
  rep.first_k = rep.next_k = opts.start_k;
  if (opts.checkpoint && std::filesystem::exists(*opts.checkpoint)) {
    std::istringstream in(read_file(*opts.checkpoint));
    const Checkpoint cp = read_checkpoint(in);
    if (cp.fingerprint != fingerprint) {
      throw Error(ErrorKind::CheckpointMismatch, opts.checkpoint->string() + " was written for another system or bank");
    }
    restore_bank(bank, cp);
    rep.next_k = cp.next_k;
    rep.first_k = cp.completed.empty() ? cp.next_k : cp.completed.front().first;
    rep.probes = cp.probes;
    rep.reorders = cp.reorders;
    if (!cp.escapee_log.empty()) log_path = cp.escapee_log;
    if (std::filesystem::exists(log_path)) {
      std::istringstream log(read_file(log_path));
      rep.escapees = read_escapee_log(log);
    }
  }
  if (bank.hits.size() != bank.filters.size()) bank.hits.assign(bank.filters.size(), 0);

  u64 processed = 0;
  while (rep.next_k <= k_max && (!opts.max_batches || processed < *opts.max_batches)) {
    const u64 start = rep.next_k;
    u64 end = std::min(k_max, (start / segment + 1) * segment - 1);
    if (opts.max_batches) end = std::min(end, start + (*opts.max_batches - processed) - 1);

    std::vector<BatchReport> reports(end - start + 1);
    parallel_for(reports.size(), opts.workers,
                 [&](std::size_t i) { reports[i] = verify_batch(batch(sys, start + i), bank, db); });

    bool stop = false;
    for (const auto& r : reports) {
      for (std::size_t i = 0; i < r.hits.size(); ++i) bank.hits[i] += r.hits[i];
      rep.probes += r.probes;
      rep.escapees.insert(rep.escapees.end(), r.escapees.begin(), r.escapees.end());
      stop = stop || r.counterexample;
    }
    processed += reports.size();
    rep.next_k = end + 1;
    if (bank.reorder_interval && rep.next_k % segment == 0 && !stop) {
      bank = reorder_filters(std::move(bank));
      ++rep.reorders;
    }
    refresh_totals(rep, bank);
    if (opts.checkpoint) save_state(*opts.checkpoint, log_path, fingerprint, bank, rep);
    if (opts.progress) opts.progress(rep);
    if (stop) break;
  }
  refresh_totals(rep, bank);
  return rep;
}

void write_verify_report(std::ostream& out, const VerifyReport& r) {
  out << "first_k=" << r.first_k << '\n'
      << "next_k=" << r.next_k << '\n'
      << "checked=" << r.checked << '\n'
      << "filtered=" << r.filtered << '\n'
      << "escapees=" << r.escapees.size() << '\n'
      << "prime_escapees=" << r.prime_escapees().size() << '\n'
      << "anomalies=" << r.anomalies().size() << '\n'
      << "counterexamples=" << r.counterexamples().size() << '\n'
      << "probes=" << r.probes << '\n'
      << "mean_probes=" << std::fixed << std::setprecision(6) << r.mean_probes() << '\n'
      << "reorders=" << r.reorders << '\n';
  for (const auto& [m, n] : r.filter_hits) out << "hits m=" << m << " n=" << n << '\n';
  for (const auto& e : r.escapees) {
    out << "escapee n=" << e.n << " k=" << e.k << " prime=" << (e.is_prime ? 1 : 0);
    if (e.triple) out << " triple=" << e.triple->x << ',' << e.triple->y << ',' << e.triple->z;
    out << '\n';
  }
}

void write_escapee_log(std::ostream& out, std::span<const Escapee> escapees) {
  out << "n,k,is_prime,x,y,z\n";
  for (const auto& e : escapees) {
    out << e.n << ',' << e.k << ',' << (e.is_prime ? 1 : 0) << ',';
    if (e.triple) {
      out << e.triple->x << ',' << e.triple->y << ',' << e.triple->z;
    } else {
      out << ",,";
    }
    out << '\n';
  }
}

std::vector<Escapee> read_escapee_log(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "n,k,is_prime,x,y,z") {
    throw Error(ErrorKind::Format, "line 1: expected header 'n,k,is_prime,x,y,z'");
  }
  std::vector<Escapee> out;
  for (std::size_t no = 2; std::getline(in, line); ++no) {
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(no);
    const auto cells = split(trim(line), ',');
    if (cells.size() != 6) throw Error(ErrorKind::Format, where + ": expected 6 columns");
    Escapee e;
    e.n = parse_u64(cells[0], where);
    e.k = parse_u64(cells[1], where);
    const u64 prime = parse_u64(cells[2], where);
    if (prime > 1) throw Error(ErrorKind::Format, where + ": is_prime must be 0 or 1");
    e.is_prime = prime == 1;
    const bool empty = cells[3].empty() && cells[4].empty() && cells[5].empty();
    if (!empty) {
      SolutionTriple t{to_natural(e.n), parse_natural(cells[3]), parse_natural(cells[4]), parse_natural(cells[5])};
      if (!check_solution(t)) throw Error(ErrorKind::Format, where + ": triple does not solve 4/n");
      e.triple = std::move(t);
    }
    out.push_back(std::move(e));
  }
  return out;
}

void write_checkpoint(std::ostream& out, const Checkpoint& c) {
  out << "fingerprint=" << c.fingerprint << '\n'
      << "next_k=" << c.next_k << '\n'
      << "completed=" << format_ranges(c.completed) << '\n';
  for (const auto& [m, n] : c.hits) out << "hits m=" << m << " n=" << n << '\n';
  out << "probes=" << c.probes << '\n'
      << "reorders=" << c.reorders << '\n'
      << "escapee_log=" << c.escapee_log << '\n';
}

Checkpoint read_checkpoint(std::istream& in) {
  Checkpoint c;
  std::string line;
  bool have_fp = false, have_next = false;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    const std::string where = "line " + std::to_string(no);
    if (trim(line).empty()) continue;
    if (line.rfind("hits ", 0) == 0) {
      std::istringstream fields(line.substr(5));
      std::string m, n;
      if (!(fields >> m >> n) || m.rfind("m=", 0) != 0 || n.rfind("n=", 0) != 0) {
        throw Error(ErrorKind::Format, where + ": expected 'hits m=<modulus> n=<count>'");
      }
      c.hits.push_back({parse_u64(m.substr(2), where), parse_u64(n.substr(2), where)});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::Format, where + ": expected key=value");
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key == "fingerprint") {
      c.fingerprint = value;
      have_fp = true;
    } else if (key == "next_k") {
      c.next_k = parse_u64(value, where);
      have_next = true;
    } else if (key == "completed") {
      if (!trim(value).empty()) {
        for (const auto& range : split(value, ',')) {
          const auto parts = split(range, '-');
          if (parts.size() != 2) throw Error(ErrorKind::Format, where + ": bad range '" + range + "'");
          c.completed.push_back({parse_u64(parts[0], where), parse_u64(parts[1], where)});
        }
      }
    } else if (key == "probes") {
      c.probes = parse_u64(value, where);
    } else if (key == "reorders") {
      c.reorders = parse_u64(value, where);
    } else if (key == "escapee_log") {
      c.escapee_log = value;
    } else {
      throw Error(ErrorKind::Format, where + ": unknown key '" + key + "'");
    }
  }
  if (!have_fp || !have_next) throw Error(ErrorKind::Format, "checkpoint lacks fingerprint or next_k");
  return c;
}

}  // namespace esc
