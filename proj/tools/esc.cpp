// Command-line front end: identities, filters, residue systems, verification
// runs and solution counts.
//
// Exit codes: 0 success, 1 usage, 2 I/O or malformed input, 3 counterexample
// or failed audit.
#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "esc/arith.hpp"
#include "esc/bradford.hpp"
#include "esc/fileio.hpp"
#include "esc/filter.hpp"
#include "esc/identity.hpp"
#include "esc/residue.hpp"
#include "esc/verify.hpp"

namespace fs = std::filesystem;
using namespace esc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitCounterexample = 3;

struct Settings {
  u64 bound = 1u << 20;
  unsigned depth = 5;
  std::string primes = "2,2,2,3,5,7,11,13";
  unsigned workers = 1;
  std::string db_path;
  std::string out;
  std::string in;

  u64 modulus = 0;
  std::string certificates;
  std::size_t audit = 0;
  u64 seed = 1;

  std::string moduli = "8,3,5,7";

  std::string system;
  std::string bank_dir;
  std::string limit = "1000000";
  std::string checkpoint;
  std::string report;
  u64 reorder_interval = 100;
  u64 max_batches = 0;
  u64 start_k = 0;

  u64 bank_count = 500;
  u64 bank_after = 13;

  u64 count_limit = 0;
  u64 count_n = 0;
  bool per_x = false;

  std::string solve_n;
};

CoverageConfig coverage_config(const Settings& s) {
  CoverageConfig cfg;
  cfg.primes = parse_u64_list(s.primes, "--primes");
  cfg.depth = s.depth;
  cfg.identity_bound = s.bound;
  return cfg;
}

IdentityDB load_db(const Settings& s) {
  if (s.db_path.empty()) return IdentityDB(s.bound);
  std::istringstream in(read_file(s.db_path));
  return read_identity_file(in);
}

std::vector<FilterSet> load_bank_dir(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".filter") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<FilterSet> bank;
  for (const auto& p : files) {
    std::istringstream in(read_file(p));
    try {
      bank.push_back(read_filter_file(in));
    } catch (const Error& e) {
      throw Error(ErrorKind::Format, p.string() + ": " + e.what());
    }
  }
  if (bank.empty()) throw Error(ErrorKind::Io, "no .filter files in " + dir);
  std::stable_sort(bank.begin(), bank.end(), [](const FilterSet& a, const FilterSet& b) { return a.modulus < b.modulus; });
  return bank;
}

std::string filter_file_name(u64 m) {
  std::string digits = std::to_string(m);
  return "S" + std::string(digits.size() < 10 ? 10 - digits.size() : 0, '0') + digits + ".filter";
}

void require(bool ok, const std::string& what) {
  if (!ok) throw CLI::ValidationError(what);
}

int cmd_identities(const Settings& s) {
  require(!s.out.empty(), "--out is required");
  const IdentityDB db = enumerate_db(s.bound);
  atomic_write(s.out, [&](std::ostream& out) { write_identity_file(out, db); });
  std::cerr << "wrote " << db.size() << " identities (bound " << s.bound << ") to " << s.out << '\n';
  return kExitOk;
}

int cmd_filter(const Settings& s) {
  require(s.modulus >= 2, "--modulus must be >= 2");
  require(!s.out.empty(), "--out is required");
  const IdentityDB db = load_db(s);
  const CoverageEngine engine(db, coverage_config(s));
  const bool keep = !s.certificates.empty() || s.audit > 0;
  const FilterSet f = engine.build_filter(s.modulus, s.workers, keep);
  atomic_write(s.out, [&](std::ostream& out) { write_filter_file(out, f); });
  if (!s.certificates.empty()) {
    atomic_write(s.certificates, [&](std::ostream& out) { write_certificate_file(out, f); });
  }
  std::cout << "S_" << f.modulus << " = {" << join(f.members, ',') << "} (" << f.members.size() << " of " << f.modulus
            << ")\n";
  if (s.audit > 0) {
    const AuditReport a = audit_filter(f, s.audit, s.seed, &engine);
    std::cout << "audit: " << a.checks << " checks, " << a.failures << " failures\n";
    if (!a.ok()) return kExitCounterexample;
  }
  return kExitOk;
}

int cmd_bank(const Settings& s) {
  require(!s.out.empty(), "--out is required (directory)");
  const IdentityDB db = load_db(s);
  const CoverageEngine engine(db, coverage_config(s));
  fs::create_directories(s.out);
  u64 made = 0;
  for (u64 q = s.bank_after + 1; made < s.bank_count; ++q) {
    if (!is_prime(q)) continue;
    const FilterSet f = engine.build_filter(q, s.workers, false);
    atomic_write(fs::path(s.out) / filter_file_name(q), [&](std::ostream& out) { write_filter_file(out, f); });
    ++made;
  }
  std::cerr << "wrote " << made << " prime filters to " << s.out << '\n';
  return kExitOk;
}

int cmd_residues(const Settings& s) {
  require(!s.out.empty(), "--out is required");
  const auto moduli = parse_u64_list(s.moduli, "--moduli");
  require(!moduli.empty(), "--moduli must list at least one modulus");
  const IdentityDB db = load_db(s);
  const CoverageEngine engine(db, coverage_config(s));
  std::vector<FilterSet> filters;
  for (u64 m : moduli) {
    require(m >= 2, "moduli must be >= 2");
    filters.push_back(engine.build_filter(m, s.workers, false));
  }
  const ResidueSystem sys = build_system(filters, db, s.workers);
  atomic_write(s.out, [&](std::ostream& out) { write_system_file(out, sys); });
  std::cout << "G=" << sys.G << " |R|=" << sys.residues.size();
  if (!sys.residues.empty()) std::cout << " efficiency=" << efficiency_decimal(sys);
  std::cout << '\n';
  return kExitOk;
}

int cmd_verify(const Settings& s) {
  require(!s.system.empty(), "--system is required");
  require(!s.bank_dir.empty(), "--bank-dir is required");
  std::istringstream sys_in(read_file(s.system));
  const ResidueSystem sys = read_system_file(sys_in);
  const IdentityDB db = load_db(s);
  FilterBank bank = FilterBank::from(load_bank_dir(s.bank_dir), s.reorder_interval);

  VerifyOptions opts;
  opts.limit = parse_natural(s.limit);
  require(opts.limit >= 1, "--limit must be >= 1");
  opts.workers = s.workers;
  opts.start_k = s.start_k;
  if (!s.checkpoint.empty()) opts.checkpoint = s.checkpoint;
  if (s.max_batches > 0) opts.max_batches = s.max_batches;
  const u64 k_max = k_range_for_limit(sys, opts.limit);
  opts.progress = [&](const VerifyReport& r) {
    std::cerr << "batches " << r.first_k << ".." << (r.next_k ? r.next_k - 1 : 0) << " of " << k_max
              << ": checked=" << r.checked << " escapees=" << r.escapees.size()
              << " prime_escapees=" << r.prime_escapees().size() << '\n';
  };
  std::cerr << "verifying k=" << s.start_k << ".." << k_max << " over G=" << sys.G << " |R|=" << sys.residues.size()
            << " with " << bank.filters.size() << " filters\n";
  const VerifyReport r = run_verification(sys, std::move(bank), db, opts);
  if (!s.report.empty()) {
    atomic_write(s.report, [&](std::ostream& out) { write_verify_report(out, r); });
  }
  std::cout << "checked=" << r.checked << " filtered=" << r.filtered << " escapees=" << r.escapees.size()
            << " prime_escapees=" << r.prime_escapees().size() << " anomalies=" << r.anomalies().size()
            << " counterexamples=" << r.counterexamples().size() << '\n';
  for (const auto& e : r.counterexamples()) std::cout << "COUNTEREXAMPLE n=" << e.n << " k=" << e.k << '\n';
  return r.ok() ? kExitOk : kExitCounterexample;
}

int cmd_count(const Settings& s) {
  require((s.count_limit > 0) != (s.count_n > 0), "give exactly one of --limit and --count");
  require(!s.out.empty(), "--out is required");
  const std::vector<u64> primes = s.count_limit > 0 ? difficult_primes(s.count_limit) : first_difficult_primes(s.count_n);
  std::vector<CountResult> results;
  if (s.per_x) {
    const std::string per_x_path = s.out + ".perx.csv";
    atomic_write(per_x_path, [&](std::ostream& out) {
      out << "p,x,d,type,y,z\n";
      for (u64 p : primes) {
        results.push_back(count_solutions(p, [&](const CandidateRow& row) {
          out << row.p << ',' << row.x << ',' << row.d << ',' << (row.type == SolutionType::Type1 ? 1 : 2) << ','
              << row.y << ',' << row.z << '\n';
        }));
      }
    });
  } else {
    results = count_many(primes, s.workers);
  }
  atomic_write(s.out, [&](std::ostream& out) { write_count_table(out, results); });
  const AggregateStats a = aggregate(results);
  std::cout << "N=" << a.N << " T=" << a.T << " S=" << a.S << " S1=" << a.S1 << " S2=" << a.S2
            << " overlap=" << a.overlap << '\n';
  const auto zero = std::find_if(results.begin(), results.end(), [](const CountResult& r) { return r.f == 0; });
  if (zero != results.end()) {
    std::cout << "COUNTEREXAMPLE p=" << zero->p << " has f(p)=0\n";
    return kExitCounterexample;
  }
  return kExitOk;
}

int cmd_solve(const Settings& s) {
  const Natural n = parse_natural(s.solve_n);
  const auto t = direct_search(n);
  if (!t) {
    std::cout << "no solution for n=" << n << '\n';
    return kExitCounterexample;
  }
  const bool ok = check_solution(*t);
  std::cout << t->x << ' ' << t->y << ' ' << t->z << '\n';
  std::cerr << "4/" << n << " = 1/" << t->x << " + 1/" << t->y << " + 1/" << t->z << (ok ? " (checked)" : " (FAILED)")
            << '\n';
  return ok ? kExitOk : kExitCounterexample;
}

std::vector<CountResult> read_counts(const std::string& path) {
  std::istringstream in(read_file(path));
  return read_count_table(in);
}

int cmd_plotdata(const Settings& s) {
  require(!s.in.empty() && !s.out.empty(), "--in and --out are required");
  const auto results = read_counts(s.in);
  atomic_write(s.out, [&](std::ostream& out) { write_plot_data(out, results); });
  return kExitOk;
}

int cmd_stats(const Settings& s) {
  require(!s.in.empty(), "--in is required");
  const auto results = read_counts(s.in);
  const AggregateStats a = aggregate(results);
  std::cout << "N=" << a.N << "\nT=" << a.T << "\nS=" << a.S << "\nS1=" << a.S1 << "\nS2=" << a.S2
            << "\noverlap=" << a.overlap << '\n';
  return kExitOk;
}

// Flat key=value file; keys are long option names without the dashes.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::map<std::string, std::string> out;
  std::istringstream in(read_file(path));
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::Format, path + " line " + std::to_string(no) + ": expected key=value");
    out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return out;
}

// Config values go in front of the subcommand's own arguments, so flags given
// on the command line override them.
std::vector<std::string> merge_config(const std::vector<std::string>& args, CLI::App& app) {
  auto it = std::find(args.begin(), args.end(), "--config");
  if (it == args.end() || it + 1 == args.end()) return args;
  const auto config = read_config(*(it + 1));
  std::vector<std::string> rest(args.begin(), it);
  rest.insert(rest.end(), it + 2, args.end());
  if (rest.size() < 2) return rest;
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(rest[1]);
  } catch (const CLI::OptionNotFound&) {
    return rest;
  }
  std::vector<std::string> merged{rest[0], rest[1]};
  for (const auto& [key, value] : config) {
    if (std::find(rest.begin() + 2, rest.end(), "--" + key) != rest.end()) continue;
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (!opt) throw Error(ErrorKind::Format, "config key '" + key + "' is not an option of " + rest[1]);
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1") merged.push_back("--" + key);
    } else {
      merged.push_back("--" + key);
      merged.push_back(value);
    }
  }
  merged.insert(merged.end(), rest.begin() + 2, rest.end());
  return merged;
}

}  // namespace

int main(int argc, char** argv) {
  Settings s;
  CLI::App app{"Erdos-Straus verification and solution counting toolkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  std::string config_path;
  app.add_option("--config", config_path, "key=value file; command-line flags take precedence");

  auto add_basis = [&](CLI::App* sub) {
    sub->add_option("--bound", s.bound, "identity bound B (T1: uvw <= B, T2: uv <= B)")->capture_default_str();
    sub->add_option("--depth", s.depth, "refinement depth D")->capture_default_str();
    sub->add_option("--primes", s.primes, "refinement prime sequence")->capture_default_str();
    sub->add_option("--db", s.db_path, "identity file (default: generated from --bound)");
    sub->add_option("--workers", s.workers, "worker threads")->capture_default_str();
  };

  auto* identities = app.add_subcommand("identities", "write the identity database for a bound");
  identities->add_option("--bound", s.bound, "identity bound B")->required();
  identities->add_option("--out", s.out, "output file")->required();

  auto* filter = app.add_subcommand("filter", "compute the modular filter S_m");
  filter->add_option("--modulus", s.modulus, "filter modulus m")->required();
  filter->add_option("--out", s.out, "filter file")->required();
  filter->add_option("--certificates", s.certificates, "certificate sidecar file");
  filter->add_option("--audit", s.audit, "replay certificates on this many random members per class");
  filter->add_option("--seed", s.seed, "audit RNG seed")->capture_default_str();
  add_basis(filter);

  auto* bank = app.add_subcommand("bank", "write prime filters for a verification bank");
  bank->add_option("--count", s.bank_count, "number of prime filters")->capture_default_str();
  bank->add_option("--after", s.bank_after, "first prime is the one following this value")->capture_default_str();
  bank->add_option("--out", s.out, "output directory")->required();
  add_basis(bank);

  auto* residues = app.add_subcommand("residues", "combine filters into a residue system");
  residues->add_option("--moduli", s.moduli, "pairwise coprime moduli, comma separated")->required();
  residues->add_option("--out", s.out, "system file")->required();
  add_basis(residues);

  auto* verify = app.add_subcommand("verify", "verify batches of a residue system against a filter bank");
  verify->add_option("--system", s.system, "system file")->required();
  verify->add_option("--bank-dir", s.bank_dir, "directory of .filter files")->required();
  verify->add_option("--limit", s.limit, "verify every batch holding some n <= limit")->capture_default_str();
  verify->add_option("--checkpoint", s.checkpoint, "checkpoint file (resumed when present)");
  verify->add_option("--report", s.report, "write the full report here");
  verify->add_option("--reorder-interval", s.reorder_interval, "batches between filter re-sorts, 0 = never")
      ->capture_default_str();
  verify->add_option("--max-batches", s.max_batches, "stop after this many batches (0 = no cap)");
  verify->add_option("--start-k", s.start_k, "first batch index");
  add_basis(verify);

  auto* count = app.add_subcommand("count", "evaluate f(p) over difficult primes");
  count->add_option("--limit", s.count_limit, "all difficult primes up to this bound");
  count->add_option("--count", s.count_n, "the first N difficult primes");
  count->add_option("--out", s.out, "count table CSV")->required();
  count->add_flag("--per-x", s.per_x, "also write <out>.perx.csv with p,x,d,type,y,z rows");
  count->add_option("--workers", s.workers, "worker threads")->capture_default_str();

  auto* solve = app.add_subcommand("solve", "find one decomposition of 4/n");
  solve->add_option("--n", s.solve_n, "n >= 1")->required();

  auto* plotdata = app.add_subcommand("plotdata", "turn a count table into i,p,f1,f2,f plot data");
  plotdata->add_option("--in", s.in, "count table")->required();
  plotdata->add_option("--out", s.out, "plot CSV")->required();

  auto* stats = app.add_subcommand("stats", "aggregate N, T, S, S1, S2 of a count table");
  stats->add_option("--in", s.in, "count table")->required();

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = merge_config(args, app);
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }

  try {
    if (*identities) return cmd_identities(s);
    if (*filter) return cmd_filter(s);
    if (*bank) return cmd_bank(s);
    if (*residues) return cmd_residues(s);
    if (*verify) return cmd_verify(s);
    if (*count) return cmd_count(s);
    if (*solve) return cmd_solve(s);
    if (*plotdata) return cmd_plotdata(s);
    if (*stats) return cmd_stats(s);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::DomainError) return kExitUsage;
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}
