#include "esc/filter.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>

#include "esc/bradford.hpp"
#include "esc/fileio.hpp"
#include "esc/parallel.hpp"

namespace esc {

SolutionTriple CoverageCertificate::replay(const Natural& n) const {
  const ModClass cls(to_natural(residue), to_natural(modulus));
  if (!cls.contains(n)) throw Error(ErrorKind::ClassMismatch, n.get_str() + " is not in " + cls.to_string());
  switch (kind) {
    case Kind::IdentityHit:
    case Kind::GcdHit:
      return instantiate(*identity, n);
    case Kind::Refine: {
      const Natural lifted = n % to_natural(checked_mul(prime, modulus));
      const u64 i = to_u64((lifted - to_natural(residue)) / to_natural(modulus));
      return children.at(i).replay(n);
    }
  }
  throw Error(ErrorKind::InvalidArgument, "bad certificate node");
}

bool CoverageCertificate::well_formed() const {
  if (modulus < 1 || residue >= modulus) return false;
  switch (kind) {
    case Kind::IdentityHit:
      return identity && identity->kind() != IdentityKind::Gcd && identity->matches(residue, modulus);
    case Kind::GcdHit:
      return identity && identity->kind() == IdentityKind::Gcd && identity->matches(residue, modulus);
    case Kind::Refine: {
      if (prime < 2 || children.size() != prime) return false;
      const u64 lifted = prime * modulus;
      for (u64 i = 0; i < prime; ++i) {
        const auto& c = children[i];
        if (c.modulus != lifted || c.residue != residue + i * modulus || !c.well_formed()) return false;
      }
      return true;
    }
  }
  return false;
}

std::string CoverageCertificate::to_sexpr() const {
  if (kind != Kind::Refine) return "(" + identity->to_string() + ")";
  std::string out = "(REFINE " + std::to_string(prime);
  for (const auto& c : children) out += " " + c.to_sexpr();
  return out + ")";
}

std::size_t CoverageCertificate::node_count() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.node_count();
  return n;
}

namespace {

class SexprParser {
 public:
  explicit SexprParser(const std::string& text) : text_(text) {}

  CoverageCertificate parse(u64 residue, u64 modulus) {
    auto cert = node(residue, modulus);
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters");
    return cert;
  }

 private:
  CoverageCertificate node(u64 residue, u64 modulus) {
    expect('(');
    const std::string tag = word();
    CoverageCertificate c;
    c.residue = residue;
    c.modulus = modulus;
    if (tag == "REFINE") {
      c.kind = CoverageCertificate::Kind::Refine;
      c.prime = number();
      if (c.prime < 2) fail("refinement prime must be >= 2");
      const u64 lifted = checked_mul(c.prime, modulus);
      for (u64 i = 0; i < c.prime; ++i) c.children.push_back(node(residue + i * modulus, lifted));
    } else if (tag == "T1" || tag == "T2") {
      c.kind = CoverageCertificate::Kind::IdentityHit;
      const u64 p0 = number(), p1 = number(), p2 = number();
      c.identity = tag == "T1" ? Identity::t1(p0, p1, p2) : Identity::t2(p0, p1, p2);
    } else if (tag == "GCD") {
      c.kind = CoverageCertificate::Kind::GcdHit;
      const Natural g = big(), x = big(), y = big(), z = big();
      c.identity = Identity::gcd_rule({g, x, y, z});
    } else {
      fail("unknown node '" + tag + "'");
    }
    expect(')');
    return c;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  void expect(char ch) {
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != ch) fail(std::string("expected '") + ch + "'");
    ++pos_;
  }
  std::string word() {
    skip_space();
    const auto start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) && text_[pos_] != '(' &&
           text_[pos_] != ')') {
      ++pos_;
    }
    if (start == pos_) fail("expected token");
    return text_.substr(start, pos_ - start);
  }
  u64 number() { return parse_u64(word(), "certificate"); }
  Natural big() { return parse_natural(word()); }
  [[noreturn]] void fail(const std::string& what) {
    throw Error(ErrorKind::Format, "certificate at column " + std::to_string(pos_ + 1) + ": " + what);
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace

CoverageCertificate CoverageCertificate::parse_sexpr(const std::string& text, u64 residue, u64 modulus) {
  return SexprParser(text).parse(residue, modulus);
}

void CoverageConfig::validate() const {
  for (u64 p : primes) {
    if (p < 2 || !is_prime(p)) throw Error(ErrorKind::InvalidArgument, "refinement prime " + std::to_string(p) + " is not prime");
  }
  if (identity_bound < 1) throw Error(ErrorKind::InvalidArgument, "identity bound must be >= 1");
}

bool FilterSet::contains(u64 residue) const {
  return std::binary_search(members.begin(), members.end(), residue);
}

bool filter_accepts(const FilterSet& f, u64 n) { return f.contains(n % f.modulus); }

bool filter_accepts(const FilterSet& f, const Natural& n) {
  return f.contains(to_u64(n % to_natural(f.modulus)));
}

std::size_t CoverageEngine::MemoHash::operator()(const MemoKey& k) const noexcept {
  u64 h = k.residue * 0x9E3779B97F4A7C15ULL;
  h ^= k.modulus + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
  h ^= k.level + (h << 6) + (h >> 2);
  return static_cast<std::size_t>(h);
}

CoverageEngine::CoverageEngine(const IdentityDB& db, CoverageConfig cfg)
    : db_(db), cfg_(std::move(cfg)), memo_(std::make_unique<Shard[]>(kShards)) {
  cfg_.validate();
  max_level_ = static_cast<unsigned>(std::min<std::size_t>(cfg_.depth, cfg_.primes.size()));
}

std::optional<SolutionTriple> CoverageEngine::gcd_base(u64 g) const {
  if (g < 2) return std::nullopt;
  if (auto stored = db_.gcd_base(g)) return stored;
  if (g > kGcdBaseLimit) return std::nullopt;
  {
    std::shared_lock lock(base_mutex_);
    if (auto it = base_cache_.find(g); it != base_cache_.end()) return it->second;
  }
  auto base = direct_search(to_natural(g));
  if (base && !check_solution(*base)) base.reset();
  std::unique_lock lock(base_mutex_);
  return base_cache_.try_emplace(g, std::move(base)).first->second;
}

std::optional<u64> CoverageEngine::gcd_hit(u64 r, u64 m) const {
  const u64 g = std::gcd(r, m);
  if (g < 2) return std::nullopt;
  if (gcd_base(g)) return g;
  // any prime factor of g divides every member too
  const u64 least = factorize(g).front().prime;
  if (least != g && gcd_base(least)) return least;
  return std::nullopt;
}

const std::vector<u64>& CoverageEngine::useful_divisors(u64 m) const {
  {
    std::shared_lock lock(divisor_mutex_);
    if (auto it = divisor_cache_.find(m); it != divisor_cache_.end()) return *it->second;
  }
  auto useful = std::make_unique<std::vector<u64>>();
  if (m >= 2) {
    for (u64 d : divisors_from(factorize(m))) {
      if (!db_.lookup(d).empty()) useful->push_back(d);
    }
  }
  std::unique_lock lock(divisor_mutex_);
  return *divisor_cache_.try_emplace(m, std::move(useful)).first->second;
}

std::optional<Identity> CoverageEngine::identity_hit(u64 r, u64 m) const {
  for (u64 d : useful_divisors(m)) {
    const auto& table = db_.lookup(d);
    const u64 rd = r % d;
    auto it = std::lower_bound(table.begin(), table.end(), rd,
                               [](const IdentityEntry& e, u64 v) { return e.residue < v; });
    if (it != table.end() && it->residue == rd) return it->identity;
  }
  return std::nullopt;
}

bool CoverageEngine::covered_at(u64 r, u64 m, unsigned level) const {
  if (gcd_hit(r, m) || identity_hit(r, m)) return true;
  if (level >= max_level_) return false;

  const bool memoize = m <= cfg_.memo_modulus_cap;
  const MemoKey key{r, m, level};
  Shard& shard = memo_[MemoHash{}(key) % kShards];
  if (memoize) {
    std::shared_lock lock(shard.mutex);
    if (auto it = shard.verdicts.find(key); it != shard.verdicts.end()) return it->second;
  }
  const u64 q = cfg_.primes[level];
  const u64 lifted = checked_mul(q, m);
  bool all = true;
  for (u64 i = 0; i < q && all; ++i) all = covered_at(r + i * m, lifted, level + 1);
  if (memoize) {
    // concurrent writers store the same verdict
    std::unique_lock lock(shard.mutex);
    shard.verdicts.try_emplace(key, all);
  }
  return all;
}

std::optional<CoverageCertificate> CoverageEngine::certify_at(u64 r, u64 m, unsigned level) const {
  CoverageCertificate c;
  c.residue = r;
  c.modulus = m;
  if (auto id = identity_hit(r, m)) {
    c.kind = CoverageCertificate::Kind::IdentityHit;
    c.identity = *id;
    return c;
  }
  if (auto g = gcd_hit(r, m)) {
    c.kind = CoverageCertificate::Kind::GcdHit;
    c.identity = Identity::gcd_rule(*gcd_base(*g));
    return c;
  }
  if (!covered_at(r, m, level)) return std::nullopt;
  c.kind = CoverageCertificate::Kind::Refine;
  c.prime = cfg_.primes[level];
  const u64 lifted = checked_mul(c.prime, m);
  for (u64 i = 0; i < c.prime; ++i) c.children.push_back(*certify_at(r + i * m, lifted, level + 1));
  return c;
}

bool CoverageEngine::covered(u64 residue, u64 modulus) const {
  if (modulus < 2) throw Error(ErrorKind::InvalidArgument, "modulus must be >= 2");
  return covered_at(residue % modulus, modulus, 0);
}

std::optional<CoverageCertificate> CoverageEngine::is_covered(u64 residue, u64 modulus) const {
  if (modulus < 2) throw Error(ErrorKind::InvalidArgument, "modulus must be >= 2");
  return certify_at(residue % modulus, modulus, 0);
}

std::optional<CoverageCertificate> CoverageEngine::is_covered(const ModClass& c) const {
  return is_covered(to_u64(c.residue), to_u64(c.modulus));
}

FilterSet CoverageEngine::build_filter(u64 m, unsigned workers, bool keep_certificates) const {
  if (m < 2) throw Error(ErrorKind::InvalidArgument, "filter modulus must be >= 2");
  std::vector<char> hit(m, 0);
  parallel_for(m, workers, [&](std::size_t r) { hit[r] = covered_at(r, m, 0) ? 1 : 0; });
  FilterSet f;
  f.modulus = m;
  f.basis_bound = cfg_.identity_bound;
  f.basis_depth = cfg_.depth;
  for (u64 r = 0; r < m; ++r) {
    if (hit[r]) f.members.push_back(r);
  }
  if (keep_certificates) {
    std::vector<CoverageCertificate> certs(f.members.size());
    parallel_for(f.members.size(), workers, [&](std::size_t i) { certs[i] = *certify_at(f.members[i], m, 0); });
    for (std::size_t i = 0; i < certs.size(); ++i) f.certificates.emplace(f.members[i], std::move(certs[i]));
  }
  return f;
}

AuditReport audit_filter(const FilterSet& f, std::size_t samples_per_class, std::uint64_t seed,
                         const CoverageEngine* engine) {
  AuditReport report;
  report.modulus = f.modulus;
  if (samples_per_class == 0) return report;
  constexpr u64 kSampleCeiling = 1'000'000'000'000ULL;
  std::mt19937_64 rng(seed);
  for (u64 r : f.members) {
    AuditEntry entry{r, 0, 0, std::nullopt};
    std::optional<CoverageCertificate> cert;
    if (auto it = f.certificates.find(r); it != f.certificates.end()) {
      cert = it->second;
    } else if (engine) {
      cert = engine->is_covered(r, f.modulus);
    }
    const u64 k_min = r >= 2 ? 0 : 1;
    const u64 k_max = std::max(k_min, (kSampleCeiling - r) / f.modulus);
    std::uniform_int_distribution<u64> pick(k_min, k_max);
    for (std::size_t s = 0; s < samples_per_class; ++s) {
      const Natural n = to_natural(r) + to_natural(pick(rng)) * to_natural(f.modulus);
      ++entry.checks;
      bool ok = false;
      if (cert) {
        try {
          const SolutionTriple t = cert->replay(n);
          ok = t.n == n && check_solution(t);
        } catch (const Error&) {
          ok = false;
        }
      }
      if (!ok) {
        ++entry.failures;
        if (!entry.counterexample) entry.counterexample = n;
      }
    }
    report.checks += entry.checks;
    report.failures += entry.failures;
    report.classes.push_back(std::move(entry));
  }
  return report;
}

void write_filter_file(std::ostream& out, const FilterSet& f) {
  out << "FILTER m=" << f.modulus << " count=" << f.members.size() << " basis=" << f.basis_bound << ','
      << f.basis_depth << '\n';
  out << join(f.members, ',') << '\n';
}

namespace {

std::string header_value(const std::string& token, const std::string& key) {
  if (token.rfind(key + "=", 0) != 0) throw Error(ErrorKind::Format, "line 1: expected " + key + "=");
  return token.substr(key.size() + 1);
}

}  // namespace

FilterSet read_filter_file(std::istream& in) {
  std::string header, body;
  if (!std::getline(in, header)) throw Error(ErrorKind::Format, "line 1: missing FILTER header");
  std::istringstream fields(header);
  std::string tag, m, count, basis;
  if (!(fields >> tag >> m >> count >> basis) || tag != "FILTER") {
    throw Error(ErrorKind::Format, "line 1: expected 'FILTER m=<m> count=<k> basis=<B>,<D>'");
  }
  FilterSet f;
  f.modulus = parse_u64(header_value(m, "m"), "line 1");
  const u64 k = parse_u64(header_value(count, "count"), "line 1");
  const auto b = parse_u64_list(header_value(basis, "basis"), "line 1");
  if (b.size() != 2) throw Error(ErrorKind::Format, "line 1: basis needs <B>,<D>");
  f.basis_bound = b[0];
  f.basis_depth = static_cast<unsigned>(b[1]);
  if (f.modulus < 2) throw Error(ErrorKind::Format, "line 1: modulus must be >= 2");
  std::getline(in, body);
  f.members = parse_u64_list(body, "line 2");
  if (f.members.size() != k) throw Error(ErrorKind::Format, "line 2: count does not match header");
  for (std::size_t i = 0; i < f.members.size(); ++i) {
    if (f.members[i] >= f.modulus || (i && f.members[i] <= f.members[i - 1])) {
      throw Error(ErrorKind::Format, "line 2: members must be ascending residues below m");
    }
  }
  return f;
}

void write_certificate_file(std::ostream& out, const FilterSet& f) {
  for (const auto& [r, cert] : f.certificates) out << r << ": " << cert.to_sexpr() << '\n';
}

void read_certificate_file(std::istream& in, FilterSet& f) {
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(no);
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw Error(ErrorKind::Format, where + ": expected '<residue>: <tree>'");
    const u64 r = parse_u64(trim(line.substr(0, colon)), where);
    if (!f.contains(r)) throw Error(ErrorKind::Format, where + ": residue " + std::to_string(r) + " is not a member");
    CoverageCertificate cert;
    try {
      cert = CoverageCertificate::parse_sexpr(line.substr(colon + 1), r, f.modulus);
    } catch (const Error& e) {
      throw Error(ErrorKind::Format, where + ": " + e.what());
    }
    if (!cert.well_formed()) throw Error(ErrorKind::Format, where + ": certificate does not cover its class");
    f.certificates.insert_or_assign(r, std::move(cert));
  }
}

}  // namespace esc
