#include "esc/identity.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

namespace esc {

std::string SolutionTriple::to_string() const {
  return x.get_str() + " " + y.get_str() + " " + z.get_str();
}

bool check_solution(const SolutionTriple& t) {
  if (t.n < 1 || t.x < 1 || t.y < 1 || t.z < 1) return false;
  const Natural lhs = 4 * t.x * t.y * t.z;
  const Natural rhs = t.n * (t.x * t.y + t.y * t.z + t.z * t.x);
  return lhs == rhs;
}

ModClass t1_class(u64 u, u64 v, u64 w) {
  if (u == 0 || v == 0 || w == 0) throw Error(ErrorKind::InvalidArgument, "T1 parameters must be positive");
  const u64 m = checked_mul(4, checked_mul(checked_mul(u, v), w)) - 1;
  // u divides m + 1, so it is invertible mod m
  const u64 rho = (m - mul_mod(v % m, mod_inverse(u % m, m), m)) % m;
  return ModClass(to_natural(rho), to_natural(m));
}

ModClass t2_class(u64 u, u64 v, u64 a) {
  if (u == 0 || v == 0 || a == 0) throw Error(ErrorKind::InvalidArgument, "T2 parameters must be positive");
  if ((u + v) % a != 0) {
    throw Error(ErrorKind::NotADivisor, std::to_string(a) + " does not divide " + std::to_string(u + v));
  }
  const u64 m = checked_mul(4, checked_mul(u, v));
  return ModClass(to_natural((m - a % m) % m), to_natural(m));
}

Identity Identity::t1(u64 u, u64 v, u64 w) {
  const ModClass c = t1_class(u, v, w);
  Identity id;
  id.kind_ = IdentityKind::T1;
  id.params_ = {u, v, w};
  id.modulus_ = to_u64(c.modulus);
  id.residue_ = to_u64(c.residue);
  return id;
}

Identity Identity::t2(u64 u, u64 v, u64 a) {
  const ModClass c = t2_class(u, v, a);
  Identity id;
  id.kind_ = IdentityKind::T2;
  id.params_ = {u, v, a};
  id.modulus_ = to_u64(c.modulus);
  id.residue_ = to_u64(c.residue);
  return id;
}

Identity Identity::gcd_rule(SolutionTriple base) {
  if (base.n < 2 || !fits_u64(base.n) || !check_solution(base)) {
    throw Error(ErrorKind::InvalidArgument, "GcdRule base is not a valid solution: n=" + base.n.get_str());
  }
  Identity id;
  id.kind_ = IdentityKind::Gcd;
  const u64 g = to_u64(base.n);
  id.params_ = {g, 0, 0};
  id.modulus_ = g;
  id.residue_ = 0;
  id.base_ = std::move(base);
  return id;
}

bool Identity::matches(u64 residue, u64 modulus) const {
  return modulus % modulus_ == 0 && residue % modulus_ == residue_;
}

std::string Identity::to_string() const {
  std::ostringstream out;
  switch (kind_) {
    case IdentityKind::T1:
      out << "T1 " << params_[0] << ' ' << params_[1] << ' ' << params_[2];
      break;
    case IdentityKind::T2:
      out << "T2 " << params_[0] << ' ' << params_[1] << ' ' << params_[2];
      break;
    case IdentityKind::Gcd:
      out << "GCD " << params_[0] << ' ' << base_.to_string();
      break;
  }
  return out.str();
}

SolutionTriple instantiate(const Identity& id, const Natural& n) {
  if (n < 2) throw Error(ErrorKind::ClassMismatch, "n must be >= 2");
  const Natural m = to_natural(id.modulus());
  const ModClass cls(to_natural(id.residue()), m);
  if (!cls.contains(n)) {
    throw Error(ErrorKind::ClassMismatch, n.get_str() + " is not in " + id.to_string() + " (" + cls.to_string() + ")");
  }
  const auto& [p0, p1, p2] = id.params();
  const Natural a0 = to_natural(p0), a1 = to_natural(p1), a2 = to_natural(p2);
  switch (id.kind()) {
    case IdentityKind::T1: {
      const Natural& u = a0;
      const Natural& v = a1;
      const Natural& w = a2;
      const Natural q = (n * u + v) / m;
      return {n, n * u * w * q, v * w * q, n * u * v * w};
    }
    case IdentityKind::T2: {
      const Natural& u = a0;
      const Natural& v = a1;
      const Natural& a = a2;
      const Natural t = (n + a) / m;
      const Natural s = (u + v) / a;
      return {n, u * v * t, n * u * t * s, n * v * t * s};
    }
    case IdentityKind::Gcd: {
      const Natural k = n / a0;
      const SolutionTriple& b = id.base();
      return {n, k * b.x, k * b.y, k * b.z};
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown identity kind");
}

IdentityDB::IdentityDB(u64 bound) : bound_(bound), generated_(true) {
  if (bound < 1) throw Error(ErrorKind::InvalidArgument, "identity bound must be >= 1");
}

IdentityDB::IdentityDB(IdentityDB&& other) noexcept
    : bound_(other.bound_),
      generated_(other.generated_),
      tables_(std::move(other.tables_)),
      gcd_rules_(std::move(other.gcd_rules_)) {}

IdentityDB& IdentityDB::operator=(IdentityDB&& other) noexcept {
  if (this != &other) {
    bound_ = other.bound_;
    generated_ = other.generated_;
    tables_ = std::move(other.tables_);
    gcd_rules_ = std::move(other.gcd_rules_);
  }
  return *this;
}

namespace {

const IdentityDB::Table& empty_table() {
  static const IdentityDB::Table empty;
  return empty;
}

// All identities of exactly this modulus within the bound, least parameters
// per residue. Divisors are visited ascending so the first hit is the least.
IdentityDB::Table generate_table(u64 modulus, u64 bound) {
  std::map<u64, Identity> by_residue;
  if (modulus % 4 == 3 && (modulus + 1) / 4 <= bound) {
    const u64 uvw = (modulus + 1) / 4;
    const auto divs = uvw == 1 ? std::vector<u64>{1} : divisors_from(factorize(uvw));
    for (u64 u : divs) {
      const u64 vw = uvw / u;
      for (u64 v : divs) {
        if (v > vw) break;
        if (vw % v != 0) continue;
        const Identity id = Identity::t1(u, v, vw / v);
        by_residue.try_emplace(id.residue(), id);
      }
    }
  } else if (modulus % 4 == 0 && modulus / 4 >= 1 && modulus / 4 <= bound) {
    const u64 uv = modulus / 4;
    const auto divs = uv == 1 ? std::vector<u64>{1} : divisors_from(factorize(uv));
    for (u64 u : divs) {
      const u64 v = uv / u;
      const auto adivs = divisors_from(factorize(u + v));
      for (u64 a : adivs) {
        const Identity id = Identity::t2(u, v, a);
        by_residue.try_emplace(id.residue(), id);
      }
    }
  }
  IdentityDB::Table table;
  table.reserve(by_residue.size());
  for (auto& [r, id] : by_residue) table.push_back({r, id});
  return table;
}

}  // namespace

const IdentityDB::Table& IdentityDB::generate(u64 modulus) const {
  {
    std::shared_lock lock(mutex_);
    if (auto it = tables_.find(modulus); it != tables_.end()) return *it->second;
  }
  auto table = std::make_unique<Table>(generate_table(modulus, bound_));
  std::unique_lock lock(mutex_);
  // a concurrent generator may have won; both computed the same table
  auto [it, inserted] = tables_.try_emplace(modulus, std::move(table));
  return *it->second;
}

const IdentityDB::Table& IdentityDB::lookup(u64 modulus) const {
  if (generated_) {
    if (modulus < 3 || modulus > 4 * bound_) return empty_table();
    return generate(modulus);
  }
  std::shared_lock lock(mutex_);
  if (auto it = tables_.find(modulus); it != tables_.end()) return *it->second;
  return empty_table();
}

void IdentityDB::insert(const Identity& id) {
  if (id.kind() == IdentityKind::Gcd) {
    auto [it, inserted] = gcd_rules_.try_emplace(id.modulus(), id);
    if (!inserted && id < it->second) it->second = id;
    return;
  }
  std::unique_lock lock(mutex_);
  auto& slot = tables_[id.modulus()];
  if (!slot) slot = std::make_unique<Table>();
  auto pos = std::lower_bound(slot->begin(), slot->end(), id.residue(),
                              [](const IdentityEntry& e, u64 r) { return e.residue < r; });
  if (pos != slot->end() && pos->residue == id.residue()) {
    if (id < pos->identity) pos->identity = id;
    return;
  }
  slot->insert(pos, {id.residue(), id});
}

std::optional<SolutionTriple> IdentityDB::gcd_base(u64 g) const {
  if (auto it = gcd_rules_.find(g); it != gcd_rules_.end()) return it->second.base();
  return std::nullopt;
}

std::vector<Identity> IdentityDB::entries() const {
  std::vector<Identity> out;
  if (generated_) {
    for (u64 m = 3; m <= 4 * bound_; ++m) {
      for (const auto& e : lookup(m)) out.push_back(e.identity);
    }
  } else {
    std::shared_lock lock(mutex_);
    std::vector<u64> moduli;
    for (const auto& [m, t] : tables_) moduli.push_back(m);
    std::sort(moduli.begin(), moduli.end());
    for (u64 m : moduli) {
      for (const auto& e : *tables_.at(m)) out.push_back(e.identity);
    }
  }
  for (const auto& [g, id] : gcd_rules_) out.push_back(id);
  return out;
}

std::size_t IdentityDB::size() const {
  if (generated_) return entries().size();
  std::shared_lock lock(mutex_);
  std::size_t n = gcd_rules_.size();
  for (const auto& [m, t] : tables_) n += t->size();
  return n;
}

IdentityDB enumerate_db(u64 bound) {
  if (bound < 1) throw Error(ErrorKind::InvalidArgument, "identity bound must be >= 1");
  IdentityDB db;
  for (u64 m = 3; m <= 4 * bound; ++m) {
    for (const auto& e : generate_table(m, bound)) db.insert(e.identity);
  }
  return db;
}

void write_identity_file(std::ostream& out, const IdentityDB& db) {
  if (db.bound() > 0) out << "# identities bound=" << db.bound() << '\n';
  out << "# record modulus residue\n";
  for (const Identity& id : db.entries()) {
    out << id.to_string() << '\n';
  }
}

namespace {

u64 parse_u64_field(const std::string& token, std::size_t line) {
  try {
    return to_u64(parse_natural(token));
  } catch (const Error&) {
    throw Error(ErrorKind::Format, "line " + std::to_string(line) + ": bad number '" + token + "'");
  }
}

// instantiation on three class members must produce valid triples
void sample_check(const Identity& id, std::size_t line) {
  const Natural m = to_natural(id.modulus());
  Natural n = to_natural(id.residue());
  if (n < 2) n += m;
  for (int i = 0; i < 3; ++i, n += m) {
    if (!check_solution(instantiate(id, n))) {
      throw Error(ErrorKind::Format, "line " + std::to_string(line) + ": " + id.to_string() +
                                         " fails on n=" + n.get_str());
    }
  }
}

}  // namespace

IdentityDB read_identity_file(std::istream& in) {
  IdentityDB db;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream fields(raw);
    std::string tag;
    if (!(fields >> tag)) continue;
    std::vector<std::string> tokens;
    for (std::string t; fields >> t;) tokens.push_back(t);
    const std::string where = "line " + std::to_string(line) + ": ";
    try {
      if (tag == "T1" || tag == "T2") {
        if (tokens.size() != 3) throw Error(ErrorKind::Format, where + tag + " expects 3 parameters");
        const u64 p0 = parse_u64_field(tokens[0], line);
        const u64 p1 = parse_u64_field(tokens[1], line);
        const u64 p2 = parse_u64_field(tokens[2], line);
        const Identity id = tag == "T1" ? Identity::t1(p0, p1, p2) : Identity::t2(p0, p1, p2);
        if (id.residue() == 1) throw Error(ErrorKind::Format, where + "identity covers residue 1");
        sample_check(id, line);
        db.insert(id);
      } else if (tag == "GCD") {
        if (tokens.size() != 4) throw Error(ErrorKind::Format, where + "GCD expects g x0 y0 z0");
        SolutionTriple base{parse_natural(tokens[0]), parse_natural(tokens[1]), parse_natural(tokens[2]),
                            parse_natural(tokens[3])};
        db.insert(Identity::gcd_rule(std::move(base)));
      } else {
        throw Error(ErrorKind::Format, where + "unknown record '" + tag + "'");
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Format) throw;
      throw Error(ErrorKind::Format, where + e.what());
    }
  }
  return db;
}

}  // namespace esc
