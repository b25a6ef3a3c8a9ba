#include "esc/residue.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "esc/fileio.hpp"
#include "esc/parallel.hpp"

namespace esc {

namespace {

std::vector<u64> non_members(const FilterSet& f) {
  std::vector<u64> out;
  std::size_t j = 0;
  for (u64 r = 0; r < f.modulus; ++r) {
    if (j < f.members.size() && f.members[j] == r) {
      ++j;
    } else {
      out.push_back(r);
    }
  }
  return out;
}

void check_coprime(std::span<const FilterSet> filters) {
  for (std::size_t i = 0; i < filters.size(); ++i) {
    for (std::size_t j = i + 1; j < filters.size(); ++j) {
      if (std::gcd(filters[i].modulus, filters[j].modulus) != 1) {
        throw Error(ErrorKind::ModuliNotCoprime,
                    std::to_string(filters[i].modulus) + " and " + std::to_string(filters[j].modulus));
      }
    }
  }
}

}  // namespace

std::vector<Identity> dividing_identities(std::span<const FilterSet> filters, const IdentityDB& db, u64 G) {
  std::vector<std::vector<u64>> open;
  for (const auto& f : filters) open.push_back(non_members(f));
  std::vector<Identity> out;
  if (G < 2) return out;
  for (u64 d : divisors_from(factorize(G))) {
    for (const auto& e : db.lookup(d)) {
      // the class must reduce to an open residue of every filter
      bool reachable = true;
      for (std::size_t i = 0; i < filters.size() && reachable; ++i) {
        const u64 g = std::gcd(d, filters[i].modulus);
        reachable = std::any_of(open[i].begin(), open[i].end(), [&](u64 s) { return s % g == e.residue % g; });
      }
      if (reachable) out.push_back(e.identity);
    }
  }
  return out;
}

std::vector<u64> cross_filter(std::vector<u64> residues, std::span<const Identity> identities, unsigned workers) {
  std::map<u64, std::vector<u64>> by_modulus;
  for (const auto& id : identities) by_modulus[id.modulus()].push_back(id.residue());
  for (auto& [m, rs] : by_modulus) std::sort(rs.begin(), rs.end());

  std::vector<char> keep(residues.size(), 1);
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (residues.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, workers, [&](std::size_t c) {
    const std::size_t end = std::min(residues.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      for (const auto& [m, rs] : by_modulus) {
        if (std::binary_search(rs.begin(), rs.end(), residues[i] % m)) {
          keep[i] = 0;
          break;
        }
      }
    }
  });
  std::vector<u64> out;
  for (std::size_t i = 0; i < residues.size(); ++i) {
    if (keep[i]) out.push_back(residues[i]);
  }
  return out;
}

ResidueSystem build_system(std::span<const FilterSet> filters, const IdentityDB& db, unsigned workers) {
  check_coprime(filters);
  ResidueSystem sys;
  std::vector<u64> current{0};
  for (const auto& f : filters) {
    const u64 m = f.modulus;
    const u64 M = sys.G;
    const u64 lifted = checked_mul(M, m);
    const auto open = non_members(f);
    std::vector<u64> next;
    next.reserve(current.size() * open.size());
    const u64 inv = m == 1 || M == 1 ? 0 : mod_inverse(M % m, m);
    for (u64 r : current) {
      for (u64 s : open) {
        // x = r + M * ((s - r) * M^-1 mod m)
        const u64 t = M == 1 ? s : mul_mod((s + m - r % m) % m, inv, m);
        next.push_back(r + M * t);
      }
    }
    current = std::move(next);
    sys.G = lifted;
    sys.moduli.push_back(m);
  }
  std::sort(current.begin(), current.end());
  const auto identities = dividing_identities(filters, db, sys.G);
  sys.residues = cross_filter(std::move(current), identities, workers);
  sys.basis = db.generated() ? "bound=" + std::to_string(db.bound()) : "explicit";
  return sys;
}

Batch batch(const ResidueSystem& sys, u64 k) {
  Batch b;
  b.k = k;
  const u64 offset = checked_mul(k, sys.G);
  b.members.reserve(sys.residues.size());
  for (u64 r : sys.residues) {
    u64 n;
    if (__builtin_add_overflow(offset, r, &n)) {
      throw Error(ErrorKind::TooLarge, "batch " + std::to_string(k) + " exceeds 64 bits");
    }
    b.members.push_back(n);
  }
  return b;
}

u64 k_range_for_limit(const ResidueSystem& sys, const Natural& limit) {
  if (limit < 1) throw Error(ErrorKind::InvalidArgument, "limit must be >= 1");
  return to_u64((limit - 1) / to_natural(sys.G));
}

mpq_class efficiency(const ResidueSystem& sys) {
  if (sys.residues.empty()) throw Error(ErrorKind::DomainError, "empty residue system");
  mpq_class q(to_natural(sys.G), to_natural(sys.residues.size()));
  q.canonicalize();
  return q;
}

std::string efficiency_decimal(const ResidueSystem& sys, int digits) {
  const mpq_class q = efficiency(sys);
  Natural scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  // round half up at the requested digit
  const Natural scaled = (q.get_num() * scale * 2 + q.get_den()) / (q.get_den() * 2);
  std::string s = scaled.get_str();
  if (digits == 0) return s;
  if (s.size() <= static_cast<std::size_t>(digits)) s.insert(0, digits - s.size() + 1, '0');
  s.insert(s.size() - digits, ".");
  return s;
}

void write_system_file(std::ostream& out, const ResidueSystem& sys) {
  out << "G=" << sys.G << '\n';
  out << "moduli=" << join(sys.moduli, ',') << '\n';
  out << "count=" << sys.residues.size() << '\n';
  for (u64 r : sys.residues) out << r << '\n';
}

namespace {

std::string keyed_line(std::istream& in, const std::string& key, std::size_t line_no) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(key + "=", 0) != 0) {
    throw Error(ErrorKind::Format, "line " + std::to_string(line_no) + ": expected " + key + "=");
  }
  return line.substr(key.size() + 1);
}

}  // namespace

ResidueSystem read_system_file(std::istream& in) {
  ResidueSystem sys;
  sys.G = parse_u64(keyed_line(in, "G", 1), "line 1");
  sys.moduli = parse_u64_list(keyed_line(in, "moduli", 2), "line 2");
  const u64 count = parse_u64(keyed_line(in, "count", 3), "line 3");
  u64 product = 1;
  for (u64 m : sys.moduli) product = checked_mul(product, m);
  if (product != sys.G) throw Error(ErrorKind::Format, "line 2: moduli do not multiply to G");
  std::string line;
  std::size_t no = 3;
  while (std::getline(in, line)) {
    ++no;
    const std::string where = "line " + std::to_string(no);
    const u64 r = parse_u64(line, where);
    if (r >= sys.G || (!sys.residues.empty() && r <= sys.residues.back())) {
      throw Error(ErrorKind::Format, where + ": residues must be ascending and below G");
    }
    sys.residues.push_back(r);
  }
  if (sys.residues.size() != count) throw Error(ErrorKind::Format, "line 3: count does not match residues");
  return sys;
}

}  // namespace esc
