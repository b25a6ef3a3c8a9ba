#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "esc/identity.hpp"

using namespace esc;

namespace {

std::set<std::pair<u64, u64>> classes_of(const IdentityDB& db) {
  std::set<std::pair<u64, u64>> out;
  for (const auto& id : db.entries()) {
    if (id.kind() != IdentityKind::Gcd) out.emplace(id.residue(), id.modulus());
  }
  return out;
}

SolutionTriple triple(u64 n, u64 x, u64 y, u64 z) {
  return {to_natural(n), to_natural(x), to_natural(y), to_natural(z)};
}

}  // namespace

TEST(IdentityClasses, T1Examples) {
  EXPECT_EQ(t1_class(1, 1, 1), ModClass(2, 3));
  EXPECT_EQ(t1_class(1, 2, 2), ModClass(13, 15));
  EXPECT_EQ(t1_class(2, 1, 5), ModClass(19, 39));
}

TEST(IdentityClasses, T2Examples) {
  EXPECT_EQ(t2_class(1, 1, 1), ModClass(3, 4));
  EXPECT_EQ(t2_class(1, 2, 3), ModClass(5, 8));
  try {
    t2_class(1, 2, 4);
    FAIL() << "expected NotADivisor";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotADivisor);
  }
}

TEST(Instantiate, Examples) {
  EXPECT_EQ(instantiate(Identity::t2(1, 1, 1), 7), triple(7, 2, 28, 28));
  EXPECT_EQ(instantiate(Identity::t1(1, 1, 1), 5), triple(5, 10, 2, 5));
  EXPECT_EQ(instantiate(Identity::t1(2, 1, 5), 19), triple(19, 190, 5, 190));
}

TEST(Instantiate, ClassMismatch) {
  try {
    instantiate(Identity::t2(1, 1, 1), 5);
    FAIL() << "expected ClassMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ClassMismatch);
  }
}

TEST(CheckSolution, Examples) {
  EXPECT_TRUE(check_solution(triple(7, 2, 15, 210)));
  EXPECT_TRUE(check_solution(triple(5, 2, 4, 20)));
  EXPECT_FALSE(check_solution(triple(7, 2, 15, 211)));
  EXPECT_FALSE(check_solution(triple(7, 0, 15, 210)));
}

TEST(EnumerateDb, BoundOne) {
  const auto c = classes_of(enumerate_db(1));
  EXPECT_EQ(c, (std::set<std::pair<u64, u64>>{{2, 3}, {3, 4}, {2, 4}}));
}

TEST(EnumerateDb, BoundTwo) {
  const auto c = classes_of(enumerate_db(2));
  for (auto rc : std::set<std::pair<u64, u64>>{{2, 3}, {3, 4}, {2, 4}, {5, 8}, {7, 8}, {3, 7}, {5, 7}, {6, 7}}) {
    EXPECT_TRUE(c.count(rc)) << rc.first << " mod " << rc.second;
  }
  // T1 with uvw = 2 lands on 3, 5 and 6 mod 7; nothing reaches 2 mod 7.
  EXPECT_FALSE(c.count({2, 7}));
  EXPECT_EQ(Identity::t1(2, 1, 1).residue(), 3u);
}

TEST(EnumerateDb, NoResidueOneAndLeastParameters) {
  const IdentityDB db = enumerate_db(40);
  std::map<std::pair<u64, u64>, Identity> least;
  for (u64 u = 1; u <= 40; ++u) {
    for (u64 v = 1; u * v <= 40; ++v) {
      for (u64 w = 1; u * v * w <= 40; ++w) {
        const Identity id = Identity::t1(u, v, w);
        auto [it, fresh] = least.try_emplace({id.residue(), id.modulus()}, id);
        if (!fresh && id < it->second) it->second = id;
      }
      for (u64 a = 1; a <= u + v; ++a) {
        if ((u + v) % a) continue;
        const Identity id = Identity::t2(u, v, a);
        auto [it, fresh] = least.try_emplace({id.residue(), id.modulus()}, id);
        if (!fresh && id < it->second) it->second = id;
      }
    }
  }
  const auto entries = db.entries();
  ASSERT_EQ(entries.size(), least.size());
  for (const auto& id : entries) {
    EXPECT_NE(id.residue(), 1u) << id.to_string();
    EXPECT_EQ(least.at({id.residue(), id.modulus()}), id) << id.to_string();
  }
}

TEST(EnumerateDb, LazyDatabaseMatchesEnumeration) {
  const IdentityDB eager = enumerate_db(30);
  const IdentityDB lazy(30);
  for (u64 m = 3; m <= 130; ++m) {
    const auto& a = eager.lookup(m);
    const auto& b = lazy.lookup(m);
    ASSERT_EQ(a.size(), b.size()) << m;
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].residue, b[i].residue);
      EXPECT_EQ(a[i].identity, b[i].identity);
    }
  }
}

TEST(EnumerateDb, SoundOnRandomMembers) {
  const IdentityDB db = enumerate_db(50);
  std::mt19937_64 rng(2024);
  for (const auto& id : db.entries()) {
    for (int i = 0; i < 100; ++i) {
      const u64 k = rng() % (1000000000000ull / id.modulus());
      const Natural n = to_natural(id.residue()) + to_natural(id.modulus()) * to_natural(k);
      if (n < 2) continue;
      const SolutionTriple t = instantiate(id, n);
      ASSERT_TRUE(t.x > 0 && t.y > 0 && t.z > 0);
      ASSERT_TRUE(check_solution(t)) << id.to_string() << " n=" << n;
    }
  }
}

TEST(EnumerateDb, SmallestMemberIsValid) {
  for (const auto& id : enumerate_db(50).entries()) {
    u64 n = id.residue();
    if (n < 2) n += id.modulus();
    EXPECT_TRUE(check_solution(instantiate(id, n))) << id.to_string();
  }
}

TEST(IdentityFile, RoundTripIsByteIdentical) {
  IdentityDB db = enumerate_db(12);
  db.insert(Identity::gcd_rule(triple(6, 2, 12, 12)));
  std::ostringstream a;
  write_identity_file(a, db);
  std::istringstream in(a.str());
  const IdentityDB back = read_identity_file(in);
  std::ostringstream b;
  write_identity_file(b, back);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(back.size(), db.size());
  ASSERT_TRUE(back.gcd_base(6));
  EXPECT_EQ(back.gcd_base(6)->y, 12);

  std::ostringstream again;
  write_identity_file(again, enumerate_db(12));
  std::ostringstream once;
  write_identity_file(once, enumerate_db(12));
  EXPECT_EQ(again.str(), once.str());
}

TEST(IdentityFile, RejectsBadLinesWithLineNumbers) {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"T1 1 1 1\nT3 1 2 3\n", "line 2"},
      {"# header\nT2 1 x 1\n", "line 2"},
      {"T2 1 2 4\n", "line 1"},
      {"T1 1 1\n", "line 1"},
      {"GCD 7 2 15 211\n", "line 1"},
  };
  for (const auto& [text, where] : cases) {
    std::istringstream in(text);
    try {
      read_identity_file(in);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find(where), std::string::npos) << e.what();
    }
  }
}

TEST(IdentityDb, ConcurrentLookupsAgree) {
  const IdentityDB db(200);
  std::vector<std::size_t> sizes(8);
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < sizes.size(); ++t) {
    threads.emplace_back([&, t] {
      for (u64 m = 3; m <= 800; ++m) sizes[t] += db.lookup(m).size();
    });
  }
  for (auto& th : threads) th.join();
  for (std::size_t s : sizes) EXPECT_EQ(s, sizes[0]);
}
