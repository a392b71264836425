#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "test_support.hpp"

namespace amalgam {
namespace {

// Restricted growth string of a partition: label of each leg's block, labels
// assigned in order of first appearance.
using Rgs = std::vector<std::size_t>;

Rgs rgs_of(const NCPartition& p) {
  Rgs r(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) r[i] = p.block_of(i);
  return r;
}

std::vector<Rgs> all_set_partitions(std::size_t n) {
  std::vector<Rgs> out;
  Rgs cur(n, 0);
  auto rec = [&](auto& self, std::size_t i, std::size_t max_label) -> void {
    if (i == n) {
      out.push_back(cur);
      return;
    }
    for (std::size_t l = 0; l <= max_label + 1; ++l) {
      cur[i] = l;
      self(self, i + 1, std::max(max_label, l));
    }
  };
  if (n == 0) return out;
  cur[0] = 0;
  rec(rec, 1, 0);
  return out;
}

bool crossing_oracle(const Rgs& r) {
  const std::size_t n = r.size();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t c = b + 1; c < n; ++c)
        for (std::size_t d = c + 1; d < n; ++d)
          if (r[a] == r[c] && r[b] == r[d] && r[a] != r[b]) return true;
  return false;
}

constexpr std::size_t kCatalan[] = {1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796, 58786, 208012};

TEST(EnumerateNc, CatalanCounts) {
  for (std::size_t n = 1; n <= 8; ++n) EXPECT_EQ(enumerate_nc(n).size(), kCatalan[n]) << n;
  const std::size_t published[] = {1, 2, 5, 14, 42, 132, 429, 1430};
  for (std::size_t n = 1; n <= 8; ++n) EXPECT_EQ(enumerate_nc(n).size(), published[n - 1]);
}

TEST(EnumerateNc, MatchesCrossingFilterOverAllSetPartitions) {
  for (std::size_t n = 1; n <= 7; ++n) {
    std::set<Rgs> oracle;
    for (const auto& r : all_set_partitions(n))
      if (!crossing_oracle(r)) oracle.insert(r);
    std::set<Rgs> got;
    for (const auto& p : enumerate_nc(n)) {
      EXPECT_TRUE(got.insert(rgs_of(p)).second) << "duplicate at n=" << n;
    }
    EXPECT_EQ(got, oracle) << n;
  }
}

TEST(EnumerateNc, Limits) {
  for (std::size_t n : {std::size_t{0}, kMaxEnumerate + 1}) {
    try {
      (void)enumerate_nc(n);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::TooLarge);
    }
  }
  EXPECT_EQ(enumerate_nc(10).size(), kCatalan[10]);
}

TEST(NCPartition, RejectsInvalid) {
  auto code_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Parse;
  };
  EXPECT_EQ(code_of([] { NCPartition(4, {{0, 2}, {1, 3}}); }), ErrorCode::BadPartition);
  EXPECT_EQ(code_of([] { NCPartition(3, {{0, 1}}); }), ErrorCode::BadPartition);
  EXPECT_EQ(code_of([] { NCPartition(3, {{0, 1}, {1, 2}}); }), ErrorCode::BadPartition);
  EXPECT_EQ(code_of([] { NCPartition(2, {{0, 5}}); }), ErrorCode::BadPartition);
}

TEST(NCPartition, NestingStructure) {
  const NCPartition p(6, {{0, 5}, {1, 2}, {3}, {4}});
  const auto outer = p.block_of(0);
  EXPECT_FALSE(p.parent(outer).has_value());
  EXPECT_EQ(p.children(outer).size(), 3u);
  EXPECT_EQ(p.parent(p.block_of(3)), outer);
  EXPECT_TRUE(p.is_irreducible());
  EXPECT_FALSE(NCPartition(3, {{0, 1}, {2}}).is_irreducible());
}

TEST(Irreducible, CountIsShiftedCatalan) {
  for (std::size_t n = 1; n <= 8; ++n) {
    const auto all = enumerate_nc(n);
    const auto irr = std::count_if(all.begin(), all.end(), [](const NCPartition& p) { return is_irreducible(p); });
    EXPECT_EQ(static_cast<std::size_t>(irr), kCatalan[n - 1]) << n;
  }
}

TEST(Concat, ShiftsSecondOperand) {
  const NCPartition p(2, {{0, 1}});
  const NCPartition q(3, {{0, 2}, {1}});
  const NCPartition c = concat(p, q);
  EXPECT_EQ(c, NCPartition(5, {{0, 1}, {2, 4}, {3}}));
  EXPECT_EQ(concat(NCPartition(), q), q);
  EXPECT_FALSE(is_irreducible(c));
}

TEST(Compositions, AllOfThem) {
  for (std::size_t r = 1; r <= 8; ++r) {
    const auto cs = compositions(r);
    EXPECT_EQ(cs.size(), std::size_t{1} << (r - 1));
    std::set<std::vector<std::size_t>> seen;
    for (const auto& c : cs) {
      EXPECT_TRUE(c.valid());
      EXPECT_EQ(c.total(), r);
      seen.insert(c.parts);
    }
    EXPECT_EQ(seen.size(), cs.size());
  }
}

TEST(IntervalRefinements, AreExactlyTheRefinementsOfTheIntervals) {
  for (std::size_t r = 1; r <= 6; ++r) {
    for (const auto& c : compositions(r)) {
      // Interval label of each leg.
      std::vector<std::size_t> interval;
      for (std::size_t k = 0; k < c.parts.size(); ++k) interval.insert(interval.end(), c.parts[k], k);
      std::set<Rgs> oracle;
      for (const auto& p : enumerate_nc(r)) {
        bool inside = true;
        for (const auto& b : p.blocks())
          for (auto leg : b) inside = inside && interval[leg] == interval[b.front()];
        if (inside) oracle.insert(rgs_of(p));
      }
      std::set<Rgs> got;
      std::size_t expected = 1;
      for (auto part : c.parts) expected *= kCatalan[part];
      const auto refs = interval_refinements(r, c);
      EXPECT_EQ(refs.size(), expected);
      for (const auto& p : refs) got.insert(rgs_of(p));
      EXPECT_EQ(got, oracle);
    }
  }
}

TEST(IntervalRefinements, BadComposition) {
  for (const Composition& c : {Composition{{1, 1}}, Composition{{0, 3}}, Composition{}}) {
    try {
      (void)interval_refinements(3, c);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::BadComposition);
    }
  }
}

}  // namespace
}  // namespace amalgam
