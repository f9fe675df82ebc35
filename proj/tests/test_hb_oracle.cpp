#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "racepair/hb_oracle.hpp"
#include "racepair/trace_tools.hpp"

using namespace racepair;
using fixtures::PosPairs;

TEST(Oracle, WriteReadDependencyOrdersAcrossThreads) {
  Trace t = fixtures::sample("ordered_by_read");
  HbRelation hb = compute_hb(t);
  EXPECT_TRUE(hb.reaches(2, 3));
  EXPECT_TRUE(hb.reaches(1, 4));
  EXPECT_FALSE(hb.concurrent(1, 4));
}

TEST(Oracle, SingleThreadIsTraceOrder) {
  Trace t = fixtures::csv("1,wr,x\n1,rd,y\n1,acq,m\n1,rel,m\n1,wr,y\n");
  HbRelation hb = compute_hb(t);
  for (Pos a = 1; a <= 5; ++a)
    for (Pos b = 1; b <= 5; ++b) EXPECT_EQ(hb.reaches(a, b), a < b) << a << "," << b;
}

TEST(Oracle, RepairedIntroOrdersFirstWriteBeforeProtectedWrite) {
  Trace t = fixtures::sample("intro_repaired");
  EXPECT_TRUE(compute_hb(t).reaches(1, 6));
}

TEST(Oracle, ConcurrentBasics) {
  Trace t = fixtures::csv("1,wr,x\n1,wr,x\n2,wr,x\n");
  HbRelation hb = compute_hb(t);
  EXPECT_TRUE(hb.concurrent(1, 3));
  EXPECT_FALSE(hb.concurrent(1, 1));
  EXPECT_FALSE(hb.concurrent(1, 2));
}

TEST(Oracle, ReleaseAcquireOnlyAcrossThreads) {
  Trace t = fixtures::csv("1,wr,x\n1,acq,m\n1,rel,m\n1,acq,m\n1,rel,m\n2,acq,m\n2,wr,x\n2,rel,m\n");
  HbRelation hb = compute_hb(t);
  EXPECT_TRUE(hb.reaches(3, 6));
  EXPECT_TRUE(hb.reaches(1, 7));
}

TEST(Oracle, ForkAndJoinOrderTheChild) {
  Trace t = fixtures::csv("1,wr,x\n1,fork,2\n2,wr,x\n1,join,2\n1,wr,x\n3,wr,x\n");
  HbRelation hb = compute_hb(t);
  EXPECT_TRUE(hb.reaches(1, 3));
  EXPECT_TRUE(hb.reaches(3, 5));
  EXPECT_TRUE(hb.concurrent(3, 6));
}

TEST(Oracle, ForkOrdersJoinEvenWithoutChildEvents) {
  Trace t = fixtures::csv("0,rd,x\n0,fork,1\n2,join,1\n2,wr,x\n");
  HbRelation hb = compute_hb(t);
  EXPECT_TRUE(hb.reaches(2, 3));
  EXPECT_TRUE(hb.reaches(1, 4));
}

TEST(Oracle, AllConcurrentOnRecallTrace) {
  Trace t = fixtures::sample("recall");
  HbRelation hb = compute_hb(t);
  // (w3,r5) is absent: r5 reads the value written by w3, which orders them.
  EXPECT_EQ(all_concurrent(t, hb, 0), (PosPairs{{1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}, {2, 5}, {4, 5}}));
}

TEST(Oracle, AllConcurrentEmptyForSingleThread) {
  Trace t = fixtures::csv("1,wr,x\n1,rd,x\n1,wr,x\n");
  EXPECT_TRUE(all_concurrent(t, compute_hb(t), 0).empty());
}

TEST(Oracle, RaceSetOfDependencyTrace) {
  Trace t = fixtures::sample("dependency");
  auto races = race_set(t, compute_hb(t));
  std::vector<RacePair> expected{{1, 2, 0, RaceKind::WriteWrite},
                                 {1, 3, 0, RaceKind::ReadWrite},
                                 {1, 4, 0, RaceKind::ReadWrite},
                                 {2, 4, 0, RaceKind::WriteReadDep}};
  EXPECT_EQ(races, expected);
  // (w2,r3) is a same-thread dependency, not a race.
  for (const RacePair& p : races) EXPECT_FALSE(p.first == 2 && p.second == 3);
}

TEST(Oracle, RaceSetOfIntroTrace) {
  Trace t = fixtures::sample("intro");
  EXPECT_EQ(fixtures::positions(race_set(t, compute_hb(t))), (PosPairs{{1, 4}, {2, 4}}));
}

TEST(Oracle, ReadOrderedTraceHasNoRaceOnX) {
  Trace t = fixtures::sample("ordered_by_read");
  for (const RacePair& p : race_set(t, compute_hb(t))) EXPECT_NE(t.variable_name(p.variable), "x");
}

TEST(Oracle, EmptyTrace) {
  Trace t;
  EXPECT_TRUE(race_set(t, compute_hb(t)).empty());
}

TEST(OracleProperty, AccessesNeverReachBackwardsAndNoCycles) {
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    Trace t = generate(corpus_config(seed));
    HbRelation hb = compute_hb(t);
    for (Pos a = 1; a <= t.size(); ++a) {
      EXPECT_FALSE(hb.reaches(a, a));
      for (Pos b = 1; b < a; ++b) {
        EXPECT_FALSE(hb.reaches(a, b) && hb.reaches(b, a));
        if (is_access(t.at(a).op) && is_access(t.at(b).op)) EXPECT_FALSE(hb.reaches(a, b)) << seed;
      }
    }
  }
}

TEST(OracleProperty, TransitivelyClosed) {
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    Trace t = generate(corpus_config(seed));
    HbRelation hb = compute_hb(t);
    const Pos n = static_cast<Pos>(t.size());
    for (Pos a = 1; a <= n; ++a)
      for (Pos b = 1; b <= n; ++b)
        for (Pos c = 1; c <= n; ++c)
          if (hb.reaches(a, b) && hb.reaches(b, c)) ASSERT_TRUE(hb.reaches(a, c)) << seed;
  }
}

TEST(OracleProperty, AllConcurrentMatchesPairwiseFilter) {
  for (std::uint64_t seed = 1; seed <= 500; ++seed) {
    Trace t = generate(corpus_config(seed, 10));
    HbRelation hb = compute_hb(t);
    for (Slot x = 0; x < t.variable_count(); ++x) {
      PosPairs expected;
      for (Pos a = 1; a <= t.size(); ++a)
        for (Pos b = a + 1; b <= t.size(); ++b)
          if (is_access(t.at(a).op) && is_access(t.at(b).op) && t.object_slot(a) == x && t.object_slot(b) == x &&
              !hb.reaches(a, b) && !hb.reaches(b, a))
            expected.emplace_back(a, b);
      EXPECT_EQ(all_concurrent(t, hb, x), expected);
    }
  }
}

TEST(OracleProperty, RaceSetHasNoReadReadOrSelfPairs) {
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    Trace t = generate(corpus_config(seed));
    for (const RacePair& p : race_set(t, compute_hb(t))) {
      EXPECT_LT(p.first, p.second);
      EXPECT_TRUE(t.at(p.first).op == Op::Write || t.at(p.second).op == Op::Write);
    }
  }
}
