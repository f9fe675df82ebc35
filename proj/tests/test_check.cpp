#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "racepair/check.hpp"
#include "racepair/trace_tools.hpp"

using namespace racepair;

TEST(Check, CorpusPasses) {
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    auto failures = check_trace(generate(corpus_config(seed, 12)));
    ASSERT_TRUE(failures.empty()) << "seed " << seed << ": [" << failures[0].criterion << "] " << failures[0].what;
  }
}

TEST(Check, NamedSamplesPass) {
  for (auto name : {"intro", "intro_repaired", "epochs", "recall", "dependency", "ordered_by_read", "lock_chain"})
    EXPECT_TRUE(check_trace(fixtures::sample(name)).empty()) << name;
}

TEST(Check, CorruptedEngineIsCaught) {
  auto failures = check_trace(fixtures::sample("intro"), {.corrupt = true});
  ASSERT_FALSE(failures.empty());
  EXPECT_EQ(failures[0].criterion, "2a");
}

TEST(Minimize, ShrinksToSmallestFailingCore) {
  Trace big = generate({.seed = 11, .threads = 3, .variables = 2, .mutexes = 1, .events = 20});
  auto racy = [](const Trace& t) { return !check_trace(t, {.corrupt = true}).empty(); };
  ASSERT_TRUE(racy(big));
  Trace small = minimize(big, racy);
  EXPECT_TRUE(racy(small));
  EXPECT_EQ(small.size(), 2u);
  EXPECT_NO_THROW(validate_trace(small));
}
