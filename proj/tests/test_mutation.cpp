// Built with a deliberately wrong RNE tie rule: the oracle sweep has to notice.
#include <gtest/gtest.h>

#include "fpblast/fpblast.hpp"

using namespace fpblast;

TEST(Mutation, BrokenTieRuleIsCaught) {
  difftest::Options opt;
  opt.format = FpFormat::fp8();
  opt.ops = {"add", "mul", "div"};
  opt.modes = {RoundingMode::RNE};
  const difftest::Report r = difftest::run(opt);
  EXPECT_GT(r.mismatches(), 0u);
  for (const auto& o : r.ops) EXPECT_GT(o.mismatches, 0u) << o.op;
  EXPECT_FALSE(r.counterexamples.empty());
}

TEST(Mutation, OtherModesUnaffected) {
  difftest::Options opt;
  opt.format = FpFormat::fp8();
  opt.ops = {"add", "mul"};
  opt.modes = {RoundingMode::RNA, RoundingMode::RTP, RoundingMode::RTN, RoundingMode::RTZ};
  EXPECT_EQ(difftest::run(opt).mismatches(), 0u);
}
