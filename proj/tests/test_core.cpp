#include <gtest/gtest.h>

#include "ssmvc/core.hpp"
#include "ssmvc/rng.hpp"

using namespace ssmvc;

TEST(Thresholds, SmallestLegalSystem) {
  EXPECT_EQ(thresholds(4, 1), (Thresholds{3, 2, 2, 3, 3}));
}

TEST(Thresholds, TenNodesThreeFaults) {
  EXPECT_EQ(thresholds(10, 3), (Thresholds{7, 4, 4, 7, 7}));
}

TEST(Thresholds, RejectsTooFewNodes) {
  EXPECT_THROW(thresholds(3, 1), std::invalid_argument);
  EXPECT_THROW(thresholds(6, 2), std::invalid_argument);
  EXPECT_NO_THROW(thresholds(1, 0));
}

TEST(Thresholds, MatchesDirectFormulaOverRange) {
  for (std::size_t t = 0; t <= 10; ++t)
    for (std::size_t n = 3 * t + 1; n <= 3 * t + 12; ++n) {
      const auto th = thresholds(n, t);
      EXPECT_EQ(th.n_minus_t, n - t);
      EXPECT_EQ(th.n_minus_2t, n - 2 * t);
      EXPECT_EQ(th.t_plus_1, t + 1);
      EXPECT_EQ(th.echo_quorum, (n + t) / 2 + 1);
      EXPECT_EQ(th.two_t_plus_1, 2 * t + 1);
      // Two echo quorums share more than t nodes.
      EXPECT_GT(2 * th.echo_quorum, n + t);
    }
}

TEST(SystemParams, Validate) {
  EXPECT_NO_THROW((SystemParams{4, 1}.validate()));
  EXPECT_THROW((SystemParams{3, 1}.validate()), std::invalid_argument);
  EXPECT_TRUE((SystemParams{4, 1}.contains(NodeId{3})));
  EXPECT_FALSE((SystemParams{4, 1}.contains(NodeId{4})));
}

TEST(Outcome, ThreeStates) {
  auto p = Outcome<Value>::pending();
  auto e = Outcome<Value>::error();
  auto d = Outcome<Value>::decided(Value{"a"});
  EXPECT_TRUE(p.is_pending());
  EXPECT_TRUE(e.is_error());
  EXPECT_TRUE(d.is_decided());
  EXPECT_EQ(d.value().token, "a");
  EXPECT_THROW(p.value(), std::logic_error);
  EXPECT_NE(p, e);
  EXPECT_EQ(d, Outcome<Value>::decided(Value{"a"}));
  EXPECT_NE(d, Outcome<Value>::decided(Value{"b"}));
  EXPECT_EQ(to_string(p), "pending");
  EXPECT_EQ(to_string(e), "error");
  EXPECT_EQ(to_string(d), "decided(a)");
  EXPECT_EQ(to_string(Outcome<bool>::decided(true)), "decided(true)");
}

TEST(ValueSet, SortedUnique) {
  ValueSet v({"b", "a", "b"});
  EXPECT_EQ(v.tokens(), (std::vector<std::string>{"a", "b"}));
  EXPECT_TRUE(v.contains("a"));
  EXPECT_FALSE(v.contains("c"));
}

TEST(NodeSet, Membership) {
  NodeSet s(70);
  EXPECT_TRUE(s.insert(NodeId{69}));
  EXPECT_FALSE(s.insert(NodeId{69}));
  s.insert(NodeId{0});
  EXPECT_EQ(s.count(), 2u);
  EXPECT_EQ(s.members(), (std::vector<NodeId>{NodeId{0}, NodeId{69}}));
  EXPECT_THROW(s.insert(NodeId{70}), std::out_of_range);
  s.clear();
  EXPECT_TRUE(s.empty());
}

TEST(BoolSet, Basics) {
  BoolSet s;
  EXPECT_TRUE(s.empty());
  s.insert(true);
  EXPECT_TRUE(s.contains(true));
  EXPECT_FALSE(s.contains(false));
  s.insert(false);
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(BoolSet::from_bits(s.bits()), s);
}

TEST(Rng, DeterministicAndBounded) {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  Rng r(9);
  std::vector<int> hits(7);
  for (int i = 0; i < 7000; ++i) ++hits[r.below(7)];
  for (int h : hits) EXPECT_GT(h, 800);
}

TEST(Rng, CommonCoinIsShared) {
  EXPECT_EQ(common_coin(1, 0, 3), common_coin(1, 0, 3));
  int ones = 0;
  for (std::uint16_t r = 1; r <= 200; ++r) ones += common_coin(1, 0, r);
  EXPECT_GT(ones, 60);
  EXPECT_LT(ones, 140);
}
