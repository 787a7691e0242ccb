#include <gtest/gtest.h>

#include "support.hpp"
#include "ssmvc/recycler.hpp"
#include "ssmvc/state.hpp"

using namespace ssmvc;

TEST(Recycler, RejectsBeforeCompletion) {
  auto w = test::mvc_world(4, 1, 2);
  Recycler r(*w);
  EXPECT_FALSE(r.completed());
  EXPECT_THROW(r.recycle(), RecycleError);
}

TEST(Recycler, CorrectNodesSkipByzantine) {
  auto w = test::mvc_world(4, 1, 2, {{2, ByzantineStrategy::silent()}});
  const auto c = Recycler(*w).correct_nodes();
  EXPECT_EQ(c, (std::vector<NodeId>{NodeId{0}, NodeId{1}, NodeId{3}}));
  EXPECT_FALSE(result_of(*w, NodeId{2}));
}

TEST(Recycler, RecycledStateEqualsFresh) {
  auto w = test::mvc_world(4, 1, 3);
  test::propose_all(*w, {"a"});
  Recycler r(*w);
  const auto res = w->run_until([&] { return r.completed(); }, 200'000);
  ASSERT_TRUE(r.completed());
  (void)res;
  EXPECT_EQ(result_of(*w, NodeId{0}), Outcome<Value>::decided(Value{"a"}));

  r.recycle();
  EXPECT_EQ(w->epoch(), 1u);
  MvcNode fresh(NodeId{0}, test::mvc_config(4, 1), 1);
  EXPECT_EQ(dump_state(*w->process_as<MvcNode>(NodeId{0})), dump_state(fresh));
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t d = 0; d < 4; ++d)
      for (const auto& e : w->channel(NodeId{s}, NodeId{d})) EXPECT_EQ(e.epoch, 1u);
}

TEST(Recycler, SecondEpochDecidesAgain) {
  auto w = test::mvc_world(4, 1, 4);
  test::propose_all(*w, {"a"});
  Recycler r(*w);
  w->run_until([&] { return r.completed(); }, 200'000);
  ASSERT_TRUE(r.completed());
  r.recycle();
  EXPECT_FALSE(r.completed());
  test::propose_all(*w, {"b"});
  w->run_until([&] { return r.completed(); }, 200'000);
  ASSERT_TRUE(r.completed());
  for (auto id : r.correct_nodes()) EXPECT_EQ(result_of(*w, id), Outcome<Value>::decided(Value{"b"}));
}
