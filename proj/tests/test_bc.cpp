#include <gtest/gtest.h>

#include <deque>

#include "ssmvc/bc.hpp"
#include "ssmvc/rng.hpp"

using namespace ssmvc;

namespace {

BcConfig cfg(std::uint64_t seed, std::uint16_t cap = 30) {
  return BcConfig{cap, [seed](std::uint16_t r) { return common_coin(seed, 0, r); }};
}

struct BcNet {
  SystemParams params;
  std::vector<BcObject> nodes;
  struct Msg {
    NodeId from, to;
    BcMessage m;
  };
  std::deque<Msg> queue;
  Rng rng;
  std::size_t silent = 0;  // the last `silent` nodes neither send nor receive

  BcNet(std::size_t n, std::size_t t, std::uint64_t seed) : params{n, t}, rng(seed) {
    for (std::size_t i = 0; i < n; ++i) nodes.emplace_back(NodeId{i}, params, cfg(seed));
  }
  bool live(NodeId id) const { return id.index() < params.n - silent; }
  void send_all(NodeId from, const std::vector<BcMessage>& ms) {
    if (!live(from)) return;
    for (const auto& m : ms)
      for (std::size_t j = 0; j < params.n; ++j) queue.push_back({from, NodeId{j}, m});
  }
  void run(std::size_t max = 2'000'000) {
    while (!queue.empty() && max-- > 0) {
      const std::size_t i = rng.below(queue.size());
      Msg msg = queue[i];
      queue.erase(queue.begin() + static_cast<std::ptrdiff_t>(i));
      if (!live(msg.to)) continue;
      send_all(msg.to, nodes[msg.to.index()].on_bc_message(msg.from, msg.m));
    }
  }
};

}  // namespace

TEST(Bc, FreshObjectPending) {
  BcObject b(NodeId{0}, SystemParams{4, 1}, cfg(1));
  EXPECT_FALSE(b.active());
  EXPECT_TRUE(b.bc_result().is_pending());
}

TEST(Bc, ProposeActivatesRoundOne) {
  BcObject b(NodeId{0}, SystemParams{4, 1}, cfg(1));
  const auto out = b.bc_propose(true);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], (BcMessage{BcKind::Est, 1, true}));
  EXPECT_EQ(b.state().round, 1);
  EXPECT_TRUE(b.bc_propose(true).empty());
  EXPECT_TRUE(b.bc_propose(false).empty());
  EXPECT_EQ(b.anomalies(), 1u);
  EXPECT_EQ(b.state().proposal, true);
}

TEST(Bc, UnanimousProposalIsDecided) {
  for (std::size_t n : {4, 7, 10})
    for (bool v : {false, true})
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        BcNet net(n, (n - 1) / 3, seed);
        for (std::size_t i = 0; i < n; ++i) net.send_all(NodeId{i}, net.nodes[i].bc_propose(v));
        net.run();
        for (const auto& b : net.nodes) EXPECT_EQ(b.bc_result(), Outcome<bool>::decided(v)) << n << " " << seed;
      }
}

TEST(Bc, MixedProposalsAgree) {
  for (std::size_t n : {4, 7, 10})
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const std::size_t t = (n - 1) / 3;
      BcNet net(n, t, seed);
      net.silent = seed % 2 ? t : 0;
      Rng rng(seed + 100 * n);
      for (std::size_t i = 0; i < n; ++i) net.send_all(NodeId{i}, net.nodes[i].bc_propose(rng.coin()));
      net.run();
      const auto first = net.nodes[0].bc_result();
      EXPECT_FALSE(first.is_pending()) << n << " " << seed;
      for (std::size_t i = 0; i < n - net.silent; ++i) EXPECT_EQ(net.nodes[i].bc_result(), first);
    }
}

TEST(Bc, AdoptsDecisionFromTPlusOneAnnouncements) {
  BcObject b(NodeId{3}, SystemParams{4, 1}, cfg(1));
  b.on_bc_message(NodeId{0}, BcMessage{BcKind::Decide, 0, true});
  EXPECT_TRUE(b.bc_result().is_pending());
  b.on_bc_message(NodeId{0}, BcMessage{BcKind::Decide, 0, true});  // same peer again
  EXPECT_TRUE(b.bc_result().is_pending());
  const auto out = b.on_bc_message(NodeId{1}, BcMessage{BcKind::Decide, 0, true});
  EXPECT_EQ(b.bc_result(), Outcome<bool>::decided(true));
  EXPECT_FALSE(b.active());  // adoption does not need a local proposal
  ASSERT_FALSE(out.empty());
  EXPECT_EQ(out[0], (BcMessage{BcKind::Decide, 0, true}));
}

TEST(Bc, IgnoresRoundsOutsideRange) {
  BcObject b(NodeId{0}, SystemParams{4, 1}, cfg(1, 5));
  b.on_bc_message(NodeId{1}, BcMessage{BcKind::Est, 6, true});
  b.on_bc_message(NodeId{1}, BcMessage{BcKind::Aux, 0, true});
  b.on_bc_message(NodeId{9}, BcMessage{BcKind::Est, 1, true});
  EXPECT_TRUE(b.state().rounds.empty());
}

TEST(Bc, RoundPastCapIsError) {
  BcObject b(NodeId{0}, SystemParams{4, 1}, cfg(1, 5));
  b.state().active = true;
  b.state().round = 6;
  b.tick();
  EXPECT_TRUE(b.bc_result().is_error());
}

TEST(Bc, RepairsRoundZero) {
  BcObject b(NodeId{0}, SystemParams{4, 1}, cfg(1));
  b.state().active = true;
  b.state().round = 0;
  b.state().est = true;
  const auto out = b.tick();
  EXPECT_EQ(b.state().round, 1);
  ASSERT_FALSE(out.empty());
  EXPECT_EQ(out[0], (BcMessage{BcKind::Est, 1, true}));
}

TEST(Bc, RepairsPastRoundsWithMissingContributions) {
  BcObject b(NodeId{0}, SystemParams{4, 1}, cfg(1));
  b.state().active = true;
  b.state().round = 3;
  b.state().est = false;
  auto& r1 = b.round_state(1);
  r1.est.state().bin_values = BoolSet::of(true);
  r1.my_aux = false;  // not in bin: peers could never count it
  const auto out = b.tick();
  EXPECT_TRUE(r1.est.state().my_value.has_value());
  EXPECT_EQ(r1.my_aux, true);
  bool aux_sent = false;
  for (const auto& m : out) aux_sent |= m == BcMessage{BcKind::Aux, 1, true};
  EXPECT_TRUE(aux_sent);
}

TEST(Bc, RepairIsNoOpInLegitimateRuns) {
  BcNet net(4, 1, 3);
  for (std::size_t i = 0; i < 4; ++i) net.send_all(NodeId{i}, net.nodes[i].bc_propose(i % 2 == 0));
  net.run();
  for (auto& b : net.nodes) {
    const auto before = b.anomalies();
    b.tick();
    EXPECT_EQ(b.anomalies(), before);
  }
}

TEST(Bc, ResendIncludesDecision) {
  BcNet net(4, 1, 5);
  for (std::size_t i = 0; i < 4; ++i) net.send_all(NodeId{i}, net.nodes[i].bc_propose(true));
  net.run();
  std::vector<BcMessage> out;
  net.nodes[0].resend(out);
  bool has = false;
  for (const auto& m : out) has |= m == BcMessage{BcKind::Decide, 0, true};
  EXPECT_TRUE(has);
}
