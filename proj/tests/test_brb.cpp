#include <gtest/gtest.h>

#include "support.hpp"
#include "ssmvc/wire.hpp"

using namespace ssmvc;
using test::BrbNet;
using test::bytes;

namespace {

const BrbTag kTag{Phase::Init, NodeId{0}};

BrbMessage msg(BrbKind k, const Bytes& p, BrbTag tag = kTag) { return {k, tag, p}; }

}  // namespace

TEST(Brb, BroadcastEmitsInitOnce) {
  BrbInstance b(kTag, NodeId{0}, SystemParams{4, 1});
  std::vector<BrbMessage> out;
  EXPECT_EQ(b.broadcast(bytes("m"), out), BroadcastStatus::Started);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], msg(BrbKind::Init, bytes("m")));

  out.clear();
  EXPECT_EQ(b.broadcast(bytes("m"), out), BroadcastStatus::Repeated);
  EXPECT_EQ(out.size(), 1u);  // re-emitted, state unchanged
  EXPECT_EQ(b.state().my_init, bytes("m"));

  out.clear();
  EXPECT_EQ(b.broadcast(bytes("other"), out), BroadcastStatus::Ignored);
  EXPECT_TRUE(out.empty());
  EXPECT_EQ(b.anomalies(), 1u);
  EXPECT_EQ(b.state().my_init, bytes("m"));
}

TEST(Brb, OnlyTheSenderMayBroadcast) {
  BrbInstance b(kTag, NodeId{1}, SystemParams{4, 1});
  std::vector<BrbMessage> out;
  EXPECT_THROW(b.broadcast(bytes("m"), out), std::logic_error);
}

TEST(Brb, FreshInstanceIsPendingAndSilent) {
  BrbInstance b(kTag, NodeId{2}, SystemParams{4, 1});
  EXPECT_TRUE(b.deliver().is_pending());
  EXPECT_FALSE(b.active());
  std::vector<BrbMessage> out;
  b.resend(out);
  EXPECT_TRUE(out.empty());
}

TEST(Brb, InitFromNonSenderIgnored) {
  BrbInstance b(kTag, NodeId{2}, SystemParams{4, 1});
  std::vector<BrbMessage> out;
  b.on_message(NodeId{1}, msg(BrbKind::Init, bytes("m")), out);
  EXPECT_TRUE(out.empty());
  EXPECT_FALSE(b.state().echoed);
}

TEST(Brb, FirstInitWins) {
  BrbInstance b(kTag, NodeId{2}, SystemParams{4, 1});
  std::vector<BrbMessage> out;
  b.on_message(NodeId{0}, msg(BrbKind::Init, bytes("m")), out);
  b.on_message(NodeId{0}, msg(BrbKind::Init, bytes("m2")), out);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], msg(BrbKind::Echo, bytes("m")));
}

TEST(Brb, ThreeReadiesDeliverAtFourNodes) {
  BrbInstance b(kTag, NodeId{3}, SystemParams{4, 1});
  std::vector<BrbMessage> out;
  for (std::size_t i = 0; i < 3; ++i) b.on_message(NodeId{i}, msg(BrbKind::Ready, bytes("km")), out);
  EXPECT_EQ(b.deliver(), Outcome<Bytes>::decided(bytes("km")));
  // amplification fired at t+1 = 2 readies
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].kind, BrbKind::Ready);
}

TEST(Brb, TwoEchoesAreNotEnoughAtFourNodes) {
  BrbInstance b(kTag, NodeId{3}, SystemParams{4, 1});
  std::vector<BrbMessage> out;
  b.on_message(NodeId{0}, msg(BrbKind::Echo, bytes("m")), out);
  b.on_message(NodeId{1}, msg(BrbKind::Echo, bytes("m")), out);
  EXPECT_TRUE(out.empty());
  b.on_message(NodeId{2}, msg(BrbKind::Echo, bytes("m")), out);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], msg(BrbKind::Ready, bytes("m")));
  EXPECT_TRUE(b.deliver().is_pending());
}

TEST(Brb, DuplicateVotesCountOnce) {
  BrbInstance b(kTag, NodeId{3}, SystemParams{4, 1});
  std::vector<BrbMessage> out;
  for (int i = 0; i < 5; ++i) b.on_message(NodeId{1}, msg(BrbKind::Ready, bytes("m")), out);
  EXPECT_TRUE(out.empty());
  EXPECT_EQ(b.state().readies.size(), 1u);
}

TEST(Brb, OutOfRangePeerIgnored) {
  BrbInstance b(kTag, NodeId{3}, SystemParams{4, 1});
  std::vector<BrbMessage> out;
  b.on_message(NodeId{9}, msg(BrbKind::Ready, bytes("m")), out);
  EXPECT_TRUE(b.state().readies.empty());
  EXPECT_THROW(b.on_message(NodeId{1}, msg(BrbKind::Ready, bytes("m"), BrbTag{Phase::Valid, NodeId{0}}), out),
               std::logic_error);
}

TEST(Brb, ResendGossipsInjectedState) {
  BrbInstance b(kTag, NodeId{2}, SystemParams{4, 1});
  b.state().readied = bytes("m");
  std::vector<BrbMessage> out;
  b.resend(out);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], msg(BrbKind::Ready, bytes("m")));

  BrbInstance e(kTag, NodeId{2}, SystemParams{4, 1});
  e.state().echoed = bytes("m");
  out.clear();
  e.resend(out);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], msg(BrbKind::Echo, bytes("m")));
}

TEST(Brb, InjectedDeliveryIsReturned) {
  BrbInstance b(kTag, NodeId{2}, SystemParams{4, 1});
  b.state().delivered = bytes("junk");
  EXPECT_EQ(b.deliver(), Outcome<Bytes>::decided(bytes("junk")));
}

TEST(Brb, FaultFreeRunDeliversEverywhere) {
  for (std::size_t n : {4, 7, 10}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const BrbTag tag{Phase::Init, NodeId{seed % n}};
      BrbNet net(n, (n - 1) / 3, tag, seed);
      std::vector<BrbMessage> out;
      net.nodes[tag.sender.index()].broadcast(bytes("payload"), out);
      net.send_all(tag.sender, out);
      net.run();
      for (const auto& node : net.nodes) EXPECT_EQ(node.deliver(), Outcome<Bytes>::decided(bytes("payload")));
    }
  }
}

TEST(Brb, SilentFaultsStillDeliver) {
  // t nodes never send or receive; the rest still form every quorum.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    BrbNet net(10, 3, kTag, seed);
    net.mute = [](NodeId id) { return id.index() >= 7; };
    std::vector<BrbMessage> out;
    net.nodes[0].broadcast(bytes("p"), out);
    net.send_all(NodeId{0}, out);
    net.run();
    for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(net.nodes[i].deliver(), Outcome<Bytes>::decided(bytes("p")));
  }
}

TEST(Brb, EquivocatingSenderNeverSplitsDeliveries) {
  // Byzantine sender 0 sends INIT(a) to half the nodes and INIT(b) to the rest, and echoes and
  // readies both values to everyone. Correct nodes may deliver nothing, never two values.
  for (std::size_t n : {4, 7, 10}) {
    const std::size_t t = (n - 1) / 3;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      BrbNet net(n, t, kTag, seed);
      net.mute = [](NodeId id) { return id.index() == 0; };
      for (std::size_t j = 1; j < n; ++j) {
        const Bytes& p = j < n / 2 ? bytes("a") : bytes("b");
        net.send_to(NodeId{0}, NodeId{j}, msg(BrbKind::Init, p));
        for (const char* v : {"a", "b"}) {
          net.send_to(NodeId{0}, NodeId{j}, msg(BrbKind::Echo, bytes(v)));
          net.send_to(NodeId{0}, NodeId{j}, msg(BrbKind::Ready, bytes(v)));
        }
      }
      net.run();
      std::optional<Bytes> seen;
      std::size_t delivered = 0;
      for (std::size_t j = 1; j < n; ++j) {
        const auto& d = net.nodes[j].state().delivered;
        if (!d) continue;
        ++delivered;
        if (seen) {
          EXPECT_EQ(*seen, *d) << "n=" << n << " seed=" << seed;
        }
        seen = d;
      }
      // all-or-nothing among correct nodes
      EXPECT_TRUE(delivered == 0 || delivered == n - 1) << "n=" << n << " seed=" << seed;
    }
  }
}
