#include <gtest/gtest.h>

#include <set>

#include "support.hpp"
#include "ssmvc/harness.hpp"
#include "ssmvc/suite.hpp"

using namespace ssmvc;

namespace {

constexpr std::uint64_t kSeeds = 15;

std::set<std::string> correct_outcomes(const EpochReport& e) {
  std::set<std::string> s;
  for (const auto& o : e.outcomes)
    if (o != "byzantine") s.insert(o);
  return s;
}

}  // namespace

TEST(Properties, AgreementUnderEveryStrategy) {
  for (std::size_t n : {4, 7}) {
    for (auto k : all_strategies())
      for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
        const Scenario s = sweep_scenario(n, seed, k, false);
        const Report r = run_scenario(s);
        ASSERT_TRUE(r.all_completed()) << n << " " << seed;
        const auto outs = correct_outcomes(r.epochs[0]);
        EXPECT_EQ(outs.size(), 1u) << "n=" << n << " seed=" << seed;
        EXPECT_FALSE(outs.count("decided(z)"));
        const auto legal = legal_outcomes(s);
        EXPECT_NE(std::find(legal.begin(), legal.end(), *outs.begin()), legal.end());
        EXPECT_TRUE(r.pass) << r.to_json()["verdicts"].dump();
      }
  }
}

TEST(Properties, UnanimityDecides) {
  for (std::size_t n : {4, 7, 10})
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
      const Report r = run_scenario(sweep_scenario(n, seed, std::nullopt, true));
      EXPECT_EQ(correct_outcomes(r.epochs[0]), (std::set<std::string>{"decided(a)"})) << n << " " << seed;
    }
}

TEST(Properties, ConvergenceFromRandomStates) {
  for (std::size_t n : {4, 7})
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
      const Report r = run_scenario(convergence_scenario(n, seed));
      ASSERT_EQ(r.epochs.size(), 2u) << n << " " << seed;
      EXPECT_TRUE(r.epochs[0].completed);
      EXPECT_TRUE(r.pass) << n << " " << seed;
      EXPECT_EQ(correct_outcomes(r.epochs[1]).size(), 1u);
    }
}

TEST(Properties, StarvedNodeStillDecides) {
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    RunOptions opt;
    opt.schedule = "starve:" + std::to_string(seed % 4);
    const Report r = run_scenario(sweep_scenario(4, seed, std::nullopt, true), opt);
    EXPECT_TRUE(r.pass) << seed;
  }
}

TEST(Properties, BrbAgreementFromArbitraryVotes) {
  // Leftover echo votes plus an honest sender: newer votes replace the junk and everyone
  // delivers the sender's payload.
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Rng rng(seed);
    test::BrbNet net(4, 1, BrbTag{Phase::Init, NodeId{0}}, seed);
    const Bytes good = test::bytes("g"), junk = test::bytes("j");
    for (auto& node : net.nodes)
      for (std::size_t p = 0; p < 4; ++p) {
        if (rng.coin()) node.state().echoes[NodeId{p}] = rng.coin() ? good : junk;
      }
    std::vector<BrbMessage> out;
    net.nodes[0].broadcast(good, out);
    net.send_all(NodeId{0}, out);
    net.run();
    for (std::size_t round = 0; round < 5; ++round)
      for (std::size_t i = 0; i < 4; ++i) {
        std::vector<BrbMessage> r;
        net.nodes[i].resend(r);
        net.send_all(NodeId{i}, r);
        net.run();
      }
    for (const auto& node : net.nodes) EXPECT_EQ(node.state().delivered, good) << seed;
  }
}

TEST(Properties, BvNeverAcceptsByzantineOnlyValue) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    test::BvNet net(7, 2, seed);
    for (std::size_t i = 0; i < 5; ++i) net.send_all(NodeId{i}, net.nodes[i].bv_broadcast(false));
    // the two faulty nodes push `true` everywhere
    for (std::size_t b = 5; b < 7; ++b)
      for (std::size_t j = 0; j < 7; ++j) net.queue.push_back({NodeId{b}, NodeId{j}, true});
    net.run();
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_FALSE(net.nodes[i].bin_values().contains(true)) << seed;
      EXPECT_TRUE(net.nodes[i].bin_values().contains(false)) << seed;
    }
  }
}
