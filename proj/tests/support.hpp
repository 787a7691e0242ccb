#pragma once

#include <deque>
#include <functional>
#include <memory>

#include "ssmvc/brb.hpp"
#include "ssmvc/bv.hpp"
#include "ssmvc/mvc.hpp"
#include "ssmvc/faults.hpp"
#include "ssmvc/rng.hpp"
#include "ssmvc/simnet.hpp"

namespace ssmvc::test {

inline std::shared_ptr<const ValueSet> values(std::vector<std::string> v = {"a", "b", "c"}) {
  return std::make_shared<const ValueSet>(std::move(v));
}

inline MvcConfig mvc_config(std::size_t n, std::size_t t, std::vector<std::string> v = {"a", "b", "c"}) {
  return MvcConfig{SystemParams{n, t}, values(std::move(v)), 7, 30, 0};
}

inline Bytes bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

// All-to-all network of BRB instances for one tag, delivered in a seeded random order.
struct BrbNet {
  SystemParams params;
  BrbTag tag;
  std::vector<BrbInstance> nodes;
  struct Msg {
    NodeId from, to;
    BrbMessage m;
  };
  std::deque<Msg> queue;
  Rng rng;
  // Messages from these nodes are never sent (crashed or silent).
  std::function<bool(NodeId)> mute = [](NodeId) { return false; };

  BrbNet(std::size_t n, std::size_t t, BrbTag tg, std::uint64_t seed) : params{n, t}, tag(tg), rng(seed) {
    for (std::size_t i = 0; i < n; ++i) nodes.emplace_back(tag, NodeId{i}, params);
  }
  void send_all(NodeId from, const std::vector<BrbMessage>& msgs) {
    if (mute(from)) return;
    for (const auto& m : msgs)
      for (std::size_t j = 0; j < params.n; ++j) queue.push_back({from, NodeId{j}, m});
  }
  void send_to(NodeId from, NodeId to, BrbMessage m) { queue.push_back({from, to, std::move(m)}); }
  void run(std::size_t max = 1'000'000) {
    while (!queue.empty() && max-- > 0) {
      const std::size_t i = rng.below(queue.size());
      Msg msg = queue[i];
      queue.erase(queue.begin() + static_cast<std::ptrdiff_t>(i));
      if (mute(msg.to)) continue;
      std::vector<BrbMessage> out;
      nodes[msg.to.index()].on_message(msg.from, msg.m, out);
      send_all(msg.to, out);
    }
  }
};

// Same for binary-values broadcast; values travel as plain booleans.
struct BvNet {
  SystemParams params;
  std::vector<BvObject> nodes;
  struct Msg {
    NodeId from, to;
    bool v;
  };
  std::deque<Msg> queue;
  Rng rng;

  BvNet(std::size_t n, std::size_t t, std::uint64_t seed) : params{n, t}, rng(seed) {
    for (std::size_t i = 0; i < n; ++i) nodes.emplace_back(NodeId{i}, params);
  }
  void send_all(NodeId from, BoolSet s) {
    for (bool v : {false, true})
      if (s.contains(v))
        for (std::size_t j = 0; j < params.n; ++j) queue.push_back({from, NodeId{j}, v});
  }
  void run() {
    while (!queue.empty()) {
      const std::size_t i = rng.below(queue.size());
      Msg msg = queue[i];
      queue.erase(queue.begin() + static_cast<std::ptrdiff_t>(i));
      send_all(msg.to, nodes[msg.to.index()].on_bv_message(msg.from, msg.v));
    }
  }
};

// A world of correct MvcNodes; `byz` replaces some of them.
inline std::unique_ptr<SimWorld> mvc_world(std::size_t n, std::size_t t, std::uint64_t seed,
                                           std::vector<std::pair<std::size_t, ByzantineStrategy>> byz = {}) {
  auto w = std::make_unique<SimWorld>(WorldConfig{SystemParams{n, t}, 16, seed, 0});
  for (std::size_t i = 0; i < n; ++i) w->set_process(NodeId{i}, std::make_unique<MvcNode>(NodeId{i}, mvc_config(n, t)));
  for (auto& [i, s] : byz)
    w->set_process(NodeId{i}, std::make_unique<ByzantineNode>(NodeId{i}, s, mvc_config(n, t), Value{"a"}));
  return w;
}

inline void propose_all(SimWorld& w, const std::vector<std::string>& vals) {
  for (std::size_t i = 0; i < w.params().n; ++i) {
    Outbox out(w.epoch());
    if (auto* m = w.process_as<MvcNode>(NodeId{i})) m->propose(Value{vals[i % vals.size()]}, out);
    else if (auto* b = w.process_as<ByzantineNode>(NodeId{i})) b->start(out);
    w.route(NodeId{i}, out);
  }
}

}  // namespace ssmvc::test
