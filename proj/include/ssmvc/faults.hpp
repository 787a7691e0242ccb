#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "ssmvc/mvc.hpp"
#include "ssmvc/rng.hpp"
#include "ssmvc/simnet.hpp"

namespace ssmvc {

enum class StrategyKind { Silent, Equivocate, FakeValid, Collusion, RandomNoise };

struct ByzantineStrategy {
  StrategyKind kind = StrategyKind::Silent;
  Value v1;             // Equivocate: sent to the lower half of the nodes
  Value v2;             // Equivocate: sent to the rest
  bool flag = false;    // FakeValid
  Value value;          // Collusion
  std::uint64_t seed = 0;  // RandomNoise

  static ByzantineStrategy silent() { return {}; }
  static ByzantineStrategy equivocate(Value a, Value b);
  static ByzantineStrategy fake_valid(bool x);
  static ByzantineStrategy collusion(Value v);
  static ByzantineStrategy random_noise(std::uint64_t seed);

  std::string name() const;
};

// A Byzantine participant. Except for Silent and RandomNoise it runs an honest node and
// rewrites what that node sends.
class ByzantineNode : public Process {
 public:
  ByzantineNode(NodeId self, ByzantineStrategy strategy, MvcConfig cfg, std::optional<Value> proposal,
                std::uint32_t epoch = 0);

  // Called by the harness at the start of every epoch.
  void start(Outbox& out);

  void receive(const Envelope& env, Outbox& out) override;
  void tick(Outbox& out) override;
  std::uint32_t epoch() const override { return epoch_; }
  void recycle(std::uint32_t new_epoch) override;
  bool loop_enabled() const override { return strategy_.kind != StrategyKind::Silent; }

  const ByzantineStrategy& strategy() const { return strategy_; }
  NodeId id() const { return self_; }

 private:
  void rewrite(Outbox& inner, Outbox& out);

  NodeId self_;
  ByzantineStrategy strategy_;
  MvcConfig cfg_;
  std::optional<Value> proposal_;
  std::uint32_t epoch_;
  std::unique_ptr<MvcNode> inner_;
  Rng rng_;
  bool early_valid_sent_ = false;
};

// Structurally valid envelope with random contents, used by RandomNoise and channel noise.
Envelope random_envelope(Rng& rng, const SystemParams& params, NodeId src, NodeId dst, std::uint32_t epoch,
                         const ValueSet& values);

class InjectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FieldMutation {
  std::string path;
  nlohmann::json value;
};

struct RandomizeMutation {
  std::uint64_t seed = 0;
};

using NodeMutation = std::variant<FieldMutation, RandomizeMutation>;

struct ChannelPreload {
  NodeId src;
  NodeId dst;
  Protocol protocol = Protocol::Brb;
  std::optional<std::uint32_t> epoch;  // defaults to the current epoch
  Bytes body;
};

struct ChannelNoise {
  std::uint64_t seed = 0;
  std::size_t per_channel = 1;
};

struct InjectionPlan {
  bool all_correct = false;
  std::vector<NodeId> targets;
  std::vector<NodeMutation> mutations;
  std::vector<ChannelPreload> channels;
  std::optional<ChannelNoise> noise;
};

// Applies a plan at the very start of an epoch. Targets must be correct nodes.
// Returns the targets actually mutated.
std::vector<NodeId> apply_injection(SimWorld& world, const InjectionPlan& plan, std::uint64_t epoch_start_step);

}  // namespace ssmvc
