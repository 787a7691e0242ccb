#pragma once

#include <memory>
#include <vector>

#include "ssmvc/brb.hpp"
#include "ssmvc/core.hpp"

namespace ssmvc {

// Which rule of vbb_deliver produced the outcome, first match wins.
enum class VbbRule : std::uint8_t {
  ValidWithoutInit = 1,
  ForeignPair = 2,
  Undelivered = 3,
  Malformed = 4,
  Accepted = 5,
  Rejected = 6,
  ValidQuorum = 7,
  Waiting = 8,
};

const char* rule_name(VbbRule r);

struct VbbVerdict {
  Outcome<Value> outcome;
  VbbRule rule;
};

// Validated broadcast: every node runs an INIT-phase BRB for its value and a VALID-phase BRB
// for its opinion on whether enough nodes proposed the same value.
class VbbLayer {
 public:
  VbbLayer(NodeId self, SystemParams params, std::shared_ptr<const ValueSet> values);

  void vbb_broadcast(const Value& v, std::vector<BrbMessage>& out);
  void on_brb(NodeId from, const BrbMessage& m, std::vector<BrbMessage>& out);
  VbbVerdict explain(NodeId k) const;
  Outcome<Value> vbb_deliver(NodeId k) const { return explain(k).outcome; }
  std::vector<Outcome<Value>> outcomes() const;

  std::size_t delivered_count(Phase phase) const;
  bool vbb_echo(Phase phase) const;
  bool vbb_eq(std::string_view v) const;
  bool vbb_diff(std::string_view v) const;

  void vbb_tick(std::vector<BrbMessage>& out);
  void resend(std::vector<BrbMessage>& out) const;

  BrbInstance& brb(Phase phase, NodeId sender) { return brb_[idx(phase)][sender.index()]; }
  const BrbInstance& brb(Phase phase, NodeId sender) const { return brb_[idx(phase)][sender.index()]; }
  const ValueSet& values() const { return *values_; }
  std::shared_ptr<const ValueSet> value_set() const { return values_; }
  void reset();

 private:
  static std::size_t idx(Phase p) { return p == Phase::Init ? 0 : 1; }

  NodeId self_;
  SystemParams params_;
  Thresholds th_;
  std::shared_ptr<const ValueSet> values_;
  std::array<std::vector<BrbInstance>, 2> brb_;
};

}  // namespace ssmvc
