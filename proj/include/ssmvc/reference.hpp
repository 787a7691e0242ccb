#pragma once

#include <optional>
#include <vector>

#include "ssmvc/bc.hpp"
#include "ssmvc/brb.hpp"
#include "ssmvc/mvc.hpp"
#include "ssmvc/simnet.hpp"

namespace ssmvc {

// Non-self-stabilizing baseline: the classic reduction from multivalued to binary consensus
// over validated broadcast, written as guarded transitions whose outputs latch once set.
// It speaks the same wire format as MvcNode and ignores the standalone BV protocol.
class ReferenceNode : public Process {
 public:
  ReferenceNode(NodeId self, MvcConfig cfg, std::uint32_t epoch = 0);
  ReferenceNode(const ReferenceNode&) = delete;
  ReferenceNode& operator=(const ReferenceNode&) = delete;

  void propose(const Value& v, Outbox& out);
  Outcome<Value> result() const { return decision_; }
  // Latched VBB output for sender k, nullopt while still waiting.
  const std::optional<Outcome<Value>>& vbb_output(NodeId k) const { return vbb_out_.at(k.index()); }
  const BcObject& bco() const { return bco_; }

  void receive(const Envelope& env, Outbox& out) override;
  void tick(Outbox& out) override;
  std::uint32_t epoch() const override { return epoch_; }
  void recycle(std::uint32_t new_epoch) override;

 private:
  void progress(Outbox& out);
  std::size_t init_equal(std::string_view v) const;
  std::size_t init_differ(std::string_view v) const;
  std::size_t init_delivered() const;
  BrbInstance& brb(Phase ph, NodeId k) { return brb_[ph == Phase::Init ? 0 : 1][k.index()]; }

  NodeId self_;
  MvcConfig cfg_;
  Thresholds th_;
  std::uint32_t epoch_;
  std::array<std::vector<BrbInstance>, 2> brb_;
  BcObject bco_;
  std::optional<Value> proposal_;
  bool valid_sent_ = false;
  std::vector<std::optional<Outcome<Value>>> vbb_out_;
  std::optional<bool> same_value_;
  Outcome<Value> decision_;
  std::size_t resend_cursor_ = 0;
};

}  // namespace ssmvc
