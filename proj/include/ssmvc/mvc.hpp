#pragma once

#include <memory>
#include <optional>

#include "ssmvc/bc.hpp"
#include "ssmvc/bv.hpp"
#include "ssmvc/simnet.hpp"
#include "ssmvc/vbb.hpp"

namespace ssmvc {

struct MvcConfig {
  SystemParams params;
  std::shared_ptr<const ValueSet> values;
  std::uint64_t coin_seed = 0;
  std::uint16_t round_cap = 30;
  // Retransmissions per loop iteration, each to one destination. 0 picks a default from n.
  std::size_t resend_budget = 0;
};

std::size_t default_resend_budget(std::size_t n);

// One correct node running multivalued consensus over VBB, a binary-values object and binary
// consensus. All layers are non-blocking; result() is polled.
class MvcNode : public Process {
 public:
  MvcNode(NodeId self, MvcConfig cfg, std::uint32_t epoch = 0);
  MvcNode(const MvcNode&) = delete;
  MvcNode& operator=(const MvcNode&) = delete;

  void propose(const Value& v, Outbox& out);
  Outcome<Value> result() const;
  bool mc_echo() const;
  bool same_value() const;
  // n-2t VBB outcomes equal to some v; the smallest such v.
  std::optional<Value> supported_value() const;

  void receive(const Envelope& env, Outbox& out) override;
  void tick(Outbox& out) override;
  std::uint32_t epoch() const override { return epoch_; }
  void recycle(std::uint32_t new_epoch) override;

  NodeId id() const { return self_; }
  const MvcConfig& config() const { return cfg_; }
  VbbLayer& vbb() { return vbb_; }
  const VbbLayer& vbb() const { return vbb_; }
  BvObject& bvo() { return bvo_; }
  const BvObject& bvo() const { return bvo_; }
  BcObject& bco() { return bco_; }
  const BcObject& bco() const { return bco_; }
  std::optional<Value>& proposal() { return proposal_; }
  const std::optional<Value>& proposal() const { return proposal_; }
  std::optional<bool>& latched_same_value() { return latched_; }
  const std::optional<bool>& latched_same_value() const { return latched_; }
  std::uint64_t stale_discarded() const { return stale_; }
  // Rejected second proposals.
  std::size_t anomalies() const { return anomalies_; }

  // Every message this node would retransmit right now, addressed to all.
  std::vector<Outgoing> contributions() const;

 private:
  void emit_brb(std::vector<BrbMessage>& msgs, Outbox& out) const;
  void emit_bc(const std::vector<BcMessage>& msgs, Outbox& out) const;
  void emit_bv(BoolSet values, Outbox& out) const;

  NodeId self_;
  MvcConfig cfg_;
  Thresholds th_;
  std::uint32_t epoch_;
  VbbLayer vbb_;
  BvObject bvo_;
  BcObject bco_;
  std::optional<Value> proposal_;
  std::optional<bool> latched_;
  std::size_t resend_cursor_ = 0;
  std::uint64_t stale_ = 0;
  std::size_t anomalies_ = 0;
};

}  // namespace ssmvc
