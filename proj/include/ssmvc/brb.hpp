#pragma once

#include <map>
#include <optional>
#include <vector>

#include "ssmvc/core.hpp"
#include "ssmvc/wire.hpp"

namespace ssmvc {

// Everything a BRB instance remembers. An instance whose state is all-empty is inactive (⊥).
struct BrbState {
  std::optional<Bytes> my_init;  // only at the designated sender
  std::optional<Bytes> echoed;
  std::optional<Bytes> readied;
  std::optional<Bytes> delivered;
  // One vote per peer and kind; a newer vote from the same peer replaces the old one.
  std::map<NodeId, Bytes> echoes;
  std::map<NodeId, Bytes> readies;

  bool empty() const {
    return !my_init && !echoed && !readied && !delivered && echoes.empty() && readies.empty();
  }
  bool operator==(const BrbState&) const = default;
};

enum class BroadcastStatus { Started, Repeated, Ignored };

// Echo/ready reliable broadcast for one tag (phase, sender), as seen by one node.
class BrbInstance {
 public:
  BrbInstance(BrbTag tag, NodeId self, SystemParams params);

  const BrbTag& tag() const { return tag_; }
  bool active() const { return !state_.empty(); }

  // Only the tag's sender may call this. A payload different from an earlier one is ignored.
  BroadcastStatus broadcast(const Bytes& payload, std::vector<BrbMessage>& out);
  void on_message(NodeId from, const BrbMessage& msg, std::vector<BrbMessage>& out);
  Outcome<Bytes> deliver() const;
  // Re-emits this node's current INIT/ECHO/READY contributions.
  void resend(std::vector<BrbMessage>& out) const;

  const BrbState& state() const { return state_; }
  BrbState& state() { return state_; }
  void reset() { state_ = BrbState{}; }
  std::size_t anomalies() const { return anomalies_; }

 private:
  void evaluate(std::vector<BrbMessage>& out);
  std::size_t support(const std::map<NodeId, Bytes>& votes, const Bytes& p) const;
  const Bytes* strongest(const std::map<NodeId, Bytes>& votes) const;

  BrbTag tag_;
  NodeId self_;
  SystemParams params_;
  Thresholds th_;
  BrbState state_;
  std::size_t anomalies_ = 0;
};

}  // namespace ssmvc
