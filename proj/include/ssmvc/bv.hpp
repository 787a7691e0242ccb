#pragma once

#include <array>
#include <optional>

#include "ssmvc/core.hpp"

namespace ssmvc {

struct BvState {
  std::optional<bool> my_value;
  std::array<NodeSet, 2> received;  // indexed by value
  BoolSet relayed;
  BoolSet bin_values;

  bool empty() const {
    return !my_value && received[0].empty() && received[1].empty() && relayed.empty() && bin_values.empty();
  }
  bool operator==(const BvState&) const = default;
};

// Binary-value broadcast. Transport-agnostic: every call returns the values to broadcast, and the
// owner wraps them in whatever message kind it uses (standalone BV, or EST inside a BC round).
class BvObject {
 public:
  BvObject(NodeId self, SystemParams params);

  bool active() const { return !state_.empty(); }
  BoolSet bv_broadcast(bool v);
  BoolSet on_bv_message(NodeId from, bool v);
  BoolSet bin_values() const { return state_.bin_values; }
  // Own value, every relayed value and every bin value. Re-sending bin values repairs a state
  // where a value sits in bin_values without having been relayed.
  BoolSet resend() const;

  const BvState& state() const { return state_; }
  BvState& state() { return state_; }
  void reset();
  std::size_t anomalies() const { return anomalies_; }

 private:
  NodeId self_;
  SystemParams params_;
  Thresholds th_;
  BvState state_;
  std::size_t anomalies_ = 0;
};

}  // namespace ssmvc
