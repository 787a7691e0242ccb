#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "ssmvc/bv.hpp"
#include "ssmvc/core.hpp"
#include "ssmvc/wire.hpp"

namespace ssmvc {

struct BcRound {
  BvObject est;
  std::map<NodeId, bool> aux;  // latest AUX per peer
  std::optional<bool> my_aux;

  BcRound(NodeId self, SystemParams params) : est(self, params) {}
};

struct BcState {
  bool active = false;  // set by bc_propose; incoming traffic alone does not activate
  std::optional<bool> proposal;
  std::uint16_t round = 0;
  bool est = false;
  Outcome<bool> decision;
  std::map<std::uint16_t, BcRound> rounds;
  std::array<NodeSet, 2> decides;  // peers that announced a decision, by value
};

struct BcConfig {
  std::uint16_t round_cap = 30;
  std::function<bool(std::uint16_t round)> coin;
};

// Randomized binary consensus: per round, a BV exchange of estimates, an AUX exchange, then the
// shared coin. A decided node announces DECIDE and t+1 matching announcements are adopted.
// Rounds keep running up to the cap after a decision so that slower peers always find partners.
class BcObject {
 public:
  BcObject(NodeId self, SystemParams params, BcConfig cfg);

  bool active() const { return state_.active; }
  std::vector<BcMessage> bc_propose(bool v);
  std::vector<BcMessage> on_bc_message(NodeId from, const BcMessage& m);
  std::vector<BcMessage> tick();
  Outcome<bool> bc_result() const { return state_.decision; }
  void resend(std::vector<BcMessage>& out) const;

  const BcState& state() const { return state_; }
  BcState& state() { return state_; }
  BcRound& round_state(std::uint16_t r);
  const BcConfig& config() const { return cfg_; }
  void reset();
  std::size_t anomalies() const { return anomalies_; }

 private:
  void advance(std::vector<BcMessage>& out);
  void repair(std::vector<BcMessage>& out);
  void decide(bool b, std::vector<BcMessage>& out);

  NodeId self_;
  SystemParams params_;
  Thresholds th_;
  BcConfig cfg_;
  BcState state_;
  std::size_t anomalies_ = 0;
};

}  // namespace ssmvc
