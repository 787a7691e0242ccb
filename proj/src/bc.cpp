#include "ssmvc/bc.hpp"

namespace ssmvc {

BcObject::BcObject(NodeId self, SystemParams params, BcConfig cfg)
    : self_(self), params_(params), th_(thresholds(params)), cfg_(std::move(cfg)) {
  if (!cfg_.coin) throw std::invalid_argument("BcObject needs a coin");
  if (cfg_.round_cap == 0) throw std::invalid_argument("round cap must be positive");
  reset();
}

void BcObject::reset() {
  state_ = BcState{};
  state_.decides = {NodeSet(params_.n), NodeSet(params_.n)};
}

BcRound& BcObject::round_state(std::uint16_t r) {
  return state_.rounds.try_emplace(r, self_, params_).first->second;
}

std::vector<BcMessage> BcObject::bc_propose(bool v) {
  std::vector<BcMessage> out;
  if (state_.active) {
    if (state_.proposal != v) ++anomalies_;
    return out;
  }
  state_.active = true;
  state_.proposal = v;
  state_.est = v;
  state_.round = 1;
  advance(out);
  return out;
}

void BcObject::decide(bool b, std::vector<BcMessage>& out) {
  if (!state_.decision.is_pending()) return;
  state_.decision = Outcome<bool>::decided(b);
  out.push_back({BcKind::Decide, 0, b});
}

std::vector<BcMessage> BcObject::on_bc_message(NodeId from, const BcMessage& m) {
  std::vector<BcMessage> out;
  if (!params_.contains(from)) return out;
  if (m.kind == BcKind::Decide) {
    auto& d = state_.decides[m.value ? 1 : 0];
    d.insert(from);
    if (d.count() >= th_.t_plus_1 && state_.decision.is_pending()) {
      state_.est = m.value;
      decide(m.value, out);
    }
    advance(out);
    return out;
  }
  if (m.round == 0 || m.round > cfg_.round_cap) return out;
  BcRound& r = round_state(m.round);
  if (m.kind == BcKind::Est) {
    const BoolSet relay = r.est.on_bv_message(from, m.value);
    for (bool v : {false, true})
      if (relay.contains(v)) out.push_back({BcKind::Est, m.round, v});
  } else {
    r.aux[from] = m.value;
  }
  advance(out);
  return out;
}

std::vector<BcMessage> BcObject::tick() {
  std::vector<BcMessage> out;
  repair(out);
  advance(out);
  return out;
}

// Only reachable from a corrupted start: put the current round back in range and make this node
// a full participant of every round it has already left, so that peers lagging behind can
// always collect enough EST and AUX votes there.
void BcObject::repair(std::vector<BcMessage>& out) {
  if (!state_.active) return;
  if (state_.round == 0) {
    ++anomalies_;
    state_.round = 1;
  }
  if (state_.round > cfg_.round_cap && state_.decision.is_pending()) state_.decision = Outcome<bool>::error();
  for (auto& [r, rs] : state_.rounds) {
    if (r >= state_.round || r > cfg_.round_cap) break;
    BoolSet bin = rs.est.bin_values();
    if (!rs.est.state().my_value) {
      ++anomalies_;
      const bool v = bin.empty() ? state_.est : bin.contains(state_.est) ? state_.est : !state_.est;
      const BoolSet emit = rs.est.bv_broadcast(v);
      for (bool b : {false, true})
        if (emit.contains(b)) out.push_back({BcKind::Est, r, b});
      bin = rs.est.bin_values();
    }
    if (!bin.empty() && (!rs.my_aux || !bin.contains(*rs.my_aux))) {
      ++anomalies_;
      rs.my_aux = bin.contains(state_.est) ? state_.est : !state_.est;
      out.push_back({BcKind::Aux, r, *rs.my_aux});
    }
  }
}

void BcObject::advance(std::vector<BcMessage>& out) {
  while (state_.active && state_.round >= 1 && state_.round <= cfg_.round_cap) {
    const std::uint16_t r = state_.round;
    BcRound& rs = round_state(r);
    if (!rs.est.state().my_value) {
      const BoolSet emit = rs.est.bv_broadcast(state_.est);
      for (bool v : {false, true})
        if (emit.contains(v)) out.push_back({BcKind::Est, r, v});
    }
    const BoolSet bin = rs.est.bin_values();
    if (bin.empty()) return;
    if (!rs.my_aux || !bin.contains(*rs.my_aux)) {
      rs.my_aux = bin.contains(state_.est) ? state_.est : !state_.est;
      out.push_back({BcKind::Aux, r, *rs.my_aux});
    }
    std::size_t qualifying = 0;
    BoolSet vals;
    for (const auto& [who, v] : rs.aux) {
      if (bin.contains(v)) {
        ++qualifying;
        vals.insert(v);
      }
    }
    if (qualifying < th_.n_minus_t) return;

    const bool c = cfg_.coin(r);
    if (vals.size() == 1) {
      const bool b = vals.contains(true);
      state_.est = b;
      if (b == c) decide(b, out);
    } else {
      state_.est = c;
    }
    state_.round = static_cast<std::uint16_t>(r + 1);
    if (state_.round > cfg_.round_cap && state_.decision.is_pending()) state_.decision = Outcome<bool>::error();
  }
}

void BcObject::resend(std::vector<BcMessage>& out) const {
  for (const auto& [r, rs] : state_.rounds) {
    if (r > state_.round && !rs.est.state().relayed.bits()) continue;
    const BoolSet s = rs.est.resend();
    for (bool v : {false, true})
      if (s.contains(v)) out.push_back({BcKind::Est, r, v});
    if (rs.my_aux) out.push_back({BcKind::Aux, r, *rs.my_aux});
  }
  if (state_.decision.is_decided()) out.push_back({BcKind::Decide, 0, state_.decision.value()});
}

}  // namespace ssmvc
