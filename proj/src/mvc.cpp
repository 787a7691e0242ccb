#include "ssmvc/mvc.hpp"

#include <map>

namespace ssmvc {

std::size_t default_resend_budget(std::size_t n) { return n < 8 ? 1 : n / 4; }

MvcNode::MvcNode(NodeId self, MvcConfig cfg, std::uint32_t epoch)
    : self_(self),
      cfg_(std::move(cfg)),
      th_(thresholds(cfg_.params)),
      epoch_(epoch),
      vbb_(self, cfg_.params, cfg_.values),
      bvo_(self, cfg_.params),
      bco_(self, cfg_.params,
           BcConfig{cfg_.round_cap, [this](std::uint16_t r) { return common_coin(cfg_.coin_seed, epoch_, r); }}) {
  if (!cfg_.params.contains(self)) throw std::out_of_range("MvcNode: node id out of range");
  if (cfg_.resend_budget == 0) cfg_.resend_budget = default_resend_budget(cfg_.params.n);
}

void MvcNode::recycle(std::uint32_t new_epoch) {
  epoch_ = new_epoch;
  vbb_.reset();
  bvo_.reset();
  bco_.reset();
  proposal_.reset();
  latched_.reset();
  resend_cursor_ = 0;
}

void MvcNode::propose(const Value& v, Outbox& out) {
  if (!cfg_.values->contains(v.token)) throw std::invalid_argument("propose: value outside V: " + v.token);
  if (proposal_ && *proposal_ != v) {
    ++anomalies_;
    return;
  }
  proposal_ = v;
  std::vector<BrbMessage> msgs;
  vbb_.vbb_broadcast(v, msgs);
  emit_brb(msgs, out);
}

bool MvcNode::mc_echo() const {
  std::size_t c = 0;
  for (std::size_t k = 0; k < cfg_.params.n; ++k)
    if (!vbb_.vbb_deliver(NodeId{k}).is_pending()) ++c;
  return c >= th_.n_minus_t;
}

std::optional<Value> MvcNode::supported_value() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& o : vbb_.outcomes())
    if (o.is_decided()) ++counts[o.value().token];
  for (const auto& [v, c] : counts)
    if (c >= th_.n_minus_2t) return Value{v};
  return std::nullopt;
}

bool MvcNode::same_value() const {
  std::map<std::string, std::size_t> counts;
  for (const auto& o : vbb_.outcomes())
    if (o.is_decided()) ++counts[o.value().token];
  return counts.size() == 1 && counts.begin()->second >= th_.n_minus_2t;
}

Outcome<Value> MvcNode::result() const {
  const auto bc = bco_.bc_result();
  if (!bco_.active() || bc.is_pending()) return Outcome<Value>::pending();
  if (bc.is_error() || !bc.value()) return Outcome<Value>::error();
  if (auto v = supported_value()) return Outcome<Value>::decided(*v);
  if (mc_echo() || !bvo_.bin_values().contains(true)) return Outcome<Value>::error();
  return Outcome<Value>::pending();
}

void MvcNode::emit_brb(std::vector<BrbMessage>& msgs, Outbox& out) const {
  for (const auto& m : msgs) out.broadcast(Protocol::Brb, encode(m));
  msgs.clear();
}

void MvcNode::emit_bc(const std::vector<BcMessage>& msgs, Outbox& out) const {
  for (const auto& m : msgs) out.broadcast(Protocol::Bc, encode(m));
}

void MvcNode::emit_bv(BoolSet values, Outbox& out) const {
  for (bool v : {false, true})
    if (values.contains(v)) out.broadcast(Protocol::Bv, encode(BvMessage{v}));
}

void MvcNode::receive(const Envelope& env, Outbox& out) {
  if (env.epoch != epoch_) {
    ++stale_;
    return;
  }
  switch (env.protocol) {
    case Protocol::Brb: {
      auto m = decode_brb(env.body);
      if (!m) return;
      std::vector<BrbMessage> msgs;
      vbb_.on_brb(env.src, *m, msgs);
      emit_brb(msgs, out);
      break;
    }
    case Protocol::Bv: {
      auto m = decode_bv(env.body);
      if (!m) return;
      emit_bv(bvo_.on_bv_message(env.src, m->value), out);
      break;
    }
    case Protocol::Bc: {
      auto m = decode_bc(env.body);
      if (!m) return;
      emit_bc(bco_.on_bc_message(env.src, *m), out);
      break;
    }
  }
}

std::vector<Outgoing> MvcNode::contributions() const {
  std::vector<Outgoing> all;
  std::vector<BrbMessage> brb;
  vbb_.resend(brb);
  for (const auto& m : brb) all.push_back({std::nullopt, Protocol::Brb, epoch_, encode(m)});
  const BoolSet bv = bvo_.resend();
  for (bool v : {false, true})
    if (bv.contains(v)) all.push_back({std::nullopt, Protocol::Bv, epoch_, encode(BvMessage{v})});
  std::vector<BcMessage> bc;
  bco_.resend(bc);
  for (const auto& m : bc) all.push_back({std::nullopt, Protocol::Bc, epoch_, encode(m)});
  return all;
}

void MvcNode::tick(Outbox& out) {
  std::vector<BrbMessage> msgs;
  vbb_.vbb_tick(msgs);
  emit_brb(msgs, out);

  if (mc_echo()) {
    if (!latched_) latched_ = same_value();
    if (!bco_.active()) emit_bc(bco_.bc_propose(*latched_), out);
    // Repeats are left to the throttled retransmission below.
    const bool first = !bvo_.state().my_value;
    const BoolSet emit = bvo_.bv_broadcast(*latched_);
    if (first) emit_bv(emit, out);
  }
  emit_bc(bco_.tick(), out);

  // Retransmission walks (contribution, destination) pairs round-robin, a few per iteration.
  auto all = contributions();
  if (all.empty()) return;
  const std::size_t n = cfg_.params.n;
  const std::size_t slots = all.size() * n;
  for (std::size_t b = 0; b < cfg_.resend_budget && b < slots; ++b) {
    const std::size_t at = (resend_cursor_ + b) % slots;
    auto& c = all[at / n];
    out.send(NodeId{at % n}, c.protocol, c.body);
  }
  resend_cursor_ = (resend_cursor_ + cfg_.resend_budget) % slots;
}

}  // namespace ssmvc
