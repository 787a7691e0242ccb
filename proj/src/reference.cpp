#include "ssmvc/reference.hpp"

#include <map>

namespace ssmvc {

ReferenceNode::ReferenceNode(NodeId self, MvcConfig cfg, std::uint32_t epoch)
    : self_(self),
      cfg_(std::move(cfg)),
      th_(thresholds(cfg_.params)),
      epoch_(epoch),
      bco_(self, cfg_.params,
           BcConfig{cfg_.round_cap, [this](std::uint16_t r) { return common_coin(cfg_.coin_seed, epoch_, r); }}),
      vbb_out_(cfg_.params.n) {
  for (Phase ph : {Phase::Init, Phase::Valid})
    for (std::size_t k = 0; k < cfg_.params.n; ++k)
      brb_[ph == Phase::Init ? 0 : 1].emplace_back(BrbTag{ph, NodeId{k}}, self_, cfg_.params);
  if (cfg_.resend_budget == 0) cfg_.resend_budget = default_resend_budget(cfg_.params.n);
}

void ReferenceNode::recycle(std::uint32_t new_epoch) {
  epoch_ = new_epoch;
  for (auto& v : brb_)
    for (auto& inst : v) inst.reset();
  bco_.reset();
  proposal_.reset();
  valid_sent_ = false;
  std::fill(vbb_out_.begin(), vbb_out_.end(), std::nullopt);
  same_value_.reset();
  decision_ = Outcome<Value>::pending();
  resend_cursor_ = 0;
}

void ReferenceNode::propose(const Value& v, Outbox& out) {
  if (!cfg_.values->contains(v.token)) throw std::invalid_argument("propose: value outside V: " + v.token);
  if (proposal_) return;
  proposal_ = v;
  std::vector<BrbMessage> msgs;
  brb(Phase::Init, self_).broadcast(encode_value_pair(self_, v.token), msgs);
  for (const auto& m : msgs) out.broadcast(Protocol::Brb, encode(m));
}

namespace {

const ValuePair* as_value(const std::optional<Pair>& p) { return p ? std::get_if<ValuePair>(&*p) : nullptr; }

}  // namespace

std::size_t ReferenceNode::init_delivered() const {
  std::size_t c = 0;
  for (const auto& inst : brb_[0])
    if (inst.state().delivered) ++c;
  return c;
}

std::size_t ReferenceNode::init_equal(std::string_view v) const {
  std::size_t c = 0;
  for (const auto& inst : brb_[0]) {
    if (!inst.state().delivered) continue;
    const auto p = parse_pair(*inst.state().delivered);
    const auto* vp = as_value(p);
    if (vp && vp->token == v) ++c;
  }
  return c;
}

std::size_t ReferenceNode::init_differ(std::string_view v) const { return init_delivered() - init_equal(v); }

void ReferenceNode::progress(Outbox& out) {
  std::vector<BrbMessage> msgs;
  if (proposal_ && !valid_sent_ && init_delivered() >= th_.n_minus_t) {
    valid_sent_ = true;
    const bool x = init_equal(proposal_->token) >= th_.n_minus_2t;
    brb(Phase::Valid, self_).broadcast(encode_flag_pair(self_, x ? 1 : 0), msgs);
  }
  for (const auto& m : msgs) out.broadcast(Protocol::Brb, encode(m));

  std::size_t outputs = 0;
  for (std::size_t j = 0; j < cfg_.params.n; ++j) {
    auto& slot = vbb_out_[j];
    if (!slot) {
      const auto& ini = brb_[0][j].state().delivered;
      const auto& val = brb_[1][j].state().delivered;
      if (ini && val) {
        const auto ip = parse_pair(*ini);
        const auto vp = parse_pair(*val);
        const auto* v = as_value(ip);
        const FlagPair* f = vp ? std::get_if<FlagPair>(&*vp) : nullptr;
        if (!v || !f || f->flag > 1 || v->origin.index() != j || f->origin.index() != j ||
            !cfg_.values->contains(v->token)) {
          slot = Outcome<Value>::error();
        } else if (f->flag == 1) {
          if (init_equal(v->token) >= th_.n_minus_2t) slot = Outcome<Value>::decided(Value{v->token});
        } else if (init_differ(v->token) >= th_.t_plus_1) {
          slot = Outcome<Value>::error();
        }
      }
    }
    if (slot) ++outputs;
  }

  std::map<std::string, std::size_t> counts;
  for (const auto& s : vbb_out_)
    if (s && s->is_decided()) ++counts[s->value().token];

  if (!same_value_ && outputs >= th_.n_minus_t) {
    same_value_ = counts.size() == 1 && counts.begin()->second >= th_.n_minus_2t;
    for (const auto& m : bco_.bc_propose(*same_value_)) out.broadcast(Protocol::Bc, encode(m));
  }

  if (decision_.is_pending()) {
    const auto bc = bco_.bc_result();
    if (bc.is_error() || (bc.is_decided() && !bc.value())) {
      decision_ = Outcome<Value>::error();
    } else if (bc.is_decided()) {
      for (const auto& [v, c] : counts)
        if (c >= th_.n_minus_2t) {
          decision_ = Outcome<Value>::decided(Value{v});
          break;
        }
    }
  }
}

void ReferenceNode::receive(const Envelope& env, Outbox& out) {
  if (env.epoch != epoch_) return;
  if (env.protocol == Protocol::Brb) {
    const auto m = decode_brb(env.body);
    if (!m || !cfg_.params.contains(m->tag.sender)) return;
    std::vector<BrbMessage> msgs;
    brb(m->tag.phase, m->tag.sender).on_message(env.src, *m, msgs);
    for (const auto& x : msgs) out.broadcast(Protocol::Brb, encode(x));
  } else if (env.protocol == Protocol::Bc) {
    const auto m = decode_bc(env.body);
    if (!m) return;
    for (const auto& x : bco_.on_bc_message(env.src, *m)) out.broadcast(Protocol::Bc, encode(x));
  } else {
    return;
  }
  progress(out);
}

void ReferenceNode::tick(Outbox& out) {
  progress(out);
  for (const auto& m : bco_.tick()) out.broadcast(Protocol::Bc, encode(m));

  // Same retransmission discipline as the self-stabilizing stack, so both see equally
  // reliable channels.
  std::vector<Outgoing> all;
  std::vector<BrbMessage> brb;
  for (const auto& phase : brb_)
    for (const auto& inst : phase) inst.resend(brb);
  for (const auto& m : brb) all.push_back({std::nullopt, Protocol::Brb, epoch_, encode(m)});
  std::vector<BcMessage> bc;
  bco_.resend(bc);
  for (const auto& m : bc) all.push_back({std::nullopt, Protocol::Bc, epoch_, encode(m)});
  if (all.empty()) return;
  const std::size_t n = cfg_.params.n;
  const std::size_t slots = all.size() * n;
  for (std::size_t b = 0; b < cfg_.resend_budget && b < slots; ++b) {
    const std::size_t at = (resend_cursor_ + b) % slots;
    out.send(NodeId{at % n}, all[at / n].protocol, all[at / n].body);
  }
  resend_cursor_ = (resend_cursor_ + cfg_.resend_budget) % slots;
}

}  // namespace ssmvc
