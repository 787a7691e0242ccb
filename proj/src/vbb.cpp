#include "ssmvc/vbb.hpp"

namespace ssmvc {

const char* rule_name(VbbRule r) {
  switch (r) {
    case VbbRule::ValidWithoutInit: return "valid-without-init";
    case VbbRule::ForeignPair: return "foreign-pair";
    case VbbRule::Undelivered: return "undelivered";
    case VbbRule::Malformed: return "malformed";
    case VbbRule::Accepted: return "accepted";
    case VbbRule::Rejected: return "rejected";
    case VbbRule::ValidQuorum: return "valid-quorum";
    case VbbRule::Waiting: return "waiting";
  }
  return "?";
}

VbbLayer::VbbLayer(NodeId self, SystemParams params, std::shared_ptr<const ValueSet> values)
    : self_(self), params_(params), th_(thresholds(params)), values_(std::move(values)) {
  if (!values_) throw std::invalid_argument("VbbLayer needs a value set");
  for (Phase ph : {Phase::Init, Phase::Valid}) {
    auto& v = brb_[idx(ph)];
    v.reserve(params_.n);
    for (std::size_t k = 0; k < params_.n; ++k) v.emplace_back(BrbTag{ph, NodeId{k}}, self_, params_);
  }
}

void VbbLayer::reset() {
  for (auto& v : brb_)
    for (auto& inst : v) inst.reset();
}

void VbbLayer::vbb_broadcast(const Value& v, std::vector<BrbMessage>& out) {
  if (!values_->contains(v.token)) throw std::invalid_argument("vbb_broadcast: value outside V: " + v.token);
  brb(Phase::Init, self_).broadcast(encode_value_pair(self_, v.token), out);
}

void VbbLayer::on_brb(NodeId from, const BrbMessage& m, std::vector<BrbMessage>& out) {
  if (!params_.contains(m.tag.sender) || !params_.contains(from)) return;
  brb(m.tag.phase, m.tag.sender).on_message(from, m, out);
}

std::size_t VbbLayer::delivered_count(Phase phase) const {
  std::size_t c = 0;
  for (const auto& inst : brb_[idx(phase)])
    if (inst.state().delivered) ++c;
  return c;
}

bool VbbLayer::vbb_echo(Phase phase) const { return delivered_count(phase) >= th_.n_minus_t; }

namespace {

bool carries_value(const Bytes& payload, std::string_view v) {
  const auto pair = parse_pair(payload);
  if (!pair) return false;
  const auto* vp = std::get_if<ValuePair>(&*pair);
  return vp && vp->token == v;
}

}  // namespace

bool VbbLayer::vbb_eq(std::string_view v) const {
  std::size_t c = 0;
  for (const auto& inst : brb_[0])
    if (inst.state().delivered && carries_value(*inst.state().delivered, v)) ++c;
  return c >= th_.n_minus_2t;
}

bool VbbLayer::vbb_diff(std::string_view v) const {
  std::size_t c = 0;
  for (const auto& inst : brb_[0])
    if (inst.state().delivered && !carries_value(*inst.state().delivered, v)) ++c;
  return c >= th_.t_plus_1;
}

VbbVerdict VbbLayer::explain(NodeId k) const {
  const auto& init = brb(Phase::Init, k);
  const auto& valid = brb(Phase::Valid, k);
  if (!init.active() && valid.active()) return {Outcome<Value>::error(), VbbRule::ValidWithoutInit};

  for (const auto& phase : brb_)
    for (std::size_t j = 0; j < params_.n; ++j) {
      const auto& d = phase[j].state().delivered;
      if (!d) continue;
      const auto pair = parse_pair(*d);
      if (pair && pair_origin(*pair).index() != j) return {Outcome<Value>::error(), VbbRule::ForeignPair};
    }

  if (!init.state().delivered || !valid.state().delivered) return {Outcome<Value>::pending(), VbbRule::Undelivered};

  const auto ip = parse_pair(*init.state().delivered);
  const auto vp = parse_pair(*valid.state().delivered);
  const ValuePair* value = ip ? std::get_if<ValuePair>(&*ip) : nullptr;
  const FlagPair* flag = vp ? std::get_if<FlagPair>(&*vp) : nullptr;
  if (!value || !flag || flag->flag > 1 || !values_->contains(value->token))
    return {Outcome<Value>::error(), VbbRule::Malformed};

  const bool x = flag->flag == 1;
  if (x && vbb_eq(value->token)) return {Outcome<Value>::decided(Value{value->token}), VbbRule::Accepted};
  if (!x && vbb_diff(value->token)) return {Outcome<Value>::error(), VbbRule::Rejected};
  if (vbb_echo(Phase::Valid)) return {Outcome<Value>::error(), VbbRule::ValidQuorum};
  return {Outcome<Value>::pending(), VbbRule::Waiting};
}

std::vector<Outcome<Value>> VbbLayer::outcomes() const {
  std::vector<Outcome<Value>> out;
  out.reserve(params_.n);
  for (std::size_t k = 0; k < params_.n; ++k) out.push_back(vbb_deliver(NodeId{k}));
  return out;
}

void VbbLayer::vbb_tick(std::vector<BrbMessage>& out) {
  const auto& own = brb(Phase::Init, self_).state().delivered;
  if (!own || !vbb_echo(Phase::Init)) return;
  auto& valid = brb(Phase::Valid, self_);
  // Once an opinion is out, BRB keeps the first one; periodic resend covers retransmission.
  if (valid.state().my_init) return;
  const auto pair = parse_pair(*own);
  const ValuePair* vp = pair ? std::get_if<ValuePair>(&*pair) : nullptr;
  const bool x = vp && vbb_eq(vp->token);
  valid.broadcast(encode_flag_pair(self_, x ? 1 : 0), out);
}

void VbbLayer::resend(std::vector<BrbMessage>& out) const {
  for (const auto& phase : brb_)
    for (const auto& inst : phase) inst.resend(out);
}

}  // namespace ssmvc
