#include "ssmvc/brb.hpp"

namespace ssmvc {

BrbInstance::BrbInstance(BrbTag tag, NodeId self, SystemParams params)
    : tag_(tag), self_(self), params_(params), th_(thresholds(params)) {}

BroadcastStatus BrbInstance::broadcast(const Bytes& payload, std::vector<BrbMessage>& out) {
  if (tag_.sender != self_) throw std::logic_error("brb broadcast by a node that is not the tag's sender");
  if (!state_.my_init) {
    state_.my_init = payload;
    out.push_back({BrbKind::Init, tag_, payload});
    return BroadcastStatus::Started;
  }
  if (*state_.my_init == payload) {
    out.push_back({BrbKind::Init, tag_, payload});
    return BroadcastStatus::Repeated;
  }
  ++anomalies_;
  return BroadcastStatus::Ignored;
}

void BrbInstance::on_message(NodeId from, const BrbMessage& msg, std::vector<BrbMessage>& out) {
  if (msg.tag != tag_) throw std::logic_error("brb message routed to the wrong instance");
  if (!params_.contains(from)) return;
  switch (msg.kind) {
    case BrbKind::Init:
      // Only the designated sender may start the broadcast; the first INIT seen wins.
      if (from != tag_.sender) return;
      if (!state_.echoed) {
        state_.echoed = msg.payload;
        out.push_back({BrbKind::Echo, tag_, msg.payload});
      }
      break;
    case BrbKind::Echo:
      state_.echoes[from] = msg.payload;
      break;
    case BrbKind::Ready:
      state_.readies[from] = msg.payload;
      break;
  }
  evaluate(out);
}

std::size_t BrbInstance::support(const std::map<NodeId, Bytes>& votes, const Bytes& p) const {
  std::size_t c = 0;
  for (const auto& [who, v] : votes)
    if (v == p) ++c;
  return c;
}

// Most supported payload, ties broken towards the smallest payload.
const Bytes* BrbInstance::strongest(const std::map<NodeId, Bytes>& votes) const {
  const Bytes* best = nullptr;
  std::size_t best_count = 0;
  for (const auto& [who, v] : votes) {
    const std::size_t c = support(votes, v);
    if (!best || c > best_count || (c == best_count && v < *best)) {
      best = &v;
      best_count = c;
    }
  }
  return best;
}

void BrbInstance::evaluate(std::vector<BrbMessage>& out) {
  if (!state_.readied) {
    const Bytes* echo_top = strongest(state_.echoes);
    const Bytes* ready_top = strongest(state_.readies);
    const Bytes* pick = nullptr;
    if (echo_top && support(state_.echoes, *echo_top) >= th_.echo_quorum)
      pick = echo_top;
    else if (ready_top && support(state_.readies, *ready_top) >= th_.t_plus_1)
      pick = ready_top;
    else if (ready_top && state_.readies.size() >= th_.n_minus_t)
      pick = ready_top;
    if (pick) {
      state_.readied = *pick;
      out.push_back({BrbKind::Ready, tag_, *pick});
    }
  }
  if (!state_.delivered) {
    const Bytes* ready_top = strongest(state_.readies);
    if (ready_top && (support(state_.readies, *ready_top) >= th_.two_t_plus_1 ||
                      state_.readies.size() >= th_.n_minus_t))
      state_.delivered = *ready_top;
  }
}

Outcome<Bytes> BrbInstance::deliver() const {
  if (state_.delivered) return Outcome<Bytes>::decided(*state_.delivered);
  return Outcome<Bytes>::pending();
}

void BrbInstance::resend(std::vector<BrbMessage>& out) const {
  if (state_.my_init) out.push_back({BrbKind::Init, tag_, *state_.my_init});
  if (state_.echoed) out.push_back({BrbKind::Echo, tag_, *state_.echoed});
  // A delivery without a READY only arises from a corrupted start; vouch for what was delivered
  // so that peers still waiting on this instance can finish.
  if (state_.readied) out.push_back({BrbKind::Ready, tag_, *state_.readied});
  else if (state_.delivered) out.push_back({BrbKind::Ready, tag_, *state_.delivered});
}

}  // namespace ssmvc
