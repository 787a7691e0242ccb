#include "ssmvc/bv.hpp"

namespace ssmvc {

BvObject::BvObject(NodeId self, SystemParams params) : self_(self), params_(params), th_(thresholds(params)) {
  reset();
}

void BvObject::reset() {
  state_ = BvState{};
  state_.received = {NodeSet(params_.n), NodeSet(params_.n)};
}

BoolSet BvObject::bv_broadcast(bool v) {
  if (!state_.my_value) {
    state_.my_value = v;
    state_.relayed.insert(v);
    return BoolSet::of(v);
  }
  if (*state_.my_value == v) return BoolSet::of(v);
  ++anomalies_;
  return {};
}

BoolSet BvObject::on_bv_message(NodeId from, bool v) {
  if (!params_.contains(from)) return {};
  auto& rx = state_.received[v ? 1 : 0];
  rx.insert(from);
  BoolSet emit;
  if (rx.count() >= th_.t_plus_1 && !state_.relayed.contains(v)) {
    state_.relayed.insert(v);
    emit.insert(v);
  }
  if (rx.count() >= th_.two_t_plus_1) state_.bin_values.insert(v);
  return emit;
}

BoolSet BvObject::resend() const {
  BoolSet s = BoolSet::from_bits(state_.relayed.bits() | state_.bin_values.bits());
  if (state_.my_value) s.insert(*state_.my_value);
  return s;
}

}  // namespace ssmvc
