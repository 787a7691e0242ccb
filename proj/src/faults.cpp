#include "ssmvc/faults.hpp"

#include "ssmvc/state.hpp"

namespace ssmvc {

ByzantineStrategy ByzantineStrategy::equivocate(Value a, Value b) {
  ByzantineStrategy s;
  s.kind = StrategyKind::Equivocate;
  s.v1 = std::move(a);
  s.v2 = std::move(b);
  return s;
}

ByzantineStrategy ByzantineStrategy::fake_valid(bool x) {
  ByzantineStrategy s;
  s.kind = StrategyKind::FakeValid;
  s.flag = x;
  return s;
}

ByzantineStrategy ByzantineStrategy::collusion(Value v) {
  ByzantineStrategy s;
  s.kind = StrategyKind::Collusion;
  s.value = std::move(v);
  return s;
}

ByzantineStrategy ByzantineStrategy::random_noise(std::uint64_t seed) {
  ByzantineStrategy s;
  s.kind = StrategyKind::RandomNoise;
  s.seed = seed;
  return s;
}

std::string ByzantineStrategy::name() const {
  switch (kind) {
    case StrategyKind::Silent: return "silent";
    case StrategyKind::Equivocate: return "equivocate(" + v1.token + "," + v2.token + ")";
    case StrategyKind::FakeValid: return flag ? "fake_valid(true)" : "fake_valid(false)";
    case StrategyKind::Collusion: return "collusion(" + value.token + ")";
    case StrategyKind::RandomNoise: return "random_noise(" + std::to_string(seed) + ")";
  }
  return "?";
}

ByzantineNode::ByzantineNode(NodeId self, ByzantineStrategy strategy, MvcConfig cfg, std::optional<Value> proposal,
                             std::uint32_t epoch)
    : self_(self),
      strategy_(std::move(strategy)),
      cfg_(std::move(cfg)),
      proposal_(std::move(proposal)),
      epoch_(epoch),
      rng_(derive_seed(strategy_.seed, 0xB12 + self.index())) {
  const ValueSet& vs = *cfg_.values;
  switch (strategy_.kind) {
    case StrategyKind::Equivocate:
      if (!vs.contains(strategy_.v1.token) || !vs.contains(strategy_.v2.token))
        throw std::invalid_argument("equivocate values must be in V");
      proposal_ = strategy_.v1;
      break;
    case StrategyKind::Collusion:
      if (!vs.contains(strategy_.value.token)) throw std::invalid_argument("collusion value must be in V");
      proposal_ = strategy_.value;
      break;
    case StrategyKind::FakeValid:
      if (!proposal_ || !vs.contains(proposal_->token)) {
        if (vs.tokens().empty()) throw std::invalid_argument("empty value set");
        proposal_ = Value{vs.tokens().front()};
      }
      break;
    default:
      break;
  }
  if (strategy_.kind != StrategyKind::Silent && strategy_.kind != StrategyKind::RandomNoise)
    inner_ = std::make_unique<MvcNode>(self_, cfg_, epoch_);
}

void ByzantineNode::rewrite(Outbox& inner, Outbox& out) {
  const std::size_t n = cfg_.params.n;
  for (auto& o : inner.items()) {
    if (o.protocol != Protocol::Brb) {
      out.push(std::move(o));
      continue;
    }
    auto m = decode_brb(o.body);
    if (!m || m->tag.sender != self_) {
      out.push(std::move(o));
      continue;
    }
    if (strategy_.kind == StrategyKind::Equivocate && m->tag.phase == Phase::Init) {
      for (std::size_t d = 0; d < n; ++d) {
        if (o.dst && o.dst->index() != d) continue;
        BrbMessage forged = *m;
        forged.payload = encode_value_pair(self_, d < n / 2 ? strategy_.v1.token : strategy_.v2.token);
        out.send(NodeId{d}, Protocol::Brb, encode(forged));
      }
      continue;
    }
    if (strategy_.kind == StrategyKind::FakeValid && m->tag.phase == Phase::Valid) {
      m->payload = encode_flag_pair(self_, strategy_.flag ? 1 : 0);
      o.body = encode(*m);
    }
    out.push(std::move(o));
  }
  inner.items().clear();
}

void ByzantineNode::start(Outbox& out) {
  early_valid_sent_ = false;
  if (!inner_) return;
  Outbox tmp(epoch_);
  inner_->propose(*proposal_, tmp);
  rewrite(tmp, out);
}

void ByzantineNode::receive(const Envelope& env, Outbox& out) {
  if (strategy_.kind == StrategyKind::RandomNoise) {
    if (rng_.chance(1, 3)) {
      const NodeId dst{rng_.below(cfg_.params.n)};
      Envelope e = random_envelope(rng_, cfg_.params, self_, dst, epoch_, *cfg_.values);
      out.send(dst, e.protocol, std::move(e.body));
    }
    return;
  }
  if (!inner_) return;
  Outbox tmp(epoch_);
  inner_->receive(env, tmp);
  rewrite(tmp, out);
}

void ByzantineNode::tick(Outbox& out) {
  if (strategy_.kind == StrategyKind::RandomNoise) {
    for (int i = 0; i < 2; ++i) {
      const NodeId dst{rng_.below(cfg_.params.n)};
      Envelope e = random_envelope(rng_, cfg_.params, self_, dst, epoch_, *cfg_.values);
      out.send(dst, e.protocol, std::move(e.body));
    }
    return;
  }
  if (!inner_) return;
  if (strategy_.kind == StrategyKind::FakeValid && !early_valid_sent_) {
    // Announce the forged opinion before the honest part would have formed one.
    early_valid_sent_ = true;
    out.broadcast(Protocol::Brb, encode(BrbMessage{BrbKind::Init, BrbTag{Phase::Valid, self_},
                                                   encode_flag_pair(self_, strategy_.flag ? 1 : 0)}));
  }
  Outbox tmp(epoch_);
  inner_->tick(tmp);
  rewrite(tmp, out);
}

void ByzantineNode::recycle(std::uint32_t new_epoch) {
  epoch_ = new_epoch;
  if (inner_) inner_->recycle(new_epoch);
}

Envelope random_envelope(Rng& rng, const SystemParams& params, NodeId src, NodeId dst, std::uint32_t epoch,
                         const ValueSet& values) {
  Envelope e;
  e.src = src;
  e.dst = dst;
  e.epoch = epoch;
  const auto n = params.n;
  auto token = [&]() -> std::string {
    if (!values.tokens().empty() && rng.chance(4, 5)) return values.tokens()[rng.below(values.size())];
    return "~" + std::to_string(rng.below(100));
  };
  switch (rng.below(3)) {
    case 0: {
      e.protocol = Protocol::Brb;
      BrbMessage m;
      m.kind = static_cast<BrbKind>(1 + rng.below(3));
      m.tag.phase = rng.coin() ? Phase::Init : Phase::Valid;
      m.tag.sender = rng.coin() ? src : NodeId{rng.below(n)};
      const NodeId origin = rng.chance(7, 10) ? m.tag.sender : NodeId{rng.below(n)};
      switch (rng.below(4)) {
        case 0:
        case 1:
          m.payload = m.tag.phase == Phase::Init ? encode_value_pair(origin, token())
                                                 : encode_flag_pair(origin, static_cast<std::uint8_t>(rng.below(2)));
          break;
        case 2:
          m.payload = rng.coin() ? encode_value_pair(origin, token())
                                 : encode_flag_pair(origin, static_cast<std::uint8_t>(rng.below(256)));
          break;
        default:
          m.payload.resize(rng.below(9));
          for (auto& b : m.payload) b = static_cast<std::uint8_t>(rng.below(256));
      }
      e.body = encode(m);
      break;
    }
    case 1:
      e.protocol = Protocol::Bv;
      e.body = Bytes{1, static_cast<std::uint8_t>(rng.below(3))};
      break;
    default: {
      e.protocol = Protocol::Bc;
      BcMessage m;
      m.kind = static_cast<BcKind>(1 + rng.below(3));
      m.round = static_cast<std::uint16_t>(1 + rng.below(4));
      m.value = rng.coin();
      e.body = encode(m);
    }
  }
  return e;
}

std::vector<NodeId> apply_injection(SimWorld& world, const InjectionPlan& plan, std::uint64_t epoch_start_step) {
  if (world.steps() != epoch_start_step) throw InjectionError("injection is only allowed at the first step of an epoch");
  const auto& params = world.params();

  std::vector<NodeId> targets;
  if (plan.all_correct) {
    for (std::size_t i = 0; i < params.n; ++i)
      if (world.process_as<MvcNode>(NodeId{i})) targets.emplace_back(i);
  } else {
    targets = plan.targets;
  }
  for (auto id : targets) {
    if (!params.contains(id)) throw InjectionError("injection target out of range: " + std::to_string(id.index()));
    if (!world.process_as<MvcNode>(id))
      throw InjectionError("injection target " + std::to_string(id.index()) + " is not a correct node");
  }

  for (auto id : targets) {
    auto* node = world.process_as<MvcNode>(id);
    for (const auto& mut : plan.mutations) {
      if (const auto* f = std::get_if<FieldMutation>(&mut)) {
        try {
          set_state_field(*node, f->path, f->value);
        } catch (const StateError& e) {
          throw InjectionError(std::string("node ") + std::to_string(id.index()) + ": " + e.what());
        }
        world.note({world.steps(), "inject", id, id, std::nullopt, "set " + f->path + " = " + f->value.dump()});
      } else {
        const auto& r = std::get<RandomizeMutation>(mut);
        Rng rng(derive_seed(r.seed, 0x1A7E + id.index()));
        randomize_state(*node, rng);
        world.note({world.steps(), "inject", id, id, std::nullopt, "randomize " + std::to_string(r.seed)});
      }
    }
  }

  for (const auto& c : plan.channels) {
    if (!params.contains(c.src) || !params.contains(c.dst)) throw InjectionError("channel preload endpoint out of range");
    Envelope e{c.src, c.dst, c.protocol, c.epoch.value_or(world.epoch()), c.body};
    const std::string what = describe(e);
    if (!world.enqueue(std::move(e))) throw InjectionError("channel preload exceeds capacity");
    world.note({world.steps(), "inject", c.src, c.dst, c.protocol, "preload " + what});
  }

  if (plan.noise) {
    Rng rng(derive_seed(plan.noise->seed, 0xC4A7));
    const auto per = std::min(plan.noise->per_channel, world.config().channel_capacity);
    const auto* any = world.process_as<MvcNode>(targets.empty() ? NodeId{0} : targets.front());
    std::shared_ptr<const ValueSet> values = any ? any->vbb().value_set() : std::make_shared<const ValueSet>();
    for (std::size_t s = 0; s < params.n; ++s)
      for (std::size_t d = 0; d < params.n; ++d)
        for (std::size_t k = 0; k < per; ++k) {
          if (world.channel(NodeId{s}, NodeId{d}).size() >= world.config().channel_capacity) break;
          world.enqueue(random_envelope(rng, params, NodeId{s}, NodeId{d}, world.epoch(), *values));
        }
    world.note({world.steps(), "inject", std::nullopt, std::nullopt, std::nullopt,
                "channel noise " + std::to_string(per) + " per channel"});
  }
  return targets;
}

}  // namespace ssmvc
