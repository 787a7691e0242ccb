#include "ssmvc/simnet.hpp"

#include "json.hpp"

namespace ssmvc {

std::size_t RandomPolicy::choose(const std::vector<Action>& enabled, Rng& rng) {
  std::uint64_t total = 0;
  for (const auto& a : enabled) total += a.kind == ActionKind::Deliver ? a.weight * scale_ : a.weight;
  std::uint64_t pick = rng.below(total);
  for (std::size_t i = 0; i < enabled.size(); ++i) {
    const auto& a = enabled[i];
    const std::uint64_t w = a.kind == ActionKind::Deliver ? a.weight * scale_ : a.weight;
    if (pick < w) return i;
    pick -= w;
  }
  return enabled.size() - 1;
}

std::size_t StarvePolicy::choose(const std::vector<Action>& enabled, Rng& rng) {
  std::vector<Action> others;
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < enabled.size(); ++i) {
    const auto& a = enabled[i];
    if (a.src == target_ || a.dst == target_) continue;
    others.push_back(a);
    index.push_back(i);
  }
  if (others.empty()) return inner_.choose(enabled, rng);
  return index[inner_.choose(others, rng)];
}

std::string to_jsonl(const TraceRecord& r) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["kind"] = r.kind;
  j["src"] = r.src ? nlohmann::ordered_json(r.src->index()) : nlohmann::ordered_json(nullptr);
  j["dst"] = r.dst ? nlohmann::ordered_json(r.dst->index()) : nlohmann::ordered_json(nullptr);
  j["protocol"] = r.protocol ? nlohmann::ordered_json(protocol_name(*r.protocol))
                             : nlohmann::ordered_json(nullptr);
  j["summary"] = r.summary;
  return j.dump();
}

SimWorld::SimWorld(WorldConfig cfg, std::unique_ptr<SchedulePolicy> policy)
    : cfg_(cfg),
      policy_(policy ? std::move(policy) : std::make_unique<RandomPolicy>()),
      rng_(derive_seed(cfg.seed, 0x5C4ED)),
      procs_(cfg.params.n),
      channels_(cfg.params.n * cfg.params.n),
      waited_(cfg.params.n * cfg.params.n + cfg.params.n, 0),
      was_enabled_(waited_.size(), 0) {
  cfg_.params.validate();
  if (cfg_.channel_capacity == 0) throw std::invalid_argument("channel capacity must be positive");
  threshold_ = cfg_.starvation_threshold ? cfg_.starvation_threshold : n() * n();
}

void SimWorld::set_process(NodeId id, std::unique_ptr<Process> p) {
  if (!cfg_.params.contains(id)) throw std::out_of_range("set_process: node id out of range");
  procs_[id.index()] = std::move(p);
}

Process& SimWorld::process(NodeId id) { return *procs_.at(id.index()); }
const Process& SimWorld::process(NodeId id) const { return *procs_.at(id.index()); }

const std::deque<Envelope>& SimWorld::channel(NodeId src, NodeId dst) const {
  return channels_.at(src.index() * n() + dst.index());
}

std::deque<Envelope>& SimWorld::channel_mut(NodeId src, NodeId dst) {
  return channels_.at(src.index() * n() + dst.index());
}

std::size_t SimWorld::in_flight() const {
  std::size_t total = 0;
  for (const auto& c : channels_) total += c.size();
  return total;
}

void SimWorld::note(TraceRecord r) {
  if (trace_) trace_(r);
}

bool SimWorld::enqueue(Envelope env) {
  if (!cfg_.params.contains(env.src) || !cfg_.params.contains(env.dst))
    throw std::out_of_range("enqueue: endpoint out of range");
  auto& ch = channels_[env.src.index() * n() + env.dst.index()];
  if (ch.size() >= cfg_.channel_capacity) {
    ++stats_.drops;
    if (trace_) trace_({steps_, "drop", env.src, env.dst, env.protocol, describe(env)});
    return false;
  }
  ch.push_back(std::move(env));
  return true;
}

void SimWorld::route(NodeId from, Outbox& out) {
  for (auto& o : out.items()) {
    if (o.dst) {
      if (!cfg_.params.contains(*o.dst)) continue;
      enqueue(Envelope{from, *o.dst, o.protocol, o.epoch, std::move(o.body)});
    } else {
      for (std::size_t d = 0; d < n(); ++d) enqueue(Envelope{from, NodeId{d}, o.protocol, o.epoch, o.body});
    }
  }
  out.items().clear();
}

void SimWorld::collect_enabled() {
  enabled_.clear();
  for (std::size_t s = 0; s < n(); ++s)
    for (std::size_t d = 0; d < n(); ++d) {
      const std::size_t id = s * n() + d;
      if (!channels_[id].empty())
        enabled_.push_back({ActionKind::Deliver, id, NodeId{s}, NodeId{d}, channels_[id].size(), waited_[id]});
    }
  for (std::size_t i = 0; i < n(); ++i) {
    const std::size_t id = n() * n() + i;
    if (procs_[i] && procs_[i]->loop_enabled())
      enabled_.push_back({ActionKind::Loop, id, NodeId{i}, NodeId{i}, 1, waited_[id]});
  }
}

StepInfo SimWorld::step() {
  collect_enabled();
  StepInfo info;
  if (enabled_.empty()) {
    info.quiescent = true;
    return info;
  }

  std::size_t chosen = enabled_.size();
  std::uint64_t longest = 0;
  for (std::size_t i = 0; i < enabled_.size(); ++i) {
    if (enabled_[i].waited >= threshold_ && enabled_[i].waited > longest) {
      longest = enabled_[i].waited;
      chosen = i;
    }
  }
  if (chosen < enabled_.size()) {
    info.forced = true;
    ++stats_.forced;
  } else {
    chosen = policy_->choose(enabled_, rng_);
  }
  const Action act = enabled_[chosen];

  // Every enabled action that does not fire waits one more step; disabled ones reset.
  std::fill(was_enabled_.begin(), was_enabled_.end(), 0);
  for (const auto& a : enabled_) was_enabled_[a.id] = 1;
  for (std::size_t id = 0; id < waited_.size(); ++id) {
    if (id == act.id || !was_enabled_[id]) {
      waited_[id] = 0;
    } else {
      ++waited_[id];
      if (waited_[id] > stats_.max_wait) stats_.max_wait = waited_[id];
    }
  }

  ++steps_;
  info.kind = act.kind;
  if (act.kind == ActionKind::Deliver) {
    auto& ch = channels_[act.id];
    Envelope env = std::move(ch.front());
    ch.pop_front();
    ++stats_.deliveries;
    info.node = env.dst;
    if (trace_) trace_({steps_, "deliver", env.src, env.dst, env.protocol, describe(env)});
    Process& p = *procs_[env.dst.index()];
    Outbox out(p.epoch());
    p.receive(env, out);
    route(env.dst, out);
    info.delivered = std::move(env);
  } else {
    ++stats_.loops;
    info.node = act.src;
    if (trace_) trace_({steps_, "loop", act.src, act.src, std::nullopt, "tick"});
    Process& p = *procs_[act.src.index()];
    Outbox out(p.epoch());
    p.tick(out);
    route(act.src, out);
  }
  if (observer_) observer_(info);
  return info;
}

RunResult SimWorld::run_until(const std::function<bool()>& pred, std::uint64_t max_steps) {
  RunResult r;
  while (true) {
    if (pred()) {
      r.satisfied = true;
      return r;
    }
    if (r.steps >= max_steps) return r;
    const StepInfo info = step();
    if (info.quiescent) {
      r.quiescent = true;
      r.satisfied = pred();
      return r;
    }
    ++r.steps;
  }
}

void SimWorld::advance_epoch(std::uint32_t new_epoch) {
  epoch_ = new_epoch;
  std::size_t purged = 0;
  for (auto& ch : channels_) {
    const auto before = ch.size();
    std::erase_if(ch, [&](const Envelope& e) { return e.epoch != new_epoch; });
    purged += before - ch.size();
  }
  for (auto& p : procs_)
    if (p) p->recycle(new_epoch);
  std::fill(waited_.begin(), waited_.end(), 0);
  if (trace_)
    trace_({steps_, "recycle", std::nullopt, std::nullopt, std::nullopt,
            "epoch " + std::to_string(new_epoch) + " purged " + std::to_string(purged)});
}

}  // namespace ssmvc
