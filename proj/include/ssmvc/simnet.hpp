#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ssmvc/core.hpp"
#include "ssmvc/rng.hpp"
#include "ssmvc/wire.hpp"

namespace ssmvc {

class Process {
 public:
  virtual ~Process() = default;
  virtual void receive(const Envelope& env, Outbox& out) = 0;
  virtual void tick(Outbox& out) = 0;
  virtual std::uint32_t epoch() const = 0;
  virtual void recycle(std::uint32_t new_epoch) = 0;
  virtual bool loop_enabled() const { return true; }
};

enum class ActionKind : std::uint8_t { Deliver, Loop };

struct Action {
  ActionKind kind = ActionKind::Deliver;
  std::size_t id = 0;  // channel src*n+dst, or n*n + node for loops
  NodeId src;
  NodeId dst;          // for loops src == dst == the node
  std::uint64_t weight = 1;
  std::uint64_t waited = 0;
};

class SchedulePolicy {
 public:
  virtual ~SchedulePolicy() = default;
  // Index into enabled; enabled is never empty.
  virtual std::size_t choose(const std::vector<Action>& enabled, Rng& rng) = 0;
  virtual std::string name() const = 0;
};

// Weighted random: a channel weighs scale * queue length, a loop weighs 1.
class RandomPolicy : public SchedulePolicy {
 public:
  explicit RandomPolicy(std::uint64_t delivery_scale = 1) : scale_(delivery_scale) {}
  std::size_t choose(const std::vector<Action>& enabled, Rng& rng) override;
  std::string name() const override { return "random"; }

 private:
  std::uint64_t scale_;
};

// Adversarial: never picks an action touching the target node unless nothing else is enabled.
// The starvation guard still overrides it.
class StarvePolicy : public SchedulePolicy {
 public:
  explicit StarvePolicy(NodeId target, std::uint64_t delivery_scale = 1)
      : target_(target), inner_(delivery_scale) {}
  std::size_t choose(const std::vector<Action>& enabled, Rng& rng) override;
  std::string name() const override { return "starve:" + std::to_string(target_.index()); }

 private:
  NodeId target_;
  RandomPolicy inner_;
};

struct TraceRecord {
  std::uint64_t step = 0;
  std::string kind;  // deliver | loop | drop | inject | recycle
  std::optional<NodeId> src;
  std::optional<NodeId> dst;
  std::optional<Protocol> protocol;
  std::string summary;
};

std::string to_jsonl(const TraceRecord& r);

struct WorldConfig {
  SystemParams params;
  std::size_t channel_capacity = 16;
  std::uint64_t seed = 0;
  // An action enabled for this many consecutive steps is forced next. 0 means n*n.
  std::uint64_t starvation_threshold = 0;
};

struct StepInfo {
  bool quiescent = false;
  bool forced = false;
  ActionKind kind = ActionKind::Deliver;
  NodeId node;  // the process that ran
  std::optional<Envelope> delivered;
};

struct RunResult {
  bool satisfied = false;
  bool quiescent = false;
  std::uint64_t steps = 0;
};

struct WorldStats {
  std::uint64_t deliveries = 0;
  std::uint64_t loops = 0;
  std::uint64_t drops = 0;
  std::uint64_t forced = 0;
  std::uint64_t max_wait = 0;
};

class SimWorld {
 public:
  explicit SimWorld(WorldConfig cfg, std::unique_ptr<SchedulePolicy> policy = nullptr);

  const SystemParams& params() const { return cfg_.params; }
  const WorldConfig& config() const { return cfg_; }

  void set_process(NodeId id, std::unique_ptr<Process> p);
  Process& process(NodeId id);
  const Process& process(NodeId id) const;
  template <class T>
  T* process_as(NodeId id) {
    return dynamic_cast<T*>(procs_.at(id.index()).get());
  }
  template <class T>
  const T* process_as(NodeId id) const {
    return dynamic_cast<const T*>(procs_.at(id.index()).get());
  }

  // Enqueues on channel (src,dst); a full channel drops the new envelope. Returns false on drop.
  bool enqueue(Envelope env);
  void route(NodeId from, Outbox& out);

  StepInfo step();
  RunResult run_until(const std::function<bool()>& pred, std::uint64_t max_steps);

  std::uint64_t steps() const { return steps_; }
  std::uint32_t epoch() const { return epoch_; }
  // Moves every process to new_epoch and purges envelopes stamped with any other epoch.
  void advance_epoch(std::uint32_t new_epoch);

  const std::deque<Envelope>& channel(NodeId src, NodeId dst) const;
  std::deque<Envelope>& channel_mut(NodeId src, NodeId dst);
  std::size_t in_flight() const;
  const WorldStats& stats() const { return stats_; }
  std::uint64_t starvation_threshold() const { return threshold_; }

  void set_trace(std::function<void(const TraceRecord&)> sink) { trace_ = std::move(sink); }
  bool tracing() const { return static_cast<bool>(trace_); }
  void note(TraceRecord r);
  void set_observer(std::function<void(const StepInfo&)> obs) { observer_ = std::move(obs); }

 private:
  std::size_t action_count() const { return n() * n() + n(); }
  std::size_t n() const { return cfg_.params.n; }
  void collect_enabled();

  WorldConfig cfg_;
  std::unique_ptr<SchedulePolicy> policy_;
  Rng rng_;
  std::vector<std::unique_ptr<Process>> procs_;
  std::vector<std::deque<Envelope>> channels_;
  std::vector<std::uint64_t> waited_;
  std::vector<std::uint8_t> was_enabled_;
  std::vector<Action> enabled_;
  std::uint64_t threshold_;
  std::uint64_t steps_ = 0;
  std::uint32_t epoch_ = 0;
  WorldStats stats_;
  std::function<void(const TraceRecord&)> trace_;
  std::function<void(const StepInfo&)> observer_;
};

}  // namespace ssmvc
