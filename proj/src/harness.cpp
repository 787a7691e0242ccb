#include "ssmvc/harness.hpp"

#include <algorithm>
#include <set>

#include "ssmvc/mvc.hpp"
#include "ssmvc/recycler.hpp"
#include "ssmvc/reference.hpp"

namespace ssmvc {

using nlohmann::json;

const char* status_name(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Skip: return "skip";
  }
  return "?";
}

const std::vector<std::string>& property_keys() {
  static const std::vector<std::string> keys = {
      "brb.validity",     "brb.integrity",    "brb.no_duplicity",  "brb.completion_1", "brb.completion_2",
      "bv.validity",      "bv.uniformity",    "bv.completion",     "vbb.completion",   "vbb.uniformity",
      "vbb.justification", "vbb.obligation",  "mvc.completion",    "mvc.agreement",    "mvc.validity",
      "mvc.no_intrusion", "bc.agreement",
  };
  return keys;
}

std::unique_ptr<SchedulePolicy> make_policy(const std::string& name, const SystemParams& params) {
  if (name == "random") return std::make_unique<RandomPolicy>();
  if (name.rfind("starve:", 0) == 0) {
    const std::string rest = name.substr(7);
    if (rest.empty() || rest.find_first_not_of("0123456789") != std::string::npos || rest.size() > 5)
      throw ScenarioError("bad schedule '" + name + "'");
    const auto k = std::stoul(rest);
    if (k >= params.n) throw ScenarioError("schedule target out of range: " + rest);
    return std::make_unique<StarvePolicy>(NodeId{k});
  }
  throw ScenarioError("unknown schedule '" + name + "' (expected random or starve:<node>)");
}

std::vector<std::string> legal_outcomes(const Scenario& s) {
  if (auto v = s.unanimous_value()) return {"decided(" + *v + ")"};
  std::vector<std::string> out;
  for (const auto& v : s.correct_proposals()) out.push_back("decided(" + v + ")");
  out.push_back("error");
  return out;
}

namespace {

std::string node_str(NodeId id) { return std::to_string(id.index()); }

std::string step_str(const SimWorld& w) { return "step " + std::to_string(w.steps()); }

std::string bytes_str(const std::optional<Bytes>& b) { return b ? describe_payload(*b) : std::string("none"); }

class Monitor {
 public:
  Monitor(SimWorld& world, const Scenario& sc, std::vector<NodeId> correct, bool layers)
      : w_(world), sc_(sc), correct_(std::move(correct)), layers_(layers) {
    const auto n = sc.params.n;
    for (const auto& v : sc.correct_proposals()) proposed_.insert(v);
    first_.assign(n, std::nullopt);
    prev_.assign(n, Outcome<Value>::pending());
    is_correct_.assign(n, false);
    for (auto id : correct_) is_correct_[id.index()] = true;
    if (layers_) {
      delivered_.assign(n, std::vector<std::optional<Bytes>>(2 * n));
      bins_.assign(n, BoolSet{});
      vbb_.assign(n, std::vector<Outcome<Value>>(n));
      first_delivery_.assign(2 * n, std::nullopt);
    }
    for (auto id : correct_) observe_node(id);
  }

  void observe(const StepInfo& info) {
    if (info.quiescent || !is_correct_[info.node.index()]) return;
    observe_node(info.node);
  }

  void fail(const std::string& key, const std::string& witness) {
    failures_.try_emplace(key, Verdict{Status::Fail, witness});
  }

  const std::map<std::string, Verdict>& failures() const { return failures_; }
  const std::vector<std::optional<Outcome<Value>>>& first() const { return first_; }
  std::uint64_t changes() const { return changes_; }
  bool touched(const std::string& key) const { return failures_.count(key) > 0; }

 private:
  void observe_node(NodeId id) {
    const auto i = id.index();
    const auto r = *result_of(w_, id);
    if (!r.is_pending()) {
      if (!first_[i]) first_[i] = r;
      if (!prev_[i].is_pending() && prev_[i] != r) ++changes_;
      if (r.is_decided() && !proposed_.count(r.value().token))
        fail("mvc.no_intrusion", step_str(w_) + " node " + node_str(id) + " decided " + r.value().token +
                                     ", which no correct node proposed");
    }
    prev_[i] = r;
    if (!layers_) return;

    const auto* node = w_.process_as<MvcNode>(id);
    const auto n = sc_.params.n;
    for (Phase ph : {Phase::Init, Phase::Valid}) {
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t slot = (ph == Phase::Init ? 0 : n) + k;
        const auto& cur = node->vbb().brb(ph, NodeId{k}).state().delivered;
        auto& was = delivered_[i][slot];
        if (cur == was) continue;
        const std::string tag = std::string(phase_name(ph)) + "/" + std::to_string(k);
        if (was) {
          fail("brb.integrity", step_str(w_) + " node " + node_str(id) + " " + tag + " delivery changed from " +
                                    bytes_str(was) + " to " + bytes_str(cur));
        } else {
          auto& first = first_delivery_[slot];
          if (!first) first = cur;
          else if (*first != cur)
            fail("brb.no_duplicity", step_str(w_) + " " + tag + " delivered " + bytes_str(first) + " and " +
                                         bytes_str(cur));
          if (is_correct_[k]) {
            const auto& sent = w_.process_as<MvcNode>(NodeId{k})->vbb().brb(ph, NodeId{k}).state().my_init;
            if (sent != cur)
              fail("brb.validity", step_str(w_) + " node " + node_str(id) + " " + tag + " delivered " +
                                       bytes_str(cur) + " but the correct sender broadcast " + bytes_str(sent));
          }
        }
        was = cur;
      }
    }

    const BoolSet bin = node->bvo().bin_values();
    if (bin != bins_[i]) {
      for (bool v : {false, true}) {
        if (!bin.contains(v) || bins_[i].contains(v)) continue;
        bool backed = false;
        for (auto j : correct_)
          if (w_.process_as<MvcNode>(j)->bvo().state().my_value == v) backed = true;
        if (!backed)
          fail("bv.validity", step_str(w_) + " node " + node_str(id) + " added " + (v ? "true" : "false") +
                                  " to bin_values without a correct broadcaster");
      }
      bins_[i] = bin;
    }

    auto outs = node->vbb().outcomes();
    for (std::size_t k = 0; k < n; ++k) {
      if (outs[k] == vbb_[i][k]) continue;
      if (outs[k].is_decided() && !proposed_.count(outs[k].value().token))
        fail("vbb.justification", step_str(w_) + " node " + node_str(id) + " vbb-delivered " +
                                      outs[k].value().token + " from " + std::to_string(k) +
                                      ", which no correct node broadcast");
    }
    vbb_[i] = std::move(outs);
  }

  SimWorld& w_;
  const Scenario& sc_;
  std::vector<NodeId> correct_;
  bool layers_;
  std::set<std::string> proposed_;
  std::vector<bool> is_correct_;
  std::vector<std::optional<Outcome<Value>>> first_;
  std::vector<Outcome<Value>> prev_;
  std::uint64_t changes_ = 0;
  std::vector<std::vector<std::optional<Bytes>>> delivered_;
  std::vector<std::optional<Bytes>> first_delivery_;
  std::vector<BoolSet> bins_;
  std::vector<std::vector<Outcome<Value>>> vbb_;
  std::map<std::string, Verdict> failures_;
};

const MvcNode& mvc(const SimWorld& w, NodeId id) { return *w.process_as<MvcNode>(id); }

// Every correct VBB outcome for a correct sender is non-pending.
bool vbb_converged(const SimWorld& w, const std::vector<NodeId>& correct) {
  for (auto i : correct)
    for (auto j : correct)
      if (mvc(w, i).vbb().vbb_deliver(j).is_pending()) return false;
  return true;
}

// Nothing left that could still change a verdict: deliveries uniform, binary consensus done,
// bin_values equal, VBB outcome vectors equal.
bool settled(const SimWorld& w, const std::vector<NodeId>& correct) {
  const auto n = w.params().n;
  for (auto i : correct)
    if (mvc(w, i).bco().bc_result().is_pending()) return false;
  const auto& a = mvc(w, correct.front());
  for (auto i : correct) {
    const auto& b = mvc(w, i);
    if (b.bvo().bin_values() != a.bvo().bin_values()) return false;
    for (Phase ph : {Phase::Init, Phase::Valid})
      for (std::size_t k = 0; k < n; ++k)
        if (b.vbb().brb(ph, NodeId{k}).state().delivered != a.vbb().brb(ph, NodeId{k}).state().delivered)
          return false;
  }
  const auto ref = a.vbb().outcomes();
  for (auto i : correct) {
    const auto o = mvc(w, i).vbb().outcomes();
    if (o != ref) return false;
  }
  return vbb_converged(w, correct);
}

void final_checks(const SimWorld& w, const Scenario& sc, const std::vector<NodeId>& correct, Monitor& mon) {
  const auto n = sc.params.n;
  const auto unanimous = sc.unanimous_value();
  std::vector<bool> is_correct(n, false);
  for (auto id : correct) is_correct[id.index()] = true;

  for (Phase ph : {Phase::Init, Phase::Valid}) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::string tag = std::string(phase_name(ph)) + "/" + std::to_string(k);
      std::size_t have = 0;
      std::optional<Bytes> seen;
      for (auto i : correct) {
        const auto& d = mvc(w, i).vbb().brb(ph, NodeId{k}).state().delivered;
        if (!d) continue;
        ++have;
        if (seen && *seen != *d)
          mon.fail("brb.no_duplicity", "end " + tag + " delivered " + bytes_str(seen) + " and " + bytes_str(d));
        seen = d;
      }
      if (have > 0 && have < correct.size())
        mon.fail("brb.completion_2", "end " + tag + " delivered at " + std::to_string(have) + " of " +
                                         std::to_string(correct.size()) + " correct nodes");
      if (is_correct[k] && mvc(w, NodeId{k}).vbb().brb(ph, NodeId{k}).state().my_init && have < correct.size())
        mon.fail("brb.completion_1", "end correct sender's " + tag + " delivered at " + std::to_string(have) +
                                         " of " + std::to_string(correct.size()) + " correct nodes");
    }
  }

  const auto bin0 = mvc(w, correct.front()).bvo().bin_values();
  bool all_invoked = true;
  for (auto i : correct) {
    const auto& bv = mvc(w, i).bvo();
    if (bv.bin_values() != bin0) mon.fail("bv.uniformity", "end bin_values differ at node " + node_str(i));
    if (!bv.state().my_value) all_invoked = false;
  }
  if (all_invoked)
    for (auto i : correct)
      if (mvc(w, i).bvo().bin_values().empty()) mon.fail("bv.completion", "end node " + node_str(i) + " has empty bin_values");

  for (auto i : correct)
    for (auto j : correct)
      if (mvc(w, i).vbb().vbb_deliver(j).is_pending())
        mon.fail("vbb.completion", "end node " + node_str(i) + " has nothing from correct sender " + node_str(j));
  for (std::size_t k = 0; k < n; ++k) {
    const auto ref = mvc(w, correct.front()).vbb().vbb_deliver(NodeId{k});
    for (auto i : correct) {
      const auto o = mvc(w, i).vbb().vbb_deliver(NodeId{k});
      if (o != ref)
        mon.fail("vbb.uniformity", "end sender " + std::to_string(k) + ": node " + node_str(correct.front()) + " has " +
                                       to_string(ref) + ", node " + node_str(i) + " has " + to_string(o));
    }
  }
  if (unanimous)
    for (auto i : correct)
      for (auto j : correct) {
        const auto o = mvc(w, i).vbb().vbb_deliver(j);
        if (!(o.is_decided() && o.value().token == *unanimous))
          mon.fail("vbb.obligation", "end node " + node_str(i) + " has " + to_string(o) + " from correct sender " +
                                         node_str(j) + " although all proposed " + *unanimous);
      }

  const auto bc0 = mvc(w, correct.front()).bco().bc_result();
  for (auto i : correct)
    if (mvc(w, i).bco().bc_result() != bc0)
      mon.fail("bc.agreement", "end binary decisions differ: " + to_string(bc0) + " vs " +
                                   to_string(mvc(w, i).bco().bc_result()) + " at node " + node_str(i));
}

void consensus_checks(const SimWorld& w, const Scenario& sc, const std::vector<NodeId>& correct, Monitor& mon) {
  const auto unanimous = sc.unanimous_value();
  const auto r0 = *result_of(w, correct.front());
  std::set<std::string> proposed;
  for (const auto& v : sc.correct_proposals()) proposed.insert(v);
  for (auto i : correct) {
    const auto r = *result_of(w, i);
    if (r != r0)
      mon.fail("mvc.agreement", "end node " + node_str(correct.front()) + " has " + to_string(r0) + ", node " +
                                    node_str(i) + " has " + to_string(r));
    if (unanimous && !(r.is_decided() && r.value().token == *unanimous))
      mon.fail("mvc.validity", "end node " + node_str(i) + " has " + to_string(r) + " although all proposed " + *unanimous);
    if (r.is_decided() && !proposed.count(r.value().token))
      mon.fail("mvc.no_intrusion", "end node " + node_str(i) + " decided " + r.value().token);
  }
}

WorldStats delta(const WorldStats& now, const WorldStats& then) {
  WorldStats d;
  d.deliveries = now.deliveries - then.deliveries;
  d.loops = now.loops - then.loops;
  d.drops = now.drops - then.drops;
  d.forced = now.forced - then.forced;
  d.max_wait = now.max_wait;
  return d;
}

json verdict_json(const Verdict& v) {
  json j{{"status", status_name(v.status)}};
  if (!v.witness.empty()) j["witness"] = v.witness;
  return j;
}

}  // namespace

bool Report::all_completed() const {
  if (epochs.size() != scenario.epochs) return false;
  for (const auto& e : epochs)
    if (!e.completed) return false;
  return true;
}

json Report::to_json() const {
  json eps = json::array();
  for (const auto& e : epochs) {
    json v = json::object();
    for (const auto& [k, x] : e.verdicts) v[k] = verdict_json(x);
    eps.push_back(json{{"epoch", e.epoch},
                       {"injected", e.injected},
                       {"completed", e.completed},
                       {"steps_to_completion", e.steps_to_completion},
                       {"settled", e.settled},
                       {"steps", e.steps},
                       {"outcomes", e.outcomes},
                       {"first_outcomes", e.first_outcomes},
                       {"bc_outcomes", e.bc_outcomes},
                       {"result_changes", e.result_changes},
                       {"injected_vbb", e.injected_vbb},
                       {"vbb_converged", e.vbb_converged},
                       {"stats", json{{"deliveries", e.stats.deliveries},
                                      {"loops", e.stats.loops},
                                      {"drops", e.stats.drops},
                                      {"forced", e.stats.forced},
                                      {"max_wait", e.stats.max_wait}}},
                       {"verdicts", v}});
  }
  json v = json::object();
  for (const auto& [k, x] : verdicts) v[k] = verdict_json(x);
  return json{{"stack", stack == Stack::SelfStabilizing ? "self-stabilizing" : "reference"},
              {"schedule", schedule},
              {"seed", scenario.seed},
              {"scenario", ssmvc::to_json(scenario)},
              {"epochs", eps},
              {"verdicts", v},
              {"pass", pass}};
}

Report run_scenario(const Scenario& input, const RunOptions& opt) {
  Scenario sc = input;
  if (opt.seed) sc.seed = *opt.seed;
  if (opt.stack == Stack::Reference && sc.injection)
    throw ScenarioError("the reference stack is not self-stabilizing and does not accept injection");

  const auto n = sc.params.n;
  WorldConfig wc{sc.params, sc.channel_capacity, sc.seed, 0};
  SimWorld world(wc, make_policy(opt.schedule, sc.params));
  if (opt.trace) world.set_trace(opt.trace);

  auto values = std::make_shared<const ValueSet>(sc.values);
  const MvcConfig mc{sc.params, values, derive_seed(sc.seed, 0xC0), sc.round_cap, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const NodeId id{i};
    const ByzantineSpec* byz = nullptr;
    for (const auto& b : sc.byzantine)
      if (b.node == id) byz = &b;
    std::optional<Value> prop;
    if (sc.proposals[i]) prop = Value{*sc.proposals[i]};
    if (byz) {
      ByzantineStrategy strat = byz->strategy;
      if (strat.kind == StrategyKind::RandomNoise) strat.seed = derive_seed(strat.seed, sc.seed);
      world.set_process(id, std::make_unique<ByzantineNode>(id, strat, mc, prop));
    } else if (opt.stack == Stack::Reference) {
      world.set_process(id, std::make_unique<ReferenceNode>(id, mc));
    } else {
      world.set_process(id, std::make_unique<MvcNode>(id, mc));
    }
  }

  Recycler recycler(world);
  const auto correct = recycler.correct_nodes();
  const bool ss = opt.stack == Stack::SelfStabilizing;

  Report rep;
  rep.scenario = sc;
  rep.stack = opt.stack;
  rep.schedule = opt.schedule;

  for (std::uint32_t e = 0; e < sc.epochs; ++e) {
    if (e > 0) recycler.recycle();
    const std::uint64_t start = world.steps();
    const WorldStats stats0 = world.stats();
    EpochReport er;
    er.epoch = world.epoch();
    er.injected = e == 0 && sc.injection.has_value();
    if (er.injected) {
      try {
        apply_injection(world, *sc.injection, start);
      } catch (const InjectionError& err) {
        throw ScenarioError(std::string("injection rejected: ") + err.what());
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      const NodeId id{i};
      Outbox out(world.epoch());
      if (auto* m = world.process_as<MvcNode>(id)) m->propose(Value{*sc.proposals[i]}, out);
      else if (auto* r = world.process_as<ReferenceNode>(id)) r->propose(Value{*sc.proposals[i]}, out);
      else if (auto* b = world.process_as<ByzantineNode>(id)) b->start(out);
      world.route(id, out);
    }

    if (er.injected && ss) {
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::string> row;
        if (const auto* m = world.process_as<MvcNode>(NodeId{i}))
          for (const auto& o : m->vbb().outcomes()) row.push_back(to_string(o));
        er.injected_vbb.push_back(std::move(row));
      }
    }

    Monitor mon(world, sc, correct, ss && !er.injected);
    world.set_observer([&](const StepInfo& info) { mon.observe(info); });

    const auto budget = sc.step_budget;
    const auto done = world.run_until([&] { return recycler.completed(); }, budget);
    er.completed = done.satisfied;
    er.steps_to_completion = done.steps;

    if (er.injected) {
      // Convergence epoch: only the eventual-completion guarantees apply.
      if (ss && er.completed) {
        const auto conv = world.run_until([&] { return vbb_converged(world, correct); }, budget);
        er.vbb_converged = conv.satisfied;
      }
      er.verdicts["mvc.completion"] = er.completed ? Verdict{Status::Pass, ""}
                                                   : Verdict{Status::Fail, "no completion within " +
                                                                               std::to_string(budget) + " steps"};
      er.settled = false;
    } else {
      if (ss) {
        const auto s = world.run_until([&] { return settled(world, correct); }, budget);
        er.settled = s.satisfied;
        final_checks(world, sc, correct, mon);
      } else {
        er.settled = er.completed;
      }
      if (!er.completed) mon.fail("mvc.completion", "no completion within " + std::to_string(budget) + " steps");
      consensus_checks(world, sc, correct, mon);

      const std::set<std::string> ss_only = {"brb.validity", "brb.integrity", "brb.no_duplicity", "brb.completion_1",
                                             "brb.completion_2", "bv.validity", "bv.uniformity", "bv.completion",
                                             "vbb.completion", "vbb.uniformity", "vbb.justification", "vbb.obligation"};
      const bool unanimous = sc.unanimous_value().has_value();
      for (const auto& key : property_keys()) {
        Verdict v{Status::Pass, ""};
        if (!ss && ss_only.count(key)) v.status = Status::Skip;
        if ((key == "vbb.obligation" || key == "mvc.validity") && !unanimous) v.status = Status::Skip;
        if (auto it = mon.failures().find(key); it != mon.failures().end()) v = it->second;
        er.verdicts[key] = v;
      }
    }
    world.set_observer(nullptr);

    er.steps = world.steps() - start;
    er.stats = delta(world.stats(), stats0);
    er.result_changes = mon.changes();
    for (std::size_t i = 0; i < n; ++i) {
      const NodeId id{i};
      const auto r = result_of(world, id);
      if (!r) {
        er.outcomes.push_back("byzantine");
        er.first_outcomes.push_back("byzantine");
        er.bc_outcomes.push_back("byzantine");
        continue;
      }
      er.outcomes.push_back(to_string(*r));
      er.first_outcomes.push_back(mon.first()[i] ? to_string(*mon.first()[i]) : "pending");
      if (const auto* m = world.process_as<MvcNode>(id)) er.bc_outcomes.push_back(to_string(m->bco().bc_result()));
      else er.bc_outcomes.push_back(to_string(world.process_as<ReferenceNode>(id)->bco().bc_result()));
    }
    if (opt.epoch_end) opt.epoch_end(world, er);
    rep.epochs.push_back(std::move(er));
    if (!rep.epochs.back().completed) break;
  }

  for (const auto& e : rep.epochs)
    for (const auto& [k, v] : e.verdicts) {
      auto it = rep.verdicts.find(k);
      if (it == rep.verdicts.end()) rep.verdicts[k] = v;
      else if (v.status == Status::Fail && it->second.status != Status::Fail) it->second = v;
      else if (v.status == Status::Pass && it->second.status == Status::Skip) it->second = v;
    }
  rep.pass = rep.all_completed();
  for (const auto& [k, v] : rep.verdicts)
    if (v.status == Status::Fail) rep.pass = false;
  return rep;
}

json DiffResult::to_json() const {
  return json{{"consistent", consistent},
              {"reason", reason},
              {"legal", legal},
              {"self_stabilizing", self_stabilizing.to_json()},
              {"reference", reference.to_json()}};
}

DiffResult run_diff(const Scenario& sc, const RunOptions& opt) {
  DiffResult d;
  RunOptions a = opt, b = opt;
  a.stack = Stack::SelfStabilizing;
  b.stack = Stack::Reference;
  b.trace = nullptr;
  d.self_stabilizing = run_scenario(sc, a);
  d.reference = run_scenario(sc, b);
  d.legal = legal_outcomes(d.self_stabilizing.scenario);
  d.consistent = true;
  auto check = [&](const Report& r, const char* name) {
    for (const auto& e : r.epochs) {
      if (!e.completed) {
        d.consistent = false;
        d.reason += std::string(name) + " epoch " + std::to_string(e.epoch) + " did not complete; ";
      }
      std::set<std::string> distinct;
      for (const auto& o : e.outcomes) {
        if (o == "byzantine") continue;
        distinct.insert(o);
        if (std::find(d.legal.begin(), d.legal.end(), o) == d.legal.end()) {
          d.consistent = false;
          d.reason += std::string(name) + " produced illegal outcome " + o + "; ";
        }
      }
      if (distinct.size() > 1) {
        d.consistent = false;
        d.reason += std::string(name) + " correct nodes disagree; ";
      }
    }
  };
  check(d.self_stabilizing, "self-stabilizing");
  check(d.reference, "reference");
  return d;
}

}  // namespace ssmvc
