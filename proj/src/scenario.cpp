#include "ssmvc/scenario.hpp"

#include <fstream>
#include <set>

#include "ssmvc/state.hpp"

namespace ssmvc {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& msg) { throw ScenarioError(msg); }

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) bad(where + ": expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) bad(where + ": unknown key '" + k + "'");
}

std::uint64_t uint_field(const json& j, const char* key, const std::string& where, std::uint64_t lo,
                         std::uint64_t hi) {
  const json& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    bad(where + "." + key + ": expected a non-negative integer");
  const auto x = v.get<std::uint64_t>();
  if (x < lo || x > hi) bad(where + "." + key + ": out of range");
  return x;
}

std::string string_field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_string()) bad(where + "." + key + ": expected a string");
  return j.at(key).get<std::string>();
}

Bytes hex_bytes(const std::string& s, const std::string& where) {
  try {
    return payload_from_json(json{{"hex", s}});
  } catch (const StateError& e) {
    bad(where + ": " + e.what());
  }
}

Bytes payload_field(const json& j, const std::string& where) {
  try {
    return payload_from_json(j);
  } catch (const StateError& e) {
    bad(where + ": " + e.what());
  }
}

ChannelPreload parse_preload(const json& j, const std::string& where, std::size_t n) {
  only_keys(j, where, {"src", "dst", "epoch", "protocol", "hex", "brb", "bv", "bc"});
  if (!j.contains("src") || !j.contains("dst")) bad(where + ": src and dst are required");
  ChannelPreload c;
  c.src = NodeId{uint_field(j, "src", where, 0, n - 1)};
  c.dst = NodeId{uint_field(j, "dst", where, 0, n - 1)};
  if (j.contains("epoch")) c.epoch = static_cast<std::uint32_t>(uint_field(j, "epoch", where, 0, 0xFFFFFFFFu));
  const int forms = j.contains("hex") + j.contains("brb") + j.contains("bv") + j.contains("bc");
  if (forms != 1) bad(where + ": exactly one of hex, brb, bv, bc is required");
  if (j.contains("hex")) {
    const auto p = protocol_from_name(string_field(j, "protocol", where));
    if (!p) bad(where + ".protocol: expected BRB, BV or BC");
    c.protocol = *p;
    c.body = hex_bytes(string_field(j, "hex", where), where + ".hex");
    return c;
  }
  if (j.contains("protocol")) bad(where + ": protocol is implied by the message form");
  if (j.contains("brb")) {
    const json& m = j["brb"];
    const std::string w = where + ".brb";
    only_keys(m, w, {"kind", "phase", "sender", "payload"});
    BrbMessage msg;
    const auto kind = string_field(m, "kind", w);
    if (kind == "INIT") msg.kind = BrbKind::Init;
    else if (kind == "ECHO") msg.kind = BrbKind::Echo;
    else if (kind == "READY") msg.kind = BrbKind::Ready;
    else bad(w + ".kind: expected INIT, ECHO or READY");
    const auto phase = string_field(m, "phase", w);
    if (phase == "init") msg.tag.phase = Phase::Init;
    else if (phase == "valid") msg.tag.phase = Phase::Valid;
    else bad(w + ".phase: expected init or valid");
    if (!m.contains("sender")) bad(w + ": sender is required");
    msg.tag.sender = NodeId{uint_field(m, "sender", w, 0, n - 1)};
    if (!m.contains("payload")) bad(w + ": payload is required");
    msg.payload = payload_field(m["payload"], w + ".payload");
    c.protocol = Protocol::Brb;
    c.body = encode(msg);
  } else if (j.contains("bv")) {
    const json& m = j["bv"];
    only_keys(m, where + ".bv", {"value"});
    if (!m.contains("value") || !m["value"].is_boolean()) bad(where + ".bv.value: expected a boolean");
    c.protocol = Protocol::Bv;
    c.body = encode(BvMessage{m["value"].get<bool>()});
  } else {
    const json& m = j["bc"];
    const std::string w = where + ".bc";
    only_keys(m, w, {"kind", "round", "value"});
    BcMessage msg;
    const auto kind = string_field(m, "kind", w);
    if (kind == "EST") msg.kind = BcKind::Est;
    else if (kind == "AUX") msg.kind = BcKind::Aux;
    else if (kind == "DECIDE") msg.kind = BcKind::Decide;
    else bad(w + ".kind: expected EST, AUX or DECIDE");
    if (msg.kind != BcKind::Decide) {
      if (!m.contains("round")) bad(w + ": round is required");
      msg.round = static_cast<std::uint16_t>(uint_field(m, "round", w, 1, 0xFFFF));
    }
    if (!m.contains("value") || !m["value"].is_boolean()) bad(w + ".value: expected a boolean");
    msg.value = m["value"].get<bool>();
    c.protocol = Protocol::Bc;
    c.body = encode(msg);
  }
  return c;
}

InjectionPlan parse_injection(const json& j, std::size_t n) {
  only_keys(j, "injection", {"targets", "mutations", "channels", "noise"});
  InjectionPlan plan;
  if (j.contains("targets")) {
    const json& t = j["targets"];
    if (t == "all_correct") {
      plan.all_correct = true;
    } else if (t.is_array()) {
      std::set<std::size_t> seen;
      for (const auto& e : t) {
        if (!e.is_number_integer() || e.get<std::int64_t>() < 0 || e.get<std::uint64_t>() >= n)
          bad("injection.targets: bad node id");
        if (!seen.insert(e.get<std::size_t>()).second) bad("injection.targets: duplicate node id");
        plan.targets.emplace_back(e.get<std::size_t>());
      }
    } else {
      bad("injection.targets: expected \"all_correct\" or an array of node ids");
    }
  }
  if (j.contains("mutations")) {
    if (!j["mutations"].is_array()) bad("injection.mutations: expected an array");
    for (const auto& m : j["mutations"]) {
      if (m.is_object() && m.contains("randomize")) {
        only_keys(m, "injection.mutations[]", {"randomize"});
        plan.mutations.push_back(RandomizeMutation{uint_field(m, "randomize", "injection.mutations[]", 0, UINT64_MAX)});
      } else {
        only_keys(m, "injection.mutations[]", {"path", "value"});
        if (!m.contains("value")) bad("injection.mutations[]: value is required");
        plan.mutations.push_back(FieldMutation{string_field(m, "path", "injection.mutations[]"), m["value"]});
      }
    }
  }
  if (!plan.mutations.empty() && !plan.all_correct && plan.targets.empty())
    bad("injection: mutations need targets");
  if (j.contains("channels")) {
    if (!j["channels"].is_array()) bad("injection.channels: expected an array");
    for (const auto& c : j["channels"]) plan.channels.push_back(parse_preload(c, "injection.channels[]", n));
  }
  if (j.contains("noise")) {
    const json& z = j["noise"];
    only_keys(z, "injection.noise", {"seed", "per_channel"});
    if (!z.contains("seed") || !z.contains("per_channel")) bad("injection.noise: seed and per_channel are required");
    plan.noise = ChannelNoise{uint_field(z, "seed", "injection.noise", 0, UINT64_MAX),
                              uint_field(z, "per_channel", "injection.noise", 1, 1 << 16)};
  }
  return plan;
}

}  // namespace

std::optional<ByzantineStrategy> parse_strategy(const json& j) {
  if (!j.is_object() || !j.contains("strategy") || !j["strategy"].is_string()) return std::nullopt;
  const auto name = j["strategy"].get<std::string>();
  auto str = [&](const char* k) -> std::optional<std::string> {
    if (!j.contains(k) || !j[k].is_string()) return std::nullopt;
    return j[k].get<std::string>();
  };
  if (name == "silent") return ByzantineStrategy::silent();
  if (name == "equivocate") {
    auto a = str("v1"), b = str("v2");
    if (!a || !b) return std::nullopt;
    return ByzantineStrategy::equivocate(Value{*a}, Value{*b});
  }
  if (name == "fake_valid") {
    if (!j.contains("flag") || !j["flag"].is_boolean()) return std::nullopt;
    return ByzantineStrategy::fake_valid(j["flag"].get<bool>());
  }
  if (name == "collusion") {
    auto v = str("value");
    if (!v) return std::nullopt;
    return ByzantineStrategy::collusion(Value{*v});
  }
  if (name == "random_noise") {
    if (!j.contains("seed") || !j["seed"].is_number_integer() || j["seed"].get<std::int64_t>() < 0) return std::nullopt;
    return ByzantineStrategy::random_noise(j["seed"].get<std::uint64_t>());
  }
  return std::nullopt;
}

json to_json(const ByzantineStrategy& s) {
  switch (s.kind) {
    case StrategyKind::Silent: return json{{"strategy", "silent"}};
    case StrategyKind::Equivocate: return json{{"strategy", "equivocate"}, {"v1", s.v1.token}, {"v2", s.v2.token}};
    case StrategyKind::FakeValid: return json{{"strategy", "fake_valid"}, {"flag", s.flag}};
    case StrategyKind::Collusion: return json{{"strategy", "collusion"}, {"value", s.value.token}};
    case StrategyKind::RandomNoise: return json{{"strategy", "random_noise"}, {"seed", s.seed}};
  }
  return json();
}

bool Scenario::is_byzantine(NodeId id) const {
  for (const auto& b : byzantine)
    if (b.node == id) return true;
  return false;
}

std::vector<std::string> Scenario::correct_proposals() const {
  std::set<std::string> s;
  for (std::size_t i = 0; i < params.n; ++i)
    if (!is_byzantine(NodeId{i}) && proposals[i]) s.insert(*proposals[i]);
  return {s.begin(), s.end()};
}

std::optional<std::string> Scenario::unanimous_value() const {
  const auto v = correct_proposals();
  if (v.size() == 1) return v.front();
  return std::nullopt;
}

Scenario parse_scenario(const json& j) {
  only_keys(j, "scenario", {"n", "t", "values", "proposals", "byzantine", "injection", "seed", "step_budget",
                            "round_cap", "channel_capacity", "epochs"});
  for (const char* k : {"n", "t", "values", "proposals"})
    if (!j.contains(k)) bad(std::string("scenario: missing key '") + k + "'");
  Scenario s;
  s.params.n = uint_field(j, "n", "scenario", 1, 0xFFFF);
  s.params.t = uint_field(j, "t", "scenario", 0, 0xFFFF);
  try {
    s.params.validate();
  } catch (const std::invalid_argument& e) {
    bad(std::string("scenario: ") + e.what());
  }
  const auto n = s.params.n;

  if (!j["values"].is_array() || j["values"].empty()) bad("scenario.values: expected a non-empty array of strings");
  std::set<std::string> vs;
  for (const auto& v : j["values"]) {
    if (!v.is_string()) bad("scenario.values: expected strings");
    if (!vs.insert(v.get<std::string>()).second) bad("scenario.values: duplicate value");
    s.values.push_back(v.get<std::string>());
  }

  if (j.contains("byzantine")) {
    if (!j["byzantine"].is_array()) bad("scenario.byzantine: expected an array");
    std::set<std::size_t> seen;
    for (const auto& b : j["byzantine"]) {
      if (!b.is_object()) bad("scenario.byzantine[]: expected an object");
      only_keys(b, "scenario.byzantine[]", {"node", "strategy", "v1", "v2", "flag", "value", "seed"});
      if (!b.contains("node")) bad("scenario.byzantine[]: node is required");
      const auto node = uint_field(b, "node", "scenario.byzantine[]", 0, n - 1);
      if (!seen.insert(node).second) bad("scenario.byzantine[]: node listed twice");
      json rest = b;
      rest.erase("node");
      auto strat = parse_strategy(rest);
      if (!strat) bad("scenario.byzantine[]: bad or incomplete strategy " + rest.dump());
      for (const auto* tok : {&strat->v1, &strat->v2, &strat->value})
        if (!tok->token.empty() && !vs.count(tok->token)) bad("scenario.byzantine[]: value '" + tok->token + "' not in values");
      s.byzantine.push_back({NodeId{node}, *strat});
    }
    if (s.byzantine.size() > s.params.t) bad("scenario.byzantine: more Byzantine nodes than t");
  }

  if (!j["proposals"].is_array() || j["proposals"].size() != n) bad("scenario.proposals: expected one entry per node");
  for (std::size_t i = 0; i < n; ++i) {
    const json& p = j["proposals"][i];
    if (p.is_null()) {
      if (!s.is_byzantine(NodeId{i})) bad("scenario.proposals: correct node " + std::to_string(i) + " needs a value");
      s.proposals.emplace_back();
    } else if (p.is_string()) {
      if (!vs.count(p.get<std::string>())) bad("scenario.proposals: value '" + p.get<std::string>() + "' not in values");
      s.proposals.emplace_back(p.get<std::string>());
    } else {
      bad("scenario.proposals: expected strings or null");
    }
  }

  if (j.contains("injection") && !j["injection"].is_null()) {
    s.injection = parse_injection(j["injection"], n);
    s.injection_source = j["injection"];
    for (auto id : s.injection->targets)
      if (s.is_byzantine(id)) bad("injection.targets: node " + std::to_string(id.index()) + " is Byzantine");
  }
  if (j.contains("seed")) s.seed = uint_field(j, "seed", "scenario", 0, UINT64_MAX);
  if (j.contains("step_budget")) s.step_budget = uint_field(j, "step_budget", "scenario", 1, UINT64_MAX);
  if (j.contains("round_cap")) s.round_cap = static_cast<std::uint16_t>(uint_field(j, "round_cap", "scenario", 1, 0xFFFE));
  if (j.contains("channel_capacity"))
    s.channel_capacity = uint_field(j, "channel_capacity", "scenario", 1, 1 << 20);
  if (j.contains("epochs")) s.epochs = static_cast<std::uint32_t>(uint_field(j, "epochs", "scenario", 1, 1000));
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open scenario file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    bad("scenario file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_scenario(j);
}

json to_json(const Scenario& s) {
  json byz = json::array();
  for (const auto& b : s.byzantine) {
    json e = to_json(b.strategy);
    e["node"] = b.node.index();
    byz.push_back(e);
  }
  json props = json::array();
  for (const auto& p : s.proposals) props.push_back(p ? json(*p) : json(nullptr));
  return json{{"n", s.params.n},
              {"t", s.params.t},
              {"values", s.values},
              {"proposals", props},
              {"byzantine", byz},
              {"injection", s.injection ? s.injection_source : json(nullptr)},
              {"seed", s.seed},
              {"step_budget", s.step_budget},
              {"round_cap", s.round_cap},
              {"channel_capacity", s.channel_capacity},
              {"epochs", s.epochs}};
}

}  // namespace ssmvc
