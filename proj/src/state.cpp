#include "ssmvc/state.hpp"

#include <cstdio>
#include <set>

namespace ssmvc {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw StateError(where + ": " + what);
}

std::string to_hex(const Bytes& b) {
  std::string s;
  char buf[3];
  for (auto c : b) {
    std::snprintf(buf, sizeof buf, "%02x", c);
    s += buf;
  }
  return s;
}

Bytes from_hex(const std::string& s, const std::string& where) {
  if (s.size() % 2) fail(where, "odd-length hex");
  Bytes out;
  for (std::size_t i = 0; i < s.size(); i += 2) {
    auto nib = [&](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      fail(where, "bad hex digit");
    };
    out.push_back(static_cast<std::uint8_t>(nib(s[i]) * 16 + nib(s[i + 1])));
  }
  return out;
}

// Reads an object, insisting on exactly the expected keys.
class Fields {
 public:
  Fields(const json& j, std::string where, std::initializer_list<const char*> keys) : j_(j), where_(std::move(where)) {
    if (!j.is_object()) fail(where_, "expected an object");
    std::set<std::string> want(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items())
      if (!want.count(k)) fail(where_, "unknown key '" + k + "'");
    for (const auto& k : want)
      if (!j.contains(k)) fail(where_, "missing key '" + k + "'");
  }
  const json& operator[](const char* k) const { return j_.at(k); }
  std::string at(const char* k) const { return where_ + "." + k; }

 private:
  const json& j_;
  std::string where_;
};

bool get_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) fail(where, "expected a boolean");
  return j.get<bool>();
}

std::uint64_t get_uint(const json& j, const std::string& where, std::uint64_t max) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  if (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0) fail(where, "negative");
  const auto v = j.get<std::uint64_t>();
  if (v > max) fail(where, "out of range");
  return v;
}

std::optional<bool> get_opt_bool(const json& j, const std::string& where) {
  if (j.is_null()) return std::nullopt;
  return get_bool(j, where);
}

NodeId get_node(const json& j, const std::string& where, std::size_t n) {
  return NodeId{get_uint(j, where, n - 1)};
}

NodeId node_key(const std::string& k, const std::string& where, std::size_t n) {
  if (k.empty() || k.size() > 5 || k.find_first_not_of("0123456789") != std::string::npos)
    fail(where, "bad node key '" + k + "'");
  const auto v = std::stoul(k);
  if (v >= n) fail(where, "node key out of range");
  return NodeId{v};
}

json bools_json(BoolSet s) {
  json a = json::array();
  if (s.contains(false)) a.push_back(false);
  if (s.contains(true)) a.push_back(true);
  return a;
}

BoolSet bools_from(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of booleans");
  BoolSet s;
  for (const auto& e : j) s.insert(get_bool(e, where));
  return s;
}

json nodes_json(const NodeSet& s) {
  json a = json::array();
  for (auto id : s.members()) a.push_back(id.index());
  return a;
}

NodeSet nodes_from(const json& j, const std::string& where, std::size_t n) {
  if (!j.is_array()) fail(where, "expected an array of node ids");
  NodeSet s(n);
  for (const auto& e : j) s.insert(get_node(e, where, n));
  return s;
}

json opt_payload(const std::optional<Bytes>& p) { return p ? payload_to_json(*p) : json(nullptr); }

std::optional<Bytes> opt_payload_from(const json& j, const std::string& where) {
  if (j.is_null()) return std::nullopt;
  try {
    return payload_from_json(j);
  } catch (const StateError& e) {
    fail(where, e.what());
  }
}

json votes_json(const std::map<NodeId, Bytes>& votes) {
  json o = json::object();
  for (const auto& [who, p] : votes) o[std::to_string(who.index())] = payload_to_json(p);
  return o;
}

std::map<NodeId, Bytes> votes_from(const json& j, const std::string& where, std::size_t n) {
  if (!j.is_object()) fail(where, "expected an object of votes");
  std::map<NodeId, Bytes> out;
  for (const auto& [k, v] : j.items()) out[node_key(k, where, n)] = *opt_payload_from(v, where + "." + k);
  return out;
}

json brb_json(const BrbState& s) {
  return json{{"my_init", opt_payload(s.my_init)}, {"echoed", opt_payload(s.echoed)},
              {"readied", opt_payload(s.readied)}, {"delivered", opt_payload(s.delivered)},
              {"echoes", votes_json(s.echoes)},   {"readies", votes_json(s.readies)}};
}

BrbState brb_from(const json& j, const std::string& where, std::size_t n) {
  Fields f(j, where, {"my_init", "echoed", "readied", "delivered", "echoes", "readies"});
  BrbState s;
  s.my_init = opt_payload_from(f["my_init"], f.at("my_init"));
  s.echoed = opt_payload_from(f["echoed"], f.at("echoed"));
  s.readied = opt_payload_from(f["readied"], f.at("readied"));
  s.delivered = opt_payload_from(f["delivered"], f.at("delivered"));
  s.echoes = votes_from(f["echoes"], f.at("echoes"), n);
  s.readies = votes_from(f["readies"], f.at("readies"), n);
  return s;
}

json bv_json(const BvState& s) {
  return json{{"my_value", s.my_value ? json(*s.my_value) : json(nullptr)},
              {"received", json{{"false", nodes_json(s.received[0])}, {"true", nodes_json(s.received[1])}}},
              {"relayed", bools_json(s.relayed)},
              {"bin_values", bools_json(s.bin_values)}};
}

BvState bv_from(const json& j, const std::string& where, std::size_t n) {
  Fields f(j, where, {"my_value", "received", "relayed", "bin_values"});
  BvState s;
  s.my_value = get_opt_bool(f["my_value"], f.at("my_value"));
  Fields r(f["received"], f.at("received"), {"false", "true"});
  s.received = {nodes_from(r["false"], r.at("false"), n), nodes_from(r["true"], r.at("true"), n)};
  s.relayed = bools_from(f["relayed"], f.at("relayed"));
  s.bin_values = bools_from(f["bin_values"], f.at("bin_values"));
  return s;
}

json decision_json(const Outcome<bool>& d) {
  if (d.is_pending()) return "pending";
  if (d.is_error()) return "error";
  return d.value();
}

Outcome<bool> decision_from(const json& j, const std::string& where) {
  if (j.is_boolean()) return Outcome<bool>::decided(j.get<bool>());
  if (j == "pending") return Outcome<bool>::pending();
  if (j == "error") return Outcome<bool>::error();
  fail(where, "expected \"pending\", \"error\" or a boolean");
}

json bc_json(const BcState& s) {
  json rounds = json::object();
  for (const auto& [r, rs] : s.rounds) {
    json aux = json::object();
    for (const auto& [who, v] : rs.aux) aux[std::to_string(who.index())] = v;
    rounds[std::to_string(r)] = json{{"est", bv_json(rs.est.state())},
                                     {"aux", aux},
                                     {"my_aux", rs.my_aux ? json(*rs.my_aux) : json(nullptr)}};
  }
  return json{{"active", s.active},
              {"proposal", s.proposal ? json(*s.proposal) : json(nullptr)},
              {"round", s.round},
              {"est", s.est},
              {"decision", decision_json(s.decision)},
              {"rounds", rounds},
              {"decides", json{{"false", nodes_json(s.decides[0])}, {"true", nodes_json(s.decides[1])}}}};
}

BcState bc_from(const json& j, const std::string& where, NodeId self, const SystemParams& params,
                std::uint16_t cap) {
  Fields f(j, where, {"active", "proposal", "round", "est", "decision", "rounds", "decides"});
  BcState s;
  s.active = get_bool(f["active"], f.at("active"));
  s.proposal = get_opt_bool(f["proposal"], f.at("proposal"));
  s.round = static_cast<std::uint16_t>(get_uint(f["round"], f.at("round"), 0xFFFF));
  s.est = get_bool(f["est"], f.at("est"));
  s.decision = decision_from(f["decision"], f.at("decision"));
  const json& rounds = f["rounds"];
  if (!rounds.is_object()) fail(f.at("rounds"), "expected an object");
  for (const auto& [k, v] : rounds.items()) {
    const std::string w = f.at("rounds") + "." + k;
    if (k.empty() || k.find_first_not_of("0123456789") != std::string::npos || k.size() > 5)
      fail(w, "bad round key");
    const auto r = std::stoul(k);
    if (r == 0 || r > cap) fail(w, "round outside [1, round_cap]");
    Fields rf(v, w, {"est", "aux", "my_aux"});
    auto it = s.rounds.try_emplace(static_cast<std::uint16_t>(r), self, params).first;
    it->second.est.state() = bv_from(rf["est"], rf.at("est"), params.n);
    const json& aux = rf["aux"];
    if (!aux.is_object()) fail(rf.at("aux"), "expected an object");
    for (const auto& [who, b] : aux.items())
      it->second.aux[node_key(who, rf.at("aux"), params.n)] = get_bool(b, rf.at("aux") + "." + who);
    it->second.my_aux = get_opt_bool(rf["my_aux"], rf.at("my_aux"));
  }
  Fields d(f["decides"], f.at("decides"), {"false", "true"});
  s.decides = {nodes_from(d["false"], d.at("false"), params.n), nodes_from(d["true"], d.at("true"), params.n)};
  return s;
}

}  // namespace

json payload_to_json(const Bytes& payload) {
  const auto pair = parse_pair(payload);
  if (!pair) return json{{"hex", to_hex(payload)}};
  if (const auto* v = std::get_if<ValuePair>(&*pair)) return json{{"k", v->origin.index()}, {"v", v->token}};
  const auto& f = std::get<FlagPair>(*pair);
  return json{{"k", f.origin.index()}, {"x", f.flag}};
}

Bytes payload_from_json(const json& j) {
  if (!j.is_object()) fail("payload", "expected an object");
  if (j.size() == 1 && j.contains("hex")) {
    if (!j["hex"].is_string()) fail("payload.hex", "expected a string");
    return from_hex(j["hex"].get<std::string>(), "payload.hex");
  }
  if (j.size() == 2 && j.contains("k") && j.contains("v")) {
    if (!j["v"].is_string()) fail("payload.v", "expected a string");
    const auto s = j["v"].get<std::string>();
    if (s.size() > 0xFFFF) fail("payload.v", "token too long");
    return encode_value_pair(NodeId{get_uint(j["k"], "payload.k", 0xFFFF)}, s);
  }
  if (j.size() == 2 && j.contains("k") && j.contains("x"))
    return encode_flag_pair(NodeId{get_uint(j["k"], "payload.k", 0xFFFF)},
                            static_cast<std::uint8_t>(get_uint(j["x"], "payload.x", 0xFF)));
  fail("payload", "expected {k,v}, {k,x} or {hex}");
}

json dump_state(const MvcNode& node) {
  const auto n = node.config().params.n;
  json init = json::array(), valid = json::array();
  for (std::size_t k = 0; k < n; ++k) {
    init.push_back(brb_json(node.vbb().brb(Phase::Init, NodeId{k}).state()));
    valid.push_back(brb_json(node.vbb().brb(Phase::Valid, NodeId{k}).state()));
  }
  return json{{"epoch", node.epoch()},
              {"proposal", node.proposal() ? json(node.proposal()->token) : json(nullptr)},
              {"latched_same_value", node.latched_same_value() ? json(*node.latched_same_value()) : json(nullptr)},
              {"brb", json{{"init", init}, {"valid", valid}}},
              {"bv", bv_json(node.bvo().state())},
              {"bc", bc_json(node.bco().state())}};
}

void load_state(MvcNode& node, const json& doc) {
  const auto& params = node.config().params;
  Fields f(doc, "state", {"epoch", "proposal", "latched_same_value", "brb", "bv", "bc"});
  if (f["epoch"] != json(node.epoch())) fail("state.epoch", "the epoch tag is not injectable");
  std::optional<Value> proposal;
  if (!f["proposal"].is_null()) {
    if (!f["proposal"].is_string()) fail("state.proposal", "expected a string or null");
    proposal = Value{f["proposal"].get<std::string>()};
  }
  const auto latched = get_opt_bool(f["latched_same_value"], "state.latched_same_value");
  Fields b(f["brb"], "state.brb", {"init", "valid"});
  std::array<std::vector<BrbState>, 2> brb;
  const char* names[2] = {"init", "valid"};
  for (int ph = 0; ph < 2; ++ph) {
    const json& arr = b[names[ph]];
    const std::string w = b.at(names[ph]);
    if (!arr.is_array() || arr.size() != params.n) fail(w, "expected an array of n instances");
    for (std::size_t k = 0; k < params.n; ++k) brb[ph].push_back(brb_from(arr[k], w + "." + std::to_string(k), params.n));
  }
  BvState bv = bv_from(f["bv"], "state.bv", params.n);
  BcState bc = bc_from(f["bc"], "state.bc", node.id(), params, node.config().round_cap);

  // Everything parsed; commit.
  node.proposal() = proposal;
  node.latched_same_value() = latched;
  for (int ph = 0; ph < 2; ++ph)
    for (std::size_t k = 0; k < params.n; ++k)
      node.vbb().brb(ph == 0 ? Phase::Init : Phase::Valid, NodeId{k}).state() = std::move(brb[ph][k]);
  node.bvo().state() = std::move(bv);
  node.bco().state() = std::move(bc);
}

void set_state_field(MvcNode& node, std::string_view dotted_path, const json& value) {
  if (dotted_path.empty()) throw StateError("empty state path");
  std::string ptr;
  std::size_t start = 0;
  while (start <= dotted_path.size()) {
    const auto dot = dotted_path.find('.', start);
    const auto tok = dotted_path.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
    if (tok.empty()) throw StateError("empty segment in state path '" + std::string(dotted_path) + "'");
    ptr += '/';
    for (char c : tok) {
      if (c == '~') ptr += "~0";
      else if (c == '/') ptr += "~1";
      else ptr += c;
    }
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  json doc = dump_state(node);
  const json::json_pointer p(ptr);
  if (p.empty() || !doc.contains(p.parent_pointer()))
    throw StateError("no such state field '" + std::string(dotted_path) + "'");
  const json& parent = doc.at(p.parent_pointer());
  if (parent.is_array()) {
    if (!doc.contains(p)) throw StateError("index out of range in '" + std::string(dotted_path) + "'");
  } else if (!parent.is_object()) {
    throw StateError("'" + std::string(dotted_path) + "' does not name a field");
  }
  doc[p] = value;
  load_state(node, doc);
}

namespace {

std::string random_token(Rng& rng, const ValueSet& values) {
  if (!values.tokens().empty() && rng.chance(4, 5)) return values.tokens()[rng.below(values.size())];
  std::string s = "~";
  const auto len = rng.below(4);
  for (std::uint64_t i = 0; i < len; ++i) s += static_cast<char>('a' + rng.below(26));
  return s;
}

NodeId random_origin(Rng& rng, std::size_t n, NodeId likely) {
  const auto r = rng.below(10);
  if (r < 6) return likely;
  if (r < 9) return NodeId{rng.below(n)};
  return NodeId{rng.below(0x10000)};
}

Bytes random_payload(Rng& rng, std::size_t n, NodeId owner, Phase phase, const ValueSet& values) {
  // Mostly the kind of pair the phase expects, sometimes the other kind, sometimes raw junk.
  const auto r = rng.below(10);
  if (r < 8) {
    const bool expected = r < 6;
    if (expected == (phase == Phase::Init))
      return encode_value_pair(random_origin(rng, n, owner), random_token(rng, values));
    const std::uint8_t flag = rng.chance(9, 10) ? static_cast<std::uint8_t>(rng.below(2))
                                                : static_cast<std::uint8_t>(rng.below(256));
    return encode_flag_pair(random_origin(rng, n, owner), flag);
  }
  Bytes junk(rng.below(9));
  for (auto& b : junk) b = static_cast<std::uint8_t>(rng.below(256));
  return junk;
}

std::optional<bool> random_opt_bool(Rng& rng) {
  switch (rng.below(3)) {
    case 0: return std::nullopt;
    case 1: return false;
    default: return true;
  }
}

BoolSet random_bools(Rng& rng) { return BoolSet::from_bits(static_cast<std::uint8_t>(rng.below(4))); }

NodeSet random_nodes(Rng& rng, std::size_t n) {
  NodeSet s(n);
  for (std::size_t k = 0; k < n; ++k)
    if (rng.coin()) s.insert(NodeId{k});
  return s;
}

void randomize_bv(BvState& s, Rng& rng, std::size_t n) {
  s.my_value = random_opt_bool(rng);
  s.received = {random_nodes(rng, n), random_nodes(rng, n)};
  s.relayed = random_bools(rng);
  s.bin_values = random_bools(rng);
}

}  // namespace

void randomize_state(MvcNode& node, Rng& rng) {
  const auto& params = node.config().params;
  const std::size_t n = params.n;
  const ValueSet& values = node.vbb().values();

  for (Phase ph : {Phase::Init, Phase::Valid}) {
    for (std::size_t k = 0; k < n; ++k) {
      // A small pool per instance so that junk votes sometimes agree with each other.
      std::vector<Bytes> pool;
      for (int i = 0; i < 3; ++i) pool.push_back(random_payload(rng, n, NodeId{k}, ph, values));
      auto draw = [&]() -> Bytes {
        return rng.chance(4, 5) ? pool[rng.below(pool.size())] : random_payload(rng, n, NodeId{k}, ph, values);
      };
      auto maybe = [&]() -> std::optional<Bytes> {
        if (rng.coin()) return std::nullopt;
        return draw();
      };
      BrbState s;
      s.my_init = maybe();
      s.echoed = maybe();
      s.readied = maybe();
      s.delivered = maybe();
      for (std::size_t j = 0; j < n; ++j) {
        if (rng.coin()) s.echoes[NodeId{j}] = draw();
        if (rng.coin()) s.readies[NodeId{j}] = draw();
      }
      node.vbb().brb(ph, NodeId{k}).state() = std::move(s);
    }
  }

  randomize_bv(node.bvo().state(), rng, n);

  const std::uint16_t cap = node.config().round_cap;
  BcState& bc = node.bco().state();
  bc = BcState{};
  bc.active = rng.coin();
  bc.proposal = random_opt_bool(rng);
  bc.round = static_cast<std::uint16_t>(rng.below(cap + 2u));
  bc.est = rng.coin();
  switch (rng.below(4)) {
    case 0: bc.decision = Outcome<bool>::pending(); break;
    case 1: bc.decision = Outcome<bool>::error(); break;
    case 2: bc.decision = Outcome<bool>::decided(false); break;
    default: bc.decision = Outcome<bool>::decided(true); break;
  }
  const std::uint16_t top = std::min<std::uint16_t>(cap, static_cast<std::uint16_t>(bc.round + 1));
  for (std::uint16_t r = 1; r <= top; ++r) {
    if (!rng.coin()) continue;
    BcRound& rs = node.bco().round_state(r);
    randomize_bv(rs.est.state(), rng, n);
    for (std::size_t j = 0; j < n; ++j)
      if (rng.coin()) rs.aux[NodeId{j}] = rng.coin();
    rs.my_aux = random_opt_bool(rng);
  }
  bc.decides = {NodeSet(n), NodeSet(n)};
  for (std::size_t j = 0; j < n; ++j) {
    if (rng.chance(1, 4)) bc.decides[0].insert(NodeId{j});
    if (rng.chance(1, 4)) bc.decides[1].insert(NodeId{j});
  }

  if (rng.coin()) node.proposal() = Value{random_token(rng, values)};
  else node.proposal().reset();
  node.latched_same_value() = random_opt_bool(rng);
}

}  // namespace ssmvc
