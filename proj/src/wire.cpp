#include "ssmvc/wire.hpp"

#include <cstdio>

namespace ssmvc {

namespace {

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::uint16_t get_u16(const Bytes& b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::string hex(const Bytes& b, std::size_t limit = 16) {
  std::string s;
  char buf[4];
  for (std::size_t i = 0; i < b.size() && i < limit; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", b[i]);
    s += buf;
  }
  if (b.size() > limit) s += "..";
  return s;
}

const char* brb_kind_name(BrbKind k) {
  switch (k) {
    case BrbKind::Init: return "INIT";
    case BrbKind::Echo: return "ECHO";
    case BrbKind::Ready: return "READY";
  }
  return "?";
}

}  // namespace

const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::Brb: return "BRB";
    case Protocol::Bv: return "BV";
    case Protocol::Bc: return "BC";
  }
  return "?";
}

std::optional<Protocol> protocol_from_name(std::string_view name) {
  if (name == "BRB") return Protocol::Brb;
  if (name == "BV") return Protocol::Bv;
  if (name == "BC") return Protocol::Bc;
  return std::nullopt;
}

const char* phase_name(Phase p) { return p == Phase::Init ? "init" : "valid"; }

Bytes encode(const BrbMessage& m) {
  Bytes out;
  out.reserve(4 + m.payload.size());
  out.push_back(static_cast<std::uint8_t>(m.kind));
  out.push_back(static_cast<std::uint8_t>(m.tag.phase));
  put_u16(out, static_cast<std::uint16_t>(m.tag.sender.index()));
  out.insert(out.end(), m.payload.begin(), m.payload.end());
  return out;
}

std::optional<BrbMessage> decode_brb(const Bytes& body) {
  if (body.size() < 4) return std::nullopt;
  if (body[0] < 1 || body[0] > 3) return std::nullopt;
  if (body[1] > 1) return std::nullopt;
  BrbMessage m;
  m.kind = static_cast<BrbKind>(body[0]);
  m.tag.phase = static_cast<Phase>(body[1]);
  m.tag.sender = NodeId{get_u16(body, 2)};
  m.payload.assign(body.begin() + 4, body.end());
  return m;
}

Bytes encode(const BvMessage& m) { return Bytes{1, static_cast<std::uint8_t>(m.value)}; }

std::optional<BvMessage> decode_bv(const Bytes& body) {
  if (body.size() != 2 || body[0] != 1 || body[1] > 1) return std::nullopt;
  return BvMessage{body[1] == 1};
}

Bytes encode(const BcMessage& m) {
  Bytes out;
  out.push_back(static_cast<std::uint8_t>(m.kind));
  put_u16(out, m.kind == BcKind::Decide ? 0 : m.round);
  out.push_back(static_cast<std::uint8_t>(m.value));
  return out;
}

std::optional<BcMessage> decode_bc(const Bytes& body) {
  if (body.size() != 4 || body[0] < 1 || body[0] > 3 || body[3] > 1) return std::nullopt;
  BcMessage m;
  m.kind = static_cast<BcKind>(body[0]);
  m.round = get_u16(body, 1);
  m.value = body[3] == 1;
  if ((m.kind == BcKind::Decide) != (m.round == 0)) return std::nullopt;
  return m;
}

Bytes encode_value_pair(NodeId origin, std::string_view token) {
  if (token.size() > 0xFFFF) throw std::invalid_argument("value token too long");
  Bytes out;
  out.reserve(5 + token.size());
  put_u16(out, static_cast<std::uint16_t>(origin.index()));
  out.push_back(0);
  put_u16(out, static_cast<std::uint16_t>(token.size()));
  out.insert(out.end(), token.begin(), token.end());
  return out;
}

Bytes encode_flag_pair(NodeId origin, std::uint8_t flag) {
  Bytes out;
  put_u16(out, static_cast<std::uint16_t>(origin.index()));
  out.push_back(1);
  out.push_back(flag);
  return out;
}

std::optional<Pair> parse_pair(const Bytes& p) {
  if (p.size() < 3) return std::nullopt;
  const NodeId origin{get_u16(p, 0)};
  if (p[2] == 0) {
    if (p.size() < 5) return std::nullopt;
    const std::size_t len = get_u16(p, 3);
    if (p.size() != 5 + len) return std::nullopt;
    return Pair{ValuePair{origin, std::string(p.begin() + 5, p.end())}};
  }
  if (p[2] == 1) {
    if (p.size() != 4) return std::nullopt;
    return Pair{FlagPair{origin, p[3]}};
  }
  return std::nullopt;
}

NodeId pair_origin(const Pair& p) {
  return std::visit([](const auto& x) { return x.origin; }, p);
}

std::string describe_payload(const Bytes& payload) {
  const auto pair = parse_pair(payload);
  if (!pair) return "raw:" + hex(payload);
  if (const auto* v = std::get_if<ValuePair>(&*pair))
    return "(" + std::to_string(v->origin.index()) + "," + v->token + ")";
  const auto& f = std::get<FlagPair>(*pair);
  return "(" + std::to_string(f.origin.index()) + "," + std::to_string(f.flag) + ")";
}

std::string describe(const Envelope& env) {
  switch (env.protocol) {
    case Protocol::Brb: {
      const auto m = decode_brb(env.body);
      if (!m) return "undecodable " + hex(env.body);
      return std::string(brb_kind_name(m->kind)) + " " + phase_name(m->tag.phase) + "/" +
             std::to_string(m->tag.sender.index()) + " " + describe_payload(m->payload);
    }
    case Protocol::Bv: {
      const auto m = decode_bv(env.body);
      if (!m) return "undecodable " + hex(env.body);
      return std::string("BV ") + (m->value ? "1" : "0");
    }
    case Protocol::Bc: {
      const auto m = decode_bc(env.body);
      if (!m) return "undecodable " + hex(env.body);
      const char* k = m->kind == BcKind::Est ? "EST" : m->kind == BcKind::Aux ? "AUX" : "DECIDE";
      if (m->kind == BcKind::Decide) return std::string(k) + " " + (m->value ? "1" : "0");
      return std::string(k) + " r" + std::to_string(m->round) + " " + (m->value ? "1" : "0");
    }
  }
  return "?";
}

}  // namespace ssmvc
