#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ssmvc/core.hpp"

namespace ssmvc {

enum class Protocol : std::uint8_t { Brb = 1, Bv = 2, Bc = 3 };

const char* protocol_name(Protocol p);
std::optional<Protocol> protocol_from_name(std::string_view name);

// src is filled in by the simulator, never by the sender.
struct Envelope {
  NodeId src;
  NodeId dst;
  Protocol protocol = Protocol::Brb;
  std::uint32_t epoch = 0;
  Bytes body;
  bool operator==(const Envelope&) const = default;
};

struct Outgoing {
  std::optional<NodeId> dst;  // nullopt: every node, self included
  Protocol protocol = Protocol::Brb;
  std::uint32_t epoch = 0;
  Bytes body;
};

class Outbox {
 public:
  explicit Outbox(std::uint32_t epoch) : epoch_(epoch) {}

  void broadcast(Protocol p, Bytes body) { items_.push_back({std::nullopt, p, epoch_, std::move(body)}); }
  void send(NodeId dst, Protocol p, Bytes body) { items_.push_back({dst, p, epoch_, std::move(body)}); }
  void push(Outgoing o) { items_.push_back(std::move(o)); }

  std::uint32_t epoch() const { return epoch_; }
  std::vector<Outgoing>& items() { return items_; }
  const std::vector<Outgoing>& items() const { return items_; }

 private:
  std::uint32_t epoch_;
  std::vector<Outgoing> items_;
};

// ---- BRB ----

enum class BrbKind : std::uint8_t { Init = 1, Echo = 2, Ready = 3 };
enum class Phase : std::uint8_t { Init = 0, Valid = 1 };

const char* phase_name(Phase p);

struct BrbTag {
  Phase phase = Phase::Init;
  NodeId sender;
  auto operator<=>(const BrbTag&) const = default;
};

struct BrbMessage {
  BrbKind kind = BrbKind::Init;
  BrbTag tag;
  Bytes payload;
  bool operator==(const BrbMessage&) const = default;
};

Bytes encode(const BrbMessage& m);
std::optional<BrbMessage> decode_brb(const Bytes& body);

// ---- BV (the standalone bvO object) ----

struct BvMessage {
  bool value = false;
  bool operator==(const BvMessage&) const = default;
};

Bytes encode(const BvMessage& m);
std::optional<BvMessage> decode_bv(const Bytes& body);

// ---- BC ----

enum class BcKind : std::uint8_t { Est = 1, Aux = 2, Decide = 3 };

struct BcMessage {
  BcKind kind = BcKind::Est;
  std::uint16_t round = 1;  // ignored for Decide
  bool value = false;
  bool operator==(const BcMessage&) const = default;
};

Bytes encode(const BcMessage& m);
std::optional<BcMessage> decode_bc(const Bytes& body);

// ---- VBB pair payloads carried inside BRB ----
//
// value pair: u16 origin | 0x00 | u16 len | token bytes
// flag pair:  u16 origin | 0x01 | u8 flag
// Anything that does not parse exactly is a malformed payload.

struct ValuePair {
  NodeId origin;
  std::string token;
  bool operator==(const ValuePair&) const = default;
};

struct FlagPair {
  NodeId origin;
  std::uint8_t flag = 0;
  bool operator==(const FlagPair&) const = default;
};

using Pair = std::variant<ValuePair, FlagPair>;

Bytes encode_value_pair(NodeId origin, std::string_view token);
Bytes encode_flag_pair(NodeId origin, std::uint8_t flag);
std::optional<Pair> parse_pair(const Bytes& payload);
NodeId pair_origin(const Pair& p);

std::string describe_payload(const Bytes& payload);
std::string describe(const Envelope& env);

}  // namespace ssmvc
