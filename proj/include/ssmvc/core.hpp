#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ssmvc {

using Bytes = std::vector<std::uint8_t>;

class NodeId {
 public:
  constexpr NodeId() = default;
  constexpr explicit NodeId(std::size_t index) : index_(static_cast<std::uint16_t>(index)) {}

  constexpr std::size_t index() const { return index_; }
  constexpr auto operator<=>(const NodeId&) const = default;

 private:
  std::uint16_t index_ = 0;
};

// A proposal token. Opaque to every layer except VBB validation.
struct Value {
  std::string token;
  auto operator<=>(const Value&) const = default;
};

// The finite domain V, kept sorted and deduplicated.
class ValueSet {
 public:
  ValueSet() = default;
  explicit ValueSet(std::vector<std::string> tokens);

  bool contains(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }

 private:
  std::vector<std::string> tokens_;
};

struct PendingTag {
  bool operator==(const PendingTag&) const = default;
};
struct ErrorTag {
  bool operator==(const ErrorTag&) const = default;
};

// Three-valued protocol result: not yet known, transient-fault/Byzantine indicator, or a value.
template <class T>
class Outcome {
 public:
  Outcome() = default;
  static Outcome pending() { return Outcome(); }
  static Outcome error() {
    Outcome o;
    o.v_ = ErrorTag{};
    return o;
  }
  static Outcome decided(T value) {
    Outcome o;
    o.v_ = std::move(value);
    return o;
  }

  bool is_pending() const { return std::holds_alternative<PendingTag>(v_); }
  bool is_error() const { return std::holds_alternative<ErrorTag>(v_); }
  bool is_decided() const { return std::holds_alternative<T>(v_); }

  const T& value() const {
    if (!is_decided()) throw std::logic_error("Outcome::value on non-decided outcome");
    return std::get<T>(v_);
  }

  bool operator==(const Outcome&) const = default;

 private:
  std::variant<PendingTag, ErrorTag, T> v_{PendingTag{}};
};

// Set over {false, true}.
class BoolSet {
 public:
  constexpr BoolSet() = default;
  static constexpr BoolSet of(bool b) {
    BoolSet s;
    s.insert(b);
    return s;
  }

  constexpr void insert(bool b) { bits_ |= bit(b); }
  constexpr bool contains(bool b) const { return (bits_ & bit(b)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::size_t size() const { return (bits_ & 1u) + ((bits_ >> 1) & 1u); }
  constexpr std::uint8_t bits() const { return bits_; }
  static constexpr BoolSet from_bits(std::uint8_t b) {
    BoolSet s;
    s.bits_ = static_cast<std::uint8_t>(b & 3u);
    return s;
  }
  constexpr bool operator==(const BoolSet&) const = default;

 private:
  static constexpr std::uint8_t bit(bool b) { return b ? 2u : 1u; }
  std::uint8_t bits_ = 0;
};

// Membership set over node indices [0, n).
class NodeSet {
 public:
  NodeSet() = default;
  explicit NodeSet(std::size_t n) : words_((n + 63) / 64, 0), n_(n) {}

  bool insert(NodeId id);
  bool contains(NodeId id) const;
  std::size_t count() const;
  bool empty() const { return count() == 0; }
  std::size_t universe() const { return n_; }
  std::vector<NodeId> members() const;
  void clear();
  bool operator==(const NodeSet&) const = default;

 private:
  std::vector<std::uint64_t> words_;
  std::size_t n_ = 0;
};

struct Thresholds {
  std::size_t n_minus_t;
  std::size_t n_minus_2t;
  std::size_t t_plus_1;
  std::size_t echo_quorum;  // floor((n+t)/2)+1
  std::size_t two_t_plus_1;
  bool operator==(const Thresholds&) const = default;
};

struct SystemParams {
  std::size_t n = 4;
  std::size_t t = 1;

  // Throws std::invalid_argument unless n >= 3t+1 and n fits a 16-bit node id.
  void validate() const;
  bool contains(NodeId id) const { return id.index() < n; }
};

Thresholds thresholds(std::size_t n, std::size_t t);
inline Thresholds thresholds(const SystemParams& p) { return thresholds(p.n, p.t); }

std::string to_string(const Outcome<Value>& o);
std::string to_string(const Outcome<bool>& o);

}  // namespace ssmvc
