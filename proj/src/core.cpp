#include "ssmvc/core.hpp"

#include <algorithm>
#include <bit>

namespace ssmvc {

ValueSet::ValueSet(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  std::sort(tokens_.begin(), tokens_.end());
  tokens_.erase(std::unique(tokens_.begin(), tokens_.end()), tokens_.end());
}

bool ValueSet::contains(std::string_view token) const {
  return std::binary_search(tokens_.begin(), tokens_.end(), token);
}

bool NodeSet::insert(NodeId id) {
  if (id.index() >= n_) throw std::out_of_range("NodeSet::insert: node id outside universe");
  auto& w = words_[id.index() / 64];
  const std::uint64_t mask = std::uint64_t{1} << (id.index() % 64);
  const bool fresh = (w & mask) == 0;
  w |= mask;
  return fresh;
}

bool NodeSet::contains(NodeId id) const {
  if (id.index() >= n_) return false;
  return (words_[id.index() / 64] >> (id.index() % 64)) & 1u;
}

std::size_t NodeSet::count() const {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

std::vector<NodeId> NodeSet::members() const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < n_; ++i)
    if (contains(NodeId{i})) out.emplace_back(i);
  return out;
}

void NodeSet::clear() { std::fill(words_.begin(), words_.end(), 0); }

void SystemParams::validate() const {
  if (n == 0) throw std::invalid_argument("n must be positive");
  if (n < 3 * t + 1)
    throw std::invalid_argument("n=" + std::to_string(n) + " t=" + std::to_string(t) +
                                " violates n >= 3t+1");
  if (n > 0xFFFF) throw std::invalid_argument("n exceeds 16-bit node id range");
}

Thresholds thresholds(std::size_t n, std::size_t t) {
  SystemParams{n, t}.validate();
  return Thresholds{n - t, n - 2 * t, t + 1, (n + t) / 2 + 1, 2 * t + 1};
}

std::string to_string(const Outcome<Value>& o) {
  if (o.is_pending()) return "pending";
  if (o.is_error()) return "error";
  return "decided(" + o.value().token + ")";
}

std::string to_string(const Outcome<bool>& o) {
  if (o.is_pending()) return "pending";
  if (o.is_error()) return "error";
  return o.value() ? "decided(true)" : "decided(false)";
}

}  // namespace ssmvc
