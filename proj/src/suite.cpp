#include "ssmvc/suite.hpp"

#include <algorithm>

namespace ssmvc {

using nlohmann::json;

std::vector<StrategyKind> all_strategies() {
  return {StrategyKind::Silent, StrategyKind::Equivocate, StrategyKind::FakeValid, StrategyKind::Collusion,
          StrategyKind::RandomNoise};
}

ByzantineStrategy sweep_strategy(StrategyKind kind, std::uint64_t seed) {
  switch (kind) {
    case StrategyKind::Silent: return ByzantineStrategy::silent();
    case StrategyKind::Equivocate: return ByzantineStrategy::equivocate(Value{"a"}, Value{"b"});
    case StrategyKind::FakeValid: return ByzantineStrategy::fake_valid(seed % 2 == 0);
    case StrategyKind::Collusion: return ByzantineStrategy::collusion(Value{"z"});
    case StrategyKind::RandomNoise: return ByzantineStrategy::random_noise(seed);
  }
  return ByzantineStrategy::silent();
}

namespace {

Scenario base(std::size_t n, std::size_t t, std::uint64_t seed) {
  Scenario s;
  s.params = SystemParams{n, t};
  s.values = {"a", "b", "c", "z"};
  s.seed = seed;
  s.proposals.assign(n, std::nullopt);
  return s;
}

}  // namespace

Scenario sweep_scenario(std::size_t n, std::uint64_t seed, std::optional<StrategyKind> strategy, bool unanimous) {
  const std::size_t t = (n - 1) / 3;
  Scenario s = base(n, t, seed);
  Rng rng(derive_seed(seed, 0x5EE9 + n));
  std::vector<std::size_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;
  for (std::size_t i = n - 1; i > 0; --i) std::swap(ids[i], ids[rng.below(i + 1)]);
  if (strategy) {
    std::vector<std::size_t> bad(ids.begin(), ids.begin() + t);
    std::sort(bad.begin(), bad.end());
    for (auto b : bad) s.byzantine.push_back({NodeId{b}, sweep_strategy(*strategy, seed)});
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (s.is_byzantine(NodeId{i})) continue;
    s.proposals[i] = unanimous ? "a" : (rng.coin() ? "a" : "b");
  }
  return s;
}

Scenario split_scenario(std::uint64_t seed) {
  Scenario s = base(10, 3, seed);
  s.values = {"v", "w"};
  for (std::size_t i = 0; i < 10; ++i) s.proposals[i] = i < 4 ? "v" : "w";
  return s;
}

Scenario convergence_scenario(std::size_t n, std::uint64_t seed) {
  const std::size_t t = (n - 1) / 3;
  json j = {{"n", n},
            {"t", t},
            {"values", {"a", "b", "c", "z"}},
            {"proposals", json::array()},
            {"seed", seed},
            {"epochs", 2},
            {"injection",
             {{"targets", "all_correct"},
              {"mutations", {{{"randomize", derive_seed(seed, 0xA11)}}}},
              {"noise", {{"seed", derive_seed(seed, 0xB0B)}, {"per_channel", 2}}}}}};
  Rng rng(derive_seed(seed, 0xC0 + n));
  const bool unanimous = seed % 2 == 0;
  for (std::size_t i = 0; i < n; ++i) j["proposals"].push_back(unanimous ? "a" : (rng.coin() ? "a" : "b"));
  return parse_scenario(j);
}

unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

}  // namespace ssmvc
