#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ssmvc/faults.hpp"

namespace ssmvc {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ByzantineSpec {
  NodeId node;
  ByzantineStrategy strategy;
};

struct Scenario {
  SystemParams params;
  std::vector<std::string> values;
  std::vector<std::optional<std::string>> proposals;  // one per node; Byzantine entries may be null
  std::vector<ByzantineSpec> byzantine;
  std::optional<InjectionPlan> injection;  // applied to the first epoch only
  nlohmann::json injection_source;         // as written, echoed into reports
  std::uint64_t seed = 0;
  std::uint64_t step_budget = 50'000;
  std::uint16_t round_cap = 30;
  std::size_t channel_capacity = 16;
  std::uint32_t epochs = 1;

  bool is_byzantine(NodeId id) const;
  // Distinct values proposed by correct nodes.
  std::vector<std::string> correct_proposals() const;
  std::optional<std::string> unanimous_value() const;
};

// Throws ScenarioError on unknown keys, wrong types or inconsistent contents.
Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);
nlohmann::json to_json(const Scenario& s);

std::optional<ByzantineStrategy> parse_strategy(const nlohmann::json& j);
nlohmann::json to_json(const ByzantineStrategy& s);

}  // namespace ssmvc
