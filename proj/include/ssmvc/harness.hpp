#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ssmvc/scenario.hpp"
#include "ssmvc/simnet.hpp"

namespace ssmvc {

enum class Stack { SelfStabilizing, Reference };

struct EpochReport;

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides the scenario seed
  std::string schedule = "random";    // random | starve:<node>
  Stack stack = Stack::SelfStabilizing;
  std::function<void(const TraceRecord&)> trace;
  // Called at the end of every epoch, before recycling.
  std::function<void(const SimWorld&, const EpochReport&)> epoch_end;
};

enum class Status { Pass, Fail, Skip };
const char* status_name(Status s);

struct Verdict {
  Status status = Status::Skip;
  std::string witness;
};

struct EpochReport {
  std::uint32_t epoch = 0;
  bool injected = false;
  bool completed = false;
  std::uint64_t steps_to_completion = 0;
  bool settled = false;
  std::uint64_t steps = 0;
  std::vector<std::string> outcomes;        // final; "byzantine" for faulty nodes
  std::vector<std::string> first_outcomes;  // first non-pending result
  std::vector<std::string> bc_outcomes;
  // Injected epochs: every node's vbb_deliver vector right after injection, before any step.
  std::vector<std::vector<std::string>> injected_vbb;
  // Injected epochs: whether every correct node ended with a non-pending VBB outcome for every
  // correct sender. Reported, not judged (see README).
  bool vbb_converged = false;
  std::uint64_t result_changes = 0;         // correct nodes whose result changed after leaving pending
  WorldStats stats;                         // this epoch only
  std::map<std::string, Verdict> verdicts;
};

struct Report {
  Scenario scenario;
  Stack stack = Stack::SelfStabilizing;
  std::string schedule;
  std::vector<EpochReport> epochs;
  std::map<std::string, Verdict> verdicts;  // worst status over epochs
  bool pass = false;

  nlohmann::json to_json() const;
  bool all_completed() const;
};

// Property keys evaluated on clean epochs of the self-stabilizing stack.
const std::vector<std::string>& property_keys();

std::unique_ptr<SchedulePolicy> make_policy(const std::string& name, const SystemParams& params);

// Throws ScenarioError when the scenario cannot be run as written (bad injection, bad schedule).
Report run_scenario(const Scenario& scenario, const RunOptions& options = {});

struct DiffResult {
  Report self_stabilizing;
  Report reference;
  std::vector<std::string> legal;  // outcome strings both stacks may produce
  bool consistent = false;
  std::string reason;

  nlohmann::json to_json() const;
};

DiffResult run_diff(const Scenario& scenario, const RunOptions& options = {});

// Legal consensus outcomes given the correct proposals: the unanimous value alone, otherwise any
// correct proposal or the error symbol.
std::vector<std::string> legal_outcomes(const Scenario& scenario);

}  // namespace ssmvc
