// One PASS/FAIL line per acceptance criterion. Exit status is nonzero if any line fails.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>

#include "ssmvc/harness.hpp"
#include "ssmvc/suite.hpp"

using namespace ssmvc;

namespace {

constexpr std::uint64_t kSeeds = 100;
constexpr std::uint64_t kDiffSeeds = 100;
constexpr double kCompletionFloor = 0.99;
constexpr double kSweepSeconds = 300.0;

bool failed = false;

void line(int id, const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << " " << name << ": " << detail << std::endl;
  failed = failed || !ok;
}

bool is_pass(const Report& r, const std::string& key) {
  const auto it = r.verdicts.find(key);
  return it == r.verdicts.end() || it->second.status != Status::Fail;
}

std::string fraction(std::size_t a, std::size_t b) { return std::to_string(a) + "/" + std::to_string(b); }

struct Row {
  std::string label;
  bool completed = false;
  bool safety = false;     // bc/mvc agreement and no-intrusion
  bool validity = true;    // unanimous runs only
  bool layers = false;     // brb.*, bv.*, vbb.*
  std::string why;
};

Row summarize(const std::string& label, const Report& r, bool unanimous) {
  Row row;
  row.label = label;
  row.completed = r.all_completed();
  row.safety = is_pass(r, "bc.agreement") && is_pass(r, "mvc.agreement") && is_pass(r, "mvc.no_intrusion");
  row.layers = true;
  for (const auto& [k, v] : r.verdicts) {
    if (v.status != Status::Fail) continue;
    row.why += k + " ";
    if (k.rfind("brb.", 0) == 0 || k.rfind("bv.", 0) == 0 || k.rfind("vbb.", 0) == 0) row.layers = false;
  }
  if (unanimous) {
    const auto v = *r.scenario.unanimous_value();
    for (const auto& e : r.epochs)
      for (const auto& o : e.outcomes)
        if (o != "byzantine" && o != "decided(" + v + ")") row.validity = false;
    row.validity = row.validity && is_pass(r, "mvc.validity");
  }
  return row;
}

void print_misses(const std::vector<Row>& rows, bool Row::*field) {
  std::size_t shown = 0;
  for (const auto& r : rows)
    if (!(r.*field) && shown++ < 10) std::cout << "    " << r.label << " " << r.why << "\n";
}

}  // namespace

int main() {
  const unsigned jobs = default_jobs();

  // Criteria 1, 3 and 6 share one sweep; 2 adds the unanimous fault-free runs.
  struct Job {
    Scenario sc;
    std::string label;
    bool unanimous;
  };
  std::vector<Job> sweep, unanimous;
  for (std::size_t n : {4, 7, 10})
    for (std::uint64_t s = 0; s < kSeeds; ++s) {
      sweep.push_back({sweep_scenario(n, s, std::nullopt, false), "n=" + std::to_string(n) + " seed=" + std::to_string(s) + " fault-free", false});
      for (auto k : all_strategies()) {
        Scenario sc = sweep_scenario(n, s, k, false);
        const std::string name = sc.byzantine.front().strategy.name();
        sweep.push_back({std::move(sc), "n=" + std::to_string(n) + " seed=" + std::to_string(s) + " " + name, false});
      }
      unanimous.push_back({sweep_scenario(n, s, std::nullopt, true), "n=" + std::to_string(n) + " seed=" + std::to_string(s) + " unanimous", true});
    }

  auto run_all = [&](const std::vector<Job>& js) {
    return parallel_map<Row>(js.size(), jobs, [&](std::size_t i) {
      return summarize(js[i].label, run_scenario(js[i].sc), js[i].unanimous);
    });
  };

  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = run_all(sweep);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto urows = run_all(unanimous);

  {
    std::size_t ok = 0;
    for (const auto& r : rows) ok += r.safety;
    std::ostringstream d;
    d << fraction(ok, rows.size()) << " runs, " << static_cast<int>(secs) << "s on " << jobs << " threads (limit "
      << static_cast<int>(kSweepSeconds) << "s)";
    line(1, "safety sweep", ok == rows.size() && secs < kSweepSeconds, d.str());
    print_misses(rows, &Row::safety);
  }
  {
    std::size_t ok = 0;
    for (const auto& r : urows) ok += r.validity && r.completed;
    line(2, "validity", ok == urows.size(), fraction(ok, urows.size()) + " unanimous runs decided the proposal");
    print_misses(urows, &Row::validity);
  }
  {
    std::size_t ok = 0, total = rows.size() + urows.size();
    for (const auto& r : rows) ok += r.completed;
    for (const auto& r : urows) ok += r.completed;
    const double rate = static_cast<double>(ok) / static_cast<double>(total);
    char buf[64];
    std::snprintf(buf, sizeof buf, " (%.2f%%, floor %.0f%%)", rate * 100, kCompletionFloor * 100);
    line(3, "completion", rate >= kCompletionFloor, fraction(ok, total) + buf);
    print_misses(rows, &Row::completed);
    print_misses(urows, &Row::completed);
  }

  // 4: randomized state and channel noise in epoch 0, then one clean epoch.
  {
    std::size_t done = 0, closed = 0, converged = 0, total = 0;
    std::vector<std::string> misses;
    for (std::size_t n : {4, 7}) {
      const auto res = parallel_map<std::array<bool, 3>>(kSeeds, jobs, [&](std::size_t s) {
        const Report r = run_scenario(convergence_scenario(n, s));
        const bool c0 = !r.epochs.empty() && r.epochs[0].completed;
        const bool c1 = r.epochs.size() == 2 && r.pass;
        return std::array<bool, 3>{c0, c1, c0 && r.epochs[0].vbb_converged};
      });
      for (std::size_t s = 0; s < res.size(); ++s) {
        done += res[s][0];
        closed += res[s][1];
        converged += res[s][2];
        ++total;
        if (!res[s][0] || !res[s][1]) misses.push_back("n=" + std::to_string(n) + " seed=" + std::to_string(s));
      }
    }
    line(4, "convergence", done == total && closed == total,
         fraction(done, total) + " injected epochs completed, " + fraction(closed, total) +
             " follow-up epochs clean (info: per-sender VBB settled in " + fraction(converged, total) + ")");
    for (const auto& m : misses) std::cout << "    " << m << "\n";
  }

  // 5: hand-built corrupted starts, each run twice.
  {
    struct Targeted {
      const char* file;
      std::function<bool(const Report&)> expect;
    };
    const std::vector<Targeted> cases = {
        {"targeted/valid_without_init.json",
         [](const Report& r) { return r.epochs[0].injected_vbb[0][1] == "error"; }},
        {"targeted/malformed_payload.json",
         [](const Report& r) {
           return r.epochs[0].injected_vbb[0][1] == "error" && r.epochs[0].injected_vbb[0][2] == "error";
         }},
        {"targeted/stalled_valid_phase.json",
         [](const Report& r) {
           for (std::size_t k = 1; k < 4; ++k)
             if (r.epochs[0].injected_vbb[0][k] == "pending") return false;
           return true;
         }},
        {"targeted/bc_predecided_true.json",
         [](const Report& r) {
           for (const auto& o : r.epochs[0].outcomes)
             if (o != "error" && o != "byzantine") return false;
           return true;
         }},
    };
    std::size_t ok = 0;
    std::string bad;
    for (const auto& c : cases) {
      const Scenario sc = load_scenario(std::string(SCENARIO_DIR) + "/" + c.file);
      const Report a = run_scenario(sc), b = run_scenario(sc);
      const bool good = !a.epochs.empty() && a.epochs[0].completed && a.pass && c.expect(a) &&
                        a.to_json().dump() == b.to_json().dump();
      ok += good;
      if (!good) bad += std::string(" ") + c.file;
    }
    line(5, "targeted consistency", ok == cases.size(), fraction(ok, cases.size()) + " scenarios" + bad);
  }

  {
    std::size_t ok = 0;
    for (const auto& r : rows) ok += r.layers;
    line(6, "layer oracles", ok == rows.size(), fraction(ok, rows.size()) + " sweep runs with every brb/bv/vbb checker passing");
    print_misses(rows, &Row::layers);
  }

  // 7: both stacks on fault-free runs, unanimous and split.
  {
    std::vector<Scenario> ds;
    for (std::uint64_t s = 0; s < kDiffSeeds; ++s) {
      ds.push_back(split_scenario(s));
      for (std::size_t n : {4, 7, 10}) ds.push_back(sweep_scenario(n, s, std::nullopt, true));
    }
    const auto res = parallel_map<std::string>(ds.size(), jobs, [&](std::size_t i) {
      const DiffResult d = run_diff(ds[i]);
      return d.consistent ? std::string() : d.reason;
    });
    std::size_t ok = 0;
    for (const auto& r : res) ok += r.empty();
    line(7, "differential", ok == res.size(), fraction(ok, res.size()) + " runs consistent with the legal outcome sets");
    for (std::size_t i = 0, shown = 0; i < res.size(); ++i)
      if (!res[i].empty() && shown++ < 10) std::cout << "    seed " << ds[i].seed << ": " << res[i] << "\n";
  }

  // 8: identical inputs give byte-identical reports.
  {
    std::vector<Scenario> ds;
    for (std::uint64_t s = 0; s < 5; ++s) {
      ds.push_back(sweep_scenario(7, s, StrategyKind::RandomNoise, false));
      ds.push_back(sweep_scenario(10, s, StrategyKind::Equivocate, false));
      ds.push_back(convergence_scenario(4, s));
    }
    const auto res = parallel_map<bool>(ds.size(), jobs, [&](std::size_t i) {
      return run_scenario(ds[i]).to_json().dump() == run_scenario(ds[i]).to_json().dump();
    });
    std::size_t ok = 0;
    for (bool b : res) ok += b;
    line(8, "determinism", ok == res.size(), fraction(ok, res.size()) + " scenarios reproduced byte for byte");
  }

  return failed ? 1 : 0;
}
