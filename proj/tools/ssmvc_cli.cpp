#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ssmvc/harness.hpp"
#include "ssmvc/suite.hpp"

using namespace ssmvc;
using nlohmann::json;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kMalformed = 2;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ScenarioError("cannot write " + path);
  f << text;
}

void emit(const json& j, const std::string& report_path) {
  const std::string text = j.dump(2) + "\n";
  if (report_path.empty()) std::cout << text;
  else write_text(report_path, text);
}

std::pair<std::uint64_t, std::uint64_t> parse_range(const std::string& s) {
  const auto dots = s.find("..");
  auto num = [&](const std::string& x) -> std::uint64_t {
    if (x.empty() || x.size() > 19 || x.find_first_not_of("0123456789") != std::string::npos)
      throw ScenarioError("bad seed range '" + s + "' (expected A..B)");
    return std::stoull(x);
  };
  if (dots == std::string::npos) {
    const auto a = num(s);
    return {a, a};
  }
  const auto a = num(s.substr(0, dots)), b = num(s.substr(dots + 2));
  if (b < a) throw ScenarioError("empty seed range '" + s + "'");
  return {a, b};
}

json failed_keys(const Report& r) {
  json out = json::array();
  for (const auto& [k, v] : r.verdicts)
    if (v.status == Status::Fail) out.push_back(k);
  if (!r.all_completed()) out.push_back("epochs_incomplete");
  return out;
}

struct Group {
  std::string name;
  std::vector<Scenario> runs;
  bool diff = false;
};

int check(const std::string& dir, std::size_t seeds, unsigned jobs) {
  std::vector<Group> groups;
  for (std::size_t n : {4, 7, 10}) {
    Group g{"safety n=" + std::to_string(n), {}, false};
    for (std::uint64_t s = 0; s < seeds; ++s) {
      g.runs.push_back(sweep_scenario(n, s, std::nullopt, false));
      for (auto k : all_strategies()) g.runs.push_back(sweep_scenario(n, s, k, false));
    }
    groups.push_back(std::move(g));
    Group v{"validity n=" + std::to_string(n), {}, false};
    for (std::uint64_t s = 0; s < seeds; ++s) v.runs.push_back(sweep_scenario(n, s, std::nullopt, true));
    groups.push_back(std::move(v));
  }
  for (std::size_t n : {4, 7}) {
    Group g{"convergence n=" + std::to_string(n), {}, false};
    for (std::uint64_t s = 0; s < seeds; ++s) g.runs.push_back(convergence_scenario(n, s));
    groups.push_back(std::move(g));
  }
  Group d{"diff", {}, true};
  for (std::uint64_t s = 0; s < seeds; ++s) {
    d.runs.push_back(split_scenario(s));
    d.runs.push_back(sweep_scenario(4, s, std::nullopt, true));
    d.runs.push_back(sweep_scenario(7, s, std::nullopt, false));
  }
  groups.push_back(std::move(d));
  if (!dir.empty()) {
    Group f{"scenarios " + dir, {}, false};
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
      if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) f.runs.push_back(load_scenario(p.string()));
    groups.push_back(std::move(f));
  }

  bool all = true;
  for (const auto& g : groups) {
    const auto ok = parallel_map<std::string>(g.runs.size(), jobs, [&](std::size_t i) -> std::string {
      if (g.diff) {
        const auto r = run_diff(g.runs[i]);
        return r.consistent ? "" : r.reason;
      }
      const auto r = run_scenario(g.runs[i]);
      return r.pass ? "" : failed_keys(r).dump();
    });
    std::size_t passed = 0;
    for (const auto& s : ok) passed += s.empty();
    std::cout << (passed == ok.size() ? "PASS " : "FAIL ") << g.name << ": " << passed << "/" << ok.size() << "\n";
    for (std::size_t i = 0; i < ok.size(); ++i)
      if (!ok[i].empty())
        std::cout << "  seed " << g.runs[i].seed << " n=" << g.runs[i].params.n << ": " << ok[i] << "\n";
    all = all && passed == ok.size();
  }
  return all ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-stabilizing Byzantine multivalued consensus harness"};
  app.require_subcommand(1);

  std::string file, report, trace, schedule = "random", seeds_range;
  std::optional<std::uint64_t> seed;
  bool reference = false;
  unsigned jobs = default_jobs();
  std::size_t check_seeds = 10;
  std::string scenarios_dir;

  auto* run = app.add_subcommand("run", "Run one scenario and print its report");
  run->add_option("scenario", file, "Scenario file")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--trace", trace, "Write a JSONL trace here");
  run->add_option("--report", report, "Write the report here instead of stdout");
  run->add_option("--schedule", schedule, "random | starve:<node>");
  run->add_flag("--reference", reference, "Run the non-self-stabilizing reference stack");

  auto* sweep = app.add_subcommand("sweep", "Run one scenario over a seed range");
  sweep->add_option("scenario", file, "Scenario file")->required();
  sweep->add_option("--seeds", seeds_range, "Seed range A..B (inclusive)")->required();
  sweep->add_option("--report", report, "Write the summary here instead of stdout");
  sweep->add_option("--schedule", schedule, "random | starve:<node>");
  sweep->add_option("--jobs", jobs, "Worker threads");
  sweep->add_flag("--reference", reference, "Run the non-self-stabilizing reference stack");

  auto* chk = app.add_subcommand("check", "Run the built-in property suite");
  chk->add_option("--scenarios", scenarios_dir, "Also run every *.json in this directory");
  chk->add_option("--seeds", check_seeds, "Seeds per group");
  chk->add_option("--jobs", jobs, "Worker threads");

  auto* diff = app.add_subcommand("diff", "Compare the self-stabilizing stack with the reference");
  diff->add_option("scenario", file, "Scenario file")->required();
  diff->add_option("--seed", seed, "Override the scenario seed");
  diff->add_option("--report", report, "Write the comparison here instead of stdout");
  diff->add_option("--schedule", schedule, "random | starve:<node>");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kMalformed;
  }

  try {
    RunOptions opt;
    opt.seed = seed;
    opt.schedule = schedule;
    opt.stack = reference ? Stack::Reference : Stack::SelfStabilizing;

    if (*run) {
      const Scenario sc = load_scenario(file);
      std::ofstream tf;
      if (!trace.empty()) {
        tf.open(trace, std::ios::binary);
        if (!tf) throw ScenarioError("cannot write " + trace);
        opt.trace = [&tf](const TraceRecord& r) { tf << to_jsonl(r) << '\n'; };
      }
      const Report r = run_scenario(sc, opt);
      emit(r.to_json(), report);
      return r.pass ? kPass : kFail;
    }
    if (*sweep) {
      const Scenario sc = load_scenario(file);
      const auto [a, b] = parse_range(seeds_range);
      const auto rows = parallel_map<json>(b - a + 1, jobs, [&](std::size_t i) {
        RunOptions o = opt;
        o.seed = a + i;
        const Report r = run_scenario(sc, o);
        return json{{"seed", a + i},
                    {"pass", r.pass},
                    {"completed", r.all_completed()},
                    {"outcomes", r.epochs.empty() ? json::array() : json(r.epochs.back().outcomes)},
                    {"failed", failed_keys(r)}};
      });
      std::size_t passed = 0;
      for (const auto& row : rows) passed += row["pass"].get<bool>();
      emit(json{{"scenario", file},
                {"stack", reference ? "reference" : "self-stabilizing"},
                {"schedule", schedule},
                {"runs", rows},
                {"passed", passed},
                {"total", rows.size()}},
           report);
      return passed == rows.size() ? kPass : kFail;
    }
    if (*chk) return check(scenarios_dir, check_seeds, jobs);
    if (*diff) {
      const Scenario sc = load_scenario(file);
      const DiffResult d = run_diff(sc, opt);
      emit(d.to_json(), report);
      return d.consistent ? kPass : kFail;
    }
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMalformed;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMalformed;
  }
  return kMalformed;
}
