#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ssmvc/harness.hpp"

namespace ssmvc {

// Generated scenarios shared by `check` and the acceptance tests.

std::vector<StrategyKind> all_strategies();
ByzantineStrategy sweep_strategy(StrategyKind kind, std::uint64_t seed);

// t = (n-1)/3. With a strategy, t seed-chosen nodes run it; otherwise fault-free. Correct
// proposals are all "a" when unanimous, else drawn from {a, b}. "z" is in V but never
// proposed by a correct node.
Scenario sweep_scenario(std::size_t n, std::uint64_t seed, std::optional<StrategyKind> strategy, bool unanimous);

// n=10, t=3, fault-free, four nodes propose v and six propose w.
Scenario split_scenario(std::uint64_t seed);

// Fault-free, every correct node's state randomized and every channel preloaded with noise
// at the start of epoch 0, followed by one clean epoch.
Scenario convergence_scenario(std::size_t n, std::uint64_t seed);

// Runs fn(i) for i in [0, count) on up to `jobs` threads and returns results in index order.
template <class R>
std::vector<R> parallel_map(std::size_t count, unsigned jobs, const std::function<R(std::size_t)>& fn);

unsigned default_jobs();

}  // namespace ssmvc

#include "ssmvc/suite_impl.hpp"
