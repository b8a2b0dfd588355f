#pragma once

#include <array>
#include <cstdint>
#include <set>

namespace treactor::apps {

/// Shared-counter demo. Three concurrent requests -- set(1), add(2), get() --
/// hit one service. The naive variant dispatches them in whatever order the
/// middleware's worker pool happens to pick (modeled as a seeded
/// permutation); the deterministic variant routes them through method
/// transactors at distinct tags, so the service applies them in tag order.

enum class CounterOp : int { Set = 0, Add = 1, Get = 2 };

/// Applies set(1)/add(2)/get() in the given order; returns what get() saw
/// (0 if it ran before both writes landed).
int64_t counter_apply(const std::array<CounterOp, 3>& order);

std::array<CounterOp, 3> counter_order_from_seed(uint64_t seed);

int64_t run_counter_naive(uint64_t seed);

/// Every value the naive variant can produce, over all six dispatch orders.
std::set<int64_t> counter_naive_support();

/// Same three requests issued at tags 0, 1 ms, 2 ms through client/server
/// method transactors; returns what get() saw.
int64_t run_counter_reactor(uint64_t seed, int workers = 1);

} // namespace treactor::apps
