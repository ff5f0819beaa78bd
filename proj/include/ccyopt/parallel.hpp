#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "ccyopt/types.hpp"

namespace ccyopt {

// Process-wide default worker count (set once by the CLI --workers flag).
int default_workers();
void set_default_workers(int workers);

// Runs body(i) for i in [0, count) on `workers` threads (0 = default). Tasks
// write results into caller-owned slots indexed by i, so reductions stay
// deterministic regardless of scheduling. The first exception is rethrown.
void parallel_for(Index count, const std::function<void(Index)>& body, int workers = 0);

}  // namespace ccyopt
