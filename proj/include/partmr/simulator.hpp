#ifndef PARTMR_SIMULATOR_HPP
#define PARTMR_SIMULATOR_HPP

#include <cstdint>
#include <utility>

#include "partmr/ctmc.hpp"

namespace partmr {

enum class MetricKind { reliability, availability };

struct SimEstimate {
    MetricKind metric = MetricKind::reliability;
    double estimate = 0.0;    // point estimate in [0,1]
    double half_width = 0.0;  // 99% confidence half-width around the estimate
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
};

// Monte Carlo estimates of reliability (no down state entered before T) and
// availability (fraction of [0,T] in up states) from `trials` independent
// trajectories started all-operational. Each trial's randomness depends only
// on (seed, trial index), so the result is identical for any worker count.
std::pair<SimEstimate, SimEstimate> simulate(const ComposedCtmc& c, double T,
                                             std::uint64_t trials, std::uint64_t seed,
                                             int workers = 1);

}  // namespace partmr

#endif
