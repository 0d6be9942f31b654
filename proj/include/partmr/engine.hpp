#ifndef PARTMR_ENGINE_HPP
#define PARTMR_ENGINE_HPP

#include <vector>

#include "partmr/ctmc.hpp"

namespace partmr {

struct TransientResult {
    double t = 0.0;
    std::vector<double> probabilities;   // over states, sums to ~1
    double truncation_error = 0.0;       // dropped Poisson tail mass bound
};

// Copy of the chain where every state outside `keep` loses its outgoing
// transitions. Basis of time-bounded stay/reach computations.
ComposedCtmc make_absorbing_outside(const ComposedCtmc& c, const std::vector<std::uint8_t>& keep);

// State distribution at time t from the given initial distribution, by
// uniformization. Long horizons are split into sub-intervals so the Poisson
// term count per step stays bounded.
TransientResult transient(const ComposedCtmc& c, double t, const std::vector<double>& init,
                          double eps = 1e-10);

// Probability of staying inside the up set (or the single all-operational
// state when strict_operational) throughout [0, T], starting all-operational.
// Computed by making the complement absorbing.
double reliability(const ComposedCtmc& c, double T, double eps = 1e-10,
                   bool strict_operational = false);

// Expected fraction of [0, T] spent in up states, starting all-operational:
// (1/T) * integral of P(up at t) dt, via cumulative Poisson weights.
double availability(const ComposedCtmc& c, double T, double eps = 1e-10);

// Solves pi Q = 0 with sum(pi) = 1. Direct sparse factorization for chains up
// to 1e4 states, power iteration beyond that. The residual ||pi Q||_inf must
// come out <= 1e-12 or this throws numeric_error.
std::vector<double> steady_state(const ComposedCtmc& c);

// True iff every state reachable from the initial state has a positive-rate
// one-step transition into the all-operational state.
bool check_scrub_recoverability(const ComposedCtmc& c);

}  // namespace partmr

#endif
