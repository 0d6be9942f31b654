#ifndef PARTMR_PROPERTY_HPP
#define PARTMR_PROPERTY_HPP

#include <string>
#include <string_view>
#include <vector>

#include "partmr/ctmc.hpp"

namespace partmr {

enum class PropertyKind {
    stay,               // P=?[G[0,T] label]
    reach,              // P=?[F[0,T] label]
    steady,             // S=?[label]
    cumulative_reward,  // R{up_time}=?[C<=T]/T
    forall_next,        // forall next label
};

enum class StateLabel { up, down, operational, degraded, failed };

const char* to_string(StateLabel label);

struct PropertyQuery {
    PropertyKind kind = PropertyKind::stay;
    StateLabel label = StateLabel::up;  // cumulative_reward always rewards up states
    double time_bound = 0.0;            // seconds; meaningful for stay/reach/reward

    bool operator==(const PropertyQuery&) const = default;
};

// Parses one of the five supported query forms. Throws parse_error with the
// offending position; unsupported constructs (unbounded until, probability
// thresholds, nested paths) are rejected by name.
PropertyQuery parse_property(std::string_view text);

// Canonical printer; parse_property(to_string(q)) == q.
std::string to_string(const PropertyQuery& q);

// Per-state membership mask for a label.
std::vector<std::uint8_t> label_mask(const ComposedCtmc& c, StateLabel label);

// Evaluates a query against a labeled chain. Probability-valued queries
// return the probability; forall_next returns 1.0 when the property holds
// and 0.0 otherwise.
double eval_property(const ComposedCtmc& c, const PropertyQuery& q, double eps = 1e-10);

}  // namespace partmr

#endif
