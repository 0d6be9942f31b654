#ifndef PARTMR_CTMC_HPP
#define PARTMR_CTMC_HPP

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace partmr {

// Local partition states. 3 = operational (all domains fine), 2 = degraded
// (one domain failed, output still correct), 1 = failed (>= 2 domains down).
inline constexpr int kStateFailed = 1;
inline constexpr int kStateDegraded = 2;
inline constexpr int kStateOperational = 3;

enum class ModelKind { scu_only, combined };

const char* to_string(ModelKind kind);

struct ModuleTransition {
    int from;            // local state 1..3
    int to;              // local state 1..3
    std::string action;  // synchronization label
    double rate;
};

// One partition's labeled 3-state CTMC. Action labels whose names appear in
// several modules synchronize under parallel composition (rate product);
// all others interleave.
struct CtmcModule {
    std::string name;  // "P1", "P2", ...
    ModelKind kind = ModelKind::scu_only;
    std::vector<ModuleTransition> transitions;

    std::set<std::string> alphabet() const;
    // Sum of rates over transitions matching (from, to), any action.
    double rate_between(int from, int to) const;
};

struct ComposedTransition {
    std::uint32_t from;
    std::uint32_t to;
    std::uint32_t action;  // index into ComposedCtmc::actions
    double rate;
};

// Sparse global CTMC over the product state space of N partitions.
//
// States are N-tuples of local states indexed lexicographically with
// partition 1 as the most significant digit: index = sum (s_i - 1) * 3^(N-i).
// The initial (all-operational) state is therefore 3^N - 1. Self-loop rates
// are retained in the rate matrix for structural checks but excluded from
// exit rates and generator diagonals.
struct ComposedCtmc {
    int partitions = 0;
    std::size_t state_count = 0;

    std::vector<std::string> actions;               // action name table
    std::vector<ComposedTransition> transitions;    // per-action provenance

    // Aggregated rate matrix in CSR form; parallel edges between the same
    // ordered state pair are summed.
    std::vector<std::size_t> row_ptr;
    std::vector<std::uint32_t> col;
    std::vector<double> rate;

    // State labels, filled by label_states().
    bool labeled = false;
    std::vector<std::uint8_t> up;
    std::size_t operational_state = 0;  // the all-operational state

    std::size_t initial_state() const { return state_count - 1; }
    // Decode a state index into local states (partition order, values 1..3).
    std::vector<int> local_states(std::size_t state) const;
    std::size_t index_of(const std::vector<int>& locals) const;
    // Total off-diagonal rate out of a state.
    double exit_rate(std::size_t state) const;

    // Build the CSR matrix from `transitions`. Must be called once after the
    // transition list is final.
    void finalize();
};

}  // namespace partmr

#endif
