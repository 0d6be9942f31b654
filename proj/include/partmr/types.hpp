#ifndef PARTMR_TYPES_HPP
#define PARTMR_TYPES_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace partmr {

using NodeId = std::string;

struct DfgNode {
    NodeId id;
    std::string kind;  // component kind: "adder", "multiplier", "voter", ...
};

// Data flow graph of the design: one node per basic operation, edges are
// producer -> consumer dependencies. Must be acyclic with unique node ids.
struct Dfg {
    std::string name;
    std::vector<DfgNode> nodes;
    std::vector<std::pair<NodeId, NodeId>> edges;

    const DfgNode* find(const NodeId& id) const;
};

// Per-kind critical-bit counts; the basis of module failure rates.
struct ComponentLibrary {
    std::map<std::string, long long> critical_bits;

    bool has(const std::string& kind) const { return critical_bits.count(kind) > 0; }
};

// Ordered node groups, one per partition, covering every Dfg node exactly
// once. Group order must respect topology (no edge from a later group to an
// earlier one). include_terminal_voter_partition appends an extra partition
// with an empty module sum that models the final output voters.
struct PartitionPlan {
    std::vector<std::vector<NodeId>> cuts;
    bool include_terminal_voter_partition = false;

    // Number of CTMC partitions this plan induces.
    std::size_t partition_count() const {
        return cuts.size() + (include_terminal_voter_partition ? 1 : 0);
    }
};

// All stochastic parameters. Rates are per second throughout.
struct RateParams {
    double lambda_bit = 7.31e-12;   // upsets/bit/s
    double mu = 0.0;                // scrub rate, 1/tau; 0 disables scrubbing
    double alpha_scu = 1.0;         // fraction of upsets that are single-cell
    double alpha_dcu = 0.0;         // fraction of upsets that are double-cell
    double lambda_voter = 0.0;      // voter failures/s
    std::optional<double> gamma_same;   // per-ordered-pair DCU rate, same partition
    std::optional<double> gamma_cross;  // per-ordered-pair DCU rate, cross partition
    double mission_time = 730.0 * 3600.0;  // s
};

// Stochastic inputs of one partition's CTMC module.
struct PartitionRates {
    double lambda_scu = 0.0;  // SCU-adjusted per-domain failure rate
    double beta = 0.0;        // same-partition DCU pair rate
    double beta1 = 0.0;       // cross-partition DCU rate
    bool voter_included = false;
};

struct Violation {
    std::string invariant;  // short name of the violated invariant
    std::string subject;    // offending element (node id, group index, field)
    std::string detail;
};

std::vector<Violation> validate(const Dfg& dfg);
std::vector<Violation> validate(const PartitionPlan& plan, const Dfg& dfg);
std::vector<Violation> validate(const RateParams& params);

}  // namespace partmr

#endif
