#ifndef PARTMR_INGEST_HPP
#define PARTMR_INGEST_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "partmr/ctmc.hpp"
#include "partmr/types.hpp"

namespace partmr {

// Which metrics a run computes.
struct OutputSelection {
    bool reliability = true;
    bool availability = true;
    bool steady_state = true;
    bool correctness = true;
};

// Parsed analysis configuration: the sweep grid plus all rate parameters.
struct AnalysisConfig {
    std::vector<ModelKind> model_kinds = {ModelKind::scu_only};
    std::vector<int> partition_counts = {1};      // ignored when explicit cuts given
    std::vector<std::vector<NodeId>> explicit_cuts;  // non-empty overrides counts
    bool include_terminal_voter_partition = false;
    std::vector<double> scrub_intervals;          // seconds
    RateParams rates;
    OutputSelection outputs;
    bool reliability_over_operational = false;    // strict all-operational reliability
    std::uint64_t seed = 1;
    std::uint64_t sim_trials = 0;                 // 0 disables the Monte Carlo cross-check
    double eps = 1e-10;
};

// File parsers. All throw parse_error/input_error on malformed input.
Dfg parse_dfg(std::string_view text);
ComponentLibrary parse_library(std::string_view text);
AnalysisConfig parse_config(std::string_view text);

// "15min" -> 900, "4h" -> 14400, "30s" -> 30. Suffix required.
double parse_duration(std::string_view text);
// "5e-3/h" -> 1.389e-6; a bare number is taken as per second.
double parse_rate(std::string_view text);

// lambda_module = lambda_bit * critical_bits(kind). Throws on missing kind.
double module_rate(const ComponentLibrary& lib, const std::string& kind, double lambda_bit);

// Domain rate: sum of module rates plus the voter rate, except the first
// partition which carries no voter. partition_index is 1-based.
double domain_rate(const std::vector<double>& module_rates, double lambda_voter,
                   int partition_index);

// Split a raw domain rate into the SCU-adjusted rate and the DCU pair rates.
// With explicit gammas: beta = 2*gamma_same, beta1 = 3*gamma_cross. Without,
// beta = beta1 = alpha_dcu * lambda_domain.
PartitionRates split_rates(double lambda_domain, const RateParams& params);

// Contiguous topological blocks, sizes as equal as the node count allows with
// the remainder spread over the earliest partitions. Deterministic.
PartitionPlan plan_partitions(const Dfg& dfg, int n);

// Per-partition raw domain rates for a plan (voter attached to partitions
// 2..N, terminal voter partition appended when the plan requests it).
std::vector<double> partition_domain_rates(const Dfg& dfg, const PartitionPlan& plan,
                                           const ComponentLibrary& lib,
                                           const RateParams& params);

}  // namespace partmr

#endif
