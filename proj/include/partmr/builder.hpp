#ifndef PARTMR_BUILDER_HPP
#define PARTMR_BUILDER_HPP

#include <string>
#include <utility>
#include <vector>

#include "partmr/ctmc.hpp"
#include "partmr/types.hpp"

namespace partmr {

// Everything needed to instantiate the global model: per-partition rates, the
// shared scrub rate, and which partition pairs share configuration frames
// (cross-partition double-cell upsets). Pair indices are 1-based.
struct SystemSpec {
    ModelKind kind = ModelKind::scu_only;
    std::vector<PartitionRates> partition_rates;
    double mu = 0.0;
    std::vector<std::pair<int, int>> cross_dcu_pairs;
    int scrub_master = 1;  // 1-based partition carrying the scrub rate
};

// Per-partition rates for a model kind. The SCU-only model drives its
// transitions with the full domain rate (no single/double-cell split); the
// combined model applies the alpha split from the params.
std::vector<PartitionRates> rates_for_model(ModelKind kind,
                                            const std::vector<double>& domain_rates,
                                            const RateParams& params);

// Single-partition module builders. scrub_rate is mu on the scrub master and
// 1.0 on every other partition so that synchronization multiplies to mu.
CtmcModule build_scu_partition(const std::string& name, double lambda_scu, double scrub_rate);
CtmcModule build_combined_partition(const std::string& name, double lambda_scu, double beta,
                                    double scrub_rate);

// Adds the synchronized degradation actions dcu_i_j / dcu_j_i to both members
// of each pair. The side named first in the action carries the physical rate
// (3*beta1 from operational, 2*beta1 from degraded), the echo side rate 1.
// Requires combined-model modules.
void add_cross_dcu_actions(std::vector<CtmcModule>& modules,
                           const std::vector<std::pair<int, int>>& pairs,
                           const std::vector<double>& beta1);

// All partition modules with local labels qualified ("p1_scu1") and cross
// actions attached, ready for composition.
std::vector<CtmcModule> build_modules(const SystemSpec& spec);

// Parallel composition: actions present in several alphabets fire jointly
// with the product of their local rates, all others interleave.
ComposedCtmc compose(const std::vector<CtmcModule>& modules);

// Fills the up vector (every partition at state >= 2) and the index of the
// all-operational state.
void label_states(ComposedCtmc& system);

// build_modules + compose + label_states + finalize.
ComposedCtmc build_system(const SystemSpec& spec);

// PRISM-language rendering of the same system: one module per partition, one
// command per transition, except scrubbing which collapses into a single
// guarded command per module.
std::string export_prism(const SystemSpec& spec);

}  // namespace partmr

#endif
