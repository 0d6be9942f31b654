#ifndef PARTMR_SWEEP_HPP
#define PARTMR_SWEEP_HPP

#include <optional>
#include <string>
#include <vector>

#include "partmr/ctmc.hpp"
#include "partmr/ingest.hpp"
#include "partmr/types.hpp"

namespace partmr {

// One design point's results. Metrics that were not requested stay empty and
// render as empty CSV fields.
struct SweepRow {
    ModelKind model = ModelKind::scu_only;
    int partitions = 0;
    double scrub_interval = 0.0;  // s
    double mission_time = 0.0;    // s
    std::optional<double> reliability;
    std::optional<double> availability;
    std::optional<double> steady_state_up;
    std::size_t states = 0;
    std::size_t transition_count = 0;  // aggregated rate-matrix entries
    bool simulated = false;
};

// Runs the model-kind x partitioning x scrub-interval grid. Rows come out in
// grid order regardless of how many jobs execute design points concurrently;
// when the config asks for simulation trials, each analytic row is followed
// by its simulated counterpart.
std::vector<SweepRow> run_sweep(const AnalysisConfig& cfg, const Dfg& dfg,
                                const ComponentLibrary& lib, int jobs = 1);

// Fixed column order, 12 significant digits, deterministic bytes.
std::string emit_csv(const std::vector<SweepRow>& rows);

}  // namespace partmr

#endif
