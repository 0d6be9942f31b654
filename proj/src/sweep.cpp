#include "partmr/sweep.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <thread>

#include "partmr/builder.hpp"
#include "partmr/engine.hpp"
#include "partmr/errors.hpp"
#include "partmr/simulator.hpp"

namespace partmr {

namespace {

struct DesignPoint {
    ModelKind kind;
    PartitionPlan plan;
    double tau;
    std::uint64_t seed;
};

std::string point_context(const DesignPoint& p) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "design point model=%s N=%zu tau=%gs: ", to_string(p.kind),
                  p.plan.partition_count(), p.tau);
    return buf;
}

std::vector<SweepRow> run_point(const DesignPoint& p, const AnalysisConfig& cfg, const Dfg& dfg,
                                const ComponentLibrary& lib) {
    std::vector<double> domain = partition_domain_rates(dfg, p.plan, lib, cfg.rates);

    SystemSpec spec;
    spec.kind = p.kind;
    spec.mu = 1.0 / p.tau;
    spec.partition_rates = rates_for_model(p.kind, domain, cfg.rates);
    ComposedCtmc chain = build_system(spec);

    SweepRow row;
    row.model = p.kind;
    row.partitions = static_cast<int>(p.plan.partition_count());
    row.scrub_interval = p.tau;
    row.mission_time = cfg.rates.mission_time;
    row.states = chain.state_count;
    row.transition_count = chain.col.size();
    if (cfg.outputs.reliability)
        row.reliability = reliability(chain, cfg.rates.mission_time, cfg.eps,
                                      cfg.reliability_over_operational);
    if (cfg.outputs.availability)
        row.availability = availability(chain, cfg.rates.mission_time, cfg.eps);
    if (cfg.outputs.steady_state) {
        std::vector<double> pi = steady_state(chain);
        double mass = 0.0;
        for (std::size_t s = 0; s < chain.state_count; ++s)
            if (chain.up[s]) mass += pi[s];
        row.steady_state_up = mass;
    }

    std::vector<SweepRow> rows{row};
    if (cfg.sim_trials > 0) {
        auto [rel, avail] = simulate(chain, cfg.rates.mission_time, cfg.sim_trials, p.seed);
        SweepRow sim = row;
        sim.simulated = true;
        sim.reliability = cfg.outputs.reliability ? std::optional<double>(rel.estimate)
                                                  : std::nullopt;
        sim.availability = cfg.outputs.availability ? std::optional<double>(avail.estimate)
                                                    : std::nullopt;
        sim.steady_state_up.reset();
        rows.push_back(sim);
    }
    return rows;
}

}  // namespace

std::vector<SweepRow> run_sweep(const AnalysisConfig& cfg, const Dfg& dfg,
                                const ComponentLibrary& lib, int jobs) {
    if (cfg.scrub_intervals.empty())
        throw input_error("sweep: at least one scrub interval required");
    if (cfg.model_kinds.empty()) throw input_error("sweep: at least one model kind required");

    std::vector<PartitionPlan> plans;
    if (!cfg.explicit_cuts.empty()) {
        PartitionPlan plan;
        plan.cuts = cfg.explicit_cuts;
        plan.include_terminal_voter_partition = cfg.include_terminal_voter_partition;
        plans.push_back(std::move(plan));
    } else {
        for (int n : cfg.partition_counts) {
            PartitionPlan plan = plan_partitions(dfg, n);
            plan.include_terminal_voter_partition = cfg.include_terminal_voter_partition;
            plans.push_back(std::move(plan));
        }
    }
    for (const auto& plan : plans) {
        auto violations = validate(plan, dfg);
        if (!violations.empty())
            throw input_error("partition plan: " + violations.front().invariant + " violated by '" +
                              violations.front().subject + "': " + violations.front().detail);
    }

    std::vector<DesignPoint> points;
    std::uint64_t index = 0;
    for (ModelKind kind : cfg.model_kinds)
        for (const auto& plan : plans)
            for (double tau : cfg.scrub_intervals)
                points.push_back({kind, plan, tau, cfg.seed + index++});

    std::vector<std::vector<SweepRow>> slots(points.size());
    std::vector<std::exception_ptr> failures(points.size());

    int njobs = std::max(1, jobs);
    if (njobs == 1 || points.size() <= 1) {
        for (std::size_t i = 0; i < points.size(); ++i) {
            try {
                slots[i] = run_point(points[i], cfg, dfg, lib);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= points.size()) return;
                try {
                    slots[i] = run_point(points[i], cfg, dfg, lib);
                } catch (...) {
                    failures[i] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < njobs && static_cast<std::size_t>(w) < points.size(); ++w)
            pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!failures[i]) continue;
        try {
            std::rethrow_exception(failures[i]);
        } catch (const numeric_error& e) {
            throw numeric_error(point_context(points[i]) + e.what());
        } catch (const input_error& e) {
            throw input_error(point_context(points[i]) + e.what());
        } catch (const std::exception& e) {
            throw std::runtime_error(point_context(points[i]) + e.what());
        }
    }

    std::vector<SweepRow> rows;
    for (auto& slot : slots)
        for (auto& row : slot) rows.push_back(std::move(row));
    return rows;
}

std::string emit_csv(const std::vector<SweepRow>& rows) {
    auto num = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.12g", v);
        return std::string(buf);
    };
    auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string(); };

    std::string out =
        "model,partitions,scrub_interval_s,mission_time_s,reliability,availability,"
        "steady_state_up_mass,states,transitions,source\n";
    for (const auto& r : rows) {
        out += to_string(r.model);
        out += ',' + std::to_string(r.partitions);
        out += ',' + num(r.scrub_interval);
        out += ',' + num(r.mission_time);
        out += ',' + opt(r.reliability);
        out += ',' + opt(r.availability);
        out += ',' + opt(r.steady_state_up);
        out += ',' + std::to_string(r.states);
        out += ',' + std::to_string(r.transition_count);
        out += ',';
        out += r.simulated ? "simulated" : "analytic";
        out += '\n';
    }
    return out;
}

}  // namespace partmr
