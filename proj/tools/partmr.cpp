#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "partmr/builder.hpp"
#include "partmr/engine.hpp"
#include "partmr/errors.hpp"
#include "partmr/ingest.hpp"
#include "partmr/property.hpp"
#include "partmr/simulator.hpp"
#include "partmr/sweep.hpp"

namespace {

using namespace partmr;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot read file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_out(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write file '" + path + "'");
    out << text;
}

struct CommonArgs {
    std::string dfg_path;
    std::string library_path;
    std::string config_path;
    std::string model;
    int partitions = 0;
    std::string scrub;
    std::string mission;
    std::string out_path;
};

void add_input_flags(CLI::App* cmd, CommonArgs& args, bool with_out = true) {
    cmd->add_option("--dfg", args.dfg_path, "data flow graph JSON file")->required();
    cmd->add_option("--library", args.library_path,
                    "component characterization CSV (default: $PARTMR_LIBRARY)");
    cmd->add_option("--config", args.config_path, "analysis configuration JSON");
    cmd->add_option("--model", args.model, "model kind")
        ->check(CLI::IsMember({"scu", "scu_only", "combined"}));
    cmd->add_option("--partitions", args.partitions, "number of partitions")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--scrub", args.scrub, "scrub interval, e.g. 15min or 1h");
    cmd->add_option("--mission", args.mission, "mission time, e.g. 730h");
    if (with_out) cmd->add_option("--out", args.out_path, "output file (default: stdout)");
}

struct LoadedInputs {
    Dfg dfg;
    ComponentLibrary library;
    AnalysisConfig config;
};

LoadedInputs load(const CommonArgs& args) {
    LoadedInputs in;
    in.dfg = parse_dfg(slurp(args.dfg_path));

    std::string lib_path = args.library_path;
    if (lib_path.empty()) {
        const char* env = std::getenv("PARTMR_LIBRARY");
        if (env) lib_path = env;
    }
    if (lib_path.empty())
        throw input_error("no component library: pass --library or set PARTMR_LIBRARY");
    in.library = parse_library(slurp(lib_path));

    if (!args.config_path.empty()) in.config = parse_config(slurp(args.config_path));
    if (!args.model.empty())
        in.config.model_kinds = {args.model == "combined" ? ModelKind::combined
                                                          : ModelKind::scu_only};
    if (args.partitions > 0) {
        in.config.partition_counts = {args.partitions};
        in.config.explicit_cuts.clear();
    }
    if (!args.scrub.empty()) in.config.scrub_intervals = {parse_duration(args.scrub)};
    if (!args.mission.empty()) in.config.rates.mission_time = parse_duration(args.mission);
    if (in.config.scrub_intervals.empty())
        throw input_error("no scrub interval: pass --scrub or list scrub_intervals in the config");
    return in;
}

// The single design point selected by the flags (first entry of every grid
// dimension), built and ready for analysis.
struct SinglePoint {
    ModelKind kind;
    PartitionPlan plan;
    double tau;
    SystemSpec spec;
    ComposedCtmc chain;
};

SinglePoint build_single(const LoadedInputs& in) {
    SinglePoint p;
    p.kind = in.config.model_kinds.front();
    if (!in.config.explicit_cuts.empty()) {
        p.plan.cuts = in.config.explicit_cuts;
    } else {
        p.plan = plan_partitions(in.dfg, in.config.partition_counts.front());
    }
    p.plan.include_terminal_voter_partition = in.config.include_terminal_voter_partition;
    auto violations = validate(p.plan, in.dfg);
    if (!violations.empty())
        throw input_error("partition plan: " + violations.front().invariant + " violated by '" +
                          violations.front().subject + "': " + violations.front().detail);
    p.tau = in.config.scrub_intervals.front();

    p.spec.kind = p.kind;
    p.spec.mu = 1.0 / p.tau;
    p.spec.partition_rates = rates_for_model(
        p.kind, partition_domain_rates(in.dfg, p.plan, in.library, in.config.rates),
        in.config.rates);
    p.chain = build_system(p.spec);
    return p;
}

int cmd_analyze(const CommonArgs& args) {
    LoadedInputs in = load(args);
    SinglePoint p = build_single(in);
    const AnalysisConfig& cfg = in.config;

    std::printf("model: %s\n", to_string(p.kind));
    std::printf("partitions: %zu (states %zu, matrix entries %zu)\n", p.plan.partition_count(),
                p.chain.state_count, p.chain.col.size());
    std::printf("scrub interval: %g s    mission time: %g s\n", p.tau, cfg.rates.mission_time);
    if (cfg.outputs.reliability)
        std::printf("reliability: %.12g\n",
                    reliability(p.chain, cfg.rates.mission_time, cfg.eps,
                                cfg.reliability_over_operational));
    if (cfg.outputs.availability)
        std::printf("availability: %.12g\n",
                    availability(p.chain, cfg.rates.mission_time, cfg.eps));
    if (cfg.outputs.steady_state) {
        std::vector<double> pi = steady_state(p.chain);
        double mass = 0.0;
        for (std::size_t s = 0; s < p.chain.state_count; ++s)
            if (p.chain.up[s]) mass += pi[s];
        std::printf("steady-state up mass: %.12g\n", mass);
    }
    if (cfg.outputs.correctness)
        std::printf("scrub recoverability: %s\n",
                    check_scrub_recoverability(p.chain) ? "pass" : "FAIL");

    if (!args.out_path.empty()) {
        AnalysisConfig one = cfg;
        one.model_kinds = {p.kind};
        one.scrub_intervals = {p.tau};
        write_out(args.out_path, emit_csv(run_sweep(one, in.dfg, in.library)));
    }
    return 0;
}

int cmd_sweep(const CommonArgs& args, int jobs) {
    LoadedInputs in = load(args);
    write_out(args.out_path, emit_csv(run_sweep(in.config, in.dfg, in.library, jobs)));
    return 0;
}

int cmd_export(const CommonArgs& args) {
    LoadedInputs in = load(args);
    SinglePoint p = build_single(in);
    write_out(args.out_path, export_prism(p.spec));
    return 0;
}

int cmd_simulate(const CommonArgs& args, std::uint64_t trials, std::uint64_t seed, int workers) {
    LoadedInputs in = load(args);
    SinglePoint p = build_single(in);
    auto [rel, avail] = simulate(p.chain, in.config.rates.mission_time, trials, seed, workers);
    std::printf("trials: %llu    seed: %llu\n", static_cast<unsigned long long>(trials),
                static_cast<unsigned long long>(seed));
    std::printf("reliability:  %.12g +- %.3g (99%% CI)\n", rel.estimate, rel.half_width);
    std::printf("availability: %.12g +- %.3g (99%% CI)\n", avail.estimate, avail.half_width);
    return 0;
}

int cmd_check(const CommonArgs& args, const std::string& property_text) {
    LoadedInputs in = load(args);
    SinglePoint p = build_single(in);
    PropertyQuery q = parse_property(property_text);
    double value = eval_property(p.chain, q, in.config.eps);
    if (q.kind == PropertyKind::forall_next) {
        bool holds = value == 1.0;
        std::printf("%s: %s\n", to_string(q).c_str(), holds ? "holds" : "violated");
        return holds ? 0 : 3;
    }
    std::printf("%s = %.12g\n", to_string(q).c_str(), value);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dependability analysis of partitioned TMR designs with scrubbing"};
    app.require_subcommand(1);

    CommonArgs analyze_args, sweep_args, export_args, simulate_args, check_args;
    int jobs = 1;
    std::uint64_t trials = 100000, seed = 1;
    int workers = 1;
    std::string property_text = "forall next operational";

    CLI::App* analyze = app.add_subcommand("analyze", "analyze one design point");
    add_input_flags(analyze, analyze_args);

    CLI::App* sweep = app.add_subcommand("sweep", "run the full design grid and emit CSV");
    add_input_flags(sweep, sweep_args);
    sweep->add_option("--jobs", jobs, "concurrent design points")->check(CLI::PositiveNumber);

    CLI::App* exp = app.add_subcommand("export-prism", "emit the model in PRISM syntax");
    add_input_flags(exp, export_args);

    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo cross-check of one design point");
    add_input_flags(sim, simulate_args, false);
    sim->add_option("--trials", trials, "number of trajectories");
    sim->add_option("--seed", seed, "random seed");
    sim->add_option("--workers", workers, "simulation worker threads")
        ->check(CLI::PositiveNumber);

    CLI::App* check = app.add_subcommand("check", "evaluate a property against one design point");
    add_input_flags(check, check_args, false);
    check->add_option("--property", property_text, "query, e.g. 'P=?[G[0,730h] up]'");

    try {
        app.parse(argc, argv);
        if (analyze->parsed()) return cmd_analyze(analyze_args);
        if (sweep->parsed()) return cmd_sweep(sweep_args, jobs);
        if (exp->parsed()) return cmd_export(export_args);
        if (sim->parsed()) return cmd_simulate(simulate_args, trials, seed, workers);
        if (check->parsed()) return cmd_check(check_args, property_text);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const numeric_error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 2;
    } catch (const input_error& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
