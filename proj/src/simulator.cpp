#include "partmr/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <vector>

#include "partmr/errors.hpp"
#include "partmr/philox.hpp"

namespace partmr {

namespace {

constexpr double kZ99 = 2.5758293035489004;  // 99.5th normal percentile

// Per-state exponential races over positive off-diagonal rates; self-loops
// never change the trajectory so they are dropped up front.
struct Races {
    std::vector<std::size_t> row_start;
    std::vector<std::uint32_t> dest;
    std::vector<double> cum;   // cumulative rate within each row
    std::vector<double> exit;  // total off-diagonal rate per state
};

Races build_races(const ComposedCtmc& c) {
    Races r;
    r.row_start.assign(c.state_count + 1, 0);
    r.exit.assign(c.state_count, 0.0);
    for (std::size_t s = 0; s < c.state_count; ++s) {
        r.row_start[s] = r.dest.size();
        double acc = 0.0;
        for (std::size_t idx = c.row_ptr[s]; idx < c.row_ptr[s + 1]; ++idx) {
            if (c.col[idx] == s || c.rate[idx] <= 0.0) continue;
            acc += c.rate[idx];
            r.dest.push_back(c.col[idx]);
            r.cum.push_back(acc);
        }
        r.exit[s] = acc;
    }
    r.row_start[c.state_count] = r.dest.size();
    return r;
}

struct TrialOutcome {
    bool stayed_up;
    double up_fraction;
};

TrialOutcome run_trial(const ComposedCtmc& c, const Races& r, double T, std::uint64_t seed,
                       std::uint64_t trial) {
    TrialRng rng(seed, trial);
    std::size_t state = c.initial_state();
    double t = 0.0, up_time = 0.0;
    bool stayed = c.up[state] != 0;
    while (true) {
        double exit = r.exit[state];
        if (exit <= 0.0) {
            if (c.up[state]) up_time += T - t;
            break;
        }
        double dt = rng.exponential(exit);
        if (t + dt >= T) {
            if (c.up[state]) up_time += T - t;
            break;
        }
        if (c.up[state]) up_time += dt;
        t += dt;
        double u = rng.uniform01() * exit;
        std::size_t pick = r.row_start[state + 1] - 1;
        for (std::size_t i = r.row_start[state]; i < r.row_start[state + 1]; ++i) {
            if (u < r.cum[i]) {
                pick = i;
                break;
            }
        }
        state = r.dest[pick];
        if (!c.up[state]) stayed = false;
    }
    return {stayed, up_time / T};
}

SimEstimate wilson(std::uint64_t successes, std::uint64_t n, std::uint64_t seed) {
    SimEstimate e;
    e.metric = MetricKind::reliability;
    e.trials = n;
    e.seed = seed;
    double nn = static_cast<double>(n);
    double p = static_cast<double>(successes) / nn;
    double z2 = kZ99 * kZ99;
    double denom = 1.0 + z2 / nn;
    double center = (p + z2 / (2.0 * nn)) / denom;
    double spread = kZ99 * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    e.estimate = p;
    // Widen so the interval stays centered on the point estimate.
    e.half_width = std::max(std::abs(p - (center - spread)), std::abs(center + spread - p));
    return e;
}

}  // namespace

std::pair<SimEstimate, SimEstimate> simulate(const ComposedCtmc& c, double T,
                                             std::uint64_t trials, std::uint64_t seed,
                                             int workers) {
    if (!c.labeled) throw input_error("simulate: chain has no state labels");
    if (trials < 1) throw input_error("simulate: need at least one trial");
    if (!(T > 0.0) || !std::isfinite(T))
        throw input_error("simulate: horizon must be finite and > 0");

    Races races = build_races(c);
    std::vector<std::uint8_t> stayed(trials, 0);
    std::vector<double> frac(trials, 0.0);

    auto run_range = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t i = begin; i < end; ++i) {
            TrialOutcome o = run_trial(c, races, T, seed, i);
            stayed[i] = o.stayed_up ? 1 : 0;
            frac[i] = o.up_fraction;
        }
    };

    std::uint64_t nworkers = std::clamp<std::uint64_t>(
        workers < 1 ? 1 : static_cast<std::uint64_t>(workers), 1, trials);
    if (nworkers == 1) {
        run_range(0, trials);
    } else {
        std::vector<std::thread> pool;
        std::uint64_t chunk = (trials + nworkers - 1) / nworkers;
        for (std::uint64_t w = 0; w < nworkers; ++w) {
            std::uint64_t begin = w * chunk;
            std::uint64_t end = std::min(trials, begin + chunk);
            if (begin < end) pool.emplace_back(run_range, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    // Reduce in trial order so the estimate never depends on worker count.
    std::uint64_t successes = 0;
    double mean = 0.0;
    for (std::uint64_t i = 0; i < trials; ++i) {
        successes += stayed[i];
        mean += frac[i];
    }
    mean /= static_cast<double>(trials);
    double var = 0.0;
    if (trials > 1) {
        for (std::uint64_t i = 0; i < trials; ++i)
            var += (frac[i] - mean) * (frac[i] - mean);
        var /= static_cast<double>(trials - 1);
    }

    SimEstimate rel = wilson(successes, trials, seed);
    SimEstimate avail;
    avail.metric = MetricKind::availability;
    avail.estimate = mean;
    avail.half_width = kZ99 * std::sqrt(var / static_cast<double>(trials));
    avail.trials = trials;
    avail.seed = seed;
    return {rel, avail};
}

}  // namespace partmr
