#include "partmr/engine.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "partmr/errors.hpp"

namespace partmr {

namespace {

// Keep the Poisson expansion of one uniformization step to a few thousand
// terms; longer horizons get split into equal sub-intervals.
constexpr double kMaxPoissonMean = 4000.0;
constexpr std::size_t kDirectSolveLimit = 10000;

void check_rates(const ComposedCtmc& c) {
    for (double r : c.rate)
        if (!std::isfinite(r) || r < 0.0)
            throw numeric_error("chain has a non-finite or negative rate");
}

double max_exit_rate(const ComposedCtmc& c) {
    double m = 0.0;
    for (std::size_t s = 0; s < c.state_count; ++s) m = std::max(m, c.exit_rate(s));
    return m;
}

double log_poisson_pmf(double q, std::size_t k) {
    return -q + static_cast<double>(k) * std::log(q) - std::lgamma(static_cast<double>(k) + 1.0);
}

// out = in * P with P = I + Q/Lambda; self-loop entries are ignored since
// they cancel in the generator.
void apply_uniformized(const ComposedCtmc& c, double lambda, const std::vector<double>& in,
                       std::vector<double>& out) {
    out = in;
    for (std::size_t s = 0; s < c.state_count; ++s) {
        double vs = in[s];
        if (vs == 0.0) continue;
        for (std::size_t idx = c.row_ptr[s]; idx < c.row_ptr[s + 1]; ++idx) {
            if (c.col[idx] == s) continue;
            double delta = vs * c.rate[idx] / lambda;
            out[c.col[idx]] += delta;
            out[s] -= delta;
        }
    }
}

struct StepResult {
    std::vector<double> end;   // distribution at the end of the step
    double up_integral = 0.0;  // integral of up-mass over the step
    double tail = 0.0;         // dropped point-weight mass
};

// One uniformization step of length dt from distribution v. Always produces
// the end-of-step distribution; when up != nullptr it also accumulates the
// time integral of the up-mass over the step.
StepResult uniformization_step(const ComposedCtmc& c, double lambda, const std::vector<double>& v,
                               double dt, double eps, const std::vector<std::uint8_t>* up) {
    const double q = lambda * dt;
    StepResult res;
    res.end.assign(c.state_count, 0.0);

    std::vector<double> cur = v, next(c.state_count);
    double cdf = 0.0;        // point-weight mass accumulated so far
    double cdf_comp = 0.0;   // Kahan compensation for cdf
    double cum_used = 0.0;   // integral weights accumulated so far (sums to dt)
    std::size_t k = 0;
    while (true) {
        double pmf = std::exp(log_poisson_pmf(q, k));
        if (k == 0 && q == 0.0) pmf = 1.0;
        {
            double y = pmf - cdf_comp;
            double t2 = cdf + y;
            cdf_comp = (t2 - cdf) - y;
            cdf = t2;
        }
        // Integral of the k-th Poisson weight over the step: survivor
        // function of the cdf through term k, scaled by 1/lambda.
        double w_hat = std::max(0.0, 1.0 - cdf) / lambda;
        cum_used += w_hat;

        if (pmf > 0.0)
            for (std::size_t s = 0; s < c.state_count; ++s) res.end[s] += pmf * cur[s];
        if (up) {
            double mass = 0.0;
            for (std::size_t s = 0; s < c.state_count; ++s)
                if ((*up)[s]) mass += cur[s];
            res.up_integral += w_hat * mass;
        }

        bool point_done = 1.0 - cdf <= eps;
        bool integral_done = !up || dt - cum_used <= eps * dt;
        if (point_done && integral_done && static_cast<double>(k) >= q) break;
        if (k > static_cast<std::size_t>(q + 60.0 * std::sqrt(q + 1.0) + 200.0))
            break;  // hard stop; tail already reported below

        apply_uniformized(c, lambda, cur, next);
        cur.swap(next);
        ++k;
    }
    res.tail = std::max(0.0, 1.0 - cdf);
    // Renormalizing by the captured mass keeps the result a distribution.
    if (cdf > 0.0)
        for (double& p : res.end) p /= cdf;
    return res;
}

std::vector<double> delta_at(std::size_t state, std::size_t n) {
    std::vector<double> v(n, 0.0);
    v[state] = 1.0;
    return v;
}

void require_labels(const ComposedCtmc& c) {
    if (!c.labeled) throw input_error("chain has no state labels; label it first");
}

}  // namespace

ComposedCtmc make_absorbing_outside(const ComposedCtmc& c, const std::vector<std::uint8_t>& keep) {
    if (keep.size() != c.state_count)
        throw input_error("absorbing mask has wrong dimension");
    ComposedCtmc a;
    a.partitions = c.partitions;
    a.state_count = c.state_count;
    a.actions = c.actions;
    for (const auto& t : c.transitions)
        if (keep[t.from]) a.transitions.push_back(t);
    a.up = c.up;
    a.operational_state = c.operational_state;
    a.labeled = c.labeled;
    a.finalize();
    return a;
}

TransientResult transient(const ComposedCtmc& c, double t, const std::vector<double>& init,
                          double eps) {
    if (t < 0.0 || !std::isfinite(t)) throw input_error("transient: time must be finite and >= 0");
    if (!(eps > 0.0)) throw input_error("transient: eps must be > 0");
    if (init.size() != c.state_count)
        throw input_error("transient: initial distribution has wrong dimension");
    double sum = 0.0;
    for (double p : init) {
        if (p < 0.0 || !std::isfinite(p))
            throw input_error("transient: initial distribution entries must be in [0,1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw input_error("transient: initial distribution must sum to 1");
    check_rates(c);

    TransientResult res;
    res.t = t;

    const double lambda = 1.02 * max_exit_rate(c);
    if (t == 0.0 || lambda == 0.0) {
        res.probabilities = init;
        return res;
    }

    const double q = lambda * t;
    const std::size_t steps = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                           std::ceil(q / kMaxPoissonMean)));
    const double dt = t / static_cast<double>(steps);
    const double step_eps = eps / static_cast<double>(steps);

    std::vector<double> v = init;
    for (std::size_t i = 0; i < steps; ++i) {
        StepResult sr = uniformization_step(c, lambda, v, dt, step_eps, nullptr);
        v = std::move(sr.end);
        res.truncation_error += sr.tail;
    }
    for (double& p : v) p = std::max(0.0, p);
    res.probabilities = std::move(v);
    return res;
}

double reliability(const ComposedCtmc& c, double T, double eps, bool strict_operational) {
    require_labels(c);
    bool any_up = false;
    for (auto u : c.up) any_up |= u != 0;
    if (!any_up) throw input_error("reliability: chain has no up states");

    std::vector<std::uint8_t> keep = c.up;
    if (strict_operational) {
        keep.assign(c.state_count, 0);
        keep[c.operational_state] = 1;
    }
    ComposedCtmc a = make_absorbing_outside(c, keep);
    TransientResult tr = transient(a, T, delta_at(c.initial_state(), c.state_count), eps);
    double mass = 0.0;
    for (std::size_t s = 0; s < c.state_count; ++s)
        if (keep[s]) mass += tr.probabilities[s];
    return std::clamp(mass, 0.0, 1.0);
}

double availability(const ComposedCtmc& c, double T, double eps) {
    require_labels(c);
    if (!(T > 0.0) || !std::isfinite(T))
        throw input_error("availability: horizon must be finite and > 0");
    check_rates(c);

    const double lambda = 1.02 * max_exit_rate(c);
    if (lambda == 0.0) return c.up[c.initial_state()] ? 1.0 : 0.0;

    const double q = lambda * T;
    const std::size_t steps = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                           std::ceil(q / kMaxPoissonMean)));
    const double dt = T / static_cast<double>(steps);
    const double step_eps = eps / static_cast<double>(steps);

    std::vector<double> v = delta_at(c.initial_state(), c.state_count);
    double integral = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
        StepResult sr = uniformization_step(c, lambda, v, dt, step_eps, &c.up);
        integral += sr.up_integral;
        v = std::move(sr.end);
    }
    return std::clamp(integral / T, 0.0, 1.0);
}

std::vector<double> steady_state(const ComposedCtmc& c) {
    check_rates(c);
    if (c.state_count == 0) throw input_error("steady_state: empty chain");
    const auto n = static_cast<Eigen::Index>(c.state_count);

    std::vector<double> pi(c.state_count, 0.0);
    if (c.state_count == 1) {
        pi[0] = 1.0;
        return pi;
    }

    if (c.state_count <= kDirectSolveLimit) {
        // Pin the probability of a reference state to 1 and solve the grounded
        // balance equations for everybody else, then renormalize. Grounding at
        // the state with the most inbound edges removes the dense row the
        // global scrub action creates in Q^T, which keeps LU fill-in small.
        std::vector<std::size_t> indegree(c.state_count, 0);
        for (std::size_t s = 0; s < c.state_count; ++s)
            for (std::size_t idx = c.row_ptr[s]; idx < c.row_ptr[s + 1]; ++idx)
                if (c.col[idx] != s) ++indegree[c.col[idx]];
        std::size_t ref = 0;
        for (std::size_t s = 1; s < c.state_count; ++s)
            if (indegree[s] > indegree[ref]) ref = s;
        auto reduced = [&](std::size_t s) {
            return static_cast<Eigen::Index>(s < ref ? s : s - 1);
        };

        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(c.col.size() * 2);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n - 1);
        for (std::size_t s = 0; s < c.state_count; ++s) {
            for (std::size_t idx = c.row_ptr[s]; idx < c.row_ptr[s + 1]; ++idx) {
                std::size_t d = c.col[idx];
                if (d == s) continue;
                double r = c.rate[idx];
                // Q[s][d] = r lands in row d of Q^T, Q[s][s] -= r in row s.
                if (s == ref) {
                    if (d != ref) b(reduced(d)) -= r;  // pinned pi_ref = 1
                } else {
                    if (d != ref) trip.emplace_back(reduced(d), reduced(s), r);
                    trip.emplace_back(reduced(s), reduced(s), -r);
                }
            }
        }
        Eigen::SparseMatrix<double> A(n - 1, n - 1);
        A.setFromTriplets(trip.begin(), trip.end());
        A.makeCompressed();

        Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
        solver.compute(A);
        if (solver.info() != Eigen::Success)
            throw numeric_error("steady_state: singular balance equations");
        Eigen::VectorXd x = solver.solve(b);
        if (solver.info() != Eigen::Success)
            throw numeric_error("steady_state: balance equation solve failed");
        pi[ref] = 1.0;
        for (std::size_t s = 0; s < c.state_count; ++s)
            if (s != ref) pi[s] = std::max(0.0, x(reduced(s)));
    } else {
        // Power iteration on the uniformized kernel.
        const double lambda = 1.02 * max_exit_rate(c);
        if (lambda == 0.0) throw numeric_error("steady_state: chain has no transitions");
        std::vector<double> v(c.state_count, 1.0 / static_cast<double>(c.state_count)), next;
        for (std::size_t iter = 0; iter < 2000000; ++iter) {
            apply_uniformized(c, lambda, v, next);
            double diff = 0.0;
            for (std::size_t s = 0; s < c.state_count; ++s)
                diff = std::max(diff, std::abs(next[s] - v[s]));
            v.swap(next);
            if (diff < 1e-16) break;
        }
        for (std::size_t s = 0; s < c.state_count; ++s) pi[s] = std::max(0.0, v[s]);
    }

    double sum = 0.0;
    for (double p : pi) sum += p;
    if (!(sum > 0.0)) throw numeric_error("steady_state: degenerate solution");
    for (double& p : pi) p /= sum;

    // pi Q residual; row scaling keeps the bound meaningful for tiny rates.
    std::vector<double> residual(c.state_count, 0.0);
    for (std::size_t s = 0; s < c.state_count; ++s) {
        for (std::size_t idx = c.row_ptr[s]; idx < c.row_ptr[s + 1]; ++idx) {
            std::size_t d = c.col[idx];
            if (d == s) continue;
            residual[d] += pi[s] * c.rate[idx];
            residual[s] -= pi[s] * c.rate[idx];
        }
    }
    double scale = std::max(1.0, max_exit_rate(c));
    double rmax = 0.0;
    for (double r : residual) rmax = std::max(rmax, std::abs(r));
    if (rmax / scale > 1e-12)
        throw numeric_error("steady_state: residual above tolerance, model may be reducible");
    return pi;
}

bool check_scrub_recoverability(const ComposedCtmc& c) {
    require_labels(c);
    std::vector<std::uint8_t> seen(c.state_count, 0);
    std::queue<std::size_t> frontier;
    frontier.push(c.initial_state());
    seen[c.initial_state()] = 1;
    while (!frontier.empty()) {
        std::size_t s = frontier.front();
        frontier.pop();
        bool reaches_operational = false;
        for (std::size_t idx = c.row_ptr[s]; idx < c.row_ptr[s + 1]; ++idx) {
            if (c.rate[idx] <= 0.0) continue;
            if (c.col[idx] == c.operational_state) reaches_operational = true;
            if (!seen[c.col[idx]] && c.col[idx] != s) {
                seen[c.col[idx]] = 1;
                frontier.push(c.col[idx]);
            }
        }
        if (!reaches_operational) return false;
    }
    return true;
}

}  // namespace partmr
