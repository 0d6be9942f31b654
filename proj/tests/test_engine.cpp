#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "partmr/builder.hpp"
#include "partmr/engine.hpp"
#include "partmr/errors.hpp"

using namespace partmr;

namespace {

SystemSpec single_scu(double lambda, double mu) {
    SystemSpec spec;
    spec.kind = ModelKind::scu_only;
    spec.mu = mu;
    PartitionRates r;
    r.lambda_scu = lambda;
    spec.partition_rates = {r};
    return spec;
}

SystemSpec two_scu(double l1, double l2, double mu) {
    SystemSpec spec;
    spec.kind = ModelKind::scu_only;
    spec.mu = mu;
    PartitionRates a, b;
    a.lambda_scu = l1;
    b.lambda_scu = l2;
    spec.partition_rates = {a, b};
    return spec;
}

std::vector<double> delta(std::size_t state, std::size_t n) {
    std::vector<double> v(n, 0.0);
    v[state] = 1.0;
    return v;
}

// Reference integrator for p' = p Q, dense fourth-order Runge-Kutta.
std::vector<double> rk4_transient(const ComposedCtmc& c, double t, std::vector<double> p,
                                  int steps) {
    auto deriv = [&](const std::vector<double>& v) {
        std::vector<double> d(c.state_count, 0.0);
        for (std::size_t s = 0; s < c.state_count; ++s) {
            for (std::size_t k = c.row_ptr[s]; k < c.row_ptr[s + 1]; ++k) {
                if (c.col[k] == s) continue;
                double flow = v[s] * c.rate[k];
                d[c.col[k]] += flow;
                d[s] -= flow;
            }
        }
        return d;
    };
    const double h = t / steps;
    std::vector<double> tmp(c.state_count);
    for (int i = 0; i < steps; ++i) {
        auto k1 = deriv(p);
        for (std::size_t s = 0; s < c.state_count; ++s) tmp[s] = p[s] + 0.5 * h * k1[s];
        auto k2 = deriv(tmp);
        for (std::size_t s = 0; s < c.state_count; ++s) tmp[s] = p[s] + 0.5 * h * k2[s];
        auto k3 = deriv(tmp);
        for (std::size_t s = 0; s < c.state_count; ++s) tmp[s] = p[s] + h * k3[s];
        auto k4 = deriv(tmp);
        for (std::size_t s = 0; s < c.state_count; ++s)
            p[s] += h / 6.0 * (k1[s] + 2.0 * k2[s] + 2.0 * k3[s] + k4[s]);
    }
    return p;
}

ComposedCtmc random_chain(std::mt19937& gen, int max_states) {
    std::uniform_int_distribution<int> nstates(2, max_states);
    std::uniform_real_distribution<double> rate(0.0, 10.0);
    std::uniform_int_distribution<int> degree(1, 4);
    const int n = nstates(gen);
    std::uniform_int_distribution<int> target(0, n - 1);
    ComposedCtmc c;
    c.state_count = static_cast<std::size_t>(n);
    c.actions = {"step"};
    for (int s = 0; s < n; ++s) {
        int d = degree(gen);
        for (int e = 0; e < d; ++e) {
            int to = target(gen);
            if (to == s) to = (to + 1) % n;
            double r = rate(gen);
            if (r <= 0.0) r = 0.5;
            c.transitions.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(to),
                                     0, r});
        }
    }
    c.finalize();
    return c;
}

std::vector<double> random_distribution(std::mt19937& gen, std::size_t n) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> v(n);
    double sum = 0.0;
    for (double& x : v) sum += (x = e(gen));
    for (double& x : v) x /= sum;
    return v;
}

}  // namespace

TEST_CASE("zero time returns the initial distribution") {
    ComposedCtmc c = build_system(two_scu(0.3, 0.5, 1.0));
    auto init = delta(c.initial_state(), c.state_count);
    TransientResult tr = transient(c, 0.0, init);
    CHECK(tr.probabilities == init);
    CHECK(tr.truncation_error == 0.0);
}

TEST_CASE("a chain with no transitions stays put") {
    ComposedCtmc c = build_system(single_scu(0.0, 0.0));
    auto init = delta(1, 3);
    TransientResult tr = transient(c, 5.0, init);
    CHECK(tr.probabilities == init);
}

TEST_CASE("single partition matches the closed form") {
    // lambda t = 0.1 with per-second rates from a per-hour hazard
    const double lambda = 0.001 / 3600.0;
    const double t = 360000.0;
    ComposedCtmc c = build_system(single_scu(lambda, 0.0));
    TransientResult tr = transient(c, t, delta(c.initial_state(), 3), 1e-12);
    const double x = lambda * t;
    const double p_op = std::exp(-3.0 * x);
    const double p_deg = 3.0 * (std::exp(-2.0 * x) - std::exp(-3.0 * x));
    CHECK(tr.probabilities[2] == doctest::Approx(p_op).epsilon(1e-9));
    CHECK(tr.probabilities[1] == doctest::Approx(p_deg).epsilon(1e-9));
    CHECK(tr.probabilities[0] == doctest::Approx(1.0 - p_op - p_deg).epsilon(1e-7));

    CHECK(reliability(c, t, 1e-12) ==
          doctest::Approx(3.0 * std::exp(-0.2) - 2.0 * std::exp(-0.3)).epsilon(1e-9));
    CHECK(reliability(c, t, 1e-12, true) == doctest::Approx(std::exp(-0.3)).epsilon(1e-9));
}

TEST_CASE("probabilities stay normalized at tight tolerance") {
    std::mt19937 gen(11);
    for (int rep = 0; rep < 5; ++rep) {
        ComposedCtmc c = random_chain(gen, 27);
        auto init = random_distribution(gen, c.state_count);
        TransientResult tr = transient(c, 0.2, init, 1e-12);
        double sum = 0.0;
        for (double p : tr.probabilities) {
            CHECK(p >= 0.0);
            sum += p;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(tr.truncation_error <= 1e-10);
    }
}

TEST_CASE("uniformization agrees with a dense ODE integrator") {
    std::mt19937 gen(503);
    std::uniform_real_distribution<double> horizon(0.05, 0.3);
    for (int rep = 0; rep < 12; ++rep) {
        ComposedCtmc c = random_chain(gen, 27);
        auto init = random_distribution(gen, c.state_count);
        const double t = horizon(gen);
        TransientResult tr = transient(c, t, init, 1e-12);
        auto ref = rk4_transient(c, t, init, 20000);
        for (std::size_t s = 0; s < c.state_count; ++s)
            CHECK(tr.probabilities[s] == doctest::Approx(ref[s]).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("uniformization matches the ODE oracle within 1e-6 everywhere") {
    std::mt19937 gen(77);
    std::uniform_real_distribution<double> horizon(0.05, 0.3);
    double worst = 0.0;
    for (int rep = 0; rep < 12; ++rep) {
        ComposedCtmc c = random_chain(gen, 27);
        auto init = random_distribution(gen, c.state_count);
        const double t = horizon(gen);
        TransientResult tr = transient(c, t, init, 1e-12);
        auto ref = rk4_transient(c, t, init, 20000);
        for (std::size_t s = 0; s < c.state_count; ++s)
            worst = std::max(worst, std::abs(tr.probabilities[s] - ref[s]));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("transient input validation") {
    ComposedCtmc c = build_system(single_scu(0.1, 1.0));
    auto good = delta(2, 3);
    CHECK_THROWS_AS(transient(c, -1.0, good), input_error);
    CHECK_THROWS_AS(transient(c, std::nan(""), good), input_error);
    CHECK_THROWS_AS(transient(c, 1.0, good, 0.0), input_error);
    CHECK_THROWS_AS(transient(c, 1.0, good, -1e-9), input_error);
    CHECK_THROWS_AS(transient(c, 1.0, delta(1, 2)), input_error);
    CHECK_THROWS_AS(transient(c, 1.0, {0.5, 0.5, 0.5}), input_error);
    CHECK_THROWS_AS(transient(c, 1.0, {-0.5, 0.5, 1.0}), input_error);
}

TEST_CASE("non-finite rates are a numeric error") {
    ComposedCtmc c;
    c.state_count = 2;
    c.actions = {"step"};
    c.transitions = {{0, 1, 0, std::numeric_limits<double>::quiet_NaN()}};
    c.finalize();
    CHECK_THROWS_AS(transient(c, 1.0, {1.0, 0.0}), numeric_error);
    CHECK_THROWS_AS(steady_state(c), numeric_error);
}

TEST_CASE("reliability basics") {
    ComposedCtmc c = build_system(two_scu(1e-5, 2e-5, 1.0 / 900.0));
    CHECK(reliability(c, 0.0) == 1.0);

    double prev = 1.0;
    for (double T : {900.0, 3600.0, 14400.0, 86400.0, 2628000.0}) {
        double r = reliability(c, T);
        CHECK(r <= prev + 1e-12);
        CHECK(r >= 0.0);
        prev = r;
    }

    ComposedCtmc healthy = build_system(two_scu(0.0, 0.0, 1.0 / 900.0));
    CHECK(reliability(healthy, 2628000.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("without scrubbing the failure set is already absorbing") {
    // so reliability must equal the plain transient up-mass to full precision
    ComposedCtmc c = build_system(single_scu(3e-4, 0.0));
    const double T = 5000.0;
    TransientResult tr = transient(c, T, delta(c.initial_state(), 3), 1e-12);
    double up_mass = tr.probabilities[1] + tr.probabilities[2];
    CHECK(reliability(c, T, 1e-12) == doctest::Approx(up_mass).epsilon(1e-12));
}

TEST_CASE("reliability needs labels and a non-empty up set") {
    ComposedCtmc unlabeled;
    unlabeled.state_count = 2;
    unlabeled.actions = {"step"};
    unlabeled.transitions = {{0, 1, 0, 1.0}};
    unlabeled.finalize();
    CHECK_THROWS_AS(reliability(unlabeled, 1.0), input_error);
    CHECK_THROWS_AS(availability(unlabeled, 1.0), input_error);

    ComposedCtmc all_down = unlabeled;
    all_down.labeled = true;
    all_down.up = {0, 0};
    CHECK_THROWS_WITH_AS(reliability(all_down, 1.0), doctest::Contains("no up states"),
                         input_error);
}

TEST_CASE("availability basics") {
    ComposedCtmc c = build_system(two_scu(1e-5, 2e-5, 1.0 / 900.0));
    for (double T : {900.0, 86400.0}) {
        double a = availability(c, T);
        double r = reliability(c, T);
        CHECK(a >= r - 1e-12);  // repair can only help the time average
        CHECK(a <= 1.0);
    }
    ComposedCtmc healthy = build_system(two_scu(0.0, 0.0, 0.0));
    CHECK(availability(healthy, 1000.0) == 1.0);
    CHECK_THROWS_AS(availability(c, 0.0), input_error);
    CHECK_THROWS_AS(availability(c, -5.0), input_error);
}

TEST_CASE("long-run availability approaches the stationary up mass") {
    ComposedCtmc c = build_system(single_scu(1.0, 10.0));
    // stationary distribution is (1, 5, 20)/26, so up mass is 25/26
    CHECK(availability(c, 1000.0, 1e-12) == doctest::Approx(25.0 / 26.0).epsilon(1e-4));
}

TEST_CASE("steady state of the single scrubbed partition is exact") {
    ComposedCtmc c = build_system(single_scu(1.0, 10.0));
    auto pi = steady_state(c);
    REQUIRE(pi.size() == 3);
    CHECK(pi[2] == doctest::Approx(20.0 / 26.0).epsilon(1e-10));
    CHECK(pi[1] == doctest::Approx(5.0 / 26.0).epsilon(1e-10));
    CHECK(pi[0] == doctest::Approx(1.0 / 26.0).epsilon(1e-10));
}

TEST_CASE("fast scrubbing pins the chain at all-operational") {
    ComposedCtmc c = build_system(two_scu(1e-6, 2e-6, 1e6));
    auto pi = steady_state(c);
    CHECK(pi[c.operational_state] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("steady state satisfies the balance equations") {
    ComposedCtmc c = build_system(two_scu(0.2, 0.3, 2.0));
    auto pi = steady_state(c);
    double sum = 0.0;
    for (double p : pi) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> residual(c.state_count, 0.0);
    for (std::size_t s = 0; s < c.state_count; ++s) {
        for (std::size_t k = c.row_ptr[s]; k < c.row_ptr[s + 1]; ++k) {
            if (c.col[k] == s) continue;
            residual[c.col[k]] += pi[s] * c.rate[k];
            residual[s] -= pi[s] * c.rate[k];
        }
    }
    for (double r : residual) CHECK(std::abs(r) <= 1e-12 * 4.0);
}

TEST_CASE("steady state agrees with a long transient run") {
    ComposedCtmc c = build_system(two_scu(0.2, 0.3, 2.0));
    double min_rate = std::numeric_limits<double>::infinity();
    for (double r : c.rate)
        if (r > 0.0) min_rate = std::min(min_rate, r);
    const double t = 1000.0 / min_rate;
    auto pi = steady_state(c);
    TransientResult tr = transient(c, t, delta(c.initial_state(), c.state_count), 1e-12);
    for (std::size_t s = 0; s < c.state_count; ++s)
        CHECK(tr.probabilities[s] == doctest::Approx(pi[s]).epsilon(1e-6).scale(1.0));
    double worst = 0.0;
    for (std::size_t s = 0; s < c.state_count; ++s)
        worst = std::max(worst, std::abs(tr.probabilities[s] - pi[s]));
    CHECK(worst < 1e-6);
}

TEST_CASE("single state chain has a trivial stationary distribution") {
    ComposedCtmc c;
    c.state_count = 1;
    c.finalize();
    auto pi = steady_state(c);
    CHECK(pi == std::vector<double>{1.0});
}

TEST_CASE("more frequent scrubbing never hurts") {
    const double T = 50.0;
    double prev_avail = 0.0, prev_up = 0.0;
    for (double mu : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        ComposedCtmc c = build_system(two_scu(0.05, 0.08, mu));
        double a = availability(c, T, 1e-12);
        auto pi = steady_state(c);
        double up = 0.0;
        for (std::size_t s = 0; s < c.state_count; ++s)
            if (c.up[s]) up += pi[s];
        CHECK(a >= prev_avail - 1e-12);
        CHECK(up >= prev_up - 1e-12);
        prev_avail = a;
        prev_up = up;
    }
}

TEST_CASE("absorbing copy cuts exactly the outgoing edges of dropped states") {
    ComposedCtmc c = build_system(two_scu(0.3, 0.5, 1.0));
    ComposedCtmc a = make_absorbing_outside(c, c.up);
    REQUIRE(a.state_count == c.state_count);
    for (std::size_t s = 0; s < c.state_count; ++s) {
        if (c.up[s]) {
            // identical row: same targets, same rates
            REQUIRE(a.row_ptr[s + 1] - a.row_ptr[s] == c.row_ptr[s + 1] - c.row_ptr[s]);
            for (std::size_t k = 0; k < c.row_ptr[s + 1] - c.row_ptr[s]; ++k) {
                CHECK(a.col[a.row_ptr[s] + k] == c.col[c.row_ptr[s] + k]);
                CHECK(a.rate[a.row_ptr[s] + k] == c.rate[c.row_ptr[s] + k]);
            }
        } else {
            CHECK(a.row_ptr[s + 1] == a.row_ptr[s]);  // no way out
        }
    }
    CHECK_THROWS_AS(make_absorbing_outside(c, std::vector<std::uint8_t>(4, 1)), input_error);
}

TEST_CASE("scrub recoverability detection") {
    ComposedCtmc with_scrub = build_system(two_scu(1e-5, 2e-5, 1.0 / 900.0));
    CHECK(check_scrub_recoverability(with_scrub));

    ComposedCtmc no_scrub = build_system(two_scu(1e-5, 2e-5, 0.0));
    CHECK_FALSE(check_scrub_recoverability(no_scrub));

    // hand-built: operational state loops on itself, so the check holds
    ComposedCtmc loop;
    loop.state_count = 1;
    loop.actions = {"hold"};
    loop.transitions = {{0, 0, 0, 1.0}};
    loop.labeled = true;
    loop.up = {1};
    loop.operational_state = 0;
    loop.finalize();
    CHECK(check_scrub_recoverability(loop));

    ComposedCtmc unlabeled = build_system(two_scu(1e-5, 2e-5, 1.0));
    unlabeled.labeled = false;
    CHECK_THROWS_AS(check_scrub_recoverability(unlabeled), input_error);
}

TEST_CASE("reliability responds to the strict operational label") {
    ComposedCtmc c = build_system(two_scu(1e-4, 1e-4, 1.0 / 900.0));
    const double T = 86400.0;
    double loose = reliability(c, T);
    double strict = reliability(c, T, 1e-10, true);
    CHECK(strict < loose);  // leaving all-operational is easier than failing
    // all-operational stay probability of the scrubbed pair: exit rate is
    // 3*(l1+l2) and scrub returns are cut by the absorbing construction,
    // except the self-loop which keeps the state alive.
    CHECK(strict == doctest::Approx(std::exp(-3.0 * 2e-4 * T)).epsilon(1e-9));
}
