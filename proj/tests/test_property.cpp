#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "partmr/builder.hpp"
#include "partmr/engine.hpp"
#include "partmr/errors.hpp"
#include "partmr/property.hpp"

using namespace partmr;

namespace {

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

PropertyQuery make(PropertyKind kind, StateLabel label, double t = 0.0) {
    PropertyQuery q;
    q.kind = kind;
    q.label = label;
    q.time_bound = t;
    return q;
}

}  // namespace

TEST_CASE("the five query forms parse with their fields") {
    PropertyQuery q = parse_property("P=?[G[0,730h] up]");
    CHECK(q.kind == PropertyKind::stay);
    CHECK(q.label == StateLabel::up);
    CHECK(q.time_bound == 2628000.0);

    q = parse_property("P=?[F[0,15min] down]");
    CHECK(q.kind == PropertyKind::reach);
    CHECK(q.label == StateLabel::down);
    CHECK(q.time_bound == 900.0);

    q = parse_property("S=?[failed]");
    CHECK(q.kind == PropertyKind::steady);
    CHECK(q.label == StateLabel::failed);

    q = parse_property("R{up_time}=?[C<=1h]/T");
    CHECK(q.kind == PropertyKind::cumulative_reward);
    CHECK(q.label == StateLabel::up);
    CHECK(q.time_bound == 3600.0);

    q = parse_property("forall next operational");
    CHECK(q.kind == PropertyKind::forall_next);
    CHECK(q.label == StateLabel::operational);
}

TEST_CASE("quoted reward names and loose whitespace are accepted") {
    PropertyQuery q = parse_property(R"(R{"up_time"}=?[C<=900s]/T)");
    CHECK(q.kind == PropertyKind::cumulative_reward);
    CHECK(q.time_bound == 900.0);

    q = parse_property("  P = ? [ G [ 0 , 2h ] degraded ]  ");
    CHECK(q.kind == PropertyKind::stay);
    CHECK(q.label == StateLabel::degraded);
    CHECK(q.time_bound == 7200.0);

    q = parse_property(" S = ? [ operational ] ");
    CHECK(q.kind == PropertyKind::steady);
}

TEST_CASE("printer and parser are inverse") {
    std::vector<PropertyQuery> queries = {
        make(PropertyKind::stay, StateLabel::up, 2628000.0),
        make(PropertyKind::stay, StateLabel::operational, 900.0),
        make(PropertyKind::reach, StateLabel::down, 12345.678),
        make(PropertyKind::reach, StateLabel::failed, 0.25),
        make(PropertyKind::steady, StateLabel::up),
        make(PropertyKind::steady, StateLabel::degraded),
        make(PropertyKind::cumulative_reward, StateLabel::up, 3600.0),
        make(PropertyKind::forall_next, StateLabel::operational),
        make(PropertyKind::forall_next, StateLabel::down),
    };
    for (const auto& q : queries) CHECK(parse_property(to_string(q)) == q);

    CHECK(to_string(make(PropertyKind::stay, StateLabel::up, 2628000.0)) ==
          "P=?[G[0,2628000s] up]");
    CHECK(to_string(make(PropertyKind::cumulative_reward, StateLabel::up, 3600.0)) ==
          "R{up_time}=?[C<=3600s]/T");
    CHECK(to_string(make(PropertyKind::steady, StateLabel::failed)) == "S=?[failed]");
    CHECK(to_string(make(PropertyKind::forall_next, StateLabel::operational)) ==
          "forall next operational");
}

TEST_CASE("unsupported constructs are rejected by name") {
    CHECK_THROWS_WITH_AS(parse_property("P=?[up U down]"),
                         doctest::Contains("unbounded until"), parse_error);
    CHECK_THROWS_WITH_AS(parse_property("P=?[G[0,1h] up U down]"),
                         doctest::Contains("until operator is not supported"), parse_error);
    CHECK_THROWS_WITH_AS(parse_property("P=?[X up]"),
                         doctest::Contains("next operator"), parse_error);
    CHECK_THROWS_WITH_AS(parse_property("P>0.9[G[0,1h] up]"),
                         doctest::Contains("threshold"), parse_error);
    CHECK_THROWS_WITH_AS(parse_property("S<0.5[up]"), doctest::Contains("threshold"), parse_error);
    CHECK_THROWS_WITH_AS(parse_property("R{energy}=?[C<=1h]/T"),
                         doctest::Contains("only the up_time reward"), parse_error);
    CHECK_THROWS_WITH_AS(parse_property("R{up_time}=?[I=1h]/T"),
                         doctest::Contains("C<=T"), parse_error);
    CHECK_THROWS_WITH_AS(parse_property("forall eventually up"),
                         doctest::Contains("forall next"), parse_error);
}

TEST_CASE("malformed queries report a position") {
    try {
        parse_property("P=?[G[1,2h] up]");
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(std::string(e.what()).find("start at 0") != std::string::npos);
        CHECK(e.position == 6);
    }
    try {
        parse_property("P=?[G[0,900] up]");
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(std::string(e.what()).find("unit suffix") != std::string::npos);
        CHECK(e.position == 8);
    }
    try {
        parse_property("P=?[G[0,1h] up] and more");
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(std::string(e.what()).find("trailing") != std::string::npos);
        CHECK(e.position >= 15);
    }
    CHECK_THROWS_AS(parse_property("P=?[G[0,1h] running]"), parse_error);
    CHECK_THROWS_AS(parse_property("Q=?[up]"), parse_error);
    CHECK_THROWS_AS(parse_property(""), parse_error);
    CHECK_THROWS_AS(parse_property("R{up_time}=?[C<=1h]"), parse_error);
    CHECK_THROWS_AS(parse_property("P=?[G[0,-5h] up]"), parse_error);
}

TEST_CASE("label masks partition the state space as documented") {
    ComposedCtmc c = build_system(two_scu(1e-5, 2e-5, 1.0 / 900.0));
    REQUIRE(c.state_count == 9);

    auto up = label_mask(c, StateLabel::up);
    auto down = label_mask(c, StateLabel::down);
    auto failed = label_mask(c, StateLabel::failed);
    auto oper = label_mask(c, StateLabel::operational);
    auto degraded = label_mask(c, StateLabel::degraded);

    CHECK(up == std::vector<std::uint8_t>{0, 0, 0, 0, 1, 1, 0, 1, 1});
    CHECK(failed == down);
    for (std::size_t s = 0; s < 9; ++s) {
        CHECK(static_cast<int>(up[s]) + static_cast<int>(down[s]) == 1);
        CHECK(static_cast<int>(oper[s]) + static_cast<int>(degraded[s]) ==
              static_cast<int>(up[s]));
    }
    CHECK(oper == std::vector<std::uint8_t>{0, 0, 0, 0, 0, 0, 0, 0, 1});

    ComposedCtmc unlabeled = c;
    unlabeled.labeled = false;
    CHECK_THROWS_AS(label_mask(unlabeled, StateLabel::up), input_error);
}

TEST_CASE("stay queries evaluate to the reliability metrics") {
    ComposedCtmc c = build_system(two_scu(1e-4, 2e-4, 1.0 / 900.0));
    const double T = 86400.0;
    double via_query = eval_property(c, make(PropertyKind::stay, StateLabel::up, T));
    CHECK(via_query == doctest::Approx(reliability(c, T)).epsilon(1e-14));

    double strict = eval_property(c, make(PropertyKind::stay, StateLabel::operational, T));
    CHECK(strict == doctest::Approx(reliability(c, T, 1e-10, true)).epsilon(1e-14));
}

TEST_CASE("staying up and reaching down are complementary") {
    ComposedCtmc c = build_system(two_scu(1e-4, 2e-4, 1.0 / 3600.0));
    for (double T : {900.0, 86400.0, 2628000.0}) {
        double stay = eval_property(c, make(PropertyKind::stay, StateLabel::up, T), 1e-12);
        double reach = eval_property(c, make(PropertyKind::reach, StateLabel::down, T), 1e-12);
        CHECK(stay + reach == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("steady-state masses over complementary labels sum to one") {
    ComposedCtmc c = build_system(two_scu(1e-5, 3e-5, 1.0 / 900.0));
    double up = eval_property(c, make(PropertyKind::steady, StateLabel::up));
    double failed = eval_property(c, make(PropertyKind::steady, StateLabel::failed));
    CHECK(up + failed == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(up > 0.99);  // scrubbing keeps the pair essentially always up

    double oper = eval_property(c, make(PropertyKind::steady, StateLabel::operational));
    double degraded = eval_property(c, make(PropertyKind::steady, StateLabel::degraded));
    CHECK(oper + degraded == doctest::Approx(up).epsilon(1e-12));
}

TEST_CASE("the reward query is the interval availability") {
    ComposedCtmc c = build_system(two_scu(1e-4, 2e-4, 1.0 / 900.0));
    const double T = 86400.0;
    double via_query = eval_property(c, make(PropertyKind::cumulative_reward, StateLabel::up, T));
    CHECK(via_query == doctest::Approx(availability(c, T)).epsilon(1e-14));
}

TEST_CASE("forall next detects one-step recoverability") {
    ComposedCtmc scrubbed = build_system(two_scu(1e-5, 2e-5, 1.0 / 900.0));
    CHECK(eval_property(scrubbed, make(PropertyKind::forall_next, StateLabel::operational)) ==
          1.0);
    CHECK(eval_property(scrubbed, make(PropertyKind::forall_next, StateLabel::up)) == 1.0);

    ComposedCtmc bare = build_system(two_scu(1e-5, 2e-5, 0.0));
    CHECK(eval_property(bare, make(PropertyKind::forall_next, StateLabel::operational)) == 0.0);
}

TEST_CASE("evaluation requires labels") {
    ComposedCtmc c = build_system(two_scu(1e-5, 2e-5, 1.0));
    c.labeled = false;
    CHECK_THROWS_AS(eval_property(c, make(PropertyKind::stay, StateLabel::up, 1.0)), input_error);
}
