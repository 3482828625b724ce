#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mgstab/microgrid.hpp"

using namespace mgstab;

TEST_CASE("aggregate_loads sums componentwise") {
    SUBCASE("three-load test network") {
        const auto [p, q] =
            aggregate_loads({{6000.0, 4000.0}, {2000.0, 1000.0}, {4000.0, 3000.0}});
        CHECK(p == 12000.0);
        CHECK(q == 8000.0);
    }
    SUBCASE("single element identity") {
        const auto [p, q] = aggregate_loads({{5000.0, 0.0}});
        CHECK(p == 5000.0);
        CHECK(q == 0.0);
    }
    SUBCASE("reactive cancellation") {
        const auto [p, q] = aggregate_loads({{1000.0, -1000.0}, {1000.0, 1000.0}});
        CHECK(p == 2000.0);
        CHECK(q == 0.0);
    }
    SUBCASE("empty list rejected") {
        CHECK_THROWS_AS(aggregate_loads({}), ConfigError);
    }
}

TEST_CASE("aggregate_loads is permutation invariant and additive") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> dist(0.0, 5000.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<LoadSpec> loads;
        const int count = 1 + static_cast<int>(rng() % 6);
        for (int i = 0; i < count; ++i) loads.push_back({dist(rng), dist(rng) - 2500.0});

        const auto base = aggregate_loads(loads);
        std::vector<LoadSpec> shuffled = loads;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto perm = aggregate_loads(shuffled);
        CHECK(perm.first == doctest::Approx(base.first).epsilon(1e-12));
        CHECK(perm.second == doctest::Approx(base.second).epsilon(1e-12));

        std::vector<LoadSpec> tail = {{dist(rng), dist(rng)}};
        std::vector<LoadSpec> both = loads;
        both.insert(both.end(), tail.begin(), tail.end());
        const auto lhs = aggregate_loads(both);
        const auto rhs = aggregate_loads(tail);
        CHECK(lhs.first == doctest::Approx(base.first + rhs.first).epsilon(1e-12));
        CHECK(lhs.second == doctest::Approx(base.second + rhs.second).epsilon(1e-12));
    }
}

TEST_CASE("load_impedance_from_rating") {
    SUBCASE("test network rating") {
        const auto [z, theta] = load_impedance_from_rating(12000.0, 8000.0, 180.0, 1.5);
        const double expected_z = 1.5 * 180.0 * 180.0 / std::hypot(12000.0, 8000.0);
        CHECK(z == doctest::Approx(expected_z).epsilon(1e-14));
        CHECK(z == doctest::Approx(3.370).epsilon(5e-4));
        CHECK(theta == doctest::Approx(std::atan2(8000.0, 12000.0)).epsilon(1e-14));
        CHECK(theta == doctest::Approx(0.5880).epsilon(1e-4));
    }
    SUBCASE("unit resistive case") {
        const auto [z, theta] = load_impedance_from_rating(1.0, 0.0, 1.0, 1.0);
        CHECK(z == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(theta == 0.0);
    }
    SUBCASE("pure reactive limit") {
        const auto [z, theta] = load_impedance_from_rating(0.0, 1000.0, 180.0, 1.5);
        CHECK(theta == doctest::Approx(M_PI / 2.0).epsilon(1e-15));
        CHECK(z > 0.0);
    }
    SUBCASE("zero apparent power rejected") {
        CHECK_THROWS_AS(load_impedance_from_rating(0.0, 0.0, 180.0, 1.5), ConfigError);
    }
}

TEST_CASE("load impedance round-trips the rating at nominal voltage") {
    std::mt19937 rng(999);
    std::uniform_real_distribution<double> power(10.0, 50000.0);
    std::uniform_real_distribution<double> voltage(50.0, 500.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double p_in = power(rng);
        const double q_in = power(rng) - 25000.0;
        const double v = voltage(rng);
        const double pf = (trial % 2) ? 1.5 : 0.5;
        const auto [z, theta] = load_impedance_from_rating(p_in, q_in, v, pf);
        // load law: I = V/Z, S = pf * V * conj(I) -> |S| = pf V^2 / Z at angle theta
        const double s_mag = pf * v * v / z;
        const double p_back = s_mag * std::cos(theta);
        const double q_back = s_mag * std::sin(theta);
        CHECK(p_back == doctest::Approx(p_in).epsilon(1e-12));
        CHECK(q_back == doctest::Approx(q_in).epsilon(1e-12));
    }
}

TEST_CASE("build_simplified_model") {
    SUBCASE("test network reduces to three DGs and the aggregate load") {
        const MicrogridConfig cfg = table1_fixture();
        const SimplifiedModel model = build_simplified_model(cfg);
        CHECK(model.n_dgs() == 3);
        CHECK(model.z_load_mag ==
              doctest::Approx(1.5 * 180.0 * 180.0 / std::hypot(12000.0, 8000.0))
                  .epsilon(1e-14));
        CHECK(model.theta_z == doctest::Approx(std::atan2(8000.0, 12000.0)).epsilon(1e-14));
        CHECK(model.dgs[0].inductance == 1.57e-3);
        CHECK(model.dgs[0].resistance == 0.19);
        CHECK(model.phase_factor == 1.5);
    }
    SUBCASE("reduction is independent of feeder impedances") {
        MicrogridConfig cfg = table1_fixture();
        const SimplifiedModel base = build_simplified_model(cfg);
        cfg.feeders = {{10.0, 20.0}, {0.5, 0.25}};
        const SimplifiedModel mutated = build_simplified_model(cfg);
        CHECK(mutated.z_load_mag == base.z_load_mag);
        CHECK(mutated.theta_z == base.theta_z);
        CHECK(mutated.dgs.size() == base.dgs.size());

        cfg.feeders.clear();
        const SimplifiedModel feederless = build_simplified_model(cfg);
        CHECK(feederless.z_load_mag == base.z_load_mag);
    }
    SUBCASE("single DG single load") {
        MicrogridConfig cfg;
        cfg.v_nominal = 100.0;
        cfg.omega_nominal = 2.0 * M_PI * 50.0;
        cfg.phase_factor = 1.5;
        cfg.dgs.push_back({1e-3, 1e-3, 315.0, 100.0, 30.0, 2e-3, 0.1});
        cfg.loads.push_back({3000.0, 0.0});
        const SimplifiedModel model = build_simplified_model(cfg);
        CHECK(model.n_dgs() == 1);
        CHECK(model.z_load_mag == doctest::Approx(1.5 * 100.0 * 100.0 / 3000.0));
        CHECK(model.theta_z == 0.0);
    }
}

TEST_CASE("table1 fixture carries the published parameters") {
    const MicrogridConfig cfg = table1_fixture(2.5e-3, 5e-3);
    REQUIRE(cfg.dgs.size() == 3);
    CHECK(cfg.dgs[0].m == 2.5e-3);
    CHECK(cfg.dgs[1].m == doctest::Approx(1.25e-3).epsilon(1e-15));
    CHECK(cfg.dgs[2].m == doctest::Approx(2.5e-3 / 3.0).epsilon(1e-15));
    CHECK(cfg.dgs[0].n == 5e-3);
    CHECK(cfg.dgs[1].n == 2.5e-3);
    for (const DgParams& dg : cfg.dgs) {
        CHECK(dg.omega_set == 380.0);
        CHECK(dg.w_f == 31.85);
    }
    CHECK(cfg.dgs[0].inductance == 1.57e-3);
    CHECK(cfg.dgs[1].inductance == 2.46e-3);
    CHECK(cfg.dgs[2].inductance == 2.0e-3);
    CHECK(cfg.dgs[0].resistance == 0.19);
    CHECK(cfg.dgs[1].resistance == 0.29);
    CHECK(cfg.dgs[2].resistance == 0.24);
    CHECK(cfg.v_nominal == 180.0);
    CHECK(cfg.omega_nominal == doctest::Approx(2.0 * M_PI * 60.0));
    REQUIRE(cfg.loads.size() == 3);
    CHECK(cfg.loads[0].p_rated == 6000.0);
    CHECK(cfg.loads[2].q_rated == 3000.0);
    CHECK(cfg.feeders.size() == 3);
    CHECK(cfg.feeders[0].r_line == doctest::Approx(40.8e-3));
}

TEST_CASE("JSON config ingestion") {
    SUBCASE("round trip through the canonical serialization") {
        const MicrogridConfig cfg = table1_fixture();
        const MicrogridConfig back = parse_config(config_to_json(cfg));
        CHECK(back.dgs.size() == cfg.dgs.size());
        CHECK(back.dgs[1].inductance == cfg.dgs[1].inductance);
        CHECK(back.loads[2].q_rated == cfg.loads[2].q_rated);
        CHECK(back.v_nominal == cfg.v_nominal);
        CHECK(config_digest(back) == config_digest(cfg));
    }
    SUBCASE("missing field is named") {
        const char* text = R"({"v_nominal":180,"omega_nominal":377,
            "dgs":[{"m":1e-3,"n":1e-3,"omega_set":380,"w_f":30,"L":1e-3}],
            "loads":[{"p_rated":1000,"q_rated":0}]})";
        CHECK_THROWS_WITH_AS(parse_config(text),
                             doctest::Contains("dgs[0].r"), ConfigError);
    }
    SUBCASE("invariant violation is named") {
        const char* text = R"({"v_nominal":180,"omega_nominal":377,
            "dgs":[{"m":0.0,"n":1e-3,"omega_set":380,"w_f":30,"L":1e-3,"r":0.1}],
            "loads":[{"p_rated":1000,"q_rated":0}]})";
        CHECK_THROWS_WITH_AS(parse_config(text),
                             doctest::Contains("dgs[0].m"), ConfigError);
    }
    SUBCASE("e_set defaults to the nominal voltage") {
        const char* text = R"({"v_nominal":180,"omega_nominal":377,
            "dgs":[{"m":1e-3,"n":1e-3,"omega_set":380,"w_f":30,"L":1e-3,"r":0.1}],
            "loads":[{"p_rated":1000,"q_rated":0}]})";
        CHECK(parse_config(text).dgs[0].e_set == 180.0);
    }
    SUBCASE("malformed JSON rejected") {
        CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    }
    SUBCASE("degenerate unified load rejected") {
        const char* text = R"({"v_nominal":180,"omega_nominal":377,
            "dgs":[{"m":1e-3,"n":1e-3,"omega_set":380,"w_f":30,"L":1e-3,"r":0.1}],
            "loads":[{"p_rated":0,"q_rated":0}]})";
        CHECK_THROWS_WITH_AS(parse_config(text), doctest::Contains("loads"), ConfigError);
    }
}
