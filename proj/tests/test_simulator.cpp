#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "mgstab/equilibrium.hpp"
#include "mgstab/microgrid.hpp"
#include "mgstab/simulator.hpp"
#include "mgstab/small_signal.hpp"

using namespace mgstab;

namespace {

SimplifiedModel table1_model(double m_base = 2.5e-3, double n_base = 5e-3) {
    return build_simplified_model(table1_fixture(m_base, n_base));
}

EquilibriumPoint bus_closed(const SimplifiedModel& model) {
    EquilibriumOptions opts;
    opts.droop_power = DroopPower::bus_side;
    return solve_equilibrium(model, opts);
}

double max_abs(const std::vector<double>& v) {
    double out = 0.0;
    for (double x : v) out = std::max(out, std::abs(x));
    return out;
}

}  // namespace

TEST_CASE("the solved equilibrium is a fixed trajectory of the matching feed") {
    const SimplifiedModel model = table1_model();
    struct Pairing {
        DroopPower closure;
        DroopPower feed;
    };
    for (const Pairing pair : {Pairing{DroopPower::bus_side, DroopPower::bus_side},
                               Pairing{DroopPower::inverter_side, DroopPower::inverter_side}}) {
        EquilibriumOptions opts;
        opts.droop_power = pair.closure;
        const EquilibriumPoint eq = solve_equilibrium(model, opts);
        const SimState x0 = equilibrium_state(model, eq, pair.feed);
        SimState dot;
        rhs(model, x0, dot, pair.feed);
        CHECK(max_abs(dot.p_f) <= 1e-8);
        CHECK(max_abs(dot.q_f) <= 1e-8);
        CHECK(max_abs(dot.i) <= 1e-9);
        for (std::size_t i = 0; i < model.n_dgs(); ++i) {
            CHECK(dot.phi[i] == doctest::Approx(eq.omega_e).epsilon(1e-12));
            CHECK(dot.delta[i] == doctest::Approx(eq.omega_e).epsilon(1e-9));
        }
    }
}

TEST_CASE("rhs is invariant under a common rotation of all angles") {
    const SimplifiedModel model = table1_model();
    const EquilibriumPoint eq = bus_closed(model);
    SimState state = equilibrium_state(model, eq, DroopPower::bus_side);
    // move off the equilibrium so nothing is accidentally zero
    for (std::size_t i = 0; i < model.n_dgs(); ++i) {
        state.p_f[i] *= 1.05;
        state.i[i] *= 0.97;
        state.delta[i] += 0.01 * static_cast<double>(i);
    }
    SimState base;
    rhs(model, state, base);
    for (double shift : {0.3, -1.2, 2.0 * M_PI, 17.5}) {
        SimState rotated = state;
        for (std::size_t i = 0; i < model.n_dgs(); ++i) {
            rotated.phi[i] += shift;
            rotated.delta[i] += shift;
        }
        SimState dot;
        rhs(model, rotated, dot);
        for (std::size_t i = 0; i < model.n_dgs(); ++i) {
            CHECK(dot.p_f[i] == doctest::Approx(base.p_f[i]).epsilon(1e-9));
            CHECK(dot.q_f[i] == doctest::Approx(base.q_f[i]).epsilon(1e-9));
            CHECK(dot.phi[i] == doctest::Approx(base.phi[i]).epsilon(1e-12));
            CHECK(dot.i[i] == doctest::Approx(base.i[i]).epsilon(1e-9));
            CHECK(dot.delta[i] == doctest::Approx(base.delta[i]).epsilon(1e-9));
        }
    }
}

TEST_CASE("short-circuit limit reduces the current equation") {
    // single DG, bus forced to ~0 by a vanishing load impedance
    MicrogridConfig cfg;
    cfg.v_nominal = 180.0;
    cfg.omega_nominal = 2.0 * M_PI * 60.0;
    cfg.phase_factor = 1.5;
    cfg.dgs.push_back({1e-3, 0.0, 380.0, 180.0, 31.85, 2e-3, 0.2});
    cfg.loads.push_back({1000.0, 0.0});
    SimplifiedModel model = build_simplified_model(cfg);
    model.z_load_mag = 1e-12;
    model.theta_z = 0.0;

    SimState state;
    state.p_f = {0.0};
    state.q_f = {0.0};
    state.phi = {0.4};
    state.i = {7.0};
    state.delta = {-0.1};
    SimState dot;
    rhs(model, state, dot);
    const double e_mag = 180.0;  // n = 0 keeps E at the set value
    const double expected =
        (e_mag / 2e-3) * std::cos(0.4 - (-0.1)) - (0.2 / 2e-3) * 7.0;
    CHECK(dot.i[0] == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("current floor raises a singularity error") {
    const SimplifiedModel model = table1_model();
    SimState state;
    state.p_f = {0.0, 0.0, 0.0};
    state.q_f = {0.0, 0.0, 0.0};
    state.phi = {0.0, 0.0, 0.0};
    state.i = {10.0, 1e-7, 10.0};
    state.delta = {0.0, 0.0, 0.0};
    SimState dot;
    CHECK_THROWS_AS(rhs(model, state, dot), SingularityError);
}

TEST_CASE("integration preserves the fixed point for one second") {
    const SimplifiedModel model = table1_model();
    const EquilibriumPoint eq = bus_closed(model);
    const SimState x0 = equilibrium_state(model, eq, DroopPower::bus_side);
    const SimTrace trace = integrate(model, x0, 1.0, SimOptions{});
    REQUIRE(!trace.samples.empty());
    CHECK(!trace.diverged);
    const SimObservables& first = trace.samples.front().obs;
    for (const SimSample& sample : trace.samples) {
        for (std::size_t i = 0; i < model.n_dgs(); ++i) {
            CHECK(std::abs(sample.obs.omega[i] - first.omega[i]) <=
                  1e-9 * (1.0 + std::abs(first.omega[i])));
            CHECK(std::abs(sample.obs.e[i] - first.e[i]) <=
                  1e-9 * (1.0 + std::abs(first.e[i])));
            CHECK(std::abs(sample.obs.p_bus[i] - first.p_bus[i]) <=
                  1e-9 * (1.0 + std::abs(first.p_bus[i])));
            CHECK(std::abs(sample.obs.delta_rel[i] - first.delta_rel[i]) <= 1e-9);
            CHECK(std::abs(sample.state.i[i] - trace.samples.front().state.i[i]) <=
                  1e-9 * (1.0 + trace.samples.front().state.i[i]));
        }
        CHECK(std::abs(sample.obs.v_l - first.v_l) <= 1e-9 * (1.0 + first.v_l));
    }
}

TEST_CASE("near-zero start converges to a common frequency in the stable case") {
    const SimplifiedModel model = table1_model();
    const EquilibriumPoint eq = bus_closed(model);
    const std::size_t n = model.n_dgs();
    SimState x0;
    x0.p_f.assign(n, 0.0);
    x0.q_f.assign(n, 0.0);
    x0.phi.assign(n, 0.0);
    x0.delta.assign(n, 0.0);
    x0.i.assign(n, 1e-2);  // exact zero is singular in polar coordinates
    const SimTrace trace = integrate(model, x0, 2.0, SimOptions{});
    CHECK(!trace.diverged);
    const SimObservables& last = trace.samples.back().obs;
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(last.omega[i] == doctest::Approx(eq.omega_e).epsilon(1e-4));
        for (std::size_t j = 0; j < n; ++j) {
            CHECK(std::abs(last.omega[i] - last.omega[j]) <= 1e-3);
        }
    }
    // no sustained oscillation: the final-quarter envelope is tiny compared
    // to the start-up swing
    double early = 0.0;
    double late = 0.0;
    for (const SimSample& sample : trace.samples) {
        for (std::size_t i = 0; i < n; ++i) {
            const double dev = std::abs(sample.obs.omega[i] - eq.omega_e);
            if (sample.t <= 0.5) early = std::max(early, dev);
            if (sample.t >= 1.5) late = std::max(late, dev);
        }
    }
    CHECK(late <= 0.01 * early);
}

TEST_CASE("bus power conservation holds along a perturbed trajectory") {
    const SimplifiedModel model = table1_model();
    const EquilibriumPoint eq = bus_closed(model);
    SimState x0 = equilibrium_state(model, eq, DroopPower::bus_side);
    for (std::size_t i = 0; i < model.n_dgs(); ++i) {
        x0.i[i] *= 1.02;
        x0.delta[i] -= 0.02;
    }
    const SimTrace trace = integrate(model, x0, 0.2, SimOptions{});
    for (const SimSample& sample : trace.samples) {
        double p_sum = 0.0;
        double q_sum = 0.0;
        for (std::size_t i = 0; i < model.n_dgs(); ++i) {
            p_sum += sample.obs.p_bus[i];
            q_sum += sample.obs.q_bus[i];
        }
        const double s_load =
            model.phase_factor * sample.obs.v_l * sample.obs.v_l / model.z_load_mag;
        CHECK(std::abs(p_sum - s_load * std::cos(model.theta_z)) <=
              1e-9 * (1.0 + std::abs(p_sum)));
        CHECK(std::abs(q_sum - s_load * std::sin(model.theta_z)) <=
              1e-9 * (1.0 + std::abs(q_sum)));
    }
}

TEST_CASE("step halving shows fourth-order convergence") {
    const SimplifiedModel model = table1_model();
    const EquilibriumPoint eq = bus_closed(model);
    SimState x0 = equilibrium_state(model, eq, DroopPower::bus_side);
    for (std::size_t i = 0; i < model.n_dgs(); ++i) x0.i[i] *= 1.05;

    auto final_state = [&](double dt) {
        SimOptions opts;
        opts.dt = dt;
        opts.output_stride = static_cast<int>(std::lround(0.2 / dt));
        const SimTrace trace = integrate(model, x0, 0.2, opts);
        return trace.samples.back().state;
    };
    const SimState coarse = final_state(4e-5);
    const SimState medium = final_state(2e-5);
    const SimState fine = final_state(1e-5);

    // error(dt) ~ C dt^4: successive differences shrink ~16x
    double err_coarse = 0.0;
    double err_medium = 0.0;
    for (std::size_t i = 0; i < model.n_dgs(); ++i) {
        err_coarse = std::max(err_coarse, std::abs(coarse.i[i] - medium.i[i]));
        err_coarse = std::max(err_coarse, std::abs(coarse.delta[i] - medium.delta[i]));
        err_medium = std::max(err_medium, std::abs(medium.i[i] - fine.i[i]));
        err_medium = std::max(err_medium, std::abs(medium.delta[i] - fine.delta[i]));
    }
    REQUIRE(err_medium > 0.0);
    const double order = std::log2(err_coarse / err_medium);
    CHECK(order >= 3.5);
    CHECK(order <= 4.5);
}

TEST_CASE("finite-difference Jacobian certifies the analytic system matrix") {
    for (double s : {1.0, 2.0, 3.4}) {
        const SimplifiedModel model = table1_model(2.5e-3 * s);
        const EquilibriumPoint eq = bus_closed(model);
        const SmallSignalModel ss = build_small_signal_model(model, eq);
        const Eigen::MatrixXd fd = fd_jacobian(model, eq);
        REQUIRE(fd.rows() == 15);
        double worst = 0.0;
        for (Eigen::Index r = 0; r < 15; ++r) {
            for (Eigen::Index c = 0; c < 15; ++c) {
                worst = std::max(worst, std::abs(fd(r, c) - ss.a_sys(r, c)) /
                                            (1.0 + std::abs(ss.a_sys(r, c))));
            }
        }
        CHECK(worst <= 1e-6);
    }
}

TEST_CASE("finite-difference Jacobian annihilates the uniform angle direction") {
    const SimplifiedModel model = table1_model();
    const EquilibriumPoint eq = bus_closed(model);
    const Eigen::MatrixXd fd = fd_jacobian(model, eq);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(15);
    for (Eigen::Index i = 0; i < 3; ++i) {
        u[6 + i] = 1.0;
        u[12 + i] = 1.0;
    }
    CHECK((fd * u).lpNorm<Eigen::Infinity>() <= 1e-6 * fd.norm());
}

TEST_CASE("halving the FD step behaves like a second-order scheme") {
    const SimplifiedModel model = table1_model();
    const EquilibriumPoint eq = bus_closed(model);
    const SmallSignalModel ss = build_small_signal_model(model, eq);
    auto err = [&](double h) {
        return (fd_jacobian(model, eq, h) - ss.a_sys).cwiseAbs().maxCoeff();
    };
    // large steps where truncation dominates roundoff
    const double e1 = err(4e-4);
    const double e2 = err(2e-4);
    REQUIRE(e2 > 0.0);
    const double order = std::log2(e1 / e2);
    CHECK(order >= 1.5);
    CHECK(order <= 2.5);
}

TEST_CASE("unstable case grows into a sustained oscillation or a reported halt") {
    const SimplifiedModel model = table1_model(8.5e-3);
    const EquilibriumPoint eq = bus_closed(model);
    SimState x0 = equilibrium_state(model, eq, DroopPower::bus_side);
    for (std::size_t i = 0; i < model.n_dgs(); ++i) {
        x0.i[i] *= 1.02;
        x0.delta[i] += 0.02;
    }
    SimOptions opts;
    opts.output_stride = 50;
    bool halted = false;
    SimTrace trace;
    try {
        trace = integrate(model, x0, 12.0, opts);
        halted = trace.diverged;
    } catch (const SingularityError& err) {
        halted = true;
        REQUIRE(err.partial_trace != nullptr);
        trace = *err.partial_trace;
        CHECK(err.time() > 0.0);
    }
    REQUIRE(trace.samples.size() > 10);
    double peak = 0.0;
    double tail_peak = 0.0;
    const double t_last = trace.samples.back().t;
    for (const SimSample& sample : trace.samples) {
        for (std::size_t i = 0; i < model.n_dgs(); ++i) {
            const double dev = std::abs(sample.obs.omega[i] - eq.omega_e);
            peak = std::max(peak, dev);
            if (sample.t >= 0.8 * t_last) tail_peak = std::max(tail_peak, dev);
        }
    }
    const double initial = std::abs(trace.samples.front().obs.omega[0] - eq.omega_e);
    CHECK(peak >= 10.0 * std::max(initial, 1e-3));
    // the grown oscillation either persists (limit cycle) or the run halts
    CHECK((halted || tail_peak >= 0.5 * peak));
}

TEST_CASE("singular halt carries the time stamp and partial trace") {
    const SimplifiedModel model = table1_model();
    const EquilibriumPoint eq = bus_closed(model);
    SimState x0 = equilibrium_state(model, eq, DroopPower::bus_side);
    x0.i[1] = 5e-7;  // below the floor: the first stage evaluation trips
    SimOptions opts;
    opts.output_stride = 1;
    try {
        integrate(model, x0, 0.5, opts);
        FAIL("expected SingularityError");
    } catch (const SingularityError& err) {
        CHECK(err.time() == 0.0);
        REQUIRE(err.partial_trace != nullptr);
        CHECK(!err.partial_trace->samples.empty());
    }
}

TEST_CASE("integrate validates its horizon") {
    const SimplifiedModel model = table1_model();
    const EquilibriumPoint eq = bus_closed(model);
    const SimState x0 = equilibrium_state(model, eq, DroopPower::bus_side);
    CHECK_THROWS_AS(integrate(model, x0, 0.0, SimOptions{}), Error);
    SimOptions bad;
    bad.dt = -1.0;
    CHECK_THROWS_AS(integrate(model, x0, 1.0, bad), Error);
}
