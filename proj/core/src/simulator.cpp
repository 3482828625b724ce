#include "mgstab/simulator.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <memory>

#include "mgstab/small_signal.hpp"

namespace mgstab {

namespace {

using Complex = std::complex<double>;

double wrap_angle(double x) { return std::remainder(x, 2.0 * M_PI); }

/// Flat layout [p_f_1..N, q_f_1..N, phi_1..N, i_1..N, delta_1..N], matching
/// the analysis state blocks.
Eigen::VectorXd pack(const SimState& s) {
    const Eigen::Index n = static_cast<Eigen::Index>(s.n_dgs());
    Eigen::VectorXd y(5 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y[i] = s.p_f[static_cast<std::size_t>(i)];
        y[n + i] = s.q_f[static_cast<std::size_t>(i)];
        y[2 * n + i] = s.phi[static_cast<std::size_t>(i)];
        y[3 * n + i] = s.i[static_cast<std::size_t>(i)];
        y[4 * n + i] = s.delta[static_cast<std::size_t>(i)];
    }
    return y;
}

SimState unpack(const Eigen::VectorXd& y) {
    const std::size_t n = static_cast<std::size_t>(y.size() / 5);
    SimState s;
    s.p_f.resize(n);
    s.q_f.resize(n);
    s.phi.resize(n);
    s.i.resize(n);
    s.delta.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Index k = static_cast<Eigen::Index>(i);
        const Eigen::Index nn = static_cast<Eigen::Index>(n);
        s.p_f[i] = y[k];
        s.q_f[i] = y[nn + k];
        s.phi[i] = y[2 * nn + k];
        s.i[i] = y[3 * nn + k];
        s.delta[i] = y[4 * nn + k];
    }
    return s;
}

struct BusSolution {
    Complex v_l;
    std::vector<Complex> currents;
};

BusSolution solve_bus(const SimplifiedModel& model, const Eigen::VectorXd& y) {
    const Eigen::Index n = static_cast<Eigen::Index>(model.n_dgs());
    BusSolution bus;
    bus.currents.resize(static_cast<std::size_t>(n));
    Complex total(0.0, 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        bus.currents[static_cast<std::size_t>(i)] = std::polar(y[3 * n + i], y[4 * n + i]);
        total += bus.currents[static_cast<std::size_t>(i)];
    }
    bus.v_l = load_impedance(model) * total;
    return bus;
}

void check_current_floor(const SimplifiedModel& model, const Eigen::VectorXd& y,
                         double epsilon_current, double time) {
    const Eigen::Index n = static_cast<Eigen::Index>(model.n_dgs());
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(y[3 * n + i] > epsilon_current)) {
            throw SingularityError("line current magnitude of DG " + std::to_string(i + 1) +
                                       " at or below the polar floor",
                                   time);
        }
    }
}

Eigen::VectorXd rhs_flat(const SimplifiedModel& model, const Eigen::VectorXd& y,
                         DroopPower power_feed, double epsilon_current, double time) {
    check_current_floor(model, y, epsilon_current, time);
    const Eigen::Index n = static_cast<Eigen::Index>(model.n_dgs());
    const BusSolution bus = solve_bus(model, y);

    Eigen::VectorXd dy(5 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const DgParams& dg = model.dgs[static_cast<std::size_t>(i)];
        const double e_mag = dg.e_set - dg.n * y[n + i];
        const double omega = dg.omega_set - dg.m * y[i];
        const Complex current = bus.currents[static_cast<std::size_t>(i)];

        const Complex s_ref = (power_feed == DroopPower::bus_side)
                                  ? bus.v_l * std::conj(current)
                                  : std::polar(e_mag, y[2 * n + i]) * std::conj(current);
        const double p_meas = model.phase_factor * s_ref.real();
        const double q_meas = model.phase_factor * s_ref.imag();

        const double inv_ang = y[2 * n + i] - y[4 * n + i];   // phi_i - delta_i
        const double bus_ang = std::arg(bus.v_l) - y[4 * n + i];
        const double v_mag = std::abs(bus.v_l);
        const double l = dg.inductance;

        dy[i] = dg.w_f * (p_meas - y[i]);
        dy[n + i] = dg.w_f * (q_meas - y[n + i]);
        dy[2 * n + i] = omega;
        dy[3 * n + i] = (e_mag * std::cos(inv_ang) - v_mag * std::cos(bus_ang)) / l -
                        (dg.resistance / l) * y[3 * n + i];
        dy[4 * n + i] =
            (e_mag * std::sin(inv_ang) - v_mag * std::sin(bus_ang)) / (l * y[3 * n + i]);
    }
    return dy;
}

SimObservables observables(const SimplifiedModel& model, const Eigen::VectorXd& y) {
    const Eigen::Index n = static_cast<Eigen::Index>(model.n_dgs());
    const BusSolution bus = solve_bus(model, y);
    const double phi_l = std::arg(bus.v_l);

    SimObservables obs;
    obs.omega.resize(static_cast<std::size_t>(n));
    obs.e.resize(static_cast<std::size_t>(n));
    obs.p_bus.resize(static_cast<std::size_t>(n));
    obs.q_bus.resize(static_cast<std::size_t>(n));
    obs.delta_rel.resize(static_cast<std::size_t>(n));
    obs.v_l = std::abs(bus.v_l);
    obs.phi_l = phi_l;
    for (Eigen::Index i = 0; i < n; ++i) {
        const DgParams& dg = model.dgs[static_cast<std::size_t>(i)];
        const Complex s =
            model.phase_factor * bus.v_l * std::conj(bus.currents[static_cast<std::size_t>(i)]);
        obs.omega[static_cast<std::size_t>(i)] = dg.omega_set - dg.m * y[i];
        obs.e[static_cast<std::size_t>(i)] = dg.e_set - dg.n * y[n + i];
        obs.p_bus[static_cast<std::size_t>(i)] = s.real();
        obs.q_bus[static_cast<std::size_t>(i)] = s.imag();
        obs.delta_rel[static_cast<std::size_t>(i)] = wrap_angle(y[4 * n + i] - phi_l);
    }
    return obs;
}

}  // namespace

void rhs(const SimplifiedModel& model, const SimState& state, SimState& derivative,
         DroopPower power_feed, double epsilon_current) {
    const Eigen::VectorXd dy = rhs_flat(model, pack(state), power_feed, epsilon_current,
                                        std::numeric_limits<double>::quiet_NaN());
    derivative = unpack(dy);
}

SimState equilibrium_state(const SimplifiedModel& model, const EquilibriumPoint& eq,
                           DroopPower power_feed) {
    const std::size_t n = eq.n_dgs();
    SimState s;
    s.p_f.resize(n);
    s.q_f.resize(n);
    s.phi = eq.phi_e;
    s.i = eq.i_e;
    s.delta = eq.delta_e;
    for (std::size_t i = 0; i < n; ++i) {
        if (power_feed == DroopPower::bus_side) {
            const auto [pb, qb] = bus_power(eq, model.phase_factor, i);
            s.p_f[i] = pb;
            s.q_f[i] = qb;
        } else {
            s.p_f[i] = eq.p_e[i];
            s.q_f[i] = eq.q_e[i];
        }
    }
    return s;
}

SimTrace integrate(const SimplifiedModel& model, const SimState& x0, double t_end,
                   const SimOptions& opts) {
    if (!(opts.dt > 0.0) || !(t_end >= opts.dt)) {
        throw Error("integrate requires dt > 0 and t_end >= dt");
    }
    const long n_steps = std::max<long>(1, std::lround(t_end / opts.dt));
    const int stride = std::max(1, opts.output_stride);

    auto trace = std::make_shared<SimTrace>();
    Eigen::VectorXd y = pack(x0);

    auto record = [&](double t, const Eigen::VectorXd& state) {
        SimSample sample;
        sample.t = t;
        sample.state = unpack(state);
        sample.obs = observables(model, state);
        trace->samples.push_back(std::move(sample));
    };

    try {
        record(0.0, y);
        for (long step = 0; step < n_steps; ++step) {
            const double t = static_cast<double>(step) * opts.dt;
            const double dt = opts.dt;
            auto f = [&](const Eigen::VectorXd& state) {
                return rhs_flat(model, state, opts.power_feed, opts.epsilon_current, t);
            };
            const Eigen::VectorXd k1 = f(y);
            const Eigen::VectorXd k2 = f(y + 0.5 * dt * k1);
            const Eigen::VectorXd k3 = f(y + 0.5 * dt * k2);
            const Eigen::VectorXd k4 = f(y + dt * k3);
            y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

            if (!y.allFinite()) {
                trace->diverged = true;
                trace->diverged_at = t + dt;
                trace->diverged_reason = "non-finite state";
                return *trace;
            }
            if ((step + 1) % stride == 0) {
                record(static_cast<double>(step + 1) * opts.dt, y);
            }
        }
    } catch (SingularityError& err) {
        SingularityError rethrown(std::string(err.what()), err.time());
        rethrown.partial_trace = trace;
        throw rethrown;
    }
    return *trace;
}

Eigen::MatrixXd fd_jacobian(const SimplifiedModel& model, const EquilibriumPoint& eq,
                            double h) {
    const Eigen::Index n = static_cast<Eigen::Index>(model.n_dgs());
    const Eigen::Index dim = 5 * n;
    const Eigen::VectorXd x_e = analysis_state(eq);

    // Simulator dynamics in (omega, E, phi, I, delta) coordinates; the filter
    // states enter only through omega = omega_set - m p_f and E = e_set - n q_f,
    // so d(omega)/dt = w_f (omega_set - m P_bus - omega) and likewise for E.
    auto g = [&](const Eigen::VectorXd& x) {
        // solve_bus reads the I and delta blocks, which sit at the same
        // offsets in both orderings
        Eigen::VectorXd y = Eigen::VectorXd::Zero(dim);
        y.segment(2 * n, 3 * n) = x.segment(2 * n, 3 * n);
        const BusSolution bus = solve_bus(model, y);
        Eigen::VectorXd dx(dim);
        for (Eigen::Index i = 0; i < n; ++i) {
            const DgParams& dg = model.dgs[static_cast<std::size_t>(i)];
            const Complex current = bus.currents[static_cast<std::size_t>(i)];
            const Complex s = model.phase_factor * bus.v_l * std::conj(current);

            const double inv_ang = x[2 * n + i] - x[4 * n + i];
            const double bus_ang = std::arg(bus.v_l) - x[4 * n + i];
            const double v_mag = std::abs(bus.v_l);
            const double l = dg.inductance;
            const double e_mag = x[n + i];

            dx[i] = dg.w_f * (dg.omega_set - dg.m * s.real() - x[i]);
            dx[n + i] = dg.w_f * (dg.e_set - dg.n * s.imag() - x[n + i]);
            dx[2 * n + i] = x[i];
            dx[3 * n + i] = (e_mag * std::cos(inv_ang) - v_mag * std::cos(bus_ang)) / l -
                            (dg.resistance / l) * x[3 * n + i];
            dx[4 * n + i] = (e_mag * std::sin(inv_ang) - v_mag * std::sin(bus_ang)) /
                            (l * x[3 * n + i]);
        }
        return dx;
    };

    Eigen::MatrixXd jac(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        const double h_j = h * (1.0 + std::abs(x_e[j]));
        if (x_e[j] + h_j == x_e[j]) {
            throw NumericalDifferentiationError(
                "finite-difference step degenerated for state " + std::to_string(j));
        }
        Eigen::VectorXd hi = x_e;
        Eigen::VectorXd lo = x_e;
        hi[j] += h_j;
        lo[j] -= h_j;
        jac.col(j) = (g(hi) - g(lo)) / (2.0 * h_j);
    }
    return jac;
}

}  // namespace mgstab
