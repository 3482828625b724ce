#include "mgstab/equilibrium.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>

namespace mgstab {

namespace {

using Complex = std::complex<double>;

struct CircuitState {
    Complex v_l;
    std::vector<Complex> currents;
    std::vector<double> p;  // droop-side powers per the requested convention
    std::vector<double> q;
};

/// Evaluate phasor circuit and droop powers for unknowns (omega, E_i, Phi_i).
CircuitState evaluate_circuit(const SimplifiedModel& model, double omega,
                              const Eigen::VectorXd& e, const Eigen::VectorXd& phi,
                              DroopPower convention) {
    const std::size_t n = model.n_dgs();
    std::vector<Complex> e_phasors(n);
    std::vector<Complex> z_lines(n);
    for (std::size_t i = 0; i < n; ++i) {
        e_phasors[i] = std::polar(e[static_cast<Eigen::Index>(i)],
                                  phi[static_cast<Eigen::Index>(i)]);
        z_lines[i] = Complex(model.dgs[i].resistance, omega * model.dgs[i].inductance);
    }
    CircuitState out;
    out.v_l = bus_voltage_from_sources(load_impedance(model), e_phasors, z_lines);
    out.currents.resize(n);
    out.p.resize(n);
    out.q.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.currents[i] = (e_phasors[i] - out.v_l) / z_lines[i];
        const Complex s = (convention == DroopPower::inverter_side)
                              ? model.phase_factor * e_phasors[i] * std::conj(out.currents[i])
                              : model.phase_factor * out.v_l * std::conj(out.currents[i]);
        out.p[i] = s.real();
        out.q[i] = s.imag();
    }
    return out;
}

/// Per-unit residuals of the 2N+1 steady-state system.
Eigen::VectorXd residuals(const SimplifiedModel& model, const Eigen::VectorXd& y,
                          DroopPower convention) {
    const std::size_t n = model.n_dgs();
    const double omega = y[0];
    const Eigen::VectorXd e = y.segment(1, static_cast<Eigen::Index>(n));
    const Eigen::VectorXd phi = y.segment(1 + static_cast<Eigen::Index>(n),
                                          static_cast<Eigen::Index>(n));
    const CircuitState circuit = evaluate_circuit(model, omega, e, phi, convention);

    Eigen::VectorXd r(2 * static_cast<Eigen::Index>(n) + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const DgParams& dg = model.dgs[i];
        r[static_cast<Eigen::Index>(i)] =
            (dg.omega_set - dg.m * circuit.p[i] - omega) / model.omega_nominal;
        r[static_cast<Eigen::Index>(n + i)] =
            (dg.e_set - dg.n * circuit.q[i] - e[static_cast<Eigen::Index>(i)]) /
            model.v_nominal;
    }
    r[2 * static_cast<Eigen::Index>(n)] = circuit.v_l.imag() / model.v_nominal;
    return r;
}

}  // namespace

std::complex<double> load_impedance(const SimplifiedModel& model) {
    return std::polar(model.z_load_mag, model.theta_z);
}

std::complex<double> bus_voltage_from_sources(Complex z_load,
                                              const std::vector<Complex>& e_phasors,
                                              const std::vector<Complex>& z_lines) {
    Complex admittance_sum(0.0, 0.0);
    Complex source_sum(0.0, 0.0);
    for (std::size_t i = 0; i < e_phasors.size(); ++i) {
        admittance_sum += 1.0 / z_lines[i];
        source_sum += e_phasors[i] / z_lines[i];
    }
    const Complex denom = 1.0 + z_load * admittance_sum;
    if (std::abs(denom) < 1e-12 * (1.0 + std::abs(z_load * admittance_sum))) {
        throw DegenerateNetworkError(
            "bus voltage relation is singular: 1 + Z_L * sum(1/Z_i) vanishes");
    }
    return z_load * source_sum / denom;
}

double equilibrium_current(double p_e, double q_e, double e_e, double phase_factor) {
    return std::hypot(p_e, q_e) / (phase_factor * e_e);
}

std::pair<double, double> bus_power(const EquilibriumPoint& eq, double phase_factor,
                                    std::size_t i) {
    const Complex v_l = std::polar(eq.v_le, eq.phi_le);
    const Complex current = std::polar(eq.i_e[i], eq.delta_e[i]);
    const Complex s = phase_factor * v_l * std::conj(current);
    return {s.real(), s.imag()};
}

EquilibriumPoint solve_equilibrium(const SimplifiedModel& model,
                                   const EquilibriumOptions& opts) {
    validate(model);
    const std::size_t n = model.n_dgs();
    const Eigen::Index dim = 2 * static_cast<Eigen::Index>(n) + 1;

    Eigen::VectorXd y(dim);
    if (opts.initial_guess && opts.initial_guess->n_dgs() == n) {
        const EquilibriumPoint& g = *opts.initial_guess;
        y[0] = g.omega_e;
        for (std::size_t i = 0; i < n; ++i) {
            y[1 + static_cast<Eigen::Index>(i)] = g.e_e[i];
            y[1 + static_cast<Eigen::Index>(n + i)] = g.phi_e[i];
        }
    } else {
        double omega_mean = 0.0;
        for (const DgParams& dg : model.dgs) omega_mean += dg.omega_set;
        y[0] = omega_mean / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[1 + static_cast<Eigen::Index>(i)] = model.dgs[i].e_set;
            y[1 + static_cast<Eigen::Index>(n + i)] = 0.0;
        }
    }

    Eigen::VectorXd r = residuals(model, y, opts.droop_power);
    double r_norm = r.lpNorm<Eigen::Infinity>();
    int iter = 0;
    for (; iter < opts.max_iterations && r_norm > 1e-14; ++iter) {
        // central-difference Jacobian of the residuals
        Eigen::MatrixXd jac(dim, dim);
        for (Eigen::Index j = 0; j < dim; ++j) {
            const double h = 1e-6 * (1.0 + std::abs(y[j]));
            Eigen::VectorXd y_hi = y;
            Eigen::VectorXd y_lo = y;
            y_hi[j] += h;
            y_lo[j] -= h;
            jac.col(j) = (residuals(model, y_hi, opts.droop_power) -
                          residuals(model, y_lo, opts.droop_power)) /
                         (2.0 * h);
        }
        const Eigen::VectorXd step = jac.partialPivLu().solve(-r);
        if (!step.allFinite()) {
            throw SolverError("equilibrium Newton step is not finite", r_norm, iter);
        }

        // backtracking on the residual norm
        double t = 1.0;
        Eigen::VectorXd y_next;
        Eigen::VectorXd r_next;
        double r_next_norm = r_norm;
        bool accepted = false;
        while (t >= 1.0 / 1024.0) {
            y_next = y + t * step;
            r_next = residuals(model, y_next, opts.droop_power);
            r_next_norm = r_next.lpNorm<Eigen::Infinity>();
            if (std::isfinite(r_next_norm) && r_next_norm < r_norm) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            break;  // stagnated; the contract check below decides
        }
        y = y_next;
        r = r_next;
        r_norm = r_next_norm;
    }

    if (!(r_norm <= opts.tolerance)) {
        throw SolverError("equilibrium solve did not converge: residual " +
                              std::to_string(r_norm) + " after " + std::to_string(iter) +
                              " iterations",
                          r_norm, iter);
    }

    const double omega = y[0];
    const Eigen::VectorXd e = y.segment(1, static_cast<Eigen::Index>(n));
    const Eigen::VectorXd phi =
        y.segment(1 + static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const CircuitState circuit = evaluate_circuit(model, omega, e, phi, opts.droop_power);

    EquilibriumPoint eq;
    eq.omega_e = omega;
    eq.v_le = std::abs(circuit.v_l);
    if (circuit.v_l.real() <= 0.0) {
        throw SolverError("equilibrium converged to a reversed bus voltage", r_norm, iter);
    }
    eq.phi_le = 0.0;
    eq.p_e.resize(n);
    eq.q_e.resize(n);
    eq.e_e.resize(n);
    eq.phi_e.resize(n);
    eq.i_e.resize(n);
    eq.delta_e.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Complex e_phasor = std::polar(e[static_cast<Eigen::Index>(i)],
                                            phi[static_cast<Eigen::Index>(i)]);
        // stored powers are always inverter-side so that
        // i_e == sqrt(p_e^2 + q_e^2) / (p * e_e) exactly
        const Complex s = model.phase_factor * e_phasor * std::conj(circuit.currents[i]);
        eq.p_e[i] = s.real();
        eq.q_e[i] = s.imag();
        eq.e_e[i] = e[static_cast<Eigen::Index>(i)];
        eq.phi_e[i] = phi[static_cast<Eigen::Index>(i)];
        eq.i_e[i] = std::abs(circuit.currents[i]);
        eq.delta_e[i] = std::atan2(circuit.currents[i].imag(), circuit.currents[i].real());
        if (eq.e_e[i] <= 0.0) {
            throw SolverError("equilibrium converged to a non-positive inverter voltage",
                              r_norm, iter);
        }
    }
    return eq;
}

}  // namespace mgstab
