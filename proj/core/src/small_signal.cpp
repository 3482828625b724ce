#include "mgstab/small_signal.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>

namespace mgstab {

namespace {

using Complex = std::complex<double>;

void check_nondegenerate(const EquilibriumPoint& eq, std::size_t i) {
    if (!(eq.i_e[i] > 0.0)) {
        throw DegenerateEquilibriumError(
            "equilibrium current of DG " + std::to_string(i + 1) +
            " is zero; the linearization divides by it");
    }
    if (!(eq.v_le > 0.0)) {
        throw DegenerateEquilibriumError("equilibrium bus voltage is zero");
    }
}

/// Total load power at the equilibrium bus voltage, per the module's
/// phase-factor-absorbing load convention.
std::pair<double, double> load_power_at(const EquilibriumPoint& eq,
                                        const SimplifiedModel& model) {
    const double s = model.phase_factor * eq.v_le * eq.v_le / model.z_load_mag;
    return {s * std::cos(model.theta_z), s * std::sin(model.theta_z)};
}

}  // namespace

PowerCoefficients power_coefficients(const EquilibriumPoint& eq, std::size_t i,
                                     double phase_factor) {
    check_nondegenerate(eq, i);
    const double v = eq.v_le;
    const double cur = eq.i_e[i];
    const double ang = eq.phi_le - eq.delta_e[i];
    const double c = std::cos(ang);
    const double s = std::sin(ang);

    PowerCoefficients k{};
    k.k1 = phase_factor * cur * c;
    k.k2 = -phase_factor * v * cur * s;
    k.k3 = phase_factor * v * c;
    k.k4 = phase_factor * v * cur * s;
    k.k5 = phase_factor * cur * s;
    k.k6 = phase_factor * v * cur * c;
    k.k7 = phase_factor * v * s;
    k.k8 = -phase_factor * v * cur * c;
    return k;
}

DroopCoefficients droop_coefficients(const PowerCoefficients& k, double m, double n,
                                     double w_f) {
    DroopCoefficients kp{};
    kp.kp1 = -m * w_f * k.k1;
    kp.kp2 = -m * w_f * k.k2;
    kp.kp3 = -m * w_f * k.k3;
    kp.kp4 = -m * w_f * k.k4;
    kp.kp5 = -n * w_f * k.k5;
    kp.kp6 = -n * w_f * k.k6;
    kp.kp7 = -n * w_f * k.k7;
    kp.kp8 = -n * w_f * k.k8;
    return kp;
}

LineCoefficients line_coefficients(const EquilibriumPoint& eq, std::size_t i,
                                   double inductance, double resistance,
                                   [[maybe_unused]] double phase_factor) {
    check_nondegenerate(eq, i);
    if (!(eq.e_e[i] > 0.0)) {
        throw DegenerateEquilibriumError("equilibrium inverter voltage of DG " +
                                         std::to_string(i + 1) + " is zero");
    }
    const double e = eq.e_e[i];
    const double v = eq.v_le;
    const double cur = eq.i_e[i];
    const double inv_ang = eq.phi_e[i] - eq.delta_e[i];
    const double bus_ang = eq.phi_le - eq.delta_e[i];
    const double ci = std::cos(inv_ang);
    const double si = std::sin(inv_ang);
    const double cb = std::cos(bus_ang);
    const double sb = std::sin(bus_ang);
    const double l = inductance;

    LineCoefficients k{};
    k.k9 = ci / l;
    k.k10 = -(e / l) * si;
    k.k11 = -resistance / l;
    k.k12 = (e / l) * si - (v / l) * sb;
    k.k13 = -cb / l;
    k.k14 = (v / l) * sb;
    k.k15 = si / (l * cur);
    k.k16 = (e / (l * cur)) * ci;
    k.k17 = -(e * si - v * sb) / (l * cur * cur);  // = -ddelta/dt / I at steady lines
    k.k18 = -(e / (l * cur)) * ci + (v / (l * cur)) * cb;
    k.k19 = -sb / (l * cur);
    k.k20 = -(v / (l * cur)) * cb;
    return k;
}

std::vector<DgCoefficients> compute_coefficients(const SimplifiedModel& model,
                                                 const EquilibriumPoint& eq) {
    std::vector<DgCoefficients> out;
    out.reserve(model.n_dgs());
    for (std::size_t i = 0; i < model.n_dgs(); ++i) {
        const DgParams& dg = model.dgs[i];
        DgCoefficients c{};
        c.power = power_coefficients(eq, i, model.phase_factor);
        c.droop = droop_coefficients(c.power, dg.m, dg.n, dg.w_f);
        c.line = line_coefficients(eq, i, dg.inductance, dg.resistance, model.phase_factor);
        out.push_back(c);
    }
    return out;
}

double max_dual_form_deviation(const SimplifiedModel& model, const EquilibriumPoint& eq) {
    const double p = model.phase_factor;
    double worst = 0.0;
    auto compare = [&worst](double trig_form, double power_form) {
        const double scale = std::max(std::abs(trig_form), std::abs(power_form));
        if (scale == 0.0) return;
        worst = std::max(worst, std::abs(trig_form - power_form) / scale);
    };

    for (std::size_t i = 0; i < model.n_dgs(); ++i) {
        const DgParams& dg = model.dgs[i];
        const PowerCoefficients k = power_coefficients(eq, i, p);
        const LineCoefficients kl =
            line_coefficients(eq, i, dg.inductance, dg.resistance, p);

        // bus-side powers drive the power-injection forms
        const auto [pb, qb] = bus_power(eq, p, i);
        compare(k.k1, pb / eq.v_le);
        compare(k.k2, -qb);
        compare(k.k3, pb / eq.i_e[i]);
        compare(k.k4, qb);
        compare(k.k5, qb / eq.v_le);
        compare(k.k6, pb);
        compare(k.k7, qb / eq.i_e[i]);
        compare(k.k8, -pb);

        // inverter-side powers drive the E-referenced line forms,
        // bus-side the V_L-referenced ones
        const double pi = eq.p_e[i];
        const double qi = eq.q_e[i];
        const double l = dg.inductance;
        const double cur = eq.i_e[i];
        compare(kl.k9, pi / (p * l * eq.e_e[i] * cur));
        compare(kl.k10, -qi / (p * l * cur));
        compare(kl.k11, -dg.resistance / l);
        compare(kl.k12, cur * eq.omega_e);
        compare(kl.k13, -pb / (p * l * cur * eq.v_le));
        compare(kl.k14, qb / (p * l * cur));
        compare(kl.k15, qi / (p * l * eq.e_e[i] * cur * cur));
        compare(kl.k16, pi / (p * l * cur * cur));
        compare(kl.k17, -eq.omega_e / cur);
        compare(kl.k18, -dg.resistance / l);
        compare(kl.k19, -qb / (p * l * eq.v_le * cur * cur));
        compare(kl.k20, -pb / (p * l * cur * cur));
    }
    return worst;
}

Eigen::MatrixXd assemble_load_matrix(const std::vector<DgCoefficients>& coeffs,
                                     const EquilibriumPoint& eq,
                                     const SimplifiedModel& model) {
    const std::size_t n = coeffs.size();
    const auto [p_le, q_le] = load_power_at(eq, model);

    double sum_k1 = 0.0, sum_k2 = 0.0, sum_k5 = 0.0, sum_k6 = 0.0;
    for (const DgCoefficients& c : coeffs) {
        sum_k1 += c.power.k1;
        sum_k2 += c.power.k2;
        sum_k5 += c.power.k5;
        sum_k6 += c.power.k6;
    }

    Eigen::Matrix2d pivot;
    pivot << 2.0 * p_le / eq.v_le - sum_k1, -sum_k2,
             2.0 * q_le / eq.v_le - sum_k5, -sum_k6;
    const double det = pivot.determinant();
    const double det_scale = pivot.cwiseAbs().maxCoeff();
    if (std::abs(det) < 1e-12 * det_scale * det_scale) {
        throw DegenerateEquilibriumError("load elimination pivot is singular");
    }

    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(2, static_cast<Eigen::Index>(5 * n));
    for (std::size_t i = 0; i < n; ++i) {
        rhs(0, static_cast<Eigen::Index>(3 * n + i)) = coeffs[i].power.k3;
        rhs(0, static_cast<Eigen::Index>(4 * n + i)) = coeffs[i].power.k4;
        rhs(1, static_cast<Eigen::Index>(3 * n + i)) = coeffs[i].power.k7;
        rhs(1, static_cast<Eigen::Index>(4 * n + i)) = coeffs[i].power.k8;
    }
    return pivot.inverse() * rhs;
}

Eigen::MatrixXd assemble_system_matrix(const std::vector<DgCoefficients>& coeffs,
                                       const Eigen::MatrixXd& a_l,
                                       const SimplifiedModel& model) {
    const Eigen::Index n = static_cast<Eigen::Index>(coeffs.size());
    const Eigen::Index dim = 5 * n;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd bus_cols = Eigen::MatrixXd::Zero(dim, 2);

    for (Eigen::Index i = 0; i < n; ++i) {
        const DgCoefficients& c = coeffs[static_cast<std::size_t>(i)];
        const double w_f = model.dgs[static_cast<std::size_t>(i)].w_f;

        a(i, i) = -w_f;
        a(i, 3 * n + i) = c.droop.kp3;
        a(i, 4 * n + i) = c.droop.kp4;

        a(n + i, n + i) = -w_f;
        a(n + i, 3 * n + i) = c.droop.kp7;
        a(n + i, 4 * n + i) = c.droop.kp8;

        a(2 * n + i, i) = 1.0;

        a(3 * n + i, n + i) = c.line.k9;
        a(3 * n + i, 2 * n + i) = c.line.k10;
        a(3 * n + i, 3 * n + i) = c.line.k11;
        a(3 * n + i, 4 * n + i) = c.line.k12;

        a(4 * n + i, n + i) = c.line.k15;
        a(4 * n + i, 2 * n + i) = c.line.k16;
        a(4 * n + i, 3 * n + i) = c.line.k17;
        a(4 * n + i, 4 * n + i) = c.line.k18;

        bus_cols(i, 0) = c.droop.kp1;
        bus_cols(i, 1) = c.droop.kp2;
        bus_cols(n + i, 0) = c.droop.kp5;
        bus_cols(n + i, 1) = c.droop.kp6;
        bus_cols(3 * n + i, 0) = c.line.k13;
        bus_cols(3 * n + i, 1) = c.line.k14;
        bus_cols(4 * n + i, 0) = c.line.k19;
        bus_cols(4 * n + i, 1) = c.line.k20;
    }

    a += bus_cols * a_l;
    return a;
}

Eigen::MatrixXd static_phasor_matrix(const SimplifiedModel& model,
                                     const EquilibriumPoint& eq) {
    const std::size_t n = model.n_dgs();
    const Eigen::Index dim = static_cast<Eigen::Index>(3 * n);
    const Complex z_load = load_impedance(model);

    std::vector<Complex> z_lines(n);
    for (std::size_t i = 0; i < n; ++i) {
        z_lines[i] = Complex(model.dgs[i].resistance,
                             model.omega_nominal * model.dgs[i].inductance);
    }

    // reduced dynamics with algebraic lines; x = [P_f_1..N, Q_f_1..N, Phi_1..N]
    auto rhs = [&](const Eigen::VectorXd& x) {
        std::vector<Complex> e_phasors(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double e_mag =
                model.dgs[i].e_set - model.dgs[i].n * x[static_cast<Eigen::Index>(n + i)];
            e_phasors[i] = std::polar(e_mag, x[static_cast<Eigen::Index>(2 * n + i)]);
        }
        const Complex v_l = bus_voltage_from_sources(z_load, e_phasors, z_lines);
        Eigen::VectorXd dx(dim);
        for (std::size_t i = 0; i < n; ++i) {
            const Complex current = (e_phasors[i] - v_l) / z_lines[i];
            const Complex s = model.phase_factor * v_l * std::conj(current);
            const DgParams& dg = model.dgs[i];
            dx[static_cast<Eigen::Index>(i)] =
                dg.w_f * (s.real() - x[static_cast<Eigen::Index>(i)]);
            dx[static_cast<Eigen::Index>(n + i)] =
                dg.w_f * (s.imag() - x[static_cast<Eigen::Index>(n + i)]);
            dx[static_cast<Eigen::Index>(2 * n + i)] =
                dg.omega_set - dg.m * x[static_cast<Eigen::Index>(i)];
        }
        return dx;
    };

    Eigen::VectorXd x_e(dim);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [pb, qb] = bus_power(eq, model.phase_factor, i);
        x_e[static_cast<Eigen::Index>(i)] = pb;
        x_e[static_cast<Eigen::Index>(n + i)] = qb;
        x_e[static_cast<Eigen::Index>(2 * n + i)] = eq.phi_e[i];
    }

    Eigen::MatrixXd jac(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        const double h = 1e-6 * (1.0 + std::abs(x_e[j]));
        if (x_e[j] + h == x_e[j]) {
            throw NumericalDifferentiationError(
                "finite-difference step degenerated for static state " + std::to_string(j));
        }
        Eigen::VectorXd hi = x_e;
        Eigen::VectorXd lo = x_e;
        hi[j] += h;
        lo[j] -= h;
        jac.col(j) = (rhs(hi) - rhs(lo)) / (2.0 * h);
    }
    return jac;
}

SmallSignalModel build_small_signal_model(const SimplifiedModel& model,
                                          const EquilibriumPoint& eq) {
    SmallSignalModel out;
    const std::vector<DgCoefficients> coeffs = compute_coefficients(model, eq);
    out.a_l = assemble_load_matrix(coeffs, eq, model);
    out.a_sys = assemble_system_matrix(coeffs, out.a_l, model);
    out.a_static = static_phasor_matrix(model, eq);
    out.state_names = state_ordering(model.n_dgs());
    out.static_state_names = static_state_ordering(model.n_dgs());
    return out;
}

std::vector<std::string> state_ordering(std::size_t n_dgs) {
    std::vector<std::string> names;
    names.reserve(5 * n_dgs);
    const char* blocks[5] = {"omega", "e", "phi", "i", "delta"};
    for (const char* block : blocks) {
        for (std::size_t i = 1; i <= n_dgs; ++i) {
            names.push_back(std::string(block) + "_" + std::to_string(i));
        }
    }
    return names;
}

std::vector<std::string> static_state_ordering(std::size_t n_dgs) {
    std::vector<std::string> names;
    names.reserve(3 * n_dgs);
    const char* blocks[3] = {"p_f", "q_f", "phi"};
    for (const char* block : blocks) {
        for (std::size_t i = 1; i <= n_dgs; ++i) {
            names.push_back(std::string(block) + "_" + std::to_string(i));
        }
    }
    return names;
}

Eigen::VectorXd analysis_state(const EquilibriumPoint& eq) {
    const std::size_t n = eq.n_dgs();
    Eigen::VectorXd x(static_cast<Eigen::Index>(5 * n));
    for (std::size_t i = 0; i < n; ++i) {
        x[static_cast<Eigen::Index>(i)] = eq.omega_e;
        x[static_cast<Eigen::Index>(n + i)] = eq.e_e[i];
        x[static_cast<Eigen::Index>(2 * n + i)] = eq.phi_e[i];
        x[static_cast<Eigen::Index>(3 * n + i)] = eq.i_e[i];
        x[static_cast<Eigen::Index>(4 * n + i)] = eq.delta_e[i];
    }
    return x;
}

}  // namespace mgstab
