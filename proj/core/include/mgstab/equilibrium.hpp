#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "mgstab/microgrid.hpp"

namespace mgstab {

/// Which power the droop laws see. With resistive coupling lines the inverter
/// terminal power p*Re(E*conj(I)) exceeds the power delivered at the bus
/// p*Re(V_L*conj(I)) by the line loss p*r*I^2, so the two closures give
/// slightly different operating points. inverter_side matches a physical
/// inverter measuring its own output; bus_side matches the linearized model.
enum class DroopPower { inverter_side, bus_side };

/// Steady-state operating point of a SimplifiedModel. The bus voltage angle
/// is the phase reference (phi_le == 0); p_e/q_e are inverter-terminal powers
/// regardless of the closure used to solve, so i_e == sqrt(p_e^2+q_e^2)/(p*e_e)
/// holds exactly.
struct EquilibriumPoint {
    double omega_e = 0.0;  // system frequency (rad/s)
    double v_le = 0.0;     // bus voltage magnitude (V)
    double phi_le = 0.0;   // bus voltage angle (rad), fixed reference 0

    std::vector<double> p_e;      // inverter active power (W)
    std::vector<double> q_e;      // inverter reactive power (var)
    std::vector<double> e_e;      // inverter voltage magnitude (V)
    std::vector<double> phi_e;    // inverter voltage angle (rad)
    std::vector<double> i_e;      // line current magnitude (A)
    std::vector<double> delta_e;  // line current angle (rad)

    std::size_t n_dgs() const { return p_e.size(); }
};

struct EquilibriumOptions {
    DroopPower droop_power = DroopPower::inverter_side;
    int max_iterations = 50;
    double tolerance = 1e-9;  // max-norm of per-unit residuals
    std::optional<EquilibriumPoint> initial_guess;  // warm start
};

/// Solve the 2N+1 steady-state equations in (omega_e, E_i, Phi_i) with the
/// bus angle pinned to zero:
///   omega_set_i - m_i * P_i - omega_e = 0
///   e_set_i     - n_i * Q_i - E_i     = 0
///   Im(V_L) = 0
/// where I_i = (E_i e^{j Phi_i} - V_L) / (r_i + j omega_e L_i) and V_L follows
/// from the closed-form bus relation. Damped Newton with a finite-difference
/// Jacobian. Throws SolverError on non-convergence (carrying the last
/// residual) and DegenerateNetworkError when the bus relation is singular.
EquilibriumPoint solve_equilibrium(const SimplifiedModel& model,
                                   const EquilibriumOptions& opts = {});

/// Line current magnitude from inverter power: sqrt(p^2 + q^2) / (phase_factor * e).
double equilibrium_current(double p_e, double q_e, double e_e, double phase_factor);

/// Power delivered at the bus by DG i: phase_factor * (Re, Im) of V_L * conj(I_i).
std::pair<double, double> bus_power(const EquilibriumPoint& eq, double phase_factor,
                                    std::size_t i);

/// Unified load impedance as a complex number, Z_L e^{j theta_z}.
std::complex<double> load_impedance(const SimplifiedModel& model);

/// Bus voltage given the DG internal phasors, from
/// V_L * (1 + Z_L * sum(1/Z_i)) = Z_L * sum(E_i / Z_i).
/// Throws DegenerateNetworkError when the left factor vanishes.
std::complex<double> bus_voltage_from_sources(std::complex<double> z_load,
                                              const std::vector<std::complex<double>>& e_phasors,
                                              const std::vector<std::complex<double>>& z_lines);

}  // namespace mgstab
