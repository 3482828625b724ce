#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <string>
#include <vector>

#include "mgstab/equilibrium.hpp"

namespace mgstab {

/// Partial derivatives of the bus-side power injections of one DG with
/// respect to (V_L, phi_L, I_i, delta_i):
///   dP = k1 dV_L + k2 dphi_L + k3 dI + k4 ddelta
///   dQ = k5 dV_L + k6 dphi_L + k7 dI + k8 ddelta
struct PowerCoefficients {
    double k1, k2, k3, k4, k5, k6, k7, k8;
};

/// Power coefficients folded through the droop gains and the power filter:
/// kp_{1..4} = -m w_f k_{1..4}, kp_{5..8} = -n w_f k_{5..8}.
struct DroopCoefficients {
    double kp1, kp2, kp3, kp4, kp5, kp6, kp7, kp8;
};

/// Partial derivatives of the coupling-line current dynamics (dI/dt and
/// ddelta/dt) with respect to (E_i, Phi_i, I_i, delta_i, V_L, phi_L).
struct LineCoefficients {
    double k9, k10, k11, k12, k13, k14;   // dI/dt row
    double k15, k16, k17, k18, k19, k20;  // ddelta/dt row
};

struct DgCoefficients {
    PowerCoefficients power;
    DroopCoefficients droop;
    LineCoefficients line;
};

/// Throws DegenerateEquilibriumError when i_e or v_le vanishes (several
/// coefficients divide by them).
PowerCoefficients power_coefficients(const EquilibriumPoint& eq, std::size_t i,
                                     double phase_factor);
DroopCoefficients droop_coefficients(const PowerCoefficients& k, double m, double n,
                                     double w_f);
LineCoefficients line_coefficients(const EquilibriumPoint& eq, std::size_t i,
                                   double inductance, double resistance,
                                   double phase_factor);

std::vector<DgCoefficients> compute_coefficients(const SimplifiedModel& model,
                                                 const EquilibriumPoint& eq);

/// Every coefficient has a second, power-expression form (valid because the
/// lines are steady at the equilibrium). Returns the largest relative
/// disagreement between the two forms across all DGs; used as a self-check.
double max_dual_form_deviation(const SimplifiedModel& model, const EquilibriumPoint& eq);

/// 2 x 5N elimination matrix mapping state deviations to (dV_L, dphi_L).
/// Throws DegenerateEquilibriumError when the 2x2 pivot is singular.
Eigen::MatrixXd assemble_load_matrix(const std::vector<DgCoefficients>& coeffs,
                                     const EquilibriumPoint& eq,
                                     const SimplifiedModel& model);

/// 5N x 5N system matrix: block part plus the (5N x 2) * A_L bus correction.
/// State ordering: [omega_1..N, E_1..N, Phi_1..N, I_1..N, delta_1..N].
Eigen::MatrixXd assemble_system_matrix(const std::vector<DgCoefficients>& coeffs,
                                       const Eigen::MatrixXd& a_l,
                                       const SimplifiedModel& model);

/// 3N x 3N baseline with algebraic (constant-impedance, nominal-frequency)
/// lines and states (P_f_i, Q_f_i, Phi_i):
///   dP_f/dt = w_f (P_i - P_f),  dQ_f/dt = w_f (Q_i - Q_f),
///   dPhi/dt = omega_set - m P_f,
/// currents eliminated through I_i = (E_i e^{j Phi_i} - V_L)/(r_i + j w_nom L_i)
/// with E_i = e_set - n Q_f. Jacobian by central finite differences at the
/// given equilibrium.
Eigen::MatrixXd static_phasor_matrix(const SimplifiedModel& model,
                                     const EquilibriumPoint& eq);

struct SmallSignalModel {
    Eigen::MatrixXd a_l;       // 2 x 5N
    Eigen::MatrixXd a_sys;     // 5N x 5N
    Eigen::MatrixXd a_static;  // 3N x 3N
    std::vector<std::string> state_names;
    std::vector<std::string> static_state_names;
};

SmallSignalModel build_small_signal_model(const SimplifiedModel& model,
                                          const EquilibriumPoint& eq);

/// Names of the 5N dynamic states in matrix order: omega_1.., e_1.., phi_1..,
/// i_1.., delta_1...
std::vector<std::string> state_ordering(std::size_t n_dgs);
std::vector<std::string> static_state_ordering(std::size_t n_dgs);

/// Equilibrium values stacked in the dynamic state ordering (omega_e repeated
/// per DG).
Eigen::VectorXd analysis_state(const EquilibriumPoint& eq);

}  // namespace mgstab
