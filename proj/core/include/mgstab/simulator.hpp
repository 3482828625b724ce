#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "mgstab/equilibrium.hpp"

namespace mgstab {

/// Nonlinear dynamic-phasor state of the network: per-DG filtered powers,
/// inverter voltage angle, and line current in polar form. Angles are stored
/// unwrapped (they advance at roughly the system frequency).
struct SimState {
    std::vector<double> p_f;    // filtered active power (W)
    std::vector<double> q_f;    // filtered reactive power (var)
    std::vector<double> phi;    // inverter voltage angle (rad)
    std::vector<double> i;      // line current magnitude (A)
    std::vector<double> delta;  // line current angle (rad)

    std::size_t n_dgs() const { return p_f.size(); }
};

/// Derived quantities recorded with each output sample. delta_rel and all
/// reported angles are wrapped to (-pi, pi] relative to the bus angle.
struct SimObservables {
    std::vector<double> omega;      // rad/s
    std::vector<double> e;          // V
    std::vector<double> p_bus;      // W
    std::vector<double> q_bus;      // var
    std::vector<double> delta_rel;  // rad
    double v_l = 0.0;               // V
    double phi_l = 0.0;             // rad, wrapped
};

struct SimSample {
    double t = 0.0;
    SimState state;
    SimObservables obs;
};

struct SimTrace {
    std::vector<SimSample> samples;
    bool diverged = false;
    double diverged_at = 0.0;
    std::string diverged_reason;
};

struct SimOptions {
    double dt = 5e-5;               // s; resolves the ~380 rad/s phasor rotation
    int output_stride = 20;         // record every stride-th step
    double epsilon_current = 1e-6;  // polar singularity floor (A)
    DroopPower power_feed = DroopPower::bus_side;
};

/// State derivative. The droop filters are fed bus-side powers by default,
/// matching the linearized model; inverter_side is available for sensitivity
/// studies. Throws SingularityError when any current magnitude is at or below
/// epsilon_current.
void rhs(const SimplifiedModel& model, const SimState& state, SimState& derivative,
         DroopPower power_feed = DroopPower::bus_side, double epsilon_current = 1e-6);

/// The exact fixed point of the dynamics for the matching power_feed: filter
/// states loaded with the corresponding steady powers, circuit states from
/// the equilibrium.
SimState equilibrium_state(const SimplifiedModel& model, const EquilibriumPoint& eq,
                           DroopPower power_feed = DroopPower::bus_side);

/// Classical fixed-step RK4. On a non-finite state the trace collected so far
/// is returned with the diverged flag set; on a current-magnitude floor
/// violation a SingularityError carrying the time stamp and the partial trace
/// is thrown.
SimTrace integrate(const SimplifiedModel& model, const SimState& x0, double t_end,
                   const SimOptions& opts = {});

/// Central-difference Jacobian of the bus-fed dynamics at the equilibrium,
/// expressed in the analysis state ordering (omega, E, phi, I, delta); the
/// affine maps omega = omega_set - m p_f and E = e_set - n q_f make this an
/// exact reparametrization of the simulator dynamics. Column step
/// h_j = h * (1 + |x_j|).
Eigen::MatrixXd fd_jacobian(const SimplifiedModel& model, const EquilibriumPoint& eq,
                            double h = 1e-6);

}  // namespace mgstab
