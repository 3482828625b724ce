#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mgstab/errors.hpp"

namespace mgstab {

/// Droop and coupling parameters of one grid-forming inverter.
/// SI units throughout; voltages are peak phase-neutral.
struct DgParams {
    double m = 0.0;           // frequency droop gain (rad/s per W)
    double n = 0.0;           // voltage droop gain (V per var)
    double omega_set = 0.0;   // droop frequency set value (rad/s)
    double e_set = 0.0;       // droop voltage set value (V)
    double w_f = 0.0;         // power-filter cut-off frequency (rad/s)
    double inductance = 0.0;  // coupling inductance (H)
    double resistance = 0.0;  // coupling resistance (ohm)
};

/// One load, rated at nominal voltage.
struct LoadSpec {
    double p_rated = 0.0;  // W
    double q_rated = 0.0;  // var
};

/// One segment of the distribution feeder, discarded by the reduction.
struct FeederSegment {
    double r_line = 0.0;  // ohm
    double x_line = 0.0;  // ohm at nominal frequency
};

/// Full user-facing network description.
struct MicrogridConfig {
    std::vector<DgParams> dgs;
    std::vector<LoadSpec> loads;
    std::vector<FeederSegment> feeders;
    double v_nominal = 0.0;      // peak phase-neutral (V)
    double omega_nominal = 0.0;  // rad/s
    double phase_factor = 1.5;   // 3/2 for three-phase, 0.5 for single-phase
};

/// The generalized single-bus form: N inverters behind their coupling
/// impedances feeding one unified load impedance Z_L at angle theta_z.
///
/// Convention: phasors carry peak amplitudes, complex power is
/// S = phase_factor * V * conj(I), and the load law is I_total = V_L / Z_L
/// with P_L + jQ_L = phase_factor * V_L * conj(I_total). Z_L therefore
/// absorbs the phase factor (see load_impedance_from_rating), which makes
/// bus power balance an exact algebraic identity.
struct SimplifiedModel {
    std::vector<DgParams> dgs;
    double z_load_mag = 0.0;  // ohm
    double theta_z = 0.0;     // rad; > 0 for an inductive (Q-consuming) load
    double phase_factor = 1.5;
    double v_nominal = 0.0;
    double omega_nominal = 0.0;

    std::size_t n_dgs() const { return dgs.size(); }
};

/// Throws ConfigError naming the offending field.
void validate(const MicrogridConfig& cfg);
void validate(const SimplifiedModel& model);

/// Componentwise sums of the load ratings. Throws ConfigError on an empty list.
std::pair<double, double> aggregate_loads(const std::vector<LoadSpec>& loads);

/// Unified load impedance (Z_L, theta_z) reproducing (p_total, q_total) at
/// v_nominal under the S = p * V * conj(I) convention:
///   Z_L = p * v_nominal^2 / sqrt(P^2 + Q^2),  theta_z = atan2(Q, P).
/// Throws ConfigError when the apparent power is zero.
std::pair<double, double> load_impedance_from_rating(double p_total, double q_total,
                                                     double v_nominal, double phase_factor);

/// Reduce a network to the single-bus form: feeder segments dropped, loads
/// aggregated and converted to the unified impedance, coupling impedances
/// copied unchanged.
SimplifiedModel build_simplified_model(const MicrogridConfig& cfg);

/// Built-in three-inverter test network (60 Hz, 180 V peak, 12 kW + j8 kvar
/// total load). Droop gains follow the m_i = m_base / i, n_i = n_base / i
/// pattern across the three units.
MicrogridConfig table1_fixture(double m_base = 2.5e-3, double n_base = 5e-3);

/// JSON config ingestion. Top-level keys: dgs, loads, feeders, v_nominal,
/// omega_nominal, phase_factor. e_set defaults to v_nominal when omitted.
MicrogridConfig parse_config(const std::string& json_text);
MicrogridConfig load_config(const std::string& path);

/// Canonical JSON serialization of a config (stable key order, full precision).
std::string config_to_json(const MicrogridConfig& cfg);

/// FNV-1a digest of the canonical serialization, for output provenance.
std::uint64_t config_digest(const MicrogridConfig& cfg);

}  // namespace mgstab
