#pragma once

#include <Eigen/Core>
#include <ostream>
#include <string>
#include <vector>

#include "mgstab/eigen_analysis.hpp"
#include "mgstab/equilibrium.hpp"
#include "mgstab/simulator.hpp"
#include "mgstab/sweep.hpp"

namespace mgstab {

/// Shortest round-trippable decimal form (%.17g).
std::string format_full(double v);

/// Comment lines carrying tool version and config digest, prepended to every
/// CSV for provenance.
std::string provenance_header(std::uint64_t config_digest);

/// Comment header rows carry (omega_e, v_le); one data row per DG.
void write_equilibrium_csv(std::ostream& os, const EquilibriumPoint& eq,
                           const std::string& provenance);

/// Columns: index, re, im, is_zero_mode.
void write_eigenvalues_csv(std::ostream& os, const EigenResult& eig, double scale,
                           const std::string& provenance);

/// Row-major full-precision dump, one matrix row per line.
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& a);

/// Sidecar naming the state ordering, one name per line.
void write_matrix_sidecar(std::ostream& os, const std::vector<std::string>& state_names);

/// Columns: t, then per DG (omega, e, p, q, i, delta_rel), then v_l, phi_l.
/// A diverged trace gets a trailing "# diverged_at = <t>" comment. The DG
/// count comes from the samples; n_dgs_hint supplies it for an empty trace
/// so the header stays complete.
void write_trace_csv(std::ostream& os, const SimTrace& trace,
                     const std::string& provenance, std::size_t n_dgs_hint = 0);

/// Columns: t, then one column per state name. states is times x n.
void write_trajectory_csv(std::ostream& os, const std::vector<double>& times,
                          const Eigen::MatrixXd& states,
                          const std::vector<std::string>& state_names,
                          const std::string& provenance);

/// Columns: s, model, max_re, verdict, n_unstable, zero_modes.
void write_sweep_csv(std::ostream& os, const std::vector<SweepSample>& samples,
                     const std::string& provenance);

/// Columns: s, model, eig_index, re, im.
void write_locus_csv(std::ostream& os, const std::vector<SweepSample>& samples,
                     const std::string& provenance);

}  // namespace mgstab
