#include "mgstab/csv.hpp"

#include <cinttypes>
#include <cstdio>

#include "mgstab/version.hpp"

namespace mgstab {

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string provenance_header(std::uint64_t config_digest) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "# tool: mgstab %s\n# config: %016" PRIx64 "\n",
                  kVersion, config_digest);
    return buf;
}

void write_equilibrium_csv(std::ostream& os, const EquilibriumPoint& eq,
                           const std::string& provenance) {
    os << provenance;
    os << "# omega_e = " << format_full(eq.omega_e) << "\n";
    os << "# v_le = " << format_full(eq.v_le) << "\n";
    os << "index,p_e,q_e,e_e,phi_e,i_e,delta_e\n";
    for (std::size_t i = 0; i < eq.n_dgs(); ++i) {
        os << (i + 1) << ',' << format_full(eq.p_e[i]) << ',' << format_full(eq.q_e[i]) << ','
           << format_full(eq.e_e[i]) << ',' << format_full(eq.phi_e[i]) << ','
           << format_full(eq.i_e[i]) << ',' << format_full(eq.delta_e[i]) << '\n';
    }
}

void write_eigenvalues_csv(std::ostream& os, const EigenResult& eig, double scale,
                           const std::string& provenance) {
    os << provenance;
    os << "index,re,im,is_zero_mode\n";
    for (Eigen::Index k = 0; k < eig.lambdas.size(); ++k) {
        os << (k + 1) << ',' << format_full(eig.lambdas[k].real()) << ','
           << format_full(eig.lambdas[k].imag()) << ','
           << (is_zero_mode(eig.lambdas[k], scale) ? 1 : 0) << '\n';
    }
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& a) {
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            if (c) os << ',';
            os << format_full(a(r, c));
        }
        os << '\n';
    }
}

void write_matrix_sidecar(std::ostream& os, const std::vector<std::string>& state_names) {
    os << "# state ordering, one row/column label per line\n";
    for (const std::string& name : state_names) {
        os << name << '\n';
    }
}

void write_trace_csv(std::ostream& os, const SimTrace& trace,
                     const std::string& provenance, std::size_t n_dgs_hint) {
    os << provenance;
    const std::size_t n =
        trace.samples.empty() ? n_dgs_hint : trace.samples.front().state.n_dgs();
    os << 't';
    for (std::size_t i = 1; i <= n; ++i) {
        os << ",omega_" << i << ",e_" << i << ",p_" << i << ",q_" << i << ",i_" << i
           << ",delta_rel_" << i;
    }
    os << ",v_l,phi_l\n";
    for (const SimSample& sample : trace.samples) {
        os << format_full(sample.t);
        for (std::size_t i = 0; i < n; ++i) {
            os << ',' << format_full(sample.obs.omega[i]) << ',' << format_full(sample.obs.e[i])
               << ',' << format_full(sample.obs.p_bus[i]) << ','
               << format_full(sample.obs.q_bus[i]) << ',' << format_full(sample.state.i[i])
               << ',' << format_full(sample.obs.delta_rel[i]);
        }
        os << ',' << format_full(sample.obs.v_l) << ',' << format_full(sample.obs.phi_l)
           << '\n';
    }
    if (trace.diverged) {
        os << "# diverged_at = " << format_full(trace.diverged_at) << " ("
           << trace.diverged_reason << ")\n";
    }
}

void write_trajectory_csv(std::ostream& os, const std::vector<double>& times,
                          const Eigen::MatrixXd& states,
                          const std::vector<std::string>& state_names,
                          const std::string& provenance) {
    os << provenance;
    os << 't';
    for (const std::string& name : state_names) {
        os << ',' << name;
    }
    os << '\n';
    for (std::size_t s = 0; s < times.size(); ++s) {
        os << format_full(times[s]);
        for (Eigen::Index c = 0; c < states.cols(); ++c) {
            os << ',' << format_full(states(static_cast<Eigen::Index>(s), c));
        }
        os << '\n';
    }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepSample>& samples,
                     const std::string& provenance) {
    os << provenance;
    os << "s,model,max_re,verdict,n_unstable,zero_modes\n";
    for (const SweepSample& sample : samples) {
        os << format_full(sample.s) << ',' << to_string(sample.model) << ',';
        if (!sample.solved) {
            os << "nan,failed,0,0\n";
            continue;
        }
        int n_unstable = 0;
        const double threshold = 1e-6 * sample.eig.matrix_norm;
        for (Eigen::Index k = 0; k < sample.eig.lambdas.size(); ++k) {
            if (is_zero_mode(sample.eig.lambdas[k], sample.eig.matrix_norm)) continue;
            if (sample.eig.lambdas[k].real() > threshold) ++n_unstable;
        }
        os << format_full(sample.verdict.max_re) << ','
           << to_string(sample.verdict.classification) << ',' << n_unstable << ','
           << sample.verdict.zero_mode_count << '\n';
    }
}

void write_locus_csv(std::ostream& os, const std::vector<SweepSample>& samples,
                     const std::string& provenance) {
    os << provenance;
    os << "s,model,eig_index,re,im\n";
    for (const SweepSample& sample : samples) {
        if (!sample.solved) continue;
        for (Eigen::Index k = 0; k < sample.eig.lambdas.size(); ++k) {
            os << format_full(sample.s) << ',' << to_string(sample.model) << ',' << (k + 1)
               << ',' << format_full(sample.eig.lambdas[k].real()) << ','
               << format_full(sample.eig.lambdas[k].imag()) << '\n';
        }
    }
}

}  // namespace mgstab
