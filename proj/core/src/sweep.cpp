#include "mgstab/sweep.hpp"

#include <cmath>

namespace mgstab {

namespace {

SimplifiedModel scaled_model(const SimplifiedModel& model, const std::vector<double>& m_base,
                             const std::vector<double>& n_base, double s, bool co_scale_n) {
    SimplifiedModel scaled = model;
    for (std::size_t i = 0; i < scaled.dgs.size(); ++i) {
        scaled.dgs[i].m = s * m_base[i];
        scaled.dgs[i].n = co_scale_n ? s * n_base[i] : n_base[i];
    }
    return scaled;
}

struct Analysis {
    EquilibriumPoint eq;
    EigenResult eig;
    StabilityVerdict verdict;
};

Analysis analyze_model(const SimplifiedModel& model, ModelKind kind,
                       const std::optional<EquilibriumPoint>& warm_start) {
    EquilibriumOptions opts;
    opts.initial_guess = warm_start;
    Analysis out;
    out.eq = solve_equilibrium(model, opts);
    Eigen::MatrixXd a;
    if (kind == ModelKind::dynamic_phasor) {
        const std::vector<DgCoefficients> coeffs = compute_coefficients(model, out.eq);
        const Eigen::MatrixXd a_l = assemble_load_matrix(coeffs, out.eq, model);
        a = assemble_system_matrix(coeffs, a_l, model);
    } else {
        a = static_phasor_matrix(model, out.eq);
    }
    out.eig = eigen_decompose(a);
    out.verdict = classify(out.eig, out.eig.matrix_norm);
    return out;
}

void validate_droop_vectors(const SimplifiedModel& model, const std::vector<double>& m_base,
                            const std::vector<double>& n_base) {
    if (m_base.size() != model.n_dgs() || n_base.size() != model.n_dgs()) {
        throw ConfigError("sweep droop vectors must have one entry per DG");
    }
    for (double m : m_base) {
        if (!(m > 0.0)) throw ConfigError("sweep base droop m must be > 0");
    }
    for (double n : n_base) {
        if (!(n >= 0.0)) throw ConfigError("sweep base droop n must be >= 0");
    }
}

}  // namespace

const char* to_string(ModelKind kind) {
    return kind == ModelKind::dynamic_phasor ? "dynamic" : "static";
}

std::vector<SweepSample> sweep(const SweepSpec& spec, const SimplifiedModel& model) {
    validate_droop_vectors(model, spec.m_base, spec.n_base);
    if (!(spec.s_lo > 0.0) || !(spec.s_hi >= spec.s_lo)) {
        throw ConfigError("sweep scale range requires 0 < s_lo <= s_hi");
    }
    if (spec.samples < 1 || (spec.samples < 2 && spec.s_hi > spec.s_lo)) {
        throw ConfigError("sweep requires at least 2 samples over a non-trivial range");
    }

    std::vector<SweepSample> results;
    std::optional<EquilibriumPoint> warm;
    for (int k = 0; k < spec.samples; ++k) {
        const double s =
            spec.samples == 1
                ? spec.s_lo
                : spec.s_lo + (spec.s_hi - spec.s_lo) * static_cast<double>(k) /
                                  static_cast<double>(spec.samples - 1);
        const SimplifiedModel at_scale =
            scaled_model(model, spec.m_base, spec.n_base, s, spec.co_scale_n);
        for (ModelKind kind : {ModelKind::dynamic_phasor, ModelKind::static_phasor}) {
            if (kind == ModelKind::dynamic_phasor && !spec.run_dynamic) continue;
            if (kind == ModelKind::static_phasor && !spec.run_static) continue;
            SweepSample sample;
            sample.s = s;
            sample.model = kind;
            try {
                Analysis analysis = analyze_model(at_scale, kind, warm);
                sample.solved = true;
                sample.eig = std::move(analysis.eig);
                sample.verdict = analysis.verdict;
                if (kind == ModelKind::dynamic_phasor || !spec.run_dynamic) {
                    warm = std::move(analysis.eq);
                }
            } catch (const Error& err) {
                sample.solved = false;
                sample.failure = err.what();
            }
            results.push_back(std::move(sample));
        }
    }
    return results;
}

BoundaryResult find_boundary(const SimplifiedModel& model,
                             const std::vector<double>& m_base,
                             const std::vector<double>& n_base,
                             double s_lo, double s_hi, double tol_rel, bool co_scale_n) {
    validate_droop_vectors(model, m_base, n_base);
    if (!(s_lo > 0.0) || !(s_hi > s_lo)) {
        throw BracketingError("boundary search requires 0 < s_lo < s_hi");
    }
    if (!(tol_rel > 0.0)) {
        throw BracketingError("boundary tolerance must be > 0");
    }

    BoundaryResult result;
    std::optional<EquilibriumPoint> warm;
    auto probe = [&](double s) {
        const SimplifiedModel at_scale = scaled_model(model, m_base, n_base, s, co_scale_n);
        Analysis analysis = analyze_model(at_scale, ModelKind::dynamic_phasor, warm);
        warm = std::move(analysis.eq);
        result.probes.push_back({s, analysis.verdict.classification, analysis.verdict.max_re});
        return analysis.verdict.classification;
    };

    const Stability at_lo = probe(s_lo);
    const Stability at_hi = probe(s_hi);
    if (at_lo != Stability::stable || at_hi != Stability::unstable) {
        throw BracketingError("boundary bracket invalid: need stable at s_lo (" +
                              std::string(to_string(at_lo)) + ") and unstable at s_hi (" +
                              std::string(to_string(at_hi)) + ")");
    }

    double lo = s_lo;
    double hi = s_hi;
    while (hi - lo > tol_rel * 0.5 * (hi + lo)) {
        const double mid = 0.5 * (lo + hi);
        // marginal points join the unstable side: bisection tracks the first
        // crossing seen from the stable side
        if (probe(mid) == Stability::stable) {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    result.s_star = 0.5 * (lo + hi);
    result.bracket_lo = lo;
    result.bracket_hi = hi;
    result.probe_margin = 2.0 * tol_rel;
    result.verdict_below = probe(result.s_star * (1.0 - result.probe_margin));
    result.verdict_above = probe(result.s_star * (1.0 + result.probe_margin));

    // a reversal in the probe history (unstable below a stable probe) marks
    // non-monotone behaviour
    for (const BoundaryProbe& a : result.probes) {
        for (const BoundaryProbe& b : result.probes) {
            if (a.s < b.s && a.verdict == Stability::unstable &&
                b.verdict == Stability::stable) {
                result.monotone = false;
            }
        }
    }
    return result;
}

}  // namespace mgstab
