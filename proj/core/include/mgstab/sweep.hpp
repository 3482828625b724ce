#pragma once

#include <string>
#include <vector>

#include "mgstab/eigen_analysis.hpp"
#include "mgstab/small_signal.hpp"

namespace mgstab {

enum class ModelKind { dynamic_phasor, static_phasor };
const char* to_string(ModelKind kind);

/// Multiplicative sweep of the frequency-droop vector: at each sample the
/// model runs with m_i = s * m_base_i (and n_i = s * n_base_i when co_scale_n),
/// preserving the per-DG ratios.
struct SweepSpec {
    std::vector<double> m_base;  // per-DG
    std::vector<double> n_base;  // per-DG
    double s_lo = 1.0;
    double s_hi = 1.0;
    int samples = 2;
    bool co_scale_n = false;
    bool run_dynamic = true;
    bool run_static = false;
};

struct SweepSample {
    double s = 0.0;
    ModelKind model = ModelKind::dynamic_phasor;
    bool solved = false;
    std::string failure;  // set when !solved
    EigenResult eig;
    StabilityVerdict verdict;
};

/// Per-sample equilibrium failures are recorded, not fatal. Results are
/// ordered by s (dynamic row before static row at equal s). Equilibria are
/// warm-started from the previous sample.
std::vector<SweepSample> sweep(const SweepSpec& spec, const SimplifiedModel& model);

struct BoundaryProbe {
    double s = 0.0;
    Stability verdict = Stability::marginal;
    double max_re = 0.0;
};

struct BoundaryResult {
    double s_star = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    Stability verdict_below = Stability::marginal;  // at s_star * (1 - probe_margin)
    Stability verdict_above = Stability::marginal;  // at s_star * (1 + probe_margin)
    double probe_margin = 0.0;
    std::vector<BoundaryProbe> probes;  // bisection history, evaluation order
    bool monotone = true;               // false when the history shows a reversal
};

/// Bisection for the first stable-to-unstable crossing of the dynamic model.
/// Preconditions: stable at s_lo, unstable at s_hi (else BracketingError).
/// Stops when the bracket width is <= tol_rel * midpoint; the certificate
/// verdicts are re-evaluated at s_star * (1 -/+ 2 * tol_rel).
BoundaryResult find_boundary(const SimplifiedModel& model,
                             const std::vector<double>& m_base,
                             const std::vector<double>& n_base,
                             double s_lo, double s_hi, double tol_rel = 1e-3,
                             bool co_scale_n = false);

}  // namespace mgstab
