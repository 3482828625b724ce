#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "mgstab/csv.hpp"
#include "mgstab/microgrid.hpp"
#include "mgstab/sweep.hpp"

using namespace mgstab;

namespace {

SimplifiedModel table1_model() { return build_simplified_model(table1_fixture()); }

std::vector<double> fixture_m_base() {
    std::vector<double> m;
    for (const DgParams& dg : table1_fixture().dgs) m.push_back(dg.m);
    return m;
}

std::vector<double> fixture_n_base() {
    std::vector<double> n;
    for (const DgParams& dg : table1_fixture().dgs) n.push_back(dg.n);
    return n;
}

}  // namespace

TEST_CASE("sweep over the published bracket transitions exactly once") {
    SweepSpec spec;
    spec.m_base = fixture_m_base();
    spec.n_base = fixture_n_base();
    spec.s_lo = 1.0;
    spec.s_hi = 3.4;
    spec.samples = 13;
    spec.run_dynamic = true;
    spec.run_static = true;

    const std::vector<SweepSample> samples = sweep(spec, table1_model());
    REQUIRE(samples.size() == 26);

    bool dynamic_stable_at_lo = false;
    bool dynamic_unstable_at_hi = false;
    bool static_all_stable = true;
    bool disagreement = false;
    Stability previous = Stability::stable;
    for (const SweepSample& sample : samples) {
        REQUIRE(sample.solved);
        if (sample.model == ModelKind::dynamic_phasor) {
            if (sample.s == 1.0) dynamic_stable_at_lo =
                (sample.verdict.classification == Stability::stable);
            if (sample.s == 3.4) dynamic_unstable_at_hi =
                (sample.verdict.classification == Stability::unstable);
            previous = sample.verdict.classification;
            CHECK(sample.verdict.zero_mode_count == 1);
        } else {
            static_all_stable &= (sample.verdict.classification == Stability::stable);
            if (previous == Stability::unstable) disagreement = true;
        }
    }
    CHECK(dynamic_stable_at_lo);
    CHECK(dynamic_unstable_at_hi);
    CHECK(static_all_stable);   // the baseline misses the instability entirely
    CHECK(disagreement);        // somewhere in the range the two models disagree
    // ordered by scale
    for (std::size_t k = 2; k < samples.size(); k += 2) {
        CHECK(samples[k].s > samples[k - 2].s);
    }
}

TEST_CASE("single-sample sweep equals a direct analysis") {
    SweepSpec spec;
    spec.m_base = fixture_m_base();
    spec.n_base = fixture_n_base();
    spec.s_lo = 1.0;
    spec.s_hi = 1.0;
    spec.samples = 1;
    const std::vector<SweepSample> samples = sweep(spec, table1_model());
    REQUIRE(samples.size() == 1);
    CHECK(samples[0].verdict.classification == Stability::stable);

    // direct path
    const SimplifiedModel model = table1_model();
    const EquilibriumPoint eq = solve_equilibrium(model);
    const SmallSignalModel ss = build_small_signal_model(model, eq);
    const EigenResult eig = eigen_decompose(ss.a_sys);
    const StabilityVerdict direct = classify(eig, eig.matrix_norm);
    CHECK(samples[0].verdict.max_re == doctest::Approx(direct.max_re).epsilon(1e-9));
}

TEST_CASE("sweep output is deterministic") {
    SweepSpec spec;
    spec.m_base = fixture_m_base();
    spec.n_base = fixture_n_base();
    spec.s_lo = 1.0;
    spec.s_hi = 2.0;
    spec.samples = 4;
    spec.run_static = true;
    const SimplifiedModel model = table1_model();

    auto render = [&]() {
        const std::vector<SweepSample> samples = sweep(spec, model);
        std::ostringstream sweep_csv;
        std::ostringstream locus_csv;
        write_sweep_csv(sweep_csv, samples, "# run\n");
        write_locus_csv(locus_csv, samples, "# run\n");
        return sweep_csv.str() + locus_csv.str();
    };
    CHECK(render() == render());
}

TEST_CASE("per-sample equilibrium failure is flagged, not fatal") {
    SweepSpec spec;
    spec.m_base = fixture_m_base();
    spec.n_base = fixture_n_base();
    // enormous droop scales eventually break the Newton solve or produce a
    // reversed bus; the sweep must keep going either way
    spec.s_lo = 1.0;
    spec.s_hi = 4000.0;
    spec.samples = 6;
    const std::vector<SweepSample> samples = sweep(spec, table1_model());
    REQUIRE(samples.size() == 6);
    CHECK(samples.front().solved);
    bool any_failed = false;
    for (const SweepSample& sample : samples) {
        if (!sample.solved) {
            any_failed = true;
            CHECK(!sample.failure.empty());
        }
    }
    CHECK(any_failed);
}

TEST_CASE("find_boundary brackets the first crossing with a certificate") {
    const BoundaryResult result =
        find_boundary(table1_model(), fixture_m_base(), fixture_n_base(), 1.0, 3.4, 1e-3);
    CHECK(result.s_star > 1.0);
    CHECK(result.s_star < 3.4);
    CHECK(result.bracket_hi - result.bracket_lo <= 1e-3 * result.s_star);
    CHECK(result.verdict_below == Stability::stable);
    CHECK(result.verdict_above == Stability::unstable);
    CHECK(result.probe_margin == doctest::Approx(2e-3));
    CHECK(result.monotone);
    CHECK(result.probes.size() >= 10);
}

TEST_CASE("zero-work bisection returns the midpoint immediately") {
    const std::vector<double> m = fixture_m_base();
    const std::vector<double> n = fixture_n_base();
    // tolerance equal to the input bracket width (relative to its midpoint)
    const double lo = 3.0;
    const double hi = 3.4;
    const double tol = (hi - lo) / (0.5 * (hi + lo));
    const BoundaryResult result = find_boundary(table1_model(), m, n, lo, hi, tol);
    CHECK(result.s_star == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-12));
    CHECK(result.bracket_lo == lo);
    CHECK(result.bracket_hi == hi);
}

TEST_CASE("invalid bracket is rejected") {
    const std::vector<double> m = fixture_m_base();
    const std::vector<double> n = fixture_n_base();
    // stable at both ends
    CHECK_THROWS_AS(find_boundary(table1_model(), m, n, 1.0, 1.5, 1e-3), BracketingError);
    // reversed range
    CHECK_THROWS_AS(find_boundary(table1_model(), m, n, 3.4, 1.0, 1e-3), BracketingError);
}
