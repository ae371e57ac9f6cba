#pragma once

// Fast invariant suite behind the `validate` command: structure identity,
// coefficient constraints, basis orthonormality, divergence-free checks,
// divergence orthogonality, the pathwise energy inequality, and the
// Itô/Stratonovich agreement test. Each property reports its measured margin
// against the tolerance it was checked at.

#include <random>
#include <string>
#include <vector>

#include "mushy/experiment.hpp"
#include "mushy/limit.hpp"
#include "mushy/noise.hpp"
#include "mushy/solver.hpp"

namespace mushy {

struct PropertyResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

inline double structure_identity_deviation(const CoefficientFamily& fam, int points,
                                           std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    double worst = 0.0;
    for (int p = 0; p < points; ++p) {
        const auto m = structure_identity_check(fam, dist(rng), dist(rng));
        worst = std::max({worst, std::abs(m[0][0] - 0.5), std::abs(m[1][1] - 0.5),
                          std::abs(m[0][1]), std::abs(m[1][0])});
    }
    return worst;
}

inline PropertyResult structure_identity_property(const std::vector<CoefficientFamily>& families,
                                                  int points = 100, std::uint32_t seed = 12345) {
    PropertyResult res;
    res.name = "structure_identity";
    res.tolerance = 1e-10;
    for (const CoefficientFamily& fam : families) {
        const double dev = structure_identity_deviation(fam, points, seed);
        if (dev > res.measured) {
            res.measured = dev;
            res.detail = "worst family N=" + std::to_string(fam.N);
        }
    }
    res.pass = res.measured < res.tolerance;
    return res;
}

inline PropertyResult coefficient_constraints_property() {
    PropertyResult res;
    res.name = "coefficient_constraints";
    res.tolerance = 1e-12;
    double worst = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    for (int N = 1; N <= 64; ++N) {
        CoefficientFamily fam = CoefficientFamily::flat(N);
        worst = std::max(worst, std::abs(fam.normalization_sum() - 1.0));
        if (fam.sup_norm >= prev) decreasing = false;
        prev = fam.sup_norm;
    }
    const double c1 = CoefficientFamily::flat(1).sup_norm;
    const double c2 = CoefficientFamily::flat(2).sup_norm;
    worst = std::max(worst, std::abs(c1 - 0.5));
    worst = std::max(worst, std::abs(c2 - 1.0 / std::sqrt(7.0)));
    res.measured = worst;
    res.pass = worst <= res.tolerance && decreasing;
    res.detail = decreasing ? "sup-norms strictly decreasing" : "sup-norm decrease violated";
    return res;
}

inline PropertyResult basis_orthonormality_property() {
    PropertyResult res;
    res.name = "basis_orthonormality";
    res.tolerance = 1e-12;
    TorusGrid g(32);
    std::vector<ModeIndex> modes = CoefficientFamily::enumerate_modes(4);
    double worst = 0.0;
    for (const ModeIndex& k : modes)
        for (const ModeIndex& l : modes) {
            double acc = 0.0;
            for (int i = 0; i < g.n; ++i)
                for (int j = 0; j < g.n; ++j)
                    acc += basis_e(k, g.coord(i), g.coord(j)) * basis_e(l, g.coord(i), g.coord(j));
            acc /= g.size();
            worst = std::max(worst, std::abs(acc - (k == l ? 1.0 : 0.0)));
        }
    res.measured = worst;
    res.pass = worst <= res.tolerance;
    return res;
}

inline PropertyResult sigma_divergence_property() {
    PropertyResult res;
    res.name = "sigma_divergence_free";
    res.tolerance = 1e-12;
    TorusGrid g(32);
    double worst = 0.0;
    for (const ModeIndex& k : CoefficientFamily::enumerate_modes(4)) {
        ScalarField u1 =
            ScalarField::from_function(g, [&](double x, double y) { return sigma(k, x, y)[0]; });
        ScalarField u2 =
            ScalarField::from_function(g, [&](double x, double y) { return sigma(k, x, y)[1]; });
        ScalarField div = divergence(VectorField(u1, u2));
        for (double v : div.values) worst = std::max(worst, std::abs(v));
    }
    res.measured = worst;
    res.pass = worst <= res.tolerance;
    return res;
}

inline PropertyResult divergence_orthogonality_property() {
    PropertyResult res;
    res.name = "divergence_orthogonality";
    res.tolerance = 1e-8;
    PhaseFunctions ph;
    TorusGrid g(64);
    ScalarField X = ScalarField::from_function(g, [](double x, double y) {
        return 1.2 + 0.9 * std::sqrt(2.0) * std::cos(kTwoPi * x) +
               0.4 * std::sqrt(2.0) * std::sin(kTwoPi * (x + 2 * y));
    });
    double worst = 0.0;
    for (const auto& [k, v] : divergence_orthogonality_check(X, ph, 8))
        worst = std::max(worst, std::abs(v));
    res.measured = worst;
    res.pass = worst < res.tolerance;
    return res;
}

inline PropertyResult energy_inequality_property() {
    PropertyResult res;
    res.name = "energy_inequality";
    SolverConfig cfg;
    cfg.grid = TorusGrid(32);
    cfg.dt = 1e-4;
    cfg.T = 2e-2;
    cfg.phase = PhaseFunctions(PhaseParams{});
    const ScalarField x0 =
        FieldSpec::parse("constant -0.8 + blob 3.2 0.22 0.13 0.07").build(cfg.grid);
    double worst_rel = -std::numeric_limits<double>::infinity();
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        cfg.noise = NoiseSpec(CoefficientFamily::flat(4), cfg.grid, seed);
        PathResult run = simulate_path(x0, cfg, 0);
        EnergyMarginReport rep = energy_inequality_check(run.diagnostics, cfg);
        worst_rel = std::max(worst_rel, rep.worst_margin / rep.tol);
    }
    res.tolerance = 1.0;
    res.measured = worst_rel;  // margin relative to 10 dt ||x0||^2
    res.pass = worst_rel <= 1.0;
    res.detail = "margin / (10 dt |x0|^2) over 5 seeds";
    return res;
}

/// Matched ensembles of the two steppers must agree in law: the difference of
/// the ensemble means of ‖X(T)‖₂² stays within max(3 combined standard
/// errors, dt).
inline PropertyResult ito_stratonovich_property(int replicas = 64, int threads = 1) {
    PropertyResult res;
    res.name = "ito_stratonovich_agreement";
    SolverConfig base;
    base.grid = TorusGrid(32);
    base.dt = 1e-4;
    base.T = 0.05;
    base.phase = PhaseFunctions(PhaseParams{});
    base.diag_stride = static_cast<int>(base.steps());
    const ScalarField x0 =
        FieldSpec::parse("constant -0.8 + blob 3.2 0.22 0.13 0.07").build(base.grid);

    auto ensemble_mean = [&](Scheme scheme, std::uint64_t seed, double& out_se) {
        SolverConfig cfg = base;
        cfg.scheme = scheme;
        cfg.noise = NoiseSpec(CoefficientFamily::flat(4), cfg.grid, seed);
        std::vector<double> finals(replicas, 0.0);
        detail::parallel_for_index(replicas, threads, [&](int m) {
            PathRunner runner(cfg);
            PathResult run = runner.run(x0, static_cast<std::uint64_t>(m));
            finals[m] = run.diagnostics.l2_energy.back();
        });
        double sum = 0.0, sum_sq = 0.0;
        for (double v : finals) {
            sum += v;
            sum_sq += v * v;
        }
        const double mean = sum / replicas;
        const double var = std::max(0.0, (sum_sq - sum * sum / replicas) / (replicas - 1.0));
        out_se = std::sqrt(var / replicas);
        return mean;
    };

    double se_ito = 0.0, se_strat = 0.0;
    const double mean_ito = ensemble_mean(Scheme::ItoImex, 101, se_ito);
    const double mean_strat = ensemble_mean(Scheme::StratonovichMidpoint, 202, se_strat);
    const double diff = std::abs(mean_ito - mean_strat);
    const double se = std::sqrt(se_ito * se_ito + se_strat * se_strat);
    res.tolerance = std::max(3.0 * se, base.dt);
    res.measured = diff;
    res.pass = diff <= res.tolerance;
    res.detail = "mean |X(T)|_2^2: " + std::to_string(mean_ito) + " vs " +
                 std::to_string(mean_strat) + " (se " + std::to_string(se) + ")";
    return res;
}

inline std::vector<PropertyResult> run_validation_suite(int replicas = 64, int threads = 1) {
    std::vector<PropertyResult> out;
    out.push_back(coefficient_constraints_property());
    {
        std::vector<CoefficientFamily> fams;
        for (int N = 1; N <= 16; ++N) fams.push_back(CoefficientFamily::flat(N));
        out.push_back(structure_identity_property(fams));
    }
    out.push_back(basis_orthonormality_property());
    out.push_back(sigma_divergence_property());
    out.push_back(divergence_orthogonality_property());
    out.push_back(energy_inequality_property());
    out.push_back(ito_stratonovich_property(replicas, threads));
    return out;
}

}  // namespace mushy
