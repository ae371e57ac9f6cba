#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mushy/limit.hpp"
#include "mushy/solver.hpp"

using namespace mushy;

namespace {

FieldSpec mixed_blob() {
    return FieldSpec::parse("constant -0.8 + blob 3.2 0.18 0.0 0.0");
}

SolverConfig make_cfg(int n, double dt, double T, int N, std::uint64_t seed,
                      Scheme scheme = Scheme::ItoImex) {
    SolverConfig cfg;
    cfg.grid = TorusGrid(n);
    cfg.dt = dt;
    cfg.T = T;
    cfg.phase = PhaseFunctions(PhaseParams{});
    if (N > 0) cfg.noise = NoiseSpec(CoefficientFamily::flat(N), cfg.grid, seed);
    cfg.scheme = scheme;
    return cfg;
}

double l2_diff(const ScalarField& a, const ScalarField& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        const double d = a.values[i] - b.values[i];
        acc += d * d;
    }
    return std::sqrt(acc / a.values.size());
}

}  // namespace

TEST_CASE("a constant state below the turbulence onset is an exact fixed point") {
    SolverConfig cfg = make_cfg(16, 1e-4, 2e-3, 2, 99);
    ScalarField x(cfg.grid, std::vector<double>(cfg.grid.size(), 0.3));
    ScalarField cur = x;
    for (std::uint64_t s = 0; s < 20; ++s) {
        cur = step_ito(cur, s, 0, cfg);
        for (double v : cur.values) REQUIRE(v == 0.3);
    }
}

TEST_CASE("zero initial data with zero forcing stays identically zero") {
    SolverConfig cfg = make_cfg(16, 1e-4, 1e-3, 2, 7);
    cfg.snapshot_stride = 1;
    PathResult res = simulate_path(ScalarField(cfg.grid), cfg, 3);
    for (const ScalarField& f : res.trajectory.snapshots)
        for (double v : f.values) REQUIRE(v == 0.0);
}

TEST_CASE("disabling the noise reproduces the deterministic stepper bitwise") {
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> dist(-1.0, 2.0);
    SolverConfig cfg = make_cfg(16, 1e-4, 1e-3, 0, 0);
    ScalarField x0(cfg.grid);
    for (double& v : x0.values) v = dist(rng);
    x0.refresh_mean();
    x0 = dealias(x0);

    LimitConfig lim;
    lim.grid = cfg.grid;
    lim.dt = cfg.dt;
    lim.T = cfg.T;
    lim.phase = cfg.phase;

    ScalarField a = step_ito(x0, 0, 0, cfg);
    ScalarField b = step_deterministic(x0, lim);
    for (size_t i = 0; i < a.values.size(); ++i) REQUIRE(a.values[i] == b.values[i]);

    // Same with a present-but-zero coefficient family.
    SolverConfig zcfg = cfg;
    zcfg.noise = NoiseSpec(CoefficientFamily::from_modes(2, {{{1, 0}, 0.0}, {{0, 1}, 0.0}}),
                           cfg.grid, 11);
    ScalarField c = step_ito(x0, 0, 0, zcfg);
    for (size_t i = 0; i < a.values.size(); ++i) REQUIRE(a.values[i] == c.values[i]);
}

TEST_CASE("spatial mean moves by exactly dt * mean(F) per step") {
    SolverConfig cfg = make_cfg(16, 1e-4, 1e-3, 4, 21);
    cfg.forcing = FieldSpec::parse("constant 0.25 + mode 1 1 0.4");
    ScalarField x = mixed_blob().build(cfg.grid);
    for (std::uint64_t s = 0; s < 10; ++s) {
        ScalarField next = step_ito(x, s, 0, cfg);
        const double drift = next.mean - x.mean - cfg.dt * 0.25;
        REQUIRE(std::abs(drift) <= 1e-12);
        x = next;
    }
}

TEST_CASE("paths are reproducible for fixed (seed, replica) and differ across replicas") {
    SolverConfig cfg = make_cfg(16, 2e-4, 4e-3, 3, 1234);
    cfg.snapshot_stride = 5;
    ScalarField x0 = mixed_blob().build(cfg.grid);
    PathResult a = simulate_path(x0, cfg, 7);
    PathResult b = simulate_path(x0, cfg, 7);
    REQUIRE(a.trajectory.snapshots.size() == b.trajectory.snapshots.size());
    for (size_t i = 0; i < a.trajectory.snapshots.size(); ++i)
        REQUIRE(a.trajectory.snapshots[i].values == b.trajectory.snapshots[i].values);
    PathResult c = simulate_path(x0, cfg, 8);
    CHECK(a.trajectory.snapshots.back().values != c.trajectory.snapshots.back().values);
}

TEST_CASE("diagnostics instants cover [0, T] with the configured spacing") {
    SolverConfig cfg = make_cfg(16, 1e-4, 2e-3, 2, 5);
    cfg.diag_stride = 4;
    ScalarField x0 = mixed_blob().build(cfg.grid);
    PathResult res = simulate_path(x0, cfg, 0);
    const auto& t = res.diagnostics.times;
    REQUIRE(t.size() == 6);
    CHECK(t.front() == 0.0);
    CHECK(t.back() == Catch::Approx(2e-3));
    for (size_t i = 1; i < t.size(); ++i)
        CHECK(t[i] - t[i - 1] == Catch::Approx(4 * cfg.dt).margin(1e-15));
    CHECK(res.diagnostics.l2_energy.size() == t.size());
    CHECK(res.diagnostics.h1_dissipation.size() == t.size());
    CHECK(res.diagnostics.mean_series.size() == t.size());
}

TEST_CASE("pathwise energy inequality holds with zero forcing") {
    SolverConfig cfg = make_cfg(32, 1e-4, 2e-2, 4, 77);
    ScalarField x0 = mixed_blob().build(cfg.grid);
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        cfg.noise = NoiseSpec(CoefficientFamily::flat(4), cfg.grid, seed);
        PathResult res = simulate_path(x0, cfg, 0);
        EnergyMarginReport rep = energy_inequality_check(res.diagnostics, cfg);
        CAPTURE(seed, rep.worst_margin, rep.tol);
        CHECK(rep.pass);
    }

    SolverConfig forced = cfg;
    forced.forcing = FieldSpec::parse("constant 0.1");
    PathResult res = simulate_path(x0, forced, 0);
    CHECK_THROWS_AS(energy_inequality_check(res.diagnostics, forced), std::invalid_argument);
}

TEST_CASE("energy margins are exactly zero for frozen states") {
    SolverConfig cfg = make_cfg(16, 1e-4, 1e-3, 2, 3);
    PathResult res = simulate_path(ScalarField(cfg.grid), cfg, 0);
    EnergyMarginReport rep = energy_inequality_check(res.diagnostics, cfg);
    for (double m : rep.margins) CHECK(m == 0.0);

    ScalarField c(cfg.grid, std::vector<double>(cfg.grid.size(), 0.4));
    PathResult res2 = simulate_path(c, cfg, 0);
    EnergyMarginReport rep2 = energy_inequality_check(res2.diagnostics, cfg);
    for (double m : rep2.margins) CHECK(std::abs(m) < 1e-15);
}

TEST_CASE("one-step Ito/Stratonovich difference shrinks linearly in dt") {
    // With increments scaling as z sqrt(dt) for a fixed draw z, the leading
    // mismatch between the corrector drift and the midpoint transport term is
    // proportional to dt, so the measured ladder slope sits near 1.
    SolverConfig base = make_cfg(16, 1e-3, 1e-2, 2, 2024);
    ScalarField x0 = ScalarField::from_function(base.grid, [](double x, double y) {
        return 3.0 + 0.3 * std::sqrt(2.0) * std::cos(kTwoPi * x) +
               0.2 * std::sqrt(2.0) * std::cos(kTwoPi * (x + y));
    });
    std::vector<double> dts = {2e-3, 1e-3, 5e-4, 2.5e-4};
    std::vector<double> diffs;
    for (double dt : dts) {
        SolverConfig cfg = base;
        cfg.dt = dt;
        ScalarField a = step_ito(x0, 0, 0, cfg);
        ScalarField b = step_stratonovich(x0, 0, 0, cfg);
        diffs.push_back(l2_diff(a, b));
    }
    double slope_sum = 0.0;
    for (size_t i = 1; i < diffs.size(); ++i) slope_sum += std::log2(diffs[i - 1] / diffs[i]);
    const double slope = slope_sum / double(diffs.size() - 1);
    CAPTURE(diffs[0], diffs[1], diffs[2], diffs[3], slope);
    CHECK(slope >= 0.8);
    CHECK(slope <= 1.3);
}

namespace {

// Drives the core stepper with externally supplied increments so that coarse
// steps use the sums of fine-step increments (a strongly coupled ladder).
ScalarField run_coupled(const SolverConfig& cfg, const ScalarField& x0, std::uint64_t replica,
                        double dt_fine, bool midpoint) {
    SolverConfig c = cfg;
    detail::SolverWorkspace ws(c);
    const std::uint64_t steps = c.steps();
    const std::uint64_t sub = static_cast<std::uint64_t>(std::llround(c.dt / dt_fine));
    std::vector<double> x = x0.values, xn(x.size());
    std::vector<std::complex<double>> xhat(x.size()), xnhat(x.size());
    detail::transform_raw(c.grid, x.data(), ws.cw1.data(), xhat.data());
    const size_t modes = c.noise->mode_count();
    for (std::uint64_t s = 0; s < steps; ++s) {
        std::fill(ws.dbeta.begin(), ws.dbeta.end(), 0.0);
        for (std::uint64_t q = 0; q < sub; ++q)
            for (size_t m = 0; m < modes; ++m)
                ws.dbeta[m] +=
                    rng::normal_increment(c.noise->seed, replica, m, s * sub + q, dt_fine);
        detail::core_step(ws, c, !midpoint, true, midpoint, s, replica, x, xhat, xn, xnhat,
                          nullptr, nullptr);
        x.swap(xn);
        xhat.swap(xnhat);
    }
    ScalarField out(c.grid);
    out.values = x;
    out.refresh_mean();
    return out;
}

}  // namespace

TEST_CASE("strong self-convergence of both steppers with coupled increments") {
    SolverConfig base = make_cfg(16, 1e-3, 1e-2, 2, 555);
    ScalarField x0 = mixed_blob().build(base.grid);
    const double dt_fine = 2.5e-4;
    for (bool midpoint : {false, true}) {
        double err_coarse = 0.0, err_fine = 0.0;
        for (std::uint64_t rep = 0; rep < 8; ++rep) {
            SolverConfig c1 = base;
            c1.dt = 1e-3;
            SolverConfig c2 = base;
            c2.dt = 5e-4;
            SolverConfig c3 = base;
            c3.dt = 2.5e-4;
            ScalarField x1 = run_coupled(c1, x0, rep, dt_fine, midpoint);
            ScalarField x2 = run_coupled(c2, x0, rep, dt_fine, midpoint);
            ScalarField x3 = run_coupled(c3, x0, rep, dt_fine, midpoint);
            err_coarse += l2_diff(x1, x3) * l2_diff(x1, x3);
            err_fine += l2_diff(x2, x3) * l2_diff(x2, x3);
        }
        const double order = std::log2(std::sqrt(err_coarse) / std::sqrt(err_fine));
        CAPTURE(midpoint, err_coarse, err_fine, order);
        CHECK(order >= 0.45);
    }
}

TEST_CASE("weak residual vanishes on the zero trajectory") {
    SolverConfig cfg = make_cfg(16, 1e-4, 1e-3, 2, 9);
    cfg.snapshot_stride = 1;
    PathResult res = simulate_path(ScalarField(cfg.grid), cfg, 0);
    ResidualSeries r = weak_residual(res.trajectory, {1, 0}, cfg);
    for (double v : r.residual) CHECK(v == 0.0);
}

TEST_CASE("weak residual requires stride-1 trajectories") {
    SolverConfig cfg = make_cfg(16, 1e-4, 1e-3, 2, 9);
    cfg.snapshot_stride = 2;
    PathResult res = simulate_path(mixed_blob().build(cfg.grid), cfg, 0);
    CHECK_THROWS_AS(weak_residual(res.trajectory, {1, 0}, cfg), std::invalid_argument);
}

TEST_CASE("weak residual of the exact heat trajectory is quadrature-small") {
    // State confined to the solid branch: Psi is exactly linear with slope
    // k1/C1 and the noise is inert, so the single-mode decay is closed form.
    SolverConfig cfg = make_cfg(16, 5e-5, 2e-2, 2, 9);
    const double s = 0.5;  // k1 / C1
    const double rate = kFourPiSq * s;
    const double b = 0.1, c0 = -1.0;
    Trajectory traj;
    traj.stride = 1;
    traj.replica = 0;
    const std::uint64_t steps = cfg.steps();
    for (std::uint64_t m = 0; m <= steps; ++m) {
        const double t = m * cfg.dt;
        traj.times.push_back(t);
        traj.snapshots.push_back(ScalarField::from_function(cfg.grid, [&](double x, double) {
            return c0 + b * std::exp(-rate * t) * std::sqrt(2.0) * std::cos(kTwoPi * x);
        }));
    }
    ResidualSeries r = weak_residual(traj, {1, 0}, cfg);
    double worst = 0.0;
    for (double v : r.residual) worst = std::max(worst, std::abs(v));
    CAPTURE(worst);
    CHECK(worst <= 1e-8);
}

TEST_CASE("weak residual of stepped trajectories is first order in dt") {
    std::vector<double> dts = {2e-4, 1e-4, 5e-5};
    std::vector<double> peaks;
    for (double dt : dts) {
        SolverConfig cfg = make_cfg(32, dt, 5e-3, 2, 99);
        cfg.snapshot_stride = 1;
        cfg.diag_stride = 1;
        PathResult res = simulate_path(mixed_blob().build(cfg.grid), cfg, 1);
        ResidualSeries r = weak_residual(res.trajectory, {1, 0}, cfg);
        double worst = 0.0;
        for (double v : r.residual) worst = std::max(worst, std::abs(v));
        peaks.push_back(worst);
    }
    const double order = 0.5 * (std::log2(peaks[0] / peaks[1]) + std::log2(peaks[1] / peaks[2]));
    CAPTURE(peaks[0], peaks[1], peaks[2], order);
    CHECK(order >= 0.8);
}

TEST_CASE("divergence orthogonality: constants give exact zeros") {
    PhaseFunctions ph;
    TorusGrid g(32);
    ScalarField c(g, std::vector<double>(g.size(), 2.5));
    for (const auto& [k, v] : divergence_orthogonality_check(c, ph, 4)) CHECK(v == 0.0);
}

TEST_CASE("divergence orthogonality on a smooth resolved state, with negative control") {
    PhaseFunctions ph;
    TorusGrid g(64);
    ScalarField X = ScalarField::from_function(g, [](double x, double y) {
        return 1.2 + 0.9 * std::sqrt(2.0) * std::cos(kTwoPi * x) +
               0.4 * std::sqrt(2.0) * std::sin(kTwoPi * (x + 2 * y));
    });
    double worst = 0.0;
    for (const auto& [k, v] : divergence_orthogonality_check(X, ph, 8))
        worst = std::max(worst, std::abs(v));
    CAPTURE(worst);
    CHECK(worst < 1e-8);

    // Gradient-type (non-divergence-free) field aligned with the state's
    // dominant mode must produce a visible value.
    ScalarField prim(g);
    for (size_t i = 0; i < X.values.size(); ++i) prim.values[i] = ph.Gamma_primitive(X.values[i]);
    prim.refresh_mean();
    VectorField grad = gradient(prim);
    const double bad = flux_quadrature(g, grad.u1, grad.u2, [&](double x, double) {
        return std::array<double, 2>{-std::sqrt(2.0) * std::sin(kTwoPi * x), 0.0};
    });
    CHECK(std::abs(bad) > 1e-4);
}

TEST_CASE("blow-up aborts the path with the failing time attached") {
    SolverConfig cfg = make_cfg(16, 1e-4, 1e-2, 0, 0);
    cfg.forcing = FieldSpec::parse("constant 1e308");
    ScalarField x0(cfg.grid);
    try {
        simulate_path(x0, cfg, 5);
        FAIL("expected PathAbortError");
    } catch (const PathAbortError& e) {
        CHECK(e.replica == 5);
        CHECK(e.time == Catch::Approx((e.step + 1) * cfg.dt));
        CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
    }
}

TEST_CASE("config validation rejects unstable or inconsistent setups") {
    SolverConfig cfg = make_cfg(32, 1e-4, 1e-2, 4, 1);
    CHECK_NOTHROW(cfg.validate());

    SolverConfig big_dt = cfg;
    big_dt.dt = 1e-1;  // violates the noise step-size heuristic
    CHECK_THROWS_AS(big_dt.validate(), ConfigError);

    SolverConfig small_a = cfg;
    small_a.imex_a = 1e-6;
    CHECK_THROWS_AS(small_a.validate(), ConfigError);

    SolverConfig wrong_grid = cfg;
    wrong_grid.noise = NoiseSpec(CoefficientFamily::flat(4), TorusGrid(16), 1);
    CHECK_THROWS_AS(wrong_grid.validate(), ConfigError);

    SolverConfig bad_dt = cfg;
    bad_dt.dt = -1.0;
    CHECK_THROWS_AS(bad_dt.validate(), ConfigError);

    CHECK_THROWS_AS(step_ito(ScalarField(TorusGrid(8)), 0, 0, cfg), std::invalid_argument);
}
