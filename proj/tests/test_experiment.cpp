#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mushy/experiment.hpp"

using namespace mushy;

namespace {

ExperimentPlan small_plan() {
    ExperimentPlan plan;
    plan.Ns = {1, 2};
    plan.replicas = 8;
    plan.base_seed = 2025;
    plan.grid = TorusGrid(16);
    plan.dt = 2e-4;
    plan.T = 4e-3;
    plan.phase = PhaseFunctions(PhaseParams{});
    // Blob center kept off the grid symmetry axes: a single active point at a
    // node of the probe mode would zero the quadrature by accident.
    plan.x0 = FieldSpec::parse("constant -0.8 + blob 3.2 0.22 0.17 0.11");
    plan.distance_stride = 2;
    plan.holder.pairs = 8;
    return plan;
}

bool rows_equal(const ConvergenceRow& a, const ConvergenceRow& b) {
    return a.N == b.N && a.c_N == b.c_N && a.mean_distance == b.mean_distance &&
           a.max_distance == b.max_distance && a.std_error == b.std_error &&
           a.mean_truncated == b.mean_truncated && a.martingale_stat == b.martingale_stat &&
           a.holder_exponent == b.holder_exponent && a.aborted == b.aborted;
}

}  // namespace

TEST_CASE("inactive turbulence profile collapses every replica onto the reference") {
    ExperimentPlan plan = small_plan();
    PhaseParams p;
    p.eps = 100.0;  // onset far above any value the data reaches
    plan.phase = PhaseFunctions(p);
    ConvergenceReport rep = run_convergence(plan, 2);
    for (const ConvergenceRow& row : rep.rows) {
        CHECK(row.mean_distance <= 1e-12);
        CHECK(row.max_distance <= 1e-12);
        CHECK(row.martingale_stat == 0.0);
        CHECK(row.aborted == 0);
    }
}

TEST_CASE("reports are reproducible and independent of the thread count") {
    ExperimentPlan plan = small_plan();
    ConvergenceReport a = run_convergence(plan, 1);
    ConvergenceReport b = run_convergence(plan, 4);
    ConvergenceReport c = run_convergence(plan, 1);
    REQUIRE(a.rows.size() == b.rows.size());
    for (size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(rows_equal(a.rows[i], b.rows[i]));
        CHECK(rows_equal(a.rows[i], c.rows[i]));
    }
}

TEST_CASE("doubling the ensemble moves the mean by less than three combined errors") {
    ExperimentPlan plan = small_plan();
    plan.Ns = {2};
    plan.replicas = 16;
    ConvergenceReport a = run_convergence(plan, 4);
    plan.replicas = 32;
    ConvergenceReport b = run_convergence(plan, 4);
    const double se = std::sqrt(a.rows[0].std_error * a.rows[0].std_error +
                                b.rows[0].std_error * b.rows[0].std_error);
    CAPTURE(a.rows[0].mean_distance, b.rows[0].mean_distance, se);
    CHECK(std::abs(a.rows[0].mean_distance - b.rows[0].mean_distance) < 3.0 * se);
}

TEST_CASE("martingale probe: zero for inactive noise, reproducible otherwise") {
    ExperimentPlan plan = small_plan();
    PhaseParams p;
    p.eps = 100.0;
    plan.phase = PhaseFunctions(p);
    for (const auto& [N, stat] : martingale_decay_probe(plan, 2)) CHECK(stat == 0.0);

    ExperimentPlan live = small_plan();
    auto s1 = martingale_decay_probe(live, 1);
    auto s2 = martingale_decay_probe(live, 4);
    REQUIRE(s1.size() == s2.size());
    for (size_t i = 0; i < s1.size(); ++i) {
        CHECK(s1[i].first == s2[i].first);
        CHECK(s1[i].second == s2[i].second);
        CHECK(s1[i].second > 0.0);
    }
}

TEST_CASE("holder estimate: frozen trajectories are reported as degenerate") {
    TorusGrid g(16);
    Trajectory traj;
    traj.stride = 1;
    for (int m = 0; m < 80; ++m) {
        traj.times.push_back(m * 1e-3);
        traj.snapshots.push_back(ScalarField(g, std::vector<double>(g.size(), 1.5)));
    }
    CHECK(!holder_increment_estimate(traj, 5.0, 4.0, 16).has_value());

    Trajectory tiny;
    tiny.snapshots.assign(10, ScalarField(g));
    tiny.times.assign(10, 0.0);
    CHECK_THROWS_AS(holder_increment_estimate(tiny, 5.0, 4.0, 16), std::invalid_argument);
}

TEST_CASE("holder estimate: smooth deterministic decay fits a slope near r") {
    // Heat-regime trajectory X(t) = c + b exp(-rate t) cos: increments scale
    // like |t-s| for small separations, so the r-th moment slope sits near r,
    // curving slightly below it at the largest separations.
    TorusGrid g(16);
    const double rate = kFourPiSq * 0.5;
    Trajectory traj;
    traj.stride = 1;
    const double dt_sample = 1e-4;
    for (int m = 0; m < 128; ++m) {
        const double t = m * dt_sample;
        traj.times.push_back(t);
        traj.snapshots.push_back(ScalarField::from_function(g, [&](double x, double) {
            return -2.0 + 0.1 * std::exp(-rate * t) * std::sqrt(2.0) * std::cos(kTwoPi * x);
        }));
    }
    auto slope = holder_increment_estimate(traj, 5.0, 4.0, 32);
    REQUIRE(slope.has_value());
    CAPTURE(*slope);
    CHECK(*slope >= 3.5);
    CHECK(*slope <= 4.3);
}

TEST_CASE("plan validation rejects malformed inputs") {
    ExperimentPlan plan = small_plan();
    CHECK_NOTHROW(plan.validate());

    ExperimentPlan bad = plan;
    bad.Ns = {4, 4};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.Ns = {4, 2};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = plan;
    bad.replicas = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = plan;
    bad.Ns = {1, 20};  // exceeds the n=16 grid Nyquist
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = plan;
    bad.probe_mode = ModeIndex{0, 0};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("experiments fail loudly when trajectories blow up") {
    // A validated configuration is noise-stable, so a blow-up always hits the
    // shared deterministic dynamics first; the experiment converts it into a
    // threshold error instead of leaking a per-path abort.
    ExperimentPlan plan = small_plan();
    plan.forcing = FieldSpec::parse("constant 1e308");
    try {
        run_convergence(plan, 2);
        FAIL("expected ExperimentThresholdError");
    } catch (const ExperimentThresholdError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("reference aborted") != std::string::npos);
        CHECK(msg.find("non-finite") != std::string::npos);
    }
}
