#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <random>

#include "mushy/fft.hpp"
#include "mushy/noise.hpp"
#include "mushy/spectral_ops.hpp"

using namespace mushy;

TEST_CASE("basis_e values and parity convention") {
    CHECK(basis_e({1, 0}, 0.0, 0.0) == Catch::Approx(std::sqrt(2.0)));
    CHECK(basis_e({-1, 0}, 0.0, 0.0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(ModeIndex{0, 3}.is_plus());
    CHECK(!ModeIndex{0, -3}.is_plus());
    CHECK(ModeIndex{2, -5}.is_plus());
    CHECK_THROWS_AS(basis_e({0, 0}, 0.1, 0.2), std::invalid_argument);
}

TEST_CASE("grid average of e_k e_l is the Kronecker delta below Nyquist") {
    TorusGrid g(32);
    std::vector<ModeIndex> modes;
    for (int k1 = -4; k1 <= 4; ++k1)
        for (int k2 = -4; k2 <= 4; ++k2)
            if (k1 != 0 || k2 != 0) modes.push_back({k1, k2});
    for (const ModeIndex& k : modes) {
        for (const ModeIndex& l : modes) {
            double acc = 0.0;
            for (int i = 0; i < g.n; ++i)
                for (int j = 0; j < g.n; ++j)
                    acc += basis_e(k, g.coord(i), g.coord(j)) * basis_e(l, g.coord(i), g.coord(j));
            acc /= g.size();
            const double expect = (k == l) ? 1.0 : 0.0;
            if (std::abs(acc - expect) > 1e-12) {
                CAPTURE(k.k1, k.k2, l.k1, l.k2);
                REQUIRE(std::abs(acc - expect) <= 1e-12);
            }
        }
    }
    SUCCEED("orthonormality verified");
}

TEST_CASE("sigma values, bound and divergence-free property") {
    auto s = sigma({1, 0}, 0.0, 0.0);
    CHECK(s[0] == Catch::Approx(0.0).margin(1e-15));
    CHECK(s[1] == Catch::Approx(-std::sqrt(2.0)));

    TorusGrid g(32);
    for (int k1 = -4; k1 <= 4; ++k1)
        for (int k2 = -4; k2 <= 4; ++k2) {
            if (k1 == 0 && k2 == 0) continue;
            ModeIndex k{k1, k2};
            ScalarField u1 = ScalarField::from_function(
                g, [&](double x, double y) { return sigma(k, x, y)[0]; });
            ScalarField u2 = ScalarField::from_function(
                g, [&](double x, double y) { return sigma(k, x, y)[1]; });
            ScalarField div = divergence(VectorField(u1, u2));
            double worst = 0.0;
            for (double v : div.values) worst = std::max(worst, std::abs(v));
            CAPTURE(k1, k2);
            CHECK(worst < 1e-12);

            const double bound = std::sqrt(2.0) / std::sqrt(double(k.norm_sq()));
            for (double x : {0.0, 0.13, -0.4})
                for (double y : {0.21, -0.35}) {
                    auto v = sigma(k, x, y);
                    CHECK(std::hypot(v[0], v[1]) <= bound + 1e-14);
                }
        }
}

TEST_CASE("flat family closed forms: c_1 = 1/2 and c_2 = 7^{-1/2}") {
    CoefficientFamily f1 = CoefficientFamily::flat(1);
    CHECK(f1.alpha.size() == 4);
    CHECK(f1.sup_norm == Catch::Approx(0.5).margin(1e-15));

    CoefficientFamily f2 = CoefficientFamily::flat(2);
    // Brute-force lattice sum: shells 1, 2, 4 with four modes each.
    double brute = 0.0;
    for (int k1 = -2; k1 <= 2; ++k1)
        for (int k2 = -2; k2 <= 2; ++k2) {
            if (k1 == 0 && k2 == 0) continue;
            if (k1 * k1 + k2 * k2 <= 4) brute += 1.0 / (k1 * k1 + k2 * k2);
        }
    CHECK(brute == Catch::Approx(7.0).margin(1e-12));
    CHECK(f2.sup_norm == Catch::Approx(1.0 / std::sqrt(7.0)).margin(1e-15));
    CHECK(f2.alpha.size() == 12);
}

TEST_CASE("flat families satisfy the normalization and shrink strictly") {
    double prev = 1.0;
    for (int N = 1; N <= 64; ++N) {
        CoefficientFamily f = CoefficientFamily::flat(N);
        CHECK(std::abs(f.normalization_sum() - 1.0) <= 1e-12);
        CHECK(f.radially_symmetric(0.0));
        CHECK(f.sup_norm < prev);
        prev = f.sup_norm;
        CHECK_NOTHROW(f.validate());
    }
    CHECK_THROWS_AS(CoefficientFamily::flat(0), ConfigError);
}

TEST_CASE("mode enumeration order is stable and sorted by (|k|^2, k1, k2)") {
    auto modes = CoefficientFamily::enumerate_modes(3);
    CHECK(modes.size() == 28);
    CHECK(modes.front() == ModeIndex{-1, 0});
    for (size_t i = 1; i < modes.size(); ++i) {
        auto a = modes[i - 1], b = modes[i];
        const bool ordered = a.norm_sq() < b.norm_sq() ||
                             (a.norm_sq() == b.norm_sq() &&
                              (a.k1 < b.k1 || (a.k1 == b.k1 && a.k2 < b.k2)));
        CHECK(ordered);
    }
}

TEST_CASE("structure identity: hand-checked N=1 sum and random points up to N=16") {
    CoefficientFamily f1 = CoefficientFamily::flat(1);
    auto m = structure_identity_check(f1, 0.0, 0.0);
    CHECK(m[0][0] == Catch::Approx(0.5).margin(1e-14));
    CHECK(m[1][1] == Catch::Approx(0.5).margin(1e-14));
    CHECK(std::abs(m[0][1]) < 1e-14);
    CHECK(std::abs(m[1][0]) < 1e-14);

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    for (int N = 1; N <= 16; ++N) {
        CoefficientFamily f = CoefficientFamily::flat(N);
        double worst = 0.0;
        for (int p = 0; p < 100; ++p) {
            auto s = structure_identity_check(f, dist(rng), dist(rng));
            worst = std::max({worst, std::abs(s[0][0] - 0.5), std::abs(s[1][1] - 0.5),
                              std::abs(s[0][1]), std::abs(s[1][0])});
        }
        CAPTURE(N);
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("breaking radial symmetry is detected") {
    // Scale the (1,0) and (-1,0) coefficients up, (0,1) and (0,-1) down.
    CoefficientFamily broken = CoefficientFamily::flat(1);
    for (auto& [k, a] : broken.alpha) a = (k.k1 != 0) ? a * 1.5 : a * 0.5;
    CHECK(!broken.radially_symmetric(1e-12));
    CHECK_THROWS_AS(broken.validate(), ConfigError);
    auto m = structure_identity_check(broken, 0.1, 0.2);
    const double dev = std::max({std::abs(m[0][0] - 0.5), std::abs(m[1][1] - 0.5),
                                 std::abs(m[0][1]), std::abs(m[1][0])});
    CHECK(dev > 1e-3);
}

TEST_CASE("noise spec rejects truncation beyond Nyquist and precomputes divergence-free data") {
    TorusGrid g(16);
    CHECK_THROWS_AS(NoiseSpec(CoefficientFamily::flat(9), g, 1), ConfigError);
    NoiseSpec spec(CoefficientFamily::flat(4), g, 1);
    CHECK(spec.mode_count() == CoefficientFamily::enumerate_modes(4).size());
    // Spectral divergence of each stored mode: 2 pi i (k1 coef1 + k2 coef2) = 0.
    for (const auto& m : spec.modes) {
        const std::complex<double> div = double(m.k.k1) * m.coef1 + double(m.k.k2) * m.coef2;
        CHECK(std::abs(div) <= 1e-12);
    }
}

TEST_CASE("synthesized velocity spectrum reproduces alpha-weighted sigma fields") {
    TorusGrid g(16);
    NoiseSpec spec(CoefficientFamily::flat(3), g, 7);
    std::vector<double> w(spec.mode_count(), 0.0);
    w[5] = 1.3;
    w[17] = -0.6;
    SpectralField u1(g), u2(g);
    spec.accumulate_velocity_spectrum(w, u1.coeff.data(), u2.coeff.data());
    ScalarField f1 = inverse_transform(u1), f2 = inverse_transform(u2);
    double worst = 0.0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            double e1 = 0.0, e2 = 0.0;
            for (size_t m : {size_t(5), size_t(17)}) {
                auto s = sigma(spec.modes[m].k, g.coord(i), g.coord(j));
                e1 += w[m] * spec.modes[m].alpha * s[0];
                e2 += w[m] * spec.modes[m].alpha * s[1];
            }
            worst = std::max({worst, std::abs(f1.at(i, j) - e1), std::abs(f2.at(i, j) - e2)});
        }
    CHECK(worst < 1e-12);
}

TEST_CASE("increments are reproducible and have the right first two moments") {
    TorusGrid g(16);
    NoiseSpec spec(CoefficientFamily::flat(2), g, 42);
    const double dt = 1e-3;

    auto a = spec.sample_increments(17, dt, 3);
    auto b = spec.sample_increments(17, dt, 3);
    CHECK(a == b);
    auto c = spec.sample_increments(18, dt, 3);
    CHECK(a != c);
    auto d = spec.sample_increments(17, dt, 4);
    CHECK(a != d);

    // Moment check over 10^6 draws of mode 0, plus cross-mode correlation.
    const size_t samples = 1'000'000;
    double sum0 = 0.0, sumsq0 = 0.0, sum1 = 0.0, sumsq1 = 0.0, cross = 0.0;
    for (size_t s = 0; s < samples; ++s) {
        const double z0 = rng::normal_increment(42, 0, 0, s, dt) / std::sqrt(dt);
        const double z1 = rng::normal_increment(42, 0, 1, s, dt) / std::sqrt(dt);
        sum0 += z0;
        sumsq0 += z0 * z0;
        sum1 += z1;
        sumsq1 += z1 * z1;
        cross += z0 * z1;
    }
    const double mean0 = sum0 / samples, mean1 = sum1 / samples;
    const double var0 = sumsq0 / samples - mean0 * mean0;
    const double var1 = sumsq1 / samples - mean1 * mean1;
    const double corr = (cross / samples - mean0 * mean1) / std::sqrt(var0 * var1);
    CHECK(var0 > 0.995);
    CHECK(var0 < 1.005);
    CHECK(var1 > 0.995);
    CHECK(var1 < 1.005);
    CHECK(std::abs(corr) < 0.01);
    CHECK(std::abs(mean0) < 0.005);
}

TEST_CASE("sample_increments validates dt") {
    TorusGrid g(16);
    NoiseSpec spec(CoefficientFamily::flat(1), g, 1);
    CHECK_THROWS_AS(spec.sample_increments(0, 0.0, 0), std::invalid_argument);
}
