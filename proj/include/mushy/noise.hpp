#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "mushy/errors.hpp"
#include "mushy/grid.hpp"
#include "mushy/rng.hpp"
#include "mushy/spectral_ops.hpp"

namespace mushy {

/// Nonzero lattice point indexing one noise mode. Parity follows the sign
/// convention: plus iff k1 > 0, or k1 = 0 and k2 > 0.
struct ModeIndex {
    int k1 = 0, k2 = 0;

    bool is_plus() const { return k1 > 0 || (k1 == 0 && k2 > 0); }
    int norm_sq() const { return k1 * k1 + k2 * k2; }
    bool operator==(const ModeIndex&) const = default;
};

/// Trigonometric basis: sqrt(2) cos(2π k·x) on the plus lattice,
/// sqrt(2) sin(2π k·x) on the minus lattice.
inline double basis_e(ModeIndex k, double x1, double x2) {
    if (k.k1 == 0 && k.k2 == 0) throw std::invalid_argument("basis_e: zero mode");
    const double phase = kTwoPi * (k.k1 * x1 + k.k2 * x2);
    return std::sqrt(2.0) * (k.is_plus() ? std::cos(phase) : std::sin(phase));
}

/// Divergence-free field sigma_k = k^perp / |k|^2 e_k, k^perp = (k2, -k1).
inline std::array<double, 2> sigma(ModeIndex k, double x1, double x2) {
    const double e = basis_e(k, x1, x2);
    const double inv = 1.0 / k.norm_sq();
    return {k.k2 * inv * e, -k.k1 * inv * e};
}

/// Noise coefficient family alpha_k supported on 0 < |k| <= N. Modes are kept
/// in a fixed enumeration order (|k|², then k1, then k2) so serialized
/// manifests and stream indices are stable.
struct CoefficientFamily {
    int N = 0;
    std::vector<std::pair<ModeIndex, double>> alpha;
    double sup_norm = 0.0;

    /// Flat truncation: alpha_k = c_N for 0 < |k| <= N with
    /// c_N = (Σ_{0<|k|<=N} |k|^{-2})^{-1/2}, which meets the normalization
    /// Σ alpha_k²/|k|² = 1 and radial symmetry exactly.
    static CoefficientFamily flat(int N) {
        if (N < 1) throw ConfigError("coefficient family: N must be >= 1");
        CoefficientFamily fam;
        fam.N = N;
        double sum_inv = 0.0;
        for (const ModeIndex& k : enumerate_modes(N)) sum_inv += 1.0 / k.norm_sq();
        const double c = 1.0 / std::sqrt(sum_inv);
        for (const ModeIndex& k : enumerate_modes(N)) fam.alpha.emplace_back(k, c);
        fam.sup_norm = c;
        return fam;
    }

    /// Arbitrary coefficients for experiments and test fixtures; callers that
    /// need the normalization contract must call validate().
    static CoefficientFamily from_modes(int N, std::vector<std::pair<ModeIndex, double>> modes) {
        CoefficientFamily fam;
        fam.N = N;
        fam.alpha = std::move(modes);
        for (const auto& [k, a] : fam.alpha) fam.sup_norm = std::max(fam.sup_norm, a);
        return fam;
    }

    static std::vector<ModeIndex> enumerate_modes(int N) {
        std::vector<ModeIndex> modes;
        for (int k1 = -N; k1 <= N; ++k1)
            for (int k2 = -N; k2 <= N; ++k2) {
                if (k1 == 0 && k2 == 0) continue;
                if (k1 * k1 + k2 * k2 <= N * N) modes.push_back({k1, k2});
            }
        std::sort(modes.begin(), modes.end(), [](const ModeIndex& a, const ModeIndex& b) {
            if (a.norm_sq() != b.norm_sq()) return a.norm_sq() < b.norm_sq();
            if (a.k1 != b.k1) return a.k1 < b.k1;
            return a.k2 < b.k2;
        });
        return modes;
    }

    double normalization_sum() const {
        double s = 0.0;
        for (const auto& [k, a] : alpha) s += a * a / k.norm_sq();
        return s;
    }

    bool radially_symmetric(double tol) const {
        for (const auto& [k, a] : alpha)
            for (const auto& [l, b] : alpha)
                if (k.norm_sq() == l.norm_sq() && std::abs(a - b) > tol) return false;
        return true;
    }

    void validate() const {
        if (std::abs(normalization_sum() - 1.0) > 1e-12)
            throw ConfigError("coefficient family: normalization sum differs from 1");
        if (!radially_symmetric(1e-12))
            throw ConfigError("coefficient family: radial symmetry violated");
    }
};

/// Σ_k alpha_k² sigma_k(x) ⊗ sigma_k(x); equals I/2 for any radially
/// symmetric family with unit normalization, independently of x.
inline std::array<std::array<double, 2>, 2> structure_identity_check(const CoefficientFamily& fam,
                                                                     double x1, double x2) {
    std::array<std::array<double, 2>, 2> m{{{0.0, 0.0}, {0.0, 0.0}}};
    for (const auto& [k, a] : fam.alpha) {
        const std::array<double, 2> s = sigma(k, x1, x2);
        const double w = a * a;
        m[0][0] += w * s[0] * s[0];
        m[0][1] += w * s[0] * s[1];
        m[1][0] += w * s[1] * s[0];
        m[1][1] += w * s[1] * s[1];
    }
    return m;
}

/// Coefficient family bound to a grid: per-mode spectral data for synthesizing
/// velocity fields, plus the seed of the counter-based stream. Immutable.
struct NoiseSpec {
    struct Mode {
        ModeIndex k;
        double alpha = 0.0;
        int bin_plus = 0;                      // FFT bin of +k
        int bin_minus = 0;                     // FFT bin of -k
        std::complex<double> coef1, coef2;     // alpha * sigma_k spectral weight at +k
    };

    CoefficientFamily family;
    TorusGrid grid;
    std::uint64_t seed = 0;
    std::vector<Mode> modes;

    NoiseSpec() = default;
    NoiseSpec(CoefficientFamily fam, const TorusGrid& g, std::uint64_t seed_)
        : family(std::move(fam)), grid(g), seed(seed_) {
        if (family.N > grid.n / 2)
            throw ConfigError("noise: truncation radius exceeds the grid Nyquist frequency");
        const double half_sqrt2 = std::sqrt(2.0) / 2.0;
        for (const auto& [k, a] : family.alpha) {
            Mode m;
            m.k = k;
            m.alpha = a;
            m.bin_plus = grid.bin(k.k1) * grid.n + grid.bin(k.k2);
            m.bin_minus = grid.bin(-k.k1) * grid.n + grid.bin(-k.k2);
            // e_k = sqrt(2) cos -> (+k, -k) weights (1/2, 1/2) * sqrt(2);
            // e_k = sqrt(2) sin -> (-i/2, +i/2) * sqrt(2).
            const std::complex<double> base =
                k.is_plus() ? std::complex<double>(half_sqrt2, 0.0)
                            : std::complex<double>(0.0, -half_sqrt2);
            const double inv = 1.0 / k.norm_sq();
            m.coef1 = a * (k.k2 * inv) * base;
            m.coef2 = a * (-k.k1 * inv) * base;
            modes.push_back(m);
        }
    }

    size_t mode_count() const { return modes.size(); }

    /// Independent N(0, dt) increments, one per mode, for (step, replica).
    void sample_increments(std::uint64_t step, double dt, std::uint64_t replica,
                           std::span<double> out) const {
        if (dt <= 0.0) throw std::invalid_argument("sample_increments: dt must be positive");
        for (size_t m = 0; m < modes.size(); ++m)
            out[m] = rng::normal_increment(seed, replica, m, step, dt);
    }

    std::vector<double> sample_increments(std::uint64_t step, double dt,
                                          std::uint64_t replica) const {
        std::vector<double> out(modes.size());
        sample_increments(step, dt, replica, out);
        return out;
    }

    /// Accumulate Σ_m weight_m * alpha_m * sigma_m into spectral component
    /// buffers (u1hat, u2hat are n² bins, not cleared here). Fixed mode order
    /// keeps the rounding sequence reproducible.
    void accumulate_velocity_spectrum(std::span<const double> weights,
                                      std::complex<double>* u1hat,
                                      std::complex<double>* u2hat) const {
        for (size_t m = 0; m < modes.size(); ++m) {
            const Mode& mo = modes[m];
            const std::complex<double> c1 = weights[m] * mo.coef1;
            const std::complex<double> c2 = weights[m] * mo.coef2;
            u1hat[mo.bin_plus] += c1;
            u2hat[mo.bin_plus] += c2;
            u1hat[mo.bin_minus] += std::conj(c1);
            u2hat[mo.bin_minus] += std::conj(c2);
        }
    }
};

}  // namespace mushy
