#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "mushy/fft.hpp"
#include "mushy/field.hpp"

namespace mushy {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kFourPiSq = 4.0 * std::numbers::pi * std::numbers::pi;

namespace detail {

inline void check_same_grid(const TorusGrid& a, const TorusGrid& b) {
    if (!(a == b)) throw std::invalid_argument("grid mismatch between operands");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Differential operators (spectral multipliers). Odd derivatives zero the
// Nyquist mode so real fields stay real; the Laplacian keeps it.
// ---------------------------------------------------------------------------

inline void laplacian_in_place(SpectralField& c) {
    const int n = c.grid.n;
    for (int a = 0; a < n; ++a) {
        const double k1 = c.grid.freq(a);
        for (int b = 0; b < n; ++b) {
            const double k2 = c.grid.freq(b);
            c.coeff[a * n + b] *= -kFourPiSq * (k1 * k1 + k2 * k2);
        }
    }
}

/// d/dx_axis as a spectral multiplier 2πi k_axis, Nyquist zeroed.
inline void partial_in_place(SpectralField& c, int axis) {
    const int n = c.grid.n;
    const std::complex<double> iu(0.0, 1.0);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const int k = axis == 0 ? c.grid.freq(a) : c.grid.freq(b);
            c.coeff[a * n + b] *= (k == -n / 2) ? 0.0 : kTwoPi * k * iu;
        }
}

inline ScalarField laplacian(const ScalarField& f) {
    SpectralField c = transform(f);
    laplacian_in_place(c);
    return inverse_transform(c);
}

inline VectorField gradient(const ScalarField& f) {
    SpectralField c = transform(f);
    SpectralField c1 = c, c2 = std::move(c);
    partial_in_place(c1, 0);
    partial_in_place(c2, 1);
    return VectorField(inverse_transform(c1), inverse_transform(c2));
}

inline ScalarField divergence(const VectorField& v) {
    detail::check_same_grid(v.u1.grid, v.u2.grid);
    SpectralField c1 = transform(v.u1);
    SpectralField c2 = transform(v.u2);
    partial_in_place(c1, 0);
    partial_in_place(c2, 1);
    for (size_t i = 0; i < c1.coeff.size(); ++i) c1.coeff[i] += c2.coeff[i];
    return inverse_transform(c1);
}

// ---------------------------------------------------------------------------
// Dealiasing: square two-thirds rule, zeroing modes with max(|k1|,|k2|) > n/3.
// ---------------------------------------------------------------------------

inline void dealias_in_place(SpectralField& c) {
    const int n = c.grid.n;
    for (int a = 0; a < n; ++a) {
        const int k1 = std::abs(c.grid.freq(a));
        for (int b = 0; b < n; ++b) {
            const int k2 = std::abs(c.grid.freq(b));
            if (3 * std::max(k1, k2) > n) c.coeff[a * n + b] = 0.0;
        }
    }
}

inline ScalarField dealias(const ScalarField& f) {
    SpectralField c = transform(f);
    dealias_in_place(c);
    return inverse_transform(c);
}

// ---------------------------------------------------------------------------
// Sobolev norms on the zero-mean part: h_norm(f, s) = (Σ_{k≠0} (2π|k|)^{2s} |f̂_k|²)^{1/2}.
// ---------------------------------------------------------------------------

inline double h_norm_sq(const SpectralField& c, double s) {
    const int n = c.grid.n;
    double acc = 0.0;
    for (int a = 0; a < n; ++a) {
        const double k1 = c.grid.freq(a);
        for (int b = 0; b < n; ++b) {
            if (a == 0 && b == 0) continue;
            const double k2 = c.grid.freq(b);
            const double ksq = k1 * k1 + k2 * k2;
            double w;
            if (s == 0.0)
                w = 1.0;
            else if (s == 1.0)
                w = kFourPiSq * ksq;
            else if (s == -1.0)
                w = 1.0 / (kFourPiSq * ksq);
            else
                w = std::pow(kFourPiSq * ksq, s);
            acc += w * std::norm(c.coeff[a * n + b]);
        }
    }
    return acc;
}

inline double h_norm(const SpectralField& c, double s) { return std::sqrt(h_norm_sq(c, s)); }

inline double h_norm(const ScalarField& f, double s) {
    if (!f.finite()) throw std::invalid_argument("h_norm: field has non-finite values");
    return h_norm(transform(f), s);
}

/// Grid quadrature of f·g over the unit-area torus.
inline double l2_inner(const ScalarField& f, const ScalarField& g) {
    detail::check_same_grid(f.grid, g.grid);
    double acc = 0.0;
    for (size_t i = 0; i < f.values.size(); ++i) acc += f.values[i] * g.values[i];
    return acc / f.grid.size();
}

/// Full squared L² norm (includes the mean), ‖f‖₂² = (1/n²) Σ f².
inline double l2_norm_sq(const ScalarField& f) { return l2_inner(f, f); }

}  // namespace mushy
