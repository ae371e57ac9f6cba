#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "mushy/grid.hpp"

namespace mushy {

/// Real samples of a periodic function on the torus, row-major with the first
/// coordinate as the row index. The spatial mean is tracked alongside the
/// samples; every H^s diagnostic acts on the zero-mean part only.
struct ScalarField {
    TorusGrid grid;
    std::vector<double> values;
    double mean = 0.0;

    ScalarField() = default;
    explicit ScalarField(const TorusGrid& g) : grid(g), values(g.size(), 0.0), mean(0.0) {}
    ScalarField(const TorusGrid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (static_cast<int>(values.size()) != grid.size())
            throw std::invalid_argument("ScalarField: sample count does not match grid");
        refresh_mean();
    }

    static ScalarField from_function(const TorusGrid& g,
                                     const std::function<double(double, double)>& f) {
        ScalarField out(g);
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j) out.values[i * g.n + j] = f(g.coord(i), g.coord(j));
        out.refresh_mean();
        return out;
    }

    double& at(int i, int j) { return values[i * grid.n + j]; }
    double at(int i, int j) const { return values[i * grid.n + j]; }

    void refresh_mean() {
        double s = 0.0;
        for (double v : values) s += v;
        mean = s / grid.size();
    }

    bool finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

/// Fourier coefficients f̂_k of a ScalarField, stored by FFT bin (row-major),
/// normalized so that f̂_k = (1/n²) Σ f(x) exp(-2πi k·x) with x the actual
/// node coordinates in [-1/2, 1/2)².
struct SpectralField {
    TorusGrid grid;
    std::vector<std::complex<double>> coeff;

    SpectralField() = default;
    explicit SpectralField(const TorusGrid& g) : grid(g), coeff(g.size(), {0.0, 0.0}) {}

    std::complex<double>& at_bin(int a, int b) { return coeff[a * grid.n + b]; }
    std::complex<double> at_bin(int a, int b) const { return coeff[a * grid.n + b]; }
    /// Coefficient of integer wavevector (k1, k2), |k_i| <= n/2.
    std::complex<double> at_mode(int k1, int k2) const {
        return coeff[grid.bin(k1) * grid.n + grid.bin(k2)];
    }
};

struct VectorField {
    ScalarField u1, u2;

    VectorField() = default;
    VectorField(ScalarField a, ScalarField b) : u1(std::move(a)), u2(std::move(b)) {
        if (!(u1.grid == u2.grid))
            throw std::invalid_argument("VectorField: components must share a grid");
    }
};

}  // namespace mushy
