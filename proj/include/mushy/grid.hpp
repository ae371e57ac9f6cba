#pragma once

#include <stdexcept>

namespace mushy {

/// Uniform n×n sampling of the unit torus, viewed as [-1/2, 1/2)² with periodic
/// boundary conditions. Node (i, j) sits at (-1/2 + i/n, -1/2 + j/n).
struct TorusGrid {
    int n = 0;

    TorusGrid() = default;
    explicit TorusGrid(int n_) : n(n_) {
        if (n < 4 || n % 2 != 0)
            throw std::invalid_argument("TorusGrid: n must be even and >= 4, got " +
                                        std::to_string(n));
    }

    int size() const { return n * n; }
    double spacing() const { return 1.0 / n; }
    double coord(int i) const { return -0.5 + static_cast<double>(i) / n; }

    /// Signed integer frequency of FFT bin a in [0, n); the single Nyquist bin
    /// is reported as -n/2.
    int freq(int a) const { return a < n / 2 ? a : a - n; }
    /// FFT bin of an integer frequency k (any k, reduced mod n).
    int bin(int k) const {
        int b = k % n;
        return b < 0 ? b + n : b;
    }

    bool operator==(const TorusGrid&) const = default;
};

}  // namespace mushy
