#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "mushy/field.hpp"
#include "mushy/grid.hpp"

namespace mushy {

/// Cached FFTW plans per grid size. Plan creation is serialized (FFTW's
/// planner is not thread-safe); execution through fftw_execute_dft on
/// caller-owned buffers is safe concurrently. Plans are created with
/// FFTW_ESTIMATE so results do not depend on runtime measurement, and
/// FFTW_UNALIGNED so any buffer address is acceptable.
class FftPlans {
  public:
    static const FftPlans& get(int n) {
        static std::mutex mu;
        static std::map<int, std::unique_ptr<FftPlans>> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(n);
        if (it == cache.end()) it = cache.emplace(n, std::unique_ptr<FftPlans>(new FftPlans(n))).first;
        return *it->second;
    }

    void forward(const std::complex<double>* in, std::complex<double>* out) const {
        fftw_execute_dft(fwd_,
                         reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                         reinterpret_cast<fftw_complex*>(out));
    }
    void backward(const std::complex<double>* in, std::complex<double>* out) const {
        fftw_execute_dft(bwd_,
                         reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                         reinterpret_cast<fftw_complex*>(out));
    }

    FftPlans(const FftPlans&) = delete;
    FftPlans& operator=(const FftPlans&) = delete;
    ~FftPlans() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }

  private:
    explicit FftPlans(int n) {
        std::vector<std::complex<double>> a(static_cast<size_t>(n) * n), b(a.size());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        fwd_ = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(a.data()),
                                reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD, flags);
        bwd_ = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(a.data()),
                                reinterpret_cast<fftw_complex*>(b.data()), FFTW_BACKWARD, flags);
    }

    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

namespace detail {

// The node coordinates start at -1/2, so mode k picks up exp(+πi(k1+k2)) =
// (-1)^(a+b) relative to the index-based DFT. n is even, so bin parity equals
// frequency parity.
inline double coord_phase(int a, int b) { return ((a + b) & 1) ? -1.0 : 1.0; }

/// values -> coefficients; `work` is an n² scratch buffer.
inline void transform_raw(const TorusGrid& g, const double* vals, std::complex<double>* work,
                          std::complex<double>* out) {
    const int n = g.n;
    for (int i = 0; i < n * n; ++i) work[i] = vals[i];
    FftPlans::get(n).forward(work, out);
    const double scale = 1.0 / (static_cast<double>(n) * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) out[a * n + b] *= scale * coord_phase(a, b);
}

/// coefficients -> values; `work` and `work2` are n² scratch buffers.
inline void inverse_raw(const TorusGrid& g, const std::complex<double>* coeff,
                        std::complex<double>* work, std::complex<double>* work2, double* out) {
    const int n = g.n;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) work[a * n + b] = coeff[a * n + b] * coord_phase(a, b);
    FftPlans::get(n).backward(work, work2);
    for (int i = 0; i < n * n; ++i) out[i] = work2[i].real();
}

}  // namespace detail

/// Discrete Fourier transform with coefficient of mode k equal to
/// (1/n²) Σ f(x) exp(-2πi k·x).
inline SpectralField transform(const ScalarField& f) {
    SpectralField out(f.grid);
    std::vector<std::complex<double>> work(f.grid.size());
    detail::transform_raw(f.grid, f.values.data(), work.data(), out.coeff.data());
    return out;
}

/// Exact inverse of transform(); the imaginary residue of conjugate-symmetric
/// input is discarded.
inline ScalarField inverse_transform(const SpectralField& c) {
    ScalarField out(c.grid);
    std::vector<std::complex<double>> work(c.grid.size()), work2(c.grid.size());
    detail::inverse_raw(c.grid, c.coeff.data(), work.data(), work2.data(), out.values.data());
    out.refresh_mean();
    return out;
}

}  // namespace mushy
