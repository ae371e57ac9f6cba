#pragma once

// Time integration of the enthalpy equation with divergence-free transport
// noise, in Itô form
//
//     dX = ΔΨ(X) dt + Δg(X) dt - Σ_k α_k σ_k·∇Γ(X) dβ_k + F dt,
//
// together with a midpoint Stratonovich stepper (same law, no Δg corrector)
// used as an independent discretization cross-check, and the pathwise
// diagnostics: weak-form residuals, the per-mode divergence orthogonality
// quadrature, and the energy-inequality margin.
//
// The scheme is IMEX Euler–Maruyama: the linear shift a·Δ is implicit (a
// diagonal spectral solve), the Lipschitz remainder Δ(Ψ+g) - aΔ explicit, and
// the transport term pseudospectral: Γ(X) pointwise, gradient spectral, dot
// product pointwise, product dealiased by the two-thirds rule.

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "mushy/errors.hpp"
#include "mushy/fft.hpp"
#include "mushy/field.hpp"
#include "mushy/noise.hpp"
#include "mushy/phase.hpp"
#include "mushy/profiles.hpp"
#include "mushy/spectral_ops.hpp"

namespace mushy {

enum class Scheme { ItoImex, StratonovichMidpoint };

struct SolverConfig {
    TorusGrid grid;
    double dt = 1e-4;
    double T = 0.1;
    /// Implicit shift; non-positive means "derive from the phase Lipschitz
    /// constants" (Lip Ψ + Lip g).
    double imex_a = 0.0;
    FieldSpec forcing;
    PhaseFunctions phase;
    std::optional<NoiseSpec> noise;
    Scheme scheme = Scheme::ItoImex;
    int diag_stride = 10;
    int snapshot_stride = 0;

    double effective_imex_a() const {
        return imex_a > 0.0 ? imex_a : phase.lip_psi() + phase.lip_g();
    }

    std::uint64_t steps() const {
        return static_cast<std::uint64_t>(std::llround(T / dt));
    }

    void validate() const {
        if (grid.n < 4) throw ConfigError("solver: grid not initialized");
        if (!(dt > 0.0) || !(T > 0.0)) throw ConfigError("solver: dt and T must be positive");
        if (steps() < 1) throw ConfigError("solver: horizon shorter than one step");
        if (diag_stride < 1) throw ConfigError("solver: diag_stride must be >= 1");
        if (snapshot_stride < 0) throw ConfigError("solver: snapshot_stride must be >= 0");
        const double lip = phase.lip_psi() + phase.lip_g();
        const double a = effective_imex_a();
        if (a + 1e-12 < lip)
            throw ConfigError("solver: imex_a must dominate Lip(Psi) + Lip(g) = " +
                              std::to_string(lip));
        const double half_ny = grid.n / 2.0;
        const double stiff = kFourPiSq * half_ny * half_ny;
        if (dt * stiff * std::max(0.0, lip - a) > 0.5)
            throw ConfigError("solver: explicit remainder violates the step-size bound");
        if (noise) {
            if (!(noise->grid == grid)) throw ConfigError("solver: noise grid mismatch");
            // Stability heuristic for the transport term. The per-mode
            // operator norm carries |sigma_k| <= sqrt(2)/|k|, so the relevant
            // magnitude is 2 Σ α_k²/|k|² (= 2 under the unit normalization),
            // not Σ α_k², which grows with the truncation radius.
            const double weighted = 2.0 * noise->family.normalization_sum();
            const double lg = phase.lip_gamma();
            if (dt * weighted * lg * lg * stiff > 4.0)
                throw ConfigError("solver: noise step-size bound violated; reduce dt");
        }
    }
};

/// Per-step observer; receives Γ(X) at the step's left point and the realized
/// velocity increment field U = Σ_k α_k Δβ_k σ_k on the grid.
class StepHook {
  public:
    virtual ~StepHook() = default;
    virtual void on_noise_step(std::uint64_t step, const std::vector<double>& gamma_vals,
                               const std::vector<double>& u1, const std::vector<double>& u2) = 0;
};

namespace detail {

/// Preallocated buffers and spectral tables for one grid/config.
struct SolverWorkspace {
    explicit SolverWorkspace(const SolverConfig& cfg) {
        const int n = cfg.grid.n;
        const size_t n2 = static_cast<size_t>(n) * n;
        lam.resize(n2);
        denom.resize(n2);
        d1.resize(n2);
        d2.resize(n2);
        keep.resize(n2);
        const double a = cfg.effective_imex_a();
        for (int ai = 0; ai < n; ++ai) {
            const int k1 = cfg.grid.freq(ai);
            for (int bi = 0; bi < n; ++bi) {
                const int k2 = cfg.grid.freq(bi);
                const size_t idx = static_cast<size_t>(ai) * n + bi;
                lam[idx] = kFourPiSq * (double(k1) * k1 + double(k2) * k2);
                denom[idx] = 1.0 / (1.0 + cfg.dt * a * lam[idx]);
                d1[idx] = (k1 == -n / 2) ? 0.0 : std::complex<double>(0.0, kTwoPi * k1);
                d2[idx] = (k2 == -n / 2) ? 0.0 : std::complex<double>(0.0, kTwoPi * k2);
                keep[idx] = 3 * std::max(std::abs(k1), std::abs(k2)) <= n ? 1 : 0;
            }
        }
        ScalarField f = cfg.forcing.build(cfg.grid);
        fhat.assign(n2, {0.0, 0.0});
        cw1.resize(n2);
        cw2.resize(n2);
        detail::transform_raw(cfg.grid, f.values.data(), cw1.data(), fhat.data());
        rhat.resize(n2);
        ghat.resize(n2);
        w1hat.resize(n2);
        w2hat.resize(n2);
        u1hat.resize(n2);
        u2hat.resize(n2);
        phat.resize(n2);
        yhat.resize(n2);
        rvals.resize(n2);
        gvals.resize(n2);
        w1.resize(n2);
        w2.resize(n2);
        u1.resize(n2);
        u2.resize(n2);
        pvals.resize(n2);
        midvals.resize(n2);
        if (cfg.noise) dbeta.resize(cfg.noise->mode_count());
    }

    std::vector<double> lam, denom;
    std::vector<std::complex<double>> d1, d2;
    std::vector<char> keep;
    std::vector<std::complex<double>> fhat;
    std::vector<std::complex<double>> cw1, cw2;  // transform scratch
    std::vector<std::complex<double>> rhat, ghat, w1hat, w2hat, u1hat, u2hat, phat, yhat;
    std::vector<double> rvals, gvals, w1, w2, u1, u2, pvals, midvals, dbeta;
};

struct StepStats {
    double h1_seminorm_sq = 0.0;  // ‖∇X‖₂² of the input state
};

inline bool noise_active(const SolverConfig& cfg, bool noise_on) {
    return noise_on && cfg.noise && !cfg.noise->modes.empty() &&
           cfg.noise->family.sup_norm != 0.0;
}

/// One step of the shared core. `with_g` toggles the Δg corrector in the
/// drift, `midpoint` re-evaluates the transport increment at the midpoint
/// predictor. When the noise is active the caller must have filled ws.dbeta
/// with the mode increments for this step. The floating-point operation
/// sequence is fixed: results are bitwise reproducible for identical inputs,
/// and the zero-noise path is the deterministic stepper verbatim.
inline void core_step(SolverWorkspace& ws, const SolverConfig& cfg, bool with_g, bool noise_on,
                      bool midpoint, std::uint64_t step_index, std::uint64_t replica,
                      const std::vector<double>& x, const std::vector<std::complex<double>>& xhat,
                      std::vector<double>& x_out, std::vector<std::complex<double>>& xhat_out,
                      StepStats* stats, StepHook* hook) {
    const int n = cfg.grid.n;
    const size_t n2 = static_cast<size_t>(n) * n;
    const PhaseFunctions& ph = cfg.phase;
    const double dt = cfg.dt;
    const double a = cfg.effective_imex_a();

    if (stats) {
        double acc = 0.0;
        for (size_t i = 0; i < n2; ++i) acc += ws.lam[i] * std::norm(xhat[i]);
        stats->h1_seminorm_sq = acc;
    }

    if (with_g)
        for (size_t i = 0; i < n2; ++i) ws.rvals[i] = ph.Psi(x[i]) + ph.g_of(x[i]);
    else
        for (size_t i = 0; i < n2; ++i) ws.rvals[i] = ph.Psi(x[i]);
    transform_raw(cfg.grid, ws.rvals.data(), ws.cw1.data(), ws.rhat.data());

    for (size_t i = 0; i < n2; ++i)
        ws.yhat[i] =
            (xhat[i] + dt * (a * ws.lam[i] * xhat[i] - ws.lam[i] * ws.rhat[i] + ws.fhat[i])) *
            ws.denom[i];

    const bool do_noise = noise_active(cfg, noise_on);
    if (do_noise) {
        const NoiseSpec& spec = *cfg.noise;
        std::fill(ws.u1hat.begin(), ws.u1hat.end(), std::complex<double>(0.0, 0.0));
        std::fill(ws.u2hat.begin(), ws.u2hat.end(), std::complex<double>(0.0, 0.0));
        spec.accumulate_velocity_spectrum(ws.dbeta, ws.u1hat.data(), ws.u2hat.data());
        inverse_raw(cfg.grid, ws.u1hat.data(), ws.cw1.data(), ws.cw2.data(), ws.u1.data());
        inverse_raw(cfg.grid, ws.u2hat.data(), ws.cw1.data(), ws.cw2.data(), ws.u2.data());

        auto transport = [&](const std::vector<double>& state) {
            for (size_t i = 0; i < n2; ++i) ws.gvals[i] = ph.Gamma(state[i]);
            transform_raw(cfg.grid, ws.gvals.data(), ws.cw1.data(), ws.ghat.data());
            for (size_t i = 0; i < n2; ++i) {
                ws.w1hat[i] = ws.d1[i] * ws.ghat[i];
                ws.w2hat[i] = ws.d2[i] * ws.ghat[i];
            }
            inverse_raw(cfg.grid, ws.w1hat.data(), ws.cw1.data(), ws.cw2.data(), ws.w1.data());
            inverse_raw(cfg.grid, ws.w2hat.data(), ws.cw1.data(), ws.cw2.data(), ws.w2.data());
            for (size_t i = 0; i < n2; ++i)
                ws.pvals[i] = ws.u1[i] * ws.w1[i] + ws.u2[i] * ws.w2[i];
            transform_raw(cfg.grid, ws.pvals.data(), ws.cw1.data(), ws.phat.data());
            for (size_t i = 0; i < n2; ++i)
                if (!ws.keep[i]) ws.phat[i] = 0.0;
        };

        transport(x);
        if (hook) hook->on_noise_step(step_index, ws.gvals, ws.u1, ws.u2);
        if (midpoint) {
            inverse_raw(cfg.grid, ws.phat.data(), ws.cw1.data(), ws.cw2.data(), ws.pvals.data());
            for (size_t i = 0; i < n2; ++i) ws.midvals[i] = x[i] - 0.5 * ws.pvals[i];
            transport(ws.midvals);
        }
        for (size_t i = 0; i < n2; ++i) ws.yhat[i] -= ws.phat[i];
    } else if (hook && noise_on) {
        // A configured hook still observes quiescent steps as zero fields.
        std::fill(ws.gvals.begin(), ws.gvals.end(), 0.0);
        std::fill(ws.u1.begin(), ws.u1.end(), 0.0);
        std::fill(ws.u2.begin(), ws.u2.end(), 0.0);
        hook->on_noise_step(step_index, ws.gvals, ws.u1, ws.u2);
    }

    inverse_raw(cfg.grid, ws.yhat.data(), ws.cw1.data(), ws.cw2.data(), x_out.data());
    xhat_out = ws.yhat;
    for (size_t i = 0; i < n2; ++i)
        if (!std::isfinite(x_out[i]))
            throw PathAbortError(step_index, double(step_index + 1) * dt, replica);
}

inline ScalarField run_single_step(const ScalarField& x, std::uint64_t step_index,
                                   std::uint64_t replica, const SolverConfig& cfg, bool with_g,
                                   bool noise_on, bool midpoint) {
    cfg.validate();
    if (!(x.grid == cfg.grid)) throw std::invalid_argument("step: state grid mismatch");
    SolverWorkspace ws(cfg);
    std::vector<std::complex<double>> xhat(x.values.size());
    transform_raw(cfg.grid, x.values.data(), ws.cw1.data(), xhat.data());
    ScalarField out(cfg.grid);
    std::vector<std::complex<double>> outhat(x.values.size());
    if (noise_active(cfg, noise_on))
        cfg.noise->sample_increments(step_index, cfg.dt, replica, ws.dbeta);
    core_step(ws, cfg, with_g, noise_on, midpoint, step_index, replica, x.values, xhat,
              out.values, outhat, nullptr, nullptr);
    out.refresh_mean();
    return out;
}

}  // namespace detail

/// One IMEX Euler–Maruyama step of the Itô-form equation.
inline ScalarField step_ito(const ScalarField& x, std::uint64_t step_index, std::uint64_t replica,
                            const SolverConfig& cfg) {
    return detail::run_single_step(x, step_index, replica, cfg, /*with_g=*/true,
                                   /*noise_on=*/true, /*midpoint=*/false);
}

/// One midpoint step of the Stratonovich form (no Δg corrector; the transport
/// increment is evaluated at the one-pass midpoint predictor).
inline ScalarField step_stratonovich(const ScalarField& x, std::uint64_t step_index,
                                     std::uint64_t replica, const SolverConfig& cfg) {
    return detail::run_single_step(x, step_index, replica, cfg, /*with_g=*/false,
                                   /*noise_on=*/true, /*midpoint=*/true);
}

struct Trajectory {
    std::vector<double> times;
    std::vector<ScalarField> snapshots;
    int stride = 0;  // steps between stored snapshots (0 = none stored)
    std::uint64_t replica = 0;
};

struct PathDiagnostics {
    std::vector<double> times;
    std::vector<double> l2_energy;       // ‖X(t)‖₂²
    std::vector<double> h1_dissipation;  // ∫₀ᵗ ‖∇X(s)‖₂² ds, left-endpoint rule
    std::vector<double> mean_series;
};

struct PathResult {
    Trajectory trajectory;
    PathDiagnostics diagnostics;
};

/// Per-sample observer for streaming consumers (distances, increment probes).
class SampleObserver {
  public:
    virtual ~SampleObserver() = default;
    virtual void on_sample(size_t sample_index, double t,
                           const std::vector<std::complex<double>>& xhat,
                           const std::vector<double>& xvals) = 0;
};

/// Advances one path to the horizon, recording diagnostics every diag_stride
/// steps and snapshots every snapshot_stride steps. Reusable across replicas.
class PathRunner {
  public:
    explicit PathRunner(SolverConfig cfg, std::optional<bool> drift_g_override = std::nullopt)
        : cfg_(std::move(cfg)), ws_(cfg_) {
        cfg_.validate();
        noise_on_ = cfg_.noise.has_value();
        midpoint_ = cfg_.scheme == Scheme::StratonovichMidpoint;
        drift_g_ = drift_g_override.value_or(cfg_.scheme != Scheme::StratonovichMidpoint);
    }

    const SolverConfig& config() const { return cfg_; }

    PathResult run(const ScalarField& x0, std::uint64_t replica, StepHook* hook = nullptr,
                   SampleObserver* observer = nullptr) {
        if (!(x0.grid == cfg_.grid)) throw std::invalid_argument("simulate: x0 grid mismatch");
        if (!x0.finite()) throw std::invalid_argument("simulate: x0 has non-finite values");
        const std::uint64_t steps = cfg_.steps();
        const size_t n2 = x0.values.size();

        std::vector<double> x = x0.values, xn(n2);
        std::vector<std::complex<double>> xhat(n2), xnhat(n2);
        detail::transform_raw(cfg_.grid, x.data(), ws_.cw1.data(), xhat.data());

        PathResult out;
        out.trajectory.stride = cfg_.snapshot_stride;
        out.trajectory.replica = replica;
        double h1_acc = 0.0;
        size_t sample_index = 0;

        auto record = [&](std::uint64_t step) {
            const double t = double(step) * cfg_.dt;
            const bool diag_due = step % cfg_.diag_stride == 0 || step == steps;
            if (diag_due) {
                double l2 = 0.0, mean = 0.0;
                for (double v : x) {
                    l2 += v * v;
                    mean += v;
                }
                out.diagnostics.times.push_back(t);
                out.diagnostics.l2_energy.push_back(l2 / double(n2));
                out.diagnostics.h1_dissipation.push_back(h1_acc);
                out.diagnostics.mean_series.push_back(mean / double(n2));
                if (observer) observer->on_sample(sample_index, t, xhat, x);
                ++sample_index;
            }
            if (cfg_.snapshot_stride > 0 && (step % cfg_.snapshot_stride == 0 || step == steps)) {
                ScalarField snap(cfg_.grid);
                snap.values = x;
                snap.refresh_mean();
                out.trajectory.times.push_back(t);
                out.trajectory.snapshots.push_back(std::move(snap));
            }
        };

        record(0);
        detail::StepStats stats;
        const bool sample_noise = detail::noise_active(cfg_, noise_on_);
        for (std::uint64_t s = 0; s < steps; ++s) {
            if (sample_noise) cfg_.noise->sample_increments(s, cfg_.dt, replica, ws_.dbeta);
            detail::core_step(ws_, cfg_, drift_g_, noise_on_, midpoint_, s, replica, x, xhat, xn,
                              xnhat, &stats, hook);
            h1_acc += cfg_.dt * stats.h1_seminorm_sq;
            x.swap(xn);
            xhat.swap(xnhat);
            if (s + 1 < steps)
                record(s + 1);
            else
                record(steps);
        }
        return out;
    }

  private:
    SolverConfig cfg_;
    detail::SolverWorkspace ws_;
    bool noise_on_ = false;
    bool midpoint_ = false;
    bool drift_g_ = true;
};

inline PathResult simulate_path(const ScalarField& x0, const SolverConfig& cfg,
                                std::uint64_t replica, StepHook* hook = nullptr) {
    PathRunner runner(cfg);
    return runner.run(x0, replica, hook);
}

// ---------------------------------------------------------------------------
// Weak-form residual: both sides of the test-mode identity
//   (X(t), e_j) = (x0, e_j) + ∫(F, e_j) + ∫(Ψ(X), Δe_j) + ∫(g(X), Δe_j)
//                 + Σ_k ∫ α_k (σ_k Γ(X), ∇e_j) dβ_k
// with trapezoid time quadrature and the realized increments (regenerated
// from the counter-based stream) in the stochastic sum.
// ---------------------------------------------------------------------------

struct ResidualSeries {
    std::vector<double> times;
    std::vector<double> residual;
};

inline std::vector<ResidualSeries> weak_residual_multi(const Trajectory& traj,
                                                       const std::vector<ModeIndex>& test_modes,
                                                       const SolverConfig& cfg) {
    if (traj.stride != 1)
        throw std::invalid_argument("weak_residual: trajectory must be stored at stride 1");
    if (traj.snapshots.empty()) throw std::invalid_argument("weak_residual: empty trajectory");
    cfg.validate();
    const TorusGrid& g = cfg.grid;
    const int n = g.n;
    const size_t n2 = static_cast<size_t>(n) * n;
    const size_t m_count = traj.snapshots.size();
    const size_t steps = m_count - 1;
    const double dt = cfg.dt;

    struct TestMode {
        std::vector<double> e, de1, de2;
        double lam_j = 0.0;
    };
    std::vector<TestMode> tms;
    for (const ModeIndex& j : test_modes) {
        TestMode tm;
        tm.e.resize(n2);
        tm.de1.resize(n2);
        tm.de2.resize(n2);
        tm.lam_j = kFourPiSq * j.norm_sq();
        for (int i = 0; i < n; ++i)
            for (int jj = 0; jj < n; ++jj) {
                const double x = g.coord(i), y = g.coord(jj);
                const double phase = kTwoPi * (j.k1 * x + j.k2 * y);
                const double root2 = std::sqrt(2.0);
                const size_t idx = static_cast<size_t>(i) * n + jj;
                if (j.is_plus()) {
                    tm.e[idx] = root2 * std::cos(phase);
                    const double d = -root2 * kTwoPi * std::sin(phase);
                    tm.de1[idx] = j.k1 * d;
                    tm.de2[idx] = j.k2 * d;
                } else {
                    tm.e[idx] = root2 * std::sin(phase);
                    const double d = root2 * kTwoPi * std::cos(phase);
                    tm.de1[idx] = j.k1 * d;
                    tm.de2[idx] = j.k2 * d;
                }
            }
        tms.push_back(std::move(tm));
    }

    const ScalarField forcing = cfg.forcing.build(g);
    const bool has_noise =
        cfg.noise && !cfg.noise->modes.empty() && cfg.noise->family.sup_norm != 0.0;

    // Per-snapshot projections.
    std::vector<std::vector<double>> proj_x(tms.size(), std::vector<double>(m_count));
    std::vector<std::vector<double>> proj_psi(tms.size(), std::vector<double>(m_count));
    std::vector<std::vector<double>> proj_g(tms.size(), std::vector<double>(m_count));
    std::vector<double> proj_f(tms.size());
    std::vector<double> psi_buf(n2), g_buf(n2);
    for (size_t m = 0; m < m_count; ++m) {
        const std::vector<double>& xv = traj.snapshots[m].values;
        for (size_t i = 0; i < n2; ++i) {
            psi_buf[i] = cfg.phase.Psi(xv[i]);
            g_buf[i] = cfg.phase.g_of(xv[i]);
        }
        for (size_t t = 0; t < tms.size(); ++t) {
            double px = 0.0, pp = 0.0, pg = 0.0;
            for (size_t i = 0; i < n2; ++i) {
                px += xv[i] * tms[t].e[i];
                pp += psi_buf[i] * tms[t].e[i];
                pg += g_buf[i] * tms[t].e[i];
            }
            proj_x[t][m] = px / double(n2);
            proj_psi[t][m] = -tms[t].lam_j * pp / double(n2);
            proj_g[t][m] = -tms[t].lam_j * pg / double(n2);
        }
    }
    for (size_t t = 0; t < tms.size(); ++t) {
        double acc = 0.0;
        for (size_t i = 0; i < n2; ++i) acc += forcing.values[i] * tms[t].e[i];
        proj_f[t] = acc / double(n2);
    }

    // Stochastic sums: per step i, Σ_k α_k Δβ_k (σ_k Γ(X_i), ∇e_j)
    //                = (Γ(X_i), U_i·∇e_j) with U_i the realized velocity field.
    std::vector<std::vector<double>> stoch(tms.size(), std::vector<double>(m_count, 0.0));
    if (has_noise) {
        const NoiseSpec& spec = *cfg.noise;
        std::vector<double> dbeta(spec.mode_count());
        std::vector<std::complex<double>> u1hat(n2), u2hat(n2), cw1(n2), cw2(n2);
        std::vector<double> u1(n2), u2(n2), gv(n2);
        for (size_t s = 0; s < steps; ++s) {
            spec.sample_increments(s, dt, traj.replica, dbeta);
            std::fill(u1hat.begin(), u1hat.end(), std::complex<double>(0.0, 0.0));
            std::fill(u2hat.begin(), u2hat.end(), std::complex<double>(0.0, 0.0));
            spec.accumulate_velocity_spectrum(dbeta, u1hat.data(), u2hat.data());
            detail::inverse_raw(g, u1hat.data(), cw1.data(), cw2.data(), u1.data());
            detail::inverse_raw(g, u2hat.data(), cw1.data(), cw2.data(), u2.data());
            const std::vector<double>& xv = traj.snapshots[s].values;
            for (size_t i = 0; i < n2; ++i) gv[i] = cfg.phase.Gamma(xv[i]);
            for (size_t t = 0; t < tms.size(); ++t) {
                double acc = 0.0;
                for (size_t i = 0; i < n2; ++i)
                    acc += gv[i] * (u1[i] * tms[t].de1[i] + u2[i] * tms[t].de2[i]);
                stoch[t][s + 1] = stoch[t][s] + acc / double(n2);
            }
        }
    }

    std::vector<ResidualSeries> out(tms.size());
    for (size_t t = 0; t < tms.size(); ++t) {
        out[t].times.resize(m_count);
        out[t].residual.resize(m_count);
        double trap_psi = 0.0, trap_g = 0.0;
        for (size_t m = 0; m < m_count; ++m) {
            out[t].times[m] = traj.times[m];
            if (m > 0) {
                trap_psi += 0.5 * dt * (proj_psi[t][m - 1] + proj_psi[t][m]);
                trap_g += 0.5 * dt * (proj_g[t][m - 1] + proj_g[t][m]);
            }
            const double t_m = traj.times[m];
            out[t].residual[m] = proj_x[t][m] - proj_x[t][0] - t_m * proj_f[t] - trap_psi -
                                 trap_g - stoch[t][m];
        }
    }
    return out;
}

inline ResidualSeries weak_residual(const Trajectory& traj, ModeIndex test_mode,
                                    const SolverConfig& cfg) {
    return weak_residual_multi(traj, {test_mode}, cfg).front();
}

// ---------------------------------------------------------------------------
// Divergence orthogonality: discrete quadrature of ∫ σ_k·∇Γ̃(X) dx, where Γ̃
// is the exact primitive of Γ. Vanishes to spectral accuracy because
// div σ_k = 0 and the pairing only touches the ±k coefficients.
// ---------------------------------------------------------------------------

/// Quadrature of v·∇p over the torus for an analytic vector field v given the
/// precomputed spectral gradient (p1, p2) of the primitive.
template <typename VecFn>
double flux_quadrature(const TorusGrid& g, const ScalarField& p1, const ScalarField& p2,
                       VecFn&& vec) {
    double acc = 0.0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            const std::array<double, 2> v = vec(g.coord(i), g.coord(j));
            acc += v[0] * p1.at(i, j) + v[1] * p2.at(i, j);
        }
    return acc / g.size();
}

inline std::vector<std::pair<ModeIndex, double>> divergence_orthogonality_check(
    const ScalarField& X, const PhaseFunctions& phase, int kmax) {
    if (!X.finite()) throw std::invalid_argument("divergence_orthogonality_check: non-finite state");
    ScalarField prim(X.grid);
    for (size_t i = 0; i < X.values.size(); ++i)
        prim.values[i] = phase.Gamma_primitive(X.values[i]);
    prim.refresh_mean();
    VectorField grad = gradient(prim);
    std::vector<std::pair<ModeIndex, double>> out;
    for (const ModeIndex& k : CoefficientFamily::enumerate_modes(kmax)) {
        const double q = flux_quadrature(X.grid, grad.u1, grad.u2,
                                         [&](double x, double y) { return sigma(k, x, y); });
        out.emplace_back(k, q);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pathwise energy inequality margin:
//   m(t) = ‖X(t)‖₂² + 2 ψ₀ ∫₀ᵗ ‖∇X‖₂² - ‖x₀‖₂²  must stay below 10·dt·‖x₀‖₂².
// ---------------------------------------------------------------------------

struct EnergyMarginReport {
    double tol = 0.0;
    double worst_margin = 0.0;
    double worst_time = 0.0;
    bool pass = false;
    std::vector<double> margins;
};

inline EnergyMarginReport energy_inequality_check(const PathDiagnostics& diag,
                                                  const SolverConfig& cfg) {
    if (!cfg.forcing.is_zero())
        throw std::invalid_argument("energy_inequality_check requires F = 0");
    if (diag.times.empty()) throw std::invalid_argument("energy_inequality_check: empty diagnostics");
    EnergyMarginReport rep;
    const double e0 = diag.l2_energy.front();
    const double psi0 = cfg.phase.psi0();
    rep.tol = 10.0 * cfg.dt * e0;
    rep.worst_margin = -std::numeric_limits<double>::infinity();
    rep.margins.resize(diag.times.size());
    for (size_t i = 0; i < diag.times.size(); ++i) {
        const double m = diag.l2_energy[i] + 2.0 * psi0 * diag.h1_dissipation[i] - e0;
        rep.margins[i] = m;
        if (m > rep.worst_margin) {
            rep.worst_margin = m;
            rep.worst_time = diag.times[i];
        }
    }
    rep.pass = rep.worst_margin <= rep.tol;
    return rep;
}

}  // namespace mushy
