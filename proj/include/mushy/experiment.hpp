#pragma once

// Monte Carlo harness for the flattening-coefficient experiment: for a
// sequence of truncation radii N, simulate ensembles of the stochastic
// dynamics, measure sup-in-time H^{-1} distances to the deterministic limit
// trajectory, and track the empirical Hölder increments and the decay of the
// test-mode stochastic integral. Replicas are independent work items; results
// are merged in replica order, so reports are byte-identical for any thread
// count.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "mushy/errors.hpp"
#include "mushy/limit.hpp"
#include "mushy/solver.hpp"

namespace mushy {

struct HolderParams {
    double beta = 5.0;
    double r = 4.0;
    int pairs = 64;

    bool operator==(const HolderParams&) const = default;
};

struct ExperimentPlan {
    std::vector<int> Ns;
    int replicas = 2;
    std::uint64_t base_seed = 0;
    TorusGrid grid;
    double dt = 1e-4;
    double T = 0.25;
    double imex_a = 0.0;
    PhaseFunctions phase;
    FieldSpec forcing;
    FieldSpec x0;
    int distance_stride = 10;
    HolderParams holder;
    double max_abort_fraction = 0.01;
    ModeIndex probe_mode{1, 0};

    LimitConfig limit_cfg() const {
        LimitConfig cfg;
        cfg.grid = grid;
        cfg.dt = dt;
        cfg.T = T;
        cfg.imex_a = imex_a;
        cfg.forcing = forcing;
        cfg.phase = phase;
        cfg.diag_stride = distance_stride;
        return cfg;
    }

    SolverConfig solver_for(int N) const {
        SolverConfig cfg = limit_cfg().as_solver();
        cfg.noise = NoiseSpec(CoefficientFamily::flat(N), grid,
                              rng::derive_seed(base_seed, static_cast<std::uint64_t>(N)));
        return cfg;
    }

    void validate() const {
        if (Ns.empty()) throw ConfigError("experiment: Ns must be nonempty");
        for (size_t i = 0; i < Ns.size(); ++i) {
            if (Ns[i] < 1) throw ConfigError("experiment: truncation radii must be >= 1");
            if (i > 0 && Ns[i] <= Ns[i - 1])
                throw ConfigError("experiment: Ns must be strictly increasing");
        }
        if (replicas < 2) throw ConfigError("experiment: need at least 2 replicas");
        if (holder.pairs < 2) throw ConfigError("experiment: holder pair count must be >= 2");
        if (holder.r < 1.0 || holder.beta <= 0.0)
            throw ConfigError("experiment: holder parameters out of range");
        if (!(max_abort_fraction >= 0.0 && max_abort_fraction <= 1.0))
            throw ConfigError("experiment: abort fraction must lie in [0, 1]");
        if (probe_mode.k1 == 0 && probe_mode.k2 == 0)
            throw ConfigError("experiment: probe mode must be nonzero");
        solver_for(Ns.back()).validate();
    }
};

struct ConvergenceRow {
    int N = 0;
    double c_N = 0.0;            // sup-norm of the coefficient family
    double mean_distance = 0.0;  // d_N = mean over replicas of sup_t H^{-1} distance
    double max_distance = 0.0;
    double std_error = 0.0;
    double mean_truncated = 0.0;  // mean of min(D_m, 1)
    double martingale_stat = 0.0; // mean over replicas of sup_t |S(t)|^2
    std::optional<double> holder_exponent;
    int aborted = 0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    HolderParams holder;
    ModeIndex probe_mode{1, 0};
    std::uint64_t base_seed = 0;
    int replicas = 0;
    std::vector<std::string> abort_log;
};

namespace detail {

inline void parallel_for_index(int count, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min(threads, count);
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

/// Sobolev weight table (2π|k|)^{2s} with the zero mode excluded.
inline std::vector<double> sobolev_weights(const TorusGrid& g, double s) {
    std::vector<double> w(static_cast<size_t>(g.n) * g.n, 0.0);
    for (int a = 0; a < g.n; ++a) {
        const double k1 = g.freq(a);
        for (int b = 0; b < g.n; ++b) {
            if (a == 0 && b == 0) continue;
            const double k2 = g.freq(b);
            w[static_cast<size_t>(a) * g.n + b] = std::pow(kFourPiSq * (k1 * k1 + k2 * k2), s);
        }
    }
    return w;
}

inline double weighted_diff_norm_sq(const std::vector<std::complex<double>>& a,
                                    const std::vector<std::complex<double>>& b,
                                    const std::vector<double>& w) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += w[i] * std::norm(a[i] - b[i]);
    return acc;
}

/// Accumulates S(t) = Σ_steps (Γ(X), U·∇e_j)₂ and its running sup of |S|².
class MartingaleProbe : public StepHook {
  public:
    MartingaleProbe(const TorusGrid& g, ModeIndex ej) : n2_(static_cast<size_t>(g.n) * g.n) {
        de1_.resize(n2_);
        de2_.resize(n2_);
        const double root2 = std::sqrt(2.0);
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j) {
                const double x = g.coord(i), y = g.coord(j);
                const double phase = kTwoPi * (ej.k1 * x + ej.k2 * y);
                const double d = ej.is_plus() ? -root2 * kTwoPi * std::sin(phase)
                                              : root2 * kTwoPi * std::cos(phase);
                de1_[static_cast<size_t>(i) * g.n + j] = ej.k1 * d;
                de2_[static_cast<size_t>(i) * g.n + j] = ej.k2 * d;
            }
    }

    void on_noise_step(std::uint64_t, const std::vector<double>& gamma_vals,
                       const std::vector<double>& u1, const std::vector<double>& u2) override {
        double q = 0.0;
        for (size_t i = 0; i < n2_; ++i)
            q += gamma_vals[i] * (u1[i] * de1_[i] + u2[i] * de2_[i]);
        running_ += q / double(n2_);
        sup_sq_ = std::max(sup_sq_, running_ * running_);
    }

    double sup_sq() const { return sup_sq_; }

  private:
    size_t n2_;
    std::vector<double> de1_, de2_;
    double running_ = 0.0;
    double sup_sq_ = 0.0;
};

struct IncrementBins {
    // Dyadic separations in sample-instant units; sums of ‖ΔX‖^r_{H^{-β}}.
    std::vector<int> seps;
    std::vector<double> sums;
    std::vector<std::int64_t> counts;

    void merge(const IncrementBins& other) {
        if (seps.empty()) {
            *this = other;
            return;
        }
        for (size_t i = 0; i < seps.size(); ++i) {
            sums[i] += other.sums[i];
            counts[i] += other.counts[i];
        }
    }
};

inline std::vector<int> dyadic_separations(size_t instants) {
    std::vector<int> seps;
    for (int d = 1; d < static_cast<int>(instants); d *= 2) seps.push_back(d);
    return seps;
}

/// Evenly spaced start indices for pairs (i, i+d): deterministic, no RNG.
inline std::vector<int> pair_starts(size_t instants, int d, int pairs) {
    const int avail = static_cast<int>(instants) - d;
    const int count = std::min(pairs, avail);
    std::vector<int> starts;
    if (count <= 0) return starts;
    if (count == 1) {
        starts.push_back(0);
        return starts;
    }
    for (int p = 0; p < count; ++p)
        starts.push_back(static_cast<int>((static_cast<long long>(p) * (avail - 1)) / (count - 1)));
    return starts;
}

inline IncrementBins increment_bins_from_spectra(
    const std::vector<std::vector<std::complex<double>>>& hats, const std::vector<double>& wbeta,
    double r, int pairs) {
    IncrementBins bins;
    bins.seps = dyadic_separations(hats.size());
    bins.sums.assign(bins.seps.size(), 0.0);
    bins.counts.assign(bins.seps.size(), 0);
    for (size_t si = 0; si < bins.seps.size(); ++si) {
        const int d = bins.seps[si];
        for (int start : pair_starts(hats.size(), d, pairs)) {
            const double nsq = weighted_diff_norm_sq(hats[start + d], hats[start], wbeta);
            bins.sums[si] += std::pow(nsq, 0.5 * r);
            bins.counts[si] += 1;
        }
    }
    return bins;
}

/// Least-squares slope of log(mean) against log(separation time); nullopt when
/// fewer than two separations carry signal.
inline std::optional<double> fit_increment_slope(const IncrementBins& bins, double dt_sample) {
    std::vector<double> lx, ly;
    for (size_t i = 0; i < bins.seps.size(); ++i) {
        if (bins.counts[i] == 0) continue;
        const double mean = bins.sums[i] / double(bins.counts[i]);
        if (!(mean > 0.0)) continue;
        lx.push_back(std::log(bins.seps[i] * dt_sample));
        ly.push_back(std::log(mean));
    }
    if (lx.size() < 2) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    return sxy / sxx;
}

}  // namespace detail

/// Empirical Hölder exponent of one stored trajectory: averages
/// ‖X(t)-X(s)‖^r_{H^{-β}} over deterministically chosen pairs at dyadic
/// separations and fits the log-log slope. Returns nullopt for frozen
/// (increment-free) trajectories.
inline std::optional<double> holder_increment_estimate(const Trajectory& traj, double beta,
                                                       double r, int pairs) {
    if (traj.snapshots.size() < 64)
        throw std::invalid_argument("holder_increment_estimate: need at least 64 sample instants");
    const TorusGrid& g = traj.snapshots.front().grid;
    const std::vector<double> wbeta = detail::sobolev_weights(g, -beta);
    std::vector<std::vector<std::complex<double>>> hats;
    hats.reserve(traj.snapshots.size());
    for (const ScalarField& f : traj.snapshots) hats.push_back(transform(f).coeff);
    const double dt_sample = traj.times.size() > 1 ? traj.times[1] - traj.times[0] : 1.0;
    return detail::fit_increment_slope(
        detail::increment_bins_from_spectra(hats, wbeta, r, pairs), dt_sample);
}

/// Runs the full convergence experiment. Thread count affects wall time only;
/// the report is byte-identical for any value.
inline ConvergenceReport run_convergence(const ExperimentPlan& plan, int threads = 1) {
    plan.validate();
    const TorusGrid& g = plan.grid;
    const ScalarField x0 = plan.x0.build(g);

    // Deterministic reference on the same grid and step, sampled spectra.
    struct SpectraCollector : SampleObserver {
        std::vector<std::vector<std::complex<double>>> hats;
        std::vector<double> times;
        void on_sample(size_t, double t, const std::vector<std::complex<double>>& xhat,
                       const std::vector<double>&) override {
            hats.push_back(xhat);
            times.push_back(t);
        }
    };
    SpectraCollector ref;
    try {
        PathRunner runner(plan.limit_cfg().as_solver());
        runner.run(x0, 0, nullptr, &ref);
    } catch (const PathAbortError& e) {
        throw ExperimentThresholdError(std::string("deterministic reference aborted: ") +
                                       e.what());
    }

    const std::vector<double> w_m1 = detail::sobolev_weights(g, -1.0);
    const std::vector<double> w_mb = detail::sobolev_weights(g, -plan.holder.beta);

    struct ReplicaOutcome {
        bool aborted = false;
        std::string abort_msg;
        double distance = 0.0;
        double martingale_sup_sq = 0.0;
        detail::IncrementBins bins;
    };

    ConvergenceReport report;
    report.holder = plan.holder;
    report.probe_mode = plan.probe_mode;
    report.base_seed = plan.base_seed;
    report.replicas = plan.replicas;

    int total_aborted = 0;
    for (int N : plan.Ns) {
        const SolverConfig cfgN = plan.solver_for(N);
        std::vector<ReplicaOutcome> outcomes(plan.replicas);

        detail::parallel_for_index(plan.replicas, threads, [&](int m) {
            ReplicaOutcome& out = outcomes[m];
            struct DistanceObserver : SampleObserver {
                const SpectraCollector* ref = nullptr;
                const std::vector<double>* w_m1 = nullptr;
                double worst = 0.0;
                std::vector<std::vector<std::complex<double>>> hats;
                void on_sample(size_t idx, double, const std::vector<std::complex<double>>& xhat,
                               const std::vector<double>&) override {
                    worst = std::max(worst, std::sqrt(detail::weighted_diff_norm_sq(
                                                xhat, ref->hats[idx], *w_m1)));
                    hats.push_back(xhat);
                }
            };
            DistanceObserver obs;
            obs.ref = &ref;
            obs.w_m1 = &w_m1;
            detail::MartingaleProbe probe(g, plan.probe_mode);
            try {
                PathRunner runner(cfgN);
                runner.run(x0, static_cast<std::uint64_t>(m), &probe, &obs);
                out.distance = obs.worst;
                out.martingale_sup_sq = probe.sup_sq();
                out.bins = detail::increment_bins_from_spectra(obs.hats, w_mb, plan.holder.r,
                                                               plan.holder.pairs);
            } catch (const PathAbortError& e) {
                out.aborted = true;
                out.abort_msg = e.what();
            }
        });

        ConvergenceRow row;
        row.N = N;
        row.c_N = cfgN.noise->family.sup_norm;
        detail::IncrementBins pooled;
        double sum = 0.0, sum_sq = 0.0, sum_trunc = 0.0, sum_mart = 0.0;
        int ok = 0;
        for (int m = 0; m < plan.replicas; ++m) {
            const ReplicaOutcome& out = outcomes[m];
            if (out.aborted) {
                ++row.aborted;
                ++total_aborted;
                report.abort_log.push_back("N=" + std::to_string(N) + " replica " +
                                           std::to_string(m) + ": " + out.abort_msg);
                continue;
            }
            ++ok;
            sum += out.distance;
            sum_sq += out.distance * out.distance;
            sum_trunc += std::min(out.distance, 1.0);
            sum_mart += out.martingale_sup_sq;
            row.max_distance = std::max(row.max_distance, out.distance);
            pooled.merge(out.bins);
        }
        if (ok > 0) {
            row.mean_distance = sum / ok;
            row.mean_truncated = sum_trunc / ok;
            row.martingale_stat = sum_mart / ok;
            if (ok > 1) {
                const double var =
                    std::max(0.0, (sum_sq - sum * sum / ok) / double(ok - 1));
                row.std_error = std::sqrt(var / ok);
            }
            const double dt_sample =
                ref.times.size() > 1 ? ref.times[1] - ref.times[0] : plan.dt;
            row.holder_exponent = detail::fit_increment_slope(pooled, dt_sample);
        }
        report.rows.push_back(std::move(row));
    }

    const double frac =
        double(total_aborted) / double(plan.replicas * static_cast<int>(plan.Ns.size()));
    if (frac > plan.max_abort_fraction) {
        std::string msg = "aborted fraction " + std::to_string(frac) + " exceeds " +
                          std::to_string(plan.max_abort_fraction);
        for (const std::string& line : report.abort_log) msg += "\n  " + line;
        throw ExperimentThresholdError(msg);
    }
    return report;
}

/// Per-N decay statistic of the probe-mode stochastic integral: mean over
/// replicas of sup_t |S(t)|², where S is accumulated alongside stepping with
/// the realized increments.
inline std::vector<std::pair<int, double>> martingale_decay_probe(const ExperimentPlan& plan,
                                                                  int threads = 1) {
    plan.validate();
    const ScalarField x0 = plan.x0.build(plan.grid);
    std::vector<std::pair<int, double>> stats;
    for (int N : plan.Ns) {
        const SolverConfig cfgN = plan.solver_for(N);
        std::vector<double> sup_sq(plan.replicas, 0.0);
        detail::parallel_for_index(plan.replicas, threads, [&](int m) {
            detail::MartingaleProbe probe(plan.grid, plan.probe_mode);
            PathRunner runner(cfgN);
            runner.run(x0, static_cast<std::uint64_t>(m), &probe, nullptr);
            sup_sq[m] = probe.sup_sq();
        });
        double mean = 0.0;
        for (double v : sup_sq) mean += v;
        stats.emplace_back(N, mean / plan.replicas);
    }
    return stats;
}

}  // namespace mushy
