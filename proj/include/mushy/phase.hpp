#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mushy/errors.hpp"

namespace mushy {

/// Physical parameters of the two-phase model. Temperatures are negative in
/// the solid and positive in the liquid; the Heaviside in the enthalpy is
/// smoothed to a linear ramp of width `delta`, and the turbulence profile
/// `eta` switches on past `eps` with a C¹ quadratic blend over [eps, 2 eps].
struct PhaseParams {
    double C1 = 2.0;  ///< solid specific heat, must exceed 1
    double C2 = 2.0;  ///< liquid specific heat, must exceed 1
    double k1 = 1.0;  ///< solid conductivity
    double k2 = 0.5;  ///< liquid conductivity
    double latent_heat = 1.0;
    double delta = 0.1;      ///< mushy-region width (temperature units)
    double eps = 0.05;       ///< turbulence onset threshold (temperature units)
    double eta_slope = 1.0;  ///< slope of eta past onset
    double eta_sat = std::numeric_limits<double>::infinity();  ///< optional saturation level

    bool operator==(const PhaseParams&) const = default;
};

/// The model nonlinearities in enthalpy form: smoothed enthalpy map γ̃ and its
/// exact piecewise-linear inverse, flux potential Ψ = K∘γ̃⁻¹, turbulence
/// amplitude Γ = η∘γ̃⁻¹, and the corrector g with g' = Γ'²/4. Everything is
/// piecewise polynomial, so g and the primitive of Γ are integrated in closed
/// form. Immutable after construction.
class PhaseFunctions {
  public:
    explicit PhaseFunctions(const PhaseParams& p) : p_(p) {
        validate(p);
        build_tables();
    }
    PhaseFunctions() : PhaseFunctions(PhaseParams{}) {}

    const PhaseParams& params() const { return p_; }

    // γ̃: C1 r on the solid branch, slope C2 + l/delta across the ramp,
    // C2 r + l in the liquid.
    double gamma_tilde(double r) const {
        if (r <= 0.0) return p_.C1 * r;
        if (r < p_.delta) return (p_.C2 + p_.latent_heat / p_.delta) * r;
        return p_.C2 * r + p_.latent_heat;
    }
    double gamma_tilde_prime(double r) const {
        if (r <= 0.0) return p_.C1;
        if (r < p_.delta) return p_.C2 + p_.latent_heat / p_.delta;
        return p_.C2;
    }
    double gamma_tilde_inv(double x) const {
        if (x <= 0.0) return x / p_.C1;
        if (x < x_ramp_top_) return x / (p_.C2 + p_.latent_heat / p_.delta);
        return (x - p_.latent_heat) / p_.C2;
    }
    double gamma_tilde_inv_prime(double x) const {
        if (x <= 0.0) return 1.0 / p_.C1;
        if (x < x_ramp_top_) return 1.0 / (p_.C2 + p_.latent_heat / p_.delta);
        return 1.0 / p_.C2;
    }

    double K_of(double r) const { return r <= 0.0 ? p_.k1 * r : p_.k2 * r; }

    double Psi(double x) const { return K_of(gamma_tilde_inv(x)); }
    double Psi_prime(double x) const {
        const double kcond = gamma_tilde_inv(x) <= 0.0 ? p_.k1 : p_.k2;
        return kcond * gamma_tilde_inv_prime(x);
    }

    // η in temperature: 0 below eps, quadratic blend on [eps, 2 eps], linear
    // with slope `eta_slope` beyond, optionally blending to the constant
    // `eta_sat` over a window of width eps.
    double eta(double th) const {
        const double s = p_.eta_slope, e = p_.eps;
        if (th <= e) return 0.0;
        if (th < 2.0 * e) return s / (2.0 * e) * (th - e) * (th - e);
        if (th < theta_sat_lo_) return s * (th - 1.5 * e);
        if (th < theta_sat_hi_) {
            const double u = theta_sat_hi_ - th;
            return p_.eta_sat - s / (2.0 * e) * u * u;
        }
        return p_.eta_sat;
    }
    double eta_prime(double th) const {
        const double s = p_.eta_slope, e = p_.eps;
        if (th <= e) return 0.0;
        if (th < 2.0 * e) return s / e * (th - e);
        if (th < theta_sat_lo_) return s;
        if (th < theta_sat_hi_) return s / e * (theta_sat_hi_ - th);
        return 0.0;
    }

    // The onset guard keeps the vanishing branch exact: γ̃(eps) does not
    // round-trip through γ̃⁻¹ to a temperature <= eps in floating point.
    double Gamma(double x) const {
        if (x <= knots_.front()) return 0.0;
        return eta(gamma_tilde_inv(x));
    }
    double Gamma_prime(double x) const {
        if (x <= knots_.front()) return 0.0;
        return eta_prime(gamma_tilde_inv(x)) * gamma_tilde_inv_prime(x);
    }

    /// g(x) = (1/4) ∫₀ˣ Γ'(t)² dt, integrated exactly per polynomial piece.
    double g_of(double x) const {
        if (x <= knots_.front()) return 0.0;
        const size_t i = segment_of(x);
        const double t = x - knots_[i];
        const double p = seg_p_[i], q = seg_q_[i];
        return g_prefix_[i] + 0.25 * (p * p * t + p * q * t * t + q * q * t * t * t / 3.0);
    }
    double g_prime(double x) const {
        const double d = Gamma_prime(x);
        return 0.25 * d * d;
    }

    /// Primitive of Γ with Γ̃(0) = 0 (Γ vanishes below γ̃(eps), so the
    /// primitive vanishes there too).
    double Gamma_primitive(double x) const {
        if (x <= knots_.front()) return 0.0;
        const size_t i = segment_of(x);
        const double t = x - knots_[i];
        const double p = seg_p_[i], q = seg_q_[i], v0 = gamma_at_knot_[i];
        return gp_prefix_[i] + v0 * t + 0.5 * p * t * t + q * t * t * t / 6.0;
    }

    // Derived constants used by validation, stability checks and certificates.
    double psi0() const {
        return std::min(p_.k1, p_.k2) /
               std::max(p_.C1, p_.C2 + p_.latent_heat / p_.delta);
    }
    double lip_psi() const { return std::max(p_.k1, p_.k2) / std::min(p_.C1, p_.C2); }
    double lip_gamma() const { return p_.eta_slope / std::min(p_.C1, p_.C2); }
    double lip_g() const { return 0.25 * lip_gamma() * lip_gamma(); }
    /// Enthalpy below which Γ (and hence the noise) is identically zero.
    double gamma_onset() const { return knots_.front(); }

  private:
    static void validate(const PhaseParams& p) {
        auto req = [](bool ok, const std::string& msg) {
            if (!ok) throw ConfigError("phase: " + msg);
        };
        req(std::isfinite(p.C1) && std::isfinite(p.C2) && p.C1 > 1.0 && p.C2 > 1.0,
            "C1 and C2 must exceed 1 (ensures the inverse enthalpy map is a contraction)");
        req(std::isfinite(p.k1) && p.k1 > 0.0 && std::isfinite(p.k2) && p.k2 > 0.0,
            "conductivities k1, k2 must be positive");
        req(std::isfinite(p.latent_heat) && p.latent_heat > 0.0, "latent heat must be positive");
        req(std::isfinite(p.delta) && p.delta > 0.0, "delta must be positive");
        req(std::isfinite(p.eps) && p.eps > 0.0, "eps must be positive");
        req(std::isfinite(p.eta_slope) && p.eta_slope > 0.0, "eta_slope must be positive");
        req(p.eta_sat > 0.0 && !(p.eta_sat != p.eta_sat), "eta_sat must be positive or inf");
        if (std::isfinite(p.eta_sat))
            req(p.eta_sat >= p.eta_slope * p.eps,
                "eta_sat too small: saturation would start inside the onset blend");
    }

    void build_tables() {
        x_ramp_top_ = p_.C2 * p_.delta + p_.latent_heat;
        if (std::isfinite(p_.eta_sat)) {
            // Saturation blend [theta_sat_lo, theta_sat_hi] of width eps,
            // placed where the linear branch reaches eta_sat - slope*eps/2.
            theta_sat_hi_ = 2.0 * p_.eps + p_.eta_sat / p_.eta_slope;
            theta_sat_lo_ = theta_sat_hi_ - p_.eps;
        } else {
            theta_sat_lo_ = theta_sat_hi_ = std::numeric_limits<double>::infinity();
        }

        std::vector<double> theta_knots = {p_.eps, 2.0 * p_.eps};
        if (p_.delta > p_.eps) theta_knots.push_back(p_.delta);
        if (std::isfinite(theta_sat_lo_)) {
            theta_knots.push_back(theta_sat_lo_);
            theta_knots.push_back(theta_sat_hi_);
        }
        std::sort(theta_knots.begin(), theta_knots.end());
        theta_knots.erase(std::unique(theta_knots.begin(), theta_knots.end()), theta_knots.end());

        knots_.clear();
        for (double th : theta_knots) knots_.push_back(gamma_tilde(th));

        const size_t m = knots_.size();
        seg_p_.assign(m, 0.0);
        seg_q_.assign(m, 0.0);
        g_prefix_.assign(m, 0.0);
        gp_prefix_.assign(m, 0.0);
        gamma_at_knot_.assign(m, 0.0);

        for (size_t i = 0; i < m; ++i) {
            const double x_lo = knots_[i];
            const double x_hi = (i + 1 < m) ? knots_[i + 1] : std::numeric_limits<double>::infinity();
            const double x_mid = std::isfinite(x_hi) ? 0.5 * (x_lo + x_hi) : x_lo + 1.0;
            const double th_lo = gamma_tilde_inv(x_lo);
            const double minv = gamma_tilde_inv_prime(x_mid);
            // Γ'(x) is linear on the segment: value from the continuous η' at
            // the left knot, slope from η'' on the active piece.
            seg_p_[i] = eta_prime(th_lo) * minv;
            seg_q_[i] = eta_second(gamma_tilde_inv(x_mid)) * minv * minv;
            gamma_at_knot_[i] = Gamma(x_lo);
            if (i + 1 < m) {
                const double t = x_hi - x_lo;
                const double p = seg_p_[i], q = seg_q_[i];
                g_prefix_[i + 1] =
                    g_prefix_[i] + 0.25 * (p * p * t + p * q * t * t + q * q * t * t * t / 3.0);
                gp_prefix_[i + 1] = gp_prefix_[i] + gamma_at_knot_[i] * t + 0.5 * p * t * t +
                                    q * t * t * t / 6.0;
            }
        }
    }

    double eta_second(double th) const {
        const double s = p_.eta_slope, e = p_.eps;
        if (th <= e) return 0.0;
        if (th < 2.0 * e) return s / e;
        if (th < theta_sat_lo_) return 0.0;
        if (th < theta_sat_hi_) return -s / e;
        return 0.0;
    }

    size_t segment_of(double x) const {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
        return static_cast<size_t>(it - knots_.begin()) - 1;
    }

    PhaseParams p_;
    double x_ramp_top_ = 0.0;  // γ̃(delta)
    double theta_sat_lo_ = 0.0, theta_sat_hi_ = 0.0;
    // Breakpoints of Γ' in enthalpy, with per-segment linear data
    // Γ'(x) = p + q (x - knot) and prefix integrals for g and ∫Γ.
    std::vector<double> knots_, seg_p_, seg_q_, g_prefix_, gp_prefix_, gamma_at_knot_;
};

}  // namespace mushy
