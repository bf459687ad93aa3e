#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "lagrangeflow/errors.hpp"
#include "lagrangeflow/grid.hpp"
#include "lagrangeflow/numerics.hpp"

namespace lagrangeflow {

/// Scalar flux after the affine normalization: the stored f is the
/// density-shifted flux a |-> f_raw(a - L); the flux shift K is kept
/// separate so solutions map back to the raw problem via rho_raw = rho - L.
struct FluxSpec {
    RealFn f;
    RealFn f_prime;
    Interval data_range;  // admissible (normalized) density range
    double L = 0.0;       // density shift
    double K = 0.0;       // flux shift

    double flux(double rho) const { return f(rho) + K; }
    double flux_prime(double rho) const { return f_prime(rho); }
};

/// Velocity law F = (f+K)/rho with numeric inverse g and the induced
/// velocity range. g brackets on eval_range, the largest sampled
/// enlargement of the data range on which F stays increasing, so fields
/// that overshoot the data by a few percent remain evaluable.
struct VelocityLaw {
    RealFn F;
    RealFn F_prime;
    RealFn g;  // inverse of F
    Interval u_range;
    Interval data_range;
    Interval eval_range;
};

/// Action potential b with derivatives and the inverse B = (b')^{-1}.
/// b' = g^2 ties the metric side to the conservation-law side.
struct ActionPotential {
    RealFn b;
    RealFn b_prime;
    RealFn b_second;
    RealFn B;
    double u_ref = 0.0;  // lower limit of the antiderivative
    Interval u_range;
};

struct NormalizeOptions {
    double margin = 0.5;               // delta: smallest admissible rho after the L-shift
    std::optional<double> L_override;  // fix L instead of the margin rule
    std::optional<double> K_override;  // fix K instead of the midpoint rule
    int samples = 1024;
    bool validate_derivative = true;
};

namespace detail {

/// Feasible open interval for the flux shift K on the already L-shifted flux:
/// K > -min f and K < min(a f'(a) - f(a)), both estimated by sampling.
inline Interval sampled_feasibility(const RealFn& f, const RealFn& fp,
                                    const Interval& range, int samples) {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (int i = 0; i < samples; ++i) {
        double a = range.sample(i, samples);
        lower = std::max(lower, -f(a));
        upper = std::min(upper, a * fp(a) - f(a));
    }
    return {lower, upper};
}

inline void validate_derivative(const RealFn& f, const RealFn& fp,
                                const Interval& range, const char* what) {
    double scale = std::max(1.0, range.length());
    double h = 1e-5 * scale;
    const int points = 33;
    for (int i = 0; i < points; ++i) {
        double a = range.sample(i, points);
        double fd = central_diff(f, a, h);
        double d = fp(a);
        if (std::abs(d - fd) > 1e-4 * (1.0 + std::abs(fd)))
            throw DerivativeMismatch(std::string(what) +
                                     " disagrees with central differences at a=" +
                                     std::to_string(a));
    }
}

/// Largest of a fixed ladder of enlargement factors on which the sampled
/// derivative stays positive; 1.0 always qualifies for a valid law.
inline Interval widest_increasing_range(const RealFn& deriv, Interval base) {
    for (double factor : {1.25, 1.1, 1.05, 1.0}) {
        Interval candidate = base.enlarged(factor);
        bool ok = true;
        try {
            for (int i = 0; i < 65 && ok; ++i)
                ok = deriv(candidate.sample(i, 65)) > 0.0;
        } catch (const Error&) {
            ok = false;
        }
        if (ok) return candidate;
    }
    return base;
}

}  // namespace detail

/// Affine normalization: shifts density by L so it is positive with margin,
/// then picks the flux shift K from the sampled feasibility interval so that
/// F = (f+K)/rho is positive and strictly increasing on the data range.
inline FluxSpec normalize(const RealFn& f_raw, const RealFn& f_raw_prime,
                          Interval raw_range, NormalizeOptions opt = {}) {
    if (!(raw_range.hi > raw_range.lo))
        throw InfeasibleNormalization("empty raw data range");
    if (opt.validate_derivative)
        detail::validate_derivative(f_raw, f_raw_prime, raw_range, "flux derivative");

    double L = opt.L_override ? *opt.L_override
                              : std::max(0.0, opt.margin - raw_range.lo);
    Interval range{raw_range.lo + L, raw_range.hi + L};
    if (!(range.lo > 0.0))
        throw InfeasibleNormalization("shifted density range not positive");

    RealFn f = [f_raw, L](double a) { return f_raw(a - L); };
    RealFn fp = [f_raw_prime, L](double a) { return f_raw_prime(a - L); };

    Interval feasible = detail::sampled_feasibility(f, fp, range, opt.samples);
    double K;
    if (opt.K_override) {
        K = *opt.K_override;
        if (!(K > feasible.lo && K < feasible.hi))
            throw InfeasibleNormalization(
                "K override outside the sampled feasibility interval (" +
                std::to_string(feasible.lo) + ", " + std::to_string(feasible.hi) + ")");
    } else {
        if (!(feasible.lo < feasible.hi))
            throw InfeasibleNormalization(
                "no flux shift K makes f/rho positive and increasing on this range "
                "(sampled interval (" + std::to_string(feasible.lo) + ", " +
                std::to_string(feasible.hi) + "))");
        K = 0.5 * (feasible.lo + feasible.hi);
    }

    FluxSpec spec;
    spec.f = std::move(f);
    spec.f_prime = std::move(fp);
    spec.data_range = range;
    spec.L = L;
    spec.K = K;
    return spec;
}

/// Velocity law of the normalized flux; g is computed on demand by
/// safeguarded bisection+Newton with brackets from the evaluable range.
inline VelocityLaw velocity_law(const FluxSpec& spec) {
    const double K = spec.K;
    const RealFn f = spec.f;
    const RealFn fp = spec.f_prime;

    VelocityLaw vel;
    vel.data_range = spec.data_range;
    vel.F = [f, K](double rho) { return (f(rho) + K) / rho; };
    vel.F_prime = [f, fp, K](double rho) {
        return (fp(rho) * rho - (f(rho) + K)) / (rho * rho);
    };
    vel.u_range = {vel.F(spec.data_range.lo), vel.F(spec.data_range.hi)};
    if (!(vel.u_range.lo > 0.0) || !(vel.u_range.hi > vel.u_range.lo))
        throw InversionFailure("velocity law not positive increasing at range ends");

    vel.eval_range = detail::widest_increasing_range(vel.F_prime, spec.data_range);
    Interval bracket = vel.eval_range;
    RealFn F = vel.F;
    RealFn Fp = vel.F_prime;
    vel.g = [F, Fp, bracket](double u) {
        return invert_monotone(F, Fp, u, bracket.lo, bracket.hi, 1e-12, 80);
    };
    return vel;
}

/// Action potential from the velocity law: b' = g^2, b the antiderivative
/// from u_ref by adaptive Simpson quadrature, B = (b')^{-1} numerically.
inline ActionPotential potential_from_flux(const VelocityLaw& vel, double u_ref) {
    // The u-interval on which g (and hence b', B) can be evaluated.
    Interval u_eval{vel.F(vel.eval_range.lo), vel.F(vel.eval_range.hi)};
    if (!u_eval.contains(u_ref))
        throw OutOfRange("u_ref outside the velocity range");

    RealFn g = vel.g;
    RealFn Fp = vel.F_prime;

    ActionPotential pot;
    pot.u_ref = u_ref;
    pot.u_range = vel.u_range;
    pot.b_prime = [g](double u) {
        double r = g(u);
        return r * r;
    };
    pot.b = [g, u_ref](double u) {
        return adaptive_simpson([g](double s) {
            double r = g(s);
            return r * r;
        }, u_ref, u, 1e-10, 20);
    };
    // b'' = 2 g g' with g' = 1 / F'(g).
    pot.b_second = [g, Fp](double u) {
        double r = g(u);
        return 2.0 * r / Fp(r);
    };
    RealFn bp = pot.b_prime;
    RealFn bpp = pot.b_second;
    pot.B = [bp, bpp, u_eval](double xi) {
        return invert_monotone(bp, bpp, xi, u_eval.lo, u_eval.hi, 1e-12, 80);
    };
    return pot;
}

inline ActionPotential potential_from_flux(const VelocityLaw& vel) {
    return potential_from_flux(vel, vel.u_range.lo);
}

/// Inverse construction: from a potential with b' positive increasing on its
/// working u-interval, recover F = B o Q, the flux f = rho F(rho), and g.
inline std::pair<VelocityLaw, FluxSpec> flux_from_potential(const ActionPotential& pot) {
    const RealFn B = pot.B;
    const RealFn bp = pot.b_prime;
    const RealFn bpp = pot.b_second;

    double bp_lo = bp(pot.u_range.lo);
    double bp_hi = bp(pot.u_range.hi);
    if (!(bp_lo > 0.0) || !(bp_hi > bp_lo))
        throw InversionFailure("b' not positive increasing on the working interval");

    VelocityLaw vel;
    vel.data_range = {std::sqrt(bp_lo), std::sqrt(bp_hi)};
    vel.u_range = pot.u_range;
    vel.F = [B](double rho) { return B(rho * rho); };
    // F'(rho) = 2 rho / b''(B(rho^2)).
    vel.F_prime = [B, bpp](double rho) { return 2.0 * rho / bpp(B(rho * rho)); };

    vel.eval_range = detail::widest_increasing_range(vel.F_prime, vel.data_range);
    Interval bracket = vel.eval_range;
    RealFn F = vel.F;
    RealFn Fp = vel.F_prime;
    vel.g = [F, Fp, bracket](double u) {
        return invert_monotone(F, Fp, u, bracket.lo, bracket.hi, 1e-12, 80);
    };

    FluxSpec spec;
    spec.data_range = vel.data_range;
    spec.L = 0.0;
    spec.K = 0.0;
    spec.f = [F](double rho) { return rho * F(rho); };
    spec.f_prime = [F, Fp](double rho) { return F(rho) + rho * Fp(rho); };
    return {std::move(vel), std::move(spec)};
}

/// Characteristic-crossing estimate t* = -1 / min_x D_x f'(rho0) used to
/// schedule smooth-regime runs; +infinity when no characteristics cross.
inline double breakdown_time(const FluxSpec& spec, const GridFunction& rho0) {
    double min_slope = std::numeric_limits<double>::infinity();
    for (int i = 0; i < rho0.n(); ++i) {
        double fwd = spec.f_prime(rho0.at(i + 1L));
        double bwd = spec.f_prime(rho0.at(i - 1L));
        min_slope = std::min(min_slope, (fwd - bwd) / (2.0 * rho0.dx));
    }
    if (min_slope >= 0.0) return std::numeric_limits<double>::infinity();
    return -1.0 / min_slope;
}

/// Both transport coefficients of the velocity equation u_t + c(u) u_x = 0:
/// the metric form u + 2b'/b'' and the conservation-law form u + g/g'.
/// They agree when b is the potential of the given velocity law.
inline std::pair<double, double> transport_coefficient_check(
    const ActionPotential& pot, const VelocityLaw& vel, double u) {
    double bpp = pot.b_second(u);
    double rho = vel.g(u);
    double gp = 1.0 / vel.F_prime(rho);
    if (std::abs(bpp) < 1e-14 || std::abs(gp) < 1e-14)
        throw DegenerateCoefficient("b'' or g' vanishes at u=" + std::to_string(u));
    double metric_side = u + 2.0 * pot.b_prime(u) / bpp;
    double flux_side = u + rho / gp;
    return {metric_side, flux_side};
}

}  // namespace lagrangeflow
