#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "lagrangeflow/errors.hpp"

namespace lagrangeflow {

using RealFn = std::function<double(double)>;

/// Closed interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
    double clamp(double x) const { return std::min(std::max(x, lo), hi); }

    /// i-th of n uniformly spaced sample points, endpoints included.
    double sample(int i, int n) const {
        return n <= 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    }

    /// Enlarged about the corresponding endpoints: [lo/factor, hi*factor]
    /// for positive intervals, used to evaluate slightly outside the data.
    Interval enlarged(double factor) const {
        return {lo > 0.0 ? lo / factor : lo * factor, hi * factor};
    }
};

namespace detail {

inline double midpoint(double a, double b) { return a + 0.5 * (b - a); }

}  // namespace detail

/// Solves f(x) = y for monotone f on the bracket [lo, hi]: Newton steps using
/// fp where they stay inside the bracket, bisection otherwise. The bracket
/// endpoints must straddle y (up to a small slack that gets clamped).
inline double invert_monotone(const RealFn& f, const RealFn& fp, double y,
                              double lo, double hi, double abs_tol = 1e-12,
                              int max_iter = 80) {
    double flo = f(lo) - y;
    double fhi = f(hi) - y;
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) {
        // Allow queries a hair outside the bracketed range: clamp to the
        // nearer endpoint when the residual there is already within tolerance.
        if (std::abs(flo) <= abs_tol * (1.0 + std::abs(y))) return lo;
        if (std::abs(fhi) <= abs_tol * (1.0 + std::abs(y))) return hi;
        throw InversionFailure("target not bracketed; function not monotone as sampled");
    }

    double a = lo, b = hi, fa = flo;
    double x = detail::midpoint(a, b);
    for (int it = 0; it < max_iter; ++it) {
        double fx = f(x) - y;
        if (std::abs(fx) <= abs_tol * (1.0 + std::abs(y))) return x;
        if (fa * fx <= 0.0)
            b = x;
        else {
            a = x;
            fa = fx;
        }
        double step_x = x;
        double d = fp ? fp(x) : 0.0;
        if (d != 0.0 && std::isfinite(d)) step_x = x - fx / d;
        // Fall back to bisection whenever Newton leaves the bracket.
        x = (step_x > a && step_x < b) ? step_x : detail::midpoint(a, b);
    }
    double fx = f(x) - y;
    if (std::abs(fx) <= abs_tol * (1.0 + std::abs(y))) return x;
    throw InversionFailure("residual tolerance not met after max iterations");
}

namespace detail {

inline double simpson(const RealFn& f, double a, double fa, double b, double fb,
                      double* fm_out) {
    double m = midpoint(a, b);
    double fm = f(m);
    *fm_out = fm;
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const RealFn& f, double a, double fa, double m,
                                   double fm, double b, double fb, double whole,
                                   double tol, int depth, bool* failed) {
    double lm, rm;
    double left = simpson(f, a, fa, m, fm, &lm);
    double right = simpson(f, m, fm, b, fb, &rm);
    double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth <= 0) {
        *failed = true;
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, fa, midpoint(a, m), lm, m, fm, left,
                                tol * 0.5, depth - 1, failed) +
           adaptive_simpson_rec(f, m, fm, midpoint(m, b), rm, b, fb, right,
                                tol * 0.5, depth - 1, failed);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance.
/// Orientation-aware: a > b integrates with the usual sign flip.
inline double adaptive_simpson(const RealFn& f, double a, double b,
                               double abs_tol = 1e-10, int max_depth = 20) {
    if (a == b) return 0.0;
    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }
    double fa = f(a), fb = f(b);
    double fm;
    double whole = detail::simpson(f, a, fa, b, fb, &fm);
    bool failed = false;
    double result = detail::adaptive_simpson_rec(f, a, fa, detail::midpoint(a, b),
                                                 fm, b, fb, whole, abs_tol,
                                                 max_depth, &failed);
    if (failed)
        throw QuadratureFailure("tolerance not reached within refinement depth limit");
    return sign * result;
}

/// Roots of fn inside [lo, hi], bracketed by sampling `subintervals` panels
/// and refined by bisection. Endpoints that are exact roots are kept.
inline std::vector<double> bracketed_roots(const RealFn& fn, double lo, double hi,
                                           int subintervals = 64) {
    std::vector<double> roots;
    if (!(hi > lo)) return roots;
    double prev_x = lo;
    double prev_f = fn(lo);
    if (prev_f == 0.0) roots.push_back(lo);
    for (int i = 1; i <= subintervals; ++i) {
        double x = lo + (hi - lo) * static_cast<double>(i) / subintervals;
        double fx = fn(x);
        if (fx == 0.0) {
            roots.push_back(x);
        } else if (prev_f * fx < 0.0) {
            double a = prev_x, b = x, fa = prev_f;
            for (int it = 0; it < 200 && (b - a) > 1e-14 * (hi - lo); ++it) {
                double m = detail::midpoint(a, b);
                double fm = fn(m);
                if (fa * fm <= 0.0)
                    b = m;
                else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push_back(detail::midpoint(a, b));
        }
        prev_x = x;
        prev_f = fx;
    }
    return roots;
}

inline double central_diff(const RealFn& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Deterministic uniform doubles in [0, 1) from a SplitMix64 stream. The
/// explicit bit mapping avoids std::uniform_real_distribution, whose output
/// is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

private:
    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

/// Least-squares slope of log(err) against log(h) for an observed-order
/// estimate; h halves between consecutive entries (h_k = h_0 / 2^k).
inline double observed_order(const std::vector<double>& errors) {
    int n = static_cast<int>(errors.size());
    if (n < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 0; k < n; ++k) {
        double x = -k * std::log(2.0);  // log h_k up to a constant
        double y = std::log(std::max(errors[k], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace lagrangeflow
