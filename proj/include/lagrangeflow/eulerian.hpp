#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lagrangeflow/errors.hpp"
#include "lagrangeflow/flux_calculus.hpp"
#include "lagrangeflow/grid.hpp"
#include "lagrangeflow/marching.hpp"

namespace lagrangeflow {

using EulerianTrajectory = Trajectory<GridFunction>;

namespace detail {

/// Critical points of the flux inside [lo, hi], located from sign changes
/// of f' over 64 sampled subintervals, refined by bisection.
inline std::vector<double> flux_critical_points(const FluxSpec& spec, double lo,
                                                double hi) {
    return bracketed_roots(spec.f_prime, lo, hi, 64);
}

/// min (minimize=true) or max of the flux over [a, b] given the critical
/// points of f on the data range; extrema sit at endpoints or critical points.
inline double flux_extremum(const FluxSpec& spec, const std::vector<double>& crit,
                            double a, double b, bool minimize) {
    double best = spec.flux(a);
    double fb = spec.flux(b);
    best = minimize ? std::min(best, fb) : std::max(best, fb);
    for (double c : crit) {
        if (c > a && c < b) {
            double fc = spec.flux(c);
            best = minimize ? std::min(best, fc) : std::max(best, fc);
        }
    }
    return best;
}

inline double sampled_max_abs_speed(const FluxSpec& spec, double lo, double hi) {
    const int n = 257;
    double m = 0.0;
    for (int i = 0; i < n; ++i) {
        double rho = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
        m = std::max(m, std::abs(spec.f_prime(rho)));
    }
    return m;
}

}  // namespace detail

/// Entropy-correct Godunov interface flux via the min/max formula, valid
/// for nonconvex fluxes as well: min over [rl, rr] when rl <= rr, max over
/// [rr, rl] otherwise.
inline double godunov_interface_flux(const FluxSpec& spec, double rl, double rr) {
    if (rl == rr) return spec.flux(rl);
    double a = std::min(rl, rr), b = std::max(rl, rr);
    auto crit = detail::flux_critical_points(spec, spec.data_range.lo,
                                             spec.data_range.hi);
    return detail::flux_extremum(spec, crit, a, b, /*minimize=*/rl < rr);
}

/// Self-similar entropy solution of the Riemann problem evaluated at the
/// similarity variable xi = x/t, built from the convex-hull construction:
/// lower convex hull of the flux for rl < rr, concave hull for rl > rr.
class RiemannFan {
public:
    RiemannFan(const FluxSpec& spec, double rl, double rr, int samples = 8192)
        : spec_(spec), rl_(rl), rr_(rr) {
        if (rl == rr) return;
        reflect_ = rl > rr;
        double a = reflect_ ? -rl : rl;
        double b = reflect_ ? -rr : rr;
        build_hull(a, b, samples);
    }

    double operator()(double xi) const {
        if (rl_ == rr_) return rl_;
        int m = static_cast<int>(verts_a_.size());
        // First segment slope greater than xi; the solution sits at that vertex.
        int k = static_cast<int>(std::upper_bound(slopes_.begin(), slopes_.end(), xi) -
                                 slopes_.begin());
        double value;
        if (k == 0) {
            value = verts_a_.front();
        } else if (k >= m - 1) {
            value = verts_a_.back();
        } else {
            value = refine_arc(k, xi);
        }
        return reflect_ ? -value : value;
    }

    double left() const { return rl_; }
    double right() const { return rr_; }

private:
    double hull_f(double a) const {
        return reflect_ ? -spec_.flux(-a) : spec_.flux(a);
    }
    double hull_fp(double a) const {
        return reflect_ ? spec_.f_prime(-a) : spec_.f_prime(a);
    }

    void build_hull(double a, double b, int samples) {
        sample_gap_ = (b - a) / (samples - 1);
        std::vector<double> xs(static_cast<std::size_t>(samples));
        std::vector<double> ys(xs.size());
        for (int i = 0; i < samples; ++i) {
            double x = a + (b - a) * static_cast<double>(i) / (samples - 1);
            xs[static_cast<std::size_t>(i)] = x;
            ys[static_cast<std::size_t>(i)] = hull_f(x);
        }
        // Andrew monotone chain, lower hull: consecutive slopes increase.
        std::vector<int> hull;
        for (int i = 0; i < samples; ++i) {
            while (hull.size() >= 2) {
                int p = hull[hull.size() - 2], q = hull.back();
                double cross = (xs[q] - xs[p]) * (ys[i] - ys[p]) -
                               (ys[q] - ys[p]) * (xs[i] - xs[p]);
                if (cross <= 0.0)
                    hull.pop_back();
                else
                    break;
            }
            hull.push_back(i);
        }
        for (int idx : hull) {
            verts_a_.push_back(xs[static_cast<std::size_t>(idx)]);
            verts_f_.push_back(ys[static_cast<std::size_t>(idx)]);
        }
        for (std::size_t i = 1; i < verts_a_.size(); ++i)
            slopes_.push_back((verts_f_[i] - verts_f_[i - 1]) /
                              (verts_a_[i] - verts_a_[i - 1]));
    }

    /// Inside a rarefaction arc the solution solves f'(a) = xi; refine the
    /// sampled vertex by bisection when the neighbours bracket that root.
    /// Vertices adjoining a chord (shock) segment are returned as sampled:
    /// bisecting across the chord could land on the wrong branch.
    double refine_arc(int k, double xi) const {
        double lo = verts_a_[static_cast<std::size_t>(k - 1)];
        double hi = verts_a_[static_cast<std::size_t>(k + 1)];
        double mid = verts_a_[static_cast<std::size_t>(k)];
        if (hi - lo > 2.5 * sample_gap_) return mid;
        double dlo = hull_fp(lo) - xi;
        double dhi = hull_fp(hi) - xi;
        if (dlo * dhi >= 0.0) return mid;
        for (int it = 0; it < 60; ++it) {
            double mid = lo + 0.5 * (hi - lo);
            double dm = hull_fp(mid) - xi;
            if (dlo * dm <= 0.0) {
                hi = mid;
                dhi = dm;
            } else {
                lo = mid;
                dlo = dm;
            }
        }
        return lo + 0.5 * (hi - lo);
    }

    FluxSpec spec_;
    double rl_, rr_;
    bool reflect_ = false;
    double sample_gap_ = 0.0;
    std::vector<double> verts_a_, verts_f_;
    std::vector<double> slopes_;
};

inline double riemann_exact(const FluxSpec& spec, double rl, double rr, double xi) {
    return RiemannFan(spec, rl, rr)(xi);
}

/// First-order Godunov finite-volume solver for rho_t + f(rho)_x = 0.
class GodunovSolver {
public:
    explicit GodunovSolver(FluxSpec spec) : spec_(std::move(spec)) {
        crit_ = detail::flux_critical_points(spec_, spec_.data_range.lo,
                                             spec_.data_range.hi);
    }

    const FluxSpec& spec() const { return spec_; }

    double interface_flux(double rl, double rr) const {
        if (rl == rr) return spec_.flux(rl);
        double a = std::min(rl, rr), b = std::max(rl, rr);
        return detail::flux_extremum(spec_, crit_, a, b, rl < rr);
    }

    double max_wave_speed(const GridFunction& s) const {
        return detail::sampled_max_abs_speed(spec_, min_value(s), max_value(s));
    }

    /// Conservative update rho_i - (dt/dx)(F_{i+1/2} - F_{i-1/2}).
    GridFunction step(const GridFunction& s, double dt) const {
        double lam = max_wave_speed(s);
        if (lam > 0.0 && dt > 0.9 * s.dx / lam * (1.0 + 1e-12))
            throw CFLViolation("dt=" + std::to_string(dt) + " exceeds 0.9*dx/max|f'|");
        int n = s.n();
        std::vector<double> fh(static_cast<std::size_t>(n + 1));
        for (int i = 0; i <= n; ++i)
            fh[static_cast<std::size_t>(i)] = interface_flux(s.at(i - 1L), s.at(i));
        GridFunction out = s;
        double r = dt / s.dx;
        for (int i = 0; i < n; ++i)
            out.values[static_cast<std::size_t>(i)] =
                s.values[static_cast<std::size_t>(i)] -
                r * (fh[static_cast<std::size_t>(i + 1)] - fh[static_cast<std::size_t>(i)]);
        return out;
    }

    EulerianTrajectory solve(const GridFunction& rho0,
                             const std::vector<double>& output_times,
                             MarchOptions opt = {}) const {
        validate_initial(rho0, output_times.empty() ? 0.0
                                                    : *std::max_element(output_times.begin(),
                                                                        output_times.end()));
        return march(rho0, output_times, rho0.dx,
                     [this](const GridFunction& s, double dt) { return step(s, dt); },
                     [this](const GridFunction& s) { return max_wave_speed(s); }, opt);
    }

    void validate_initial(const GridFunction& rho0, double T) const {
        for (double v : rho0.values) {
            if (!std::isfinite(v) || !spec_.data_range.contains(v))
                throw ConfigError("initial density leaves the admissible data range");
        }
        if (rho0.boundary == Boundary::constant_extension) {
            // Runs on R need the data constant on a window edge wide enough
            // that no wave reaches the boundary before T.
            double pad = detail::sampled_max_abs_speed(spec_, min_value(rho0),
                                                       max_value(rho0)) * T;
            int pad_cells = static_cast<int>(std::ceil(pad / rho0.dx));
            if (2 * pad_cells >= rho0.n())
                throw WindowTooSmall("domain shorter than twice the influence width");
            for (int i = 0; i <= pad_cells; ++i) {
                if (rho0.values[static_cast<std::size_t>(i)] != rho0.values.front() ||
                    rho0.values[static_cast<std::size_t>(rho0.n() - 1 - i)] !=
                        rho0.values.back())
                    throw WindowTooSmall("data not constant within the padded window edge");
            }
        }
    }

private:
    FluxSpec spec_;
    std::vector<double> crit_;
};

}  // namespace lagrangeflow
