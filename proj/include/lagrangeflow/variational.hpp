#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lagrangeflow/errors.hpp"
#include "lagrangeflow/flow_map.hpp"
#include "lagrangeflow/flux_calculus.hpp"
#include "lagrangeflow/numerics.hpp"

namespace lagrangeflow {

/// gamma on an (x, t) node grid: rows are stored time levels, columns the
/// cell-edge nodes of the spatial mesh. Time levels may be mildly nonuniform
/// (they come from the solver's output schedule); all time derivatives use
/// nonuniform-safe three-point formulas.
struct SpacetimeMap {
    std::vector<std::vector<double>> gamma;  // [time][node]
    std::vector<double> times;
    double dx = 0.0;
    double x0 = 0.0;
    Boundary boundary = Boundary::periodic;
    double period = 0.0;

    int nt() const { return static_cast<int>(times.size()); }
    int nx() const { return gamma.empty() ? 0 : static_cast<int>(gamma.front().size()); }
    double node_x(int j) const { return x0 + j * dx; }
    double length() const { return dx * (nx() - 1); }
    double horizon() const { return times.back() - times.front(); }

    /// gamma at node (k, j) with the degree-one periodic extension in j.
    double at(int k, int j) const {
        const auto& row = gamma[static_cast<std::size_t>(k)];
        int n = nx() - 1;
        if (j >= 0 && j <= n) return row[static_cast<std::size_t>(j)];
        if (boundary != Boundary::periodic)
            throw OutOfRange("node index outside a constant-extension map");
        int m = j;
        double shift = 0.0;
        while (m < 0) {
            m += n;
            shift -= period;
        }
        while (m > n) {
            m -= n;
            shift += period;
        }
        return row[static_cast<std::size_t>(m)] + shift;
    }

    bool monotone() const {
        for (const auto& row : gamma)
            for (std::size_t j = 1; j < row.size(); ++j)
                if (!(row[j] > row[j - 1])) return false;
        return true;
    }
};

inline SpacetimeMap to_spacetime(const ReconstructionResult& rec) {
    SpacetimeMap m;
    if (rec.maps.empty()) return m;
    m.dx = rec.maps.front().dx;
    m.x0 = rec.maps.front().x0;
    m.boundary = rec.maps.front().boundary;
    m.period = rec.maps.front().period;
    for (const auto& fm : rec.maps) {
        m.times.push_back(fm.t);
        m.gamma.push_back(fm.gamma);
    }
    return m;
}

/// Smooth perturbation of the map, zero on and near the boundary of
/// M x [0, T] (two-node margin) so variations see no boundary terms.
struct PerturbationField {
    std::vector<std::vector<double>> zeta;  // same shape as SpacetimeMap::gamma

    bool is_zero() const {
        for (const auto& row : zeta)
            for (double z : row)
                if (z != 0.0) return false;
        return true;
    }
};

namespace detail {

inline double dt_centered(const SpacetimeMap& m, int k, int j) {
    const auto& t = m.times;
    int K = m.nt();
    if (k == 0) return (m.at(1, j) - m.at(0, j)) / (t[1] - t[0]);
    if (k == K - 1)
        return (m.at(K - 1, j) - m.at(K - 2, j)) / (t[static_cast<std::size_t>(K - 1)] -
                                                    t[static_cast<std::size_t>(K - 2)]);
    double h1 = t[static_cast<std::size_t>(k)] - t[static_cast<std::size_t>(k - 1)];
    double h2 = t[static_cast<std::size_t>(k + 1)] - t[static_cast<std::size_t>(k)];
    double fm = m.at(k - 1, j), f0 = m.at(k, j), fp = m.at(k + 1, j);
    return (-h2 / (h1 * (h1 + h2))) * fm + ((h2 - h1) / (h1 * h2)) * f0 +
           (h1 / (h2 * (h1 + h2))) * fp;
}

inline double dt2_centered(const SpacetimeMap& m, int k, int j) {
    const auto& t = m.times;
    double h1 = t[static_cast<std::size_t>(k)] - t[static_cast<std::size_t>(k - 1)];
    double h2 = t[static_cast<std::size_t>(k + 1)] - t[static_cast<std::size_t>(k)];
    double fm = m.at(k - 1, j), f0 = m.at(k, j), fp = m.at(k + 1, j);
    return 2.0 * (fm / (h1 * (h1 + h2)) - f0 / (h1 * h2) + fp / (h2 * (h1 + h2)));
}

inline double dx_centered(const SpacetimeMap& m, int k, int j) {
    int n = m.nx() - 1;
    if (m.boundary == Boundary::periodic)
        return (m.at(k, j + 1) - m.at(k, j - 1)) / (2.0 * m.dx);
    if (j == 0) return (m.at(k, 1) - m.at(k, 0)) / m.dx;
    if (j == n) return (m.at(k, n) - m.at(k, n - 1)) / m.dx;
    return (m.at(k, j + 1) - m.at(k, j - 1)) / (2.0 * m.dx);
}

inline double dx2_centered(const SpacetimeMap& m, int k, int j) {
    return (m.at(k, j + 1) - 2.0 * m.at(k, j) + m.at(k, j - 1)) / (m.dx * m.dx);
}

inline double dxdt_centered(const SpacetimeMap& m, int k, int j) {
    const auto& t = m.times;
    double dt2 = t[static_cast<std::size_t>(k + 1)] - t[static_cast<std::size_t>(k - 1)];
    return (m.at(k + 1, j + 1) - m.at(k + 1, j - 1) - m.at(k - 1, j + 1) +
            m.at(k - 1, j - 1)) /
           (2.0 * m.dx * dt2);
}

/// Tensor-product trapezoid weights over the node grid.
inline double weight_x(const SpacetimeMap& m, int j) {
    return (j == 0 || j == m.nx() - 1) ? 0.5 * m.dx : m.dx;
}

inline double weight_t(const SpacetimeMap& m, int k) {
    const auto& t = m.times;
    int K = m.nt();
    if (k == 0) return 0.5 * (t[1] - t[0]);
    if (k == K - 1)
        return 0.5 * (t[static_cast<std::size_t>(K - 1)] -
                      t[static_cast<std::size_t>(K - 2)]);
    return 0.5 * (t[static_cast<std::size_t>(k + 1)] -
                  t[static_cast<std::size_t>(k - 1)]);
}

inline void check_support_margin(const SpacetimeMap& map, const PerturbationField& z) {
    int K = map.nt(), N = map.nx();
    auto zero_at = [&z](int k, int j) {
        return z.zeta[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] == 0.0;
    };
    for (int k = 0; k < K; ++k)
        for (int j : {0, 1, N - 2, N - 1})
            if (!zero_at(k, j))
                throw OutOfRange("perturbation not zero near the spatial boundary");
    for (int j = 0; j < N; ++j)
        for (int k : {0, 1, K - 2, K - 1})
            if (!zero_at(k, j))
                throw OutOfRange("perturbation not zero near the time boundary");
}

inline SpacetimeMap perturbed(const SpacetimeMap& m, const PerturbationField& z,
                              double eps) {
    SpacetimeMap out = m;
    for (int k = 0; k < m.nt(); ++k)
        for (int j = 0; j < m.nx(); ++j)
            out.gamma[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] +=
                eps * z.zeta[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
    return out;
}

}  // namespace detail

/// Action value B(gamma) = integral of b(gamma_t) gamma_x over M x [0, T],
/// tensor-product trapezoid quadrature with centered differences in the
/// interior and one-sided differences at the edges.
inline double action_value(const SpacetimeMap& map, const ActionPotential& pot) {
    double total = 0.0;
    for (int k = 0; k < map.nt(); ++k) {
        double wt = detail::weight_t(map, k);
        double row = 0.0;
        for (int j = 0; j < map.nx(); ++j) {
            double gt = detail::dt_centered(map, k, j);
            double gx = detail::dx_centered(map, k, j);
            row += detail::weight_x(map, j) * pot.b(gt) * gx;
        }
        total += wt * row;
    }
    return total;
}

/// Central-difference directional derivative of an arbitrary discrete
/// functional at gamma in direction zeta. Throws MonotonicityLoss when a
/// perturbed copy folds.
inline double directional_derivative(
    const SpacetimeMap& map, const PerturbationField& zeta, double eps,
    const std::function<double(const SpacetimeMap&)>& functional) {
    detail::check_support_margin(map, zeta);
    SpacetimeMap plus = detail::perturbed(map, zeta, eps);
    SpacetimeMap minus = detail::perturbed(map, zeta, -eps);
    if (!plus.monotone() || !minus.monotone())
        throw MonotonicityLoss("perturbed map folds; epsilon too large");
    return (functional(plus) - functional(minus)) / (2.0 * eps);
}

/// d/d eps B(gamma + eps zeta) at eps = 0 by central differences; estimates 0
/// for an extremal with error O(eps^2) + O(grid).
inline double first_variation(const SpacetimeMap& map, const ActionPotential& pot,
                              const PerturbationField& zeta, double eps) {
    return directional_derivative(map, zeta, eps, [&pot](const SpacetimeMap& m) {
        return action_value(m, pot);
    });
}

/// max over interior nodes of |b'(gamma_t) gamma_x^2 - b'(u0)|: the conserved
/// quantity of the extremal flow, compared against its data line.
/// u0 holds cell averages of the initial velocity; node values average the
/// adjacent cells.
inline double conserved_quantity_residual(const SpacetimeMap& map,
                                          const ActionPotential& pot,
                                          const GridFunction& u0) {
    int n = map.nx() - 1;
    double res = 0.0;
    for (int k = 1; k + 1 < map.nt(); ++k) {
        for (int j = 1; j < n; ++j) {
            double gt = detail::dt_centered(map, k, j);
            double gx = detail::dx_centered(map, k, j);
            double u0j = 0.5 * (u0.at(j - 1L) + u0.at(j));
            res = std::max(res, std::abs(pot.b_prime(gt) * gx * gx - pot.b_prime(u0j)));
        }
    }
    return res;
}

inline PerturbationField zero_perturbation(const SpacetimeMap& map) {
    PerturbationField z;
    z.zeta.assign(static_cast<std::size_t>(map.nt()),
                  std::vector<double>(static_cast<std::size_t>(map.nx()), 0.0));
    return z;
}

/// Tensor-product cosine^2 bump centered at (cx, ct) with half-widths
/// (wx, wt), clipped to zero outside its support rectangle.
inline PerturbationField cosine_bump(const SpacetimeMap& map, double cx, double wx,
                                     double ct, double wt) {
    PerturbationField z = zero_perturbation(map);
    auto bump = [](double s) {
        if (std::abs(s) >= 1.0) return 0.0;
        double c = std::cos(1.5707963267948966 * s);
        return c * c;
    };
    for (int k = 0; k < map.nt(); ++k) {
        double bt = bump((map.times[static_cast<std::size_t>(k)] - ct) / wt);
        if (bt == 0.0) continue;
        for (int j = 0; j < map.nx(); ++j)
            z.zeta[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] =
                bt * bump((map.node_x(j) - cx) / wx);
    }
    return z;
}

/// Catalog of random smooth bumps with supports strictly inside the domain
/// (two-node margins); fixed seed for reproducibility. Margins are physical
/// (fractions of the domain) with the two-node floor, so the sampled catalog
/// does not change under grid refinement.
inline std::vector<PerturbationField> perturbation_catalog(const SpacetimeMap& map,
                                                           int count,
                                                           std::uint64_t seed = 0xC0FFEE) {
    Rng rng(seed);
    std::vector<PerturbationField> out;
    out.reserve(static_cast<std::size_t>(count));
    double Lx = map.length();
    double x_margin = std::max(0.02 * Lx, 2.5 * map.dx);
    double x_lo = map.x0 + x_margin, x_hi = map.x0 + Lx - x_margin;
    double t0 = map.times.front(), T = map.times.back();
    double t_margin =
        std::max(0.06 * (T - t0), 2.5 * (T - t0) / std::max(1, map.nt() - 1));
    double t_lo = t0 + t_margin, t_hi = T - t_margin;
    for (int i = 0; i < count; ++i) {
        double wx = (0.08 + 0.12 * rng.uniform01()) * Lx;
        double wt = (0.15 + 0.15 * rng.uniform01()) * (T - t0);
        double cx = rng.uniform(x_lo + wx, x_hi - wx);
        double ct = rng.uniform(t_lo + wt, t_hi - wt);
        out.push_back(cosine_bump(map, cx, wx, ct, wt));
    }
    return out;
}

/// Non-extremal comparison path with the same endpoints: linear
/// interpolation in time between gamma(.,0) and gamma(.,T).
inline SpacetimeMap control_path(const SpacetimeMap& map) {
    SpacetimeMap out = map;
    double t0 = map.times.front(), T = map.times.back();
    for (int k = 0; k < map.nt(); ++k) {
        double theta = (map.times[static_cast<std::size_t>(k)] - t0) / (T - t0);
        for (int j = 0; j < map.nx(); ++j)
            out.gamma[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] =
                (1.0 - theta) * map.gamma.front()[static_cast<std::size_t>(j)] +
                theta * map.gamma.back()[static_cast<std::size_t>(j)];
    }
    return out;
}

struct ExtremalityReport {
    double epsilon = 0.0;
    double extremal_derivative = 0.0;  // max |dB| over the catalog, extremal path
    double control_derivative = 0.0;   // min |dB| over the catalog, control path
    double ratio = 0.0;                // min per-perturbation |control|/|extremal|
    double zero_field_derivative = 0.0;
    int perturbations = 0;
};

/// Runs the seeded perturbation catalog against the extremal and the
/// linear-in-time control path with a shared functional; epsilon halves on
/// MonotonicityLoss up to eight times.
inline ExtremalityReport extremality_study(
    const SpacetimeMap& extremal,
    const std::function<double(const SpacetimeMap&)>& functional, int count = 20,
    std::uint64_t seed = 0xC0FFEE) {
    SpacetimeMap control = control_path(extremal);
    auto catalog = perturbation_catalog(extremal, count, seed);

    ExtremalityReport rep;
    rep.perturbations = count;
    rep.epsilon = 1e-3 * extremal.length();
    rep.control_derivative = std::numeric_limits<double>::infinity();
    rep.ratio = std::numeric_limits<double>::infinity();
    rep.zero_field_derivative =
        directional_derivative(extremal, zero_perturbation(extremal), rep.epsilon,
                               functional);

    for (const auto& zeta : catalog) {
        double eps = rep.epsilon;
        double d_ext = 0.0, d_ctl = 0.0;
        for (int attempt = 0;; ++attempt) {
            try {
                d_ext = directional_derivative(extremal, zeta, eps, functional);
                d_ctl = directional_derivative(control, zeta, eps, functional);
                break;
            } catch (const MonotonicityLoss&) {
                if (attempt >= 8) throw;
                eps *= 0.5;
            }
        }
        rep.extremal_derivative = std::max(rep.extremal_derivative, std::abs(d_ext));
        rep.control_derivative = std::min(rep.control_derivative, std::abs(d_ctl));
        double r = std::abs(d_ctl) / std::max(std::abs(d_ext), 1e-300);
        rep.ratio = std::min(rep.ratio, r);
    }
    return rep;
}

}  // namespace lagrangeflow
