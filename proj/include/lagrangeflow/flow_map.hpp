#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "lagrangeflow/errors.hpp"
#include "lagrangeflow/grid.hpp"
#include "lagrangeflow/temple.hpp"

namespace lagrangeflow {

/// Monotone, continuous, piecewise-linear flow map x -> gamma(x, t) stored at
/// cell edges, so that gamma_x recovers the cell averages of eta exactly.
struct FlowMap {
    std::vector<double> gamma;  // node values at cell edges, size n+1
    double dx = 0.0;
    double x0 = 0.0;
    Boundary boundary = Boundary::periodic;
    double period = 0.0;  // |M|; gamma(x+|M|) = gamma(x)+|M| in the periodic case
    double t = 0.0;

    int cells() const { return static_cast<int>(gamma.size()) - 1; }

    /// Forward evaluation with linear extension (constant-extension mode)
    /// or the degree-one periodic extension.
    double operator()(double x) const {
        int n = cells();
        if (boundary == Boundary::periodic) {
            double shift = period * std::floor((x - x0) / period);
            double xl = x - shift;
            return eval_local(xl, n) + shift;
        }
        if (x <= x0) return gamma.front() + (x - x0);
        double x1 = x0 + n * dx;
        if (x >= x1) return gamma.back() + (x - x1);
        return eval_local(x, n);
    }

    double min_node_gap() const {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < gamma.size(); ++i)
            m = std::min(m, gamma[i] - gamma[i - 1]);
        return m;
    }

private:
    double eval_local(double x, int n) const {
        double s = (x - x0) / dx;
        int j = std::clamp(static_cast<int>(std::floor(s)), 0, n - 1);
        double w = s - j;
        return gamma[static_cast<std::size_t>(j)] * (1.0 - w) +
               gamma[static_cast<std::size_t>(j + 1)] * w;
    }
};

/// gamma^{-1}(y): binary search over the nodes, then linear interpolation in
/// the bracketing segment. Periodic maps reduce modulo the period using the
/// degree-one property; constant-extension maps reject y outside the range.
inline double invert(const FlowMap& map, double y) {
    const auto& g = map.gamma;
    double shift = 0.0;
    double yl = y;
    if (map.boundary == Boundary::periodic) {
        shift = map.period * std::floor((y - g.front()) / map.period);
        yl = y - shift;
    } else {
        double slack = 1e-12 * std::max(1.0, std::abs(g.back() - g.front()));
        if (y < g.front() - slack || y > g.back() + slack)
            throw OutOfRange("y=" + std::to_string(y) + " outside the image [" +
                             std::to_string(g.front()) + ", " +
                             std::to_string(g.back()) + "]");
        yl = std::clamp(y, g.front(), g.back());
    }
    auto it = std::upper_bound(g.begin(), g.end(), yl);
    int j = std::clamp(static_cast<int>(it - g.begin()) - 1, 0, map.cells() - 1);
    double den = g[static_cast<std::size_t>(j + 1)] - g[static_cast<std::size_t>(j)];
    double w = (yl - g[static_cast<std::size_t>(j)]) / den;
    return map.x0 + (j + w) * map.dx + shift;
}

struct ReconstructionResult {
    std::vector<FlowMap> maps;
    /// max_i |D_t gamma_x - D_x gamma_t| per stored time level (0 at the ends);
    /// a discrete consistency check on the mixed partials.
    std::vector<double> mixed_partial_residual;

    double max_mixed_partial() const {
        double m = 0.0;
        for (double r : mixed_partial_residual) m = std::max(m, r);
        return m;
    }
};

namespace detail {

/// Shared reconstruction core: gamma(x,t) = gamma(x_a,t) + int_{x_a}^x eta,
/// midpoint rule in space (exact for cell-constant eta), trapezoid in time
/// for the anchor ODE gamma_t(x_a) = u(x_a, t) at the left edge.
inline ReconstructionResult reconstruct_core(
    const std::vector<double>& times, const std::vector<const GridFunction*>& etas,
    const std::function<double(int level, long cell)>& cell_velocity) {
    int levels = static_cast<int>(times.size());
    const GridFunction& eta0 = *etas[0];
    int n = eta0.n();

    ReconstructionResult out;
    out.maps.reserve(static_cast<std::size_t>(levels));
    out.mixed_partial_residual.assign(static_cast<std::size_t>(levels), 0.0);

    if (eta0.boundary == Boundary::constant_extension) {
        // The anchor sits in the left constant region; if the state there
        // moves, the window was too small for this horizon.
        for (int k = 0; k < levels; ++k)
            if (std::abs(cell_velocity(k, 0) - cell_velocity(0, 0)) > 1e-8)
                throw AnchorDrift("state at the anchor cell changed with time");
    }

    double anchor = eta0.x0;
    for (int k = 0; k < levels; ++k) {
        if (k > 0)
            anchor += 0.5 * (times[k] - times[k - 1]) *
                      (cell_velocity(k - 1, 0) + cell_velocity(k, 0));
        const GridFunction& eta = *etas[k];
        FlowMap map;
        map.dx = eta.dx;
        map.x0 = eta.x0;
        map.boundary = eta.boundary;
        map.period = eta.length();
        map.t = times[k];
        map.gamma.resize(static_cast<std::size_t>(n + 1));
        map.gamma[0] = anchor;
        for (int i = 0; i < n; ++i)
            map.gamma[static_cast<std::size_t>(i + 1)] =
                map.gamma[static_cast<std::size_t>(i)] +
                eta.values[static_cast<std::size_t>(i)] * eta.dx;
        if (!(map.min_node_gap() > 0.0))
            throw MonotonicityLoss("reconstructed map not strictly increasing at t=" +
                                   std::to_string(times[k]));
        out.maps.push_back(std::move(map));
    }

    // Mixed-partials residual |D_t eta - D_x u| on interior cells and levels.
    for (int k = 1; k + 1 < levels; ++k) {
        double res = 0.0;
        const GridFunction& eta_p = *etas[k + 1];
        const GridFunction& eta_m = *etas[k - 1];
        double dt2 = times[k + 1] - times[k - 1];
        bool periodic = eta0.boundary == Boundary::periodic;
        int i_lo = periodic ? 0 : 1;
        int i_hi = periodic ? n : n - 1;
        for (int i = i_lo; i < i_hi; ++i) {
            double dteta = (eta_p.at(i) - eta_m.at(i)) / dt2;
            double dxu = (cell_velocity(k, i + 1L) - cell_velocity(k, i - 1L)) /
                         (2.0 * eta0.dx);
            res = std::max(res, std::abs(dteta - dxu));
        }
        out.mixed_partial_residual[static_cast<std::size_t>(k)] = res;
    }
    return out;
}

}  // namespace detail

/// Flow maps of a Temple trajectory: gamma_x = eta, gamma_t = F(v/eta).
inline ReconstructionResult reconstruct(const TempleTrajectory& traj,
                                        const VelocityLaw& vel) {
    std::vector<const GridFunction*> etas;
    etas.reserve(traj.states.size());
    for (const auto& s : traj.states) etas.push_back(&s.eta);
    auto cell_velocity = [&traj, &vel](int level, long cell) {
        const TempleState& s = traj.states[static_cast<std::size_t>(level)];
        return vel.F(s.v.at(cell) / s.eta.at(cell));
    };
    return detail::reconstruct_core(traj.times, etas, cell_velocity);
}

/// Eulerian density recovered from the Lagrangian pair: rho(y) = (v/eta) at
/// x = gamma^{-1}(y), with piecewise-constant cell lookup.
inline double lagrangian_density(const TempleState& state, const FlowMap& map,
                                 double y) {
    double x = invert(map, y);
    int n = state.eta.n();
    long i;
    if (map.boundary == Boundary::periodic) {
        double s = (x - map.x0) / map.dx;
        i = static_cast<long>(std::floor(s));
        i = ((i % n) + n) % n;
    } else {
        i = std::clamp(static_cast<long>(std::floor((x - map.x0) / map.dx)),
                       0L, static_cast<long>(n - 1));
    }
    return state.v.values[static_cast<std::size_t>(i)] /
           state.eta.values[static_cast<std::size_t>(i)];
}

/// Mean L1 distance between the Eulerian field and the Lagrangian-recovered
/// density on the Eulerian mesh: (1/|M|) sum |rho_eul - rho_lag| dx.
/// Outside the image of a constant-extension map the recovered density is the
/// constant edge state, so the query point is clamped into the image.
inline double correspondence_error(const GridFunction& rho_eul,
                                   const TempleState& state, const FlowMap& map) {
    double sum = 0.0;
    for (int i = 0; i < rho_eul.n(); ++i) {
        double y = rho_eul.center(i);
        if (map.boundary == Boundary::constant_extension)
            y = std::clamp(y, map.gamma.front(), map.gamma.back());
        double lag = lagrangian_density(state, map, y);
        sum += std::abs(rho_eul.values[static_cast<std::size_t>(i)] - lag);
    }
    return sum * rho_eul.dx / rho_eul.length();
}

}  // namespace lagrangeflow
