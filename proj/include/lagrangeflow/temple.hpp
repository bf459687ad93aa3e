#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "lagrangeflow/errors.hpp"
#include "lagrangeflow/flux_calculus.hpp"
#include "lagrangeflow/grid.hpp"
#include "lagrangeflow/marching.hpp"

namespace lagrangeflow {

/// State of the Lagrangian Temple system eta_t = F(v/eta)_x, v_t = 0.
/// eta is the stretch gamma_x; v is frozen at rho_0 and never updated,
/// so v_t = 0 holds exactly (bitwise) along the whole trajectory.
struct TempleState {
    GridFunction eta;
    GridFunction v;
};

using TempleTrajectory = Trajectory<TempleState>;

inline TempleState init_temple(const GridFunction& rho0) {
    TempleState s;
    s.eta = rho0;
    std::fill(s.eta.values.begin(), s.eta.values.end(), 1.0);
    s.v = rho0;
    return s;
}

/// Interface flux for the eta equation written as eta_t + G_x = 0 with
/// G = -F(v/eta). The nondegenerate characteristic speed F'(v/eta) v/eta^2
/// is positive and the v-field is stationary, so the left state upwinds.
inline double eta_interface_flux(const VelocityLaw& vel, double eta_l, double v_l,
                                 double /*eta_r*/, double /*v_r*/) {
    return -vel.F(v_l / eta_l);
}

class TempleSolver {
public:
    explicit TempleSolver(VelocityLaw vel) : vel_(std::move(vel)) {}

    static constexpr double kEtaMin = 1e-8;

    const VelocityLaw& velocity_law() const { return vel_; }

    double max_wave_speed(const TempleState& s) const {
        double m = 0.0;
        for (int i = 0; i < s.eta.n(); ++i) {
            double eta = s.eta.values[static_cast<std::size_t>(i)];
            double v = s.v.values[static_cast<std::size_t>(i)];
            m = std::max(m, vel_.F_prime(v / eta) * v / (eta * eta));
        }
        return m;
    }

    TempleState step(const TempleState& s, double dt) const {
        int n = s.eta.n();
        std::vector<double> gh(static_cast<std::size_t>(n + 1));
        for (int i = 0; i <= n; ++i)
            gh[static_cast<std::size_t>(i)] =
                eta_interface_flux(vel_, s.eta.at(i - 1L), s.v.at(i - 1L),
                                   s.eta.at(i), s.v.at(i));
        TempleState out;
        out.eta = s.eta;
        out.v = s.v;  // frozen field, copied bit-identically
        double r = dt / s.eta.dx;
        for (int i = 0; i < n; ++i) {
            double updated = s.eta.values[static_cast<std::size_t>(i)] -
                             r * (gh[static_cast<std::size_t>(i + 1)] -
                                  gh[static_cast<std::size_t>(i)]);
            if (!(updated > kEtaMin))
                throw PositivityLoss("eta fell to " + std::to_string(updated) +
                                     " at cell " + std::to_string(i) +
                                     "; left the bi-Lipschitz regime");
            out.eta.values[static_cast<std::size_t>(i)] = updated;
        }
        return out;
    }

    TempleTrajectory solve(const TempleState& s0, const std::vector<double>& output_times,
                           MarchOptions opt = {}) const {
        return march(s0, output_times, s0.eta.dx,
                     [this](const TempleState& s, double dt) { return step(s, dt); },
                     [this](const TempleState& s) { return max_wave_speed(s); }, opt);
    }

private:
    VelocityLaw vel_;
};

}  // namespace lagrangeflow
