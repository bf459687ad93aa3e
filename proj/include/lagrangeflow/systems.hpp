#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "lagrangeflow/errors.hpp"
#include "lagrangeflow/flow_map.hpp"
#include "lagrangeflow/grid.hpp"
#include "lagrangeflow/marching.hpp"
#include "lagrangeflow/numerics.hpp"
#include "lagrangeflow/variational.hpp"

namespace lagrangeflow {

/// Pressure law with its antiderivative P, P' = p, lower limit 1.
struct PressureLaw {
    RealFn p;
    RealFn p_prime;
    RealFn P;
};

inline PressureLaw make_pressure_law(RealFn p, RealFn p_prime) {
    PressureLaw law;
    law.P = [p](double rho) { return adaptive_simpson(p, 1.0, rho, 1e-10, 20); };
    law.p = std::move(p);
    law.p_prime = std::move(p_prime);
    return law;
}

namespace detail {

/// rho^a with fast paths for the small integer exponents the catalog uses.
inline double power(double rho, double a) {
    if (a == 1.0) return rho;
    if (a == 2.0) return rho * rho;
    if (a == 3.0) return rho * rho * rho;
    if (a == 0.0) return 1.0;
    return std::pow(rho, a);
}

}  // namespace detail

/// Power law p = kappa rho^alpha with the closed-form antiderivative.
inline PressureLaw power_pressure(double kappa, double alpha) {
    PressureLaw law;
    law.p = [kappa, alpha](double rho) { return kappa * detail::power(rho, alpha); };
    law.p_prime = [kappa, alpha](double rho) {
        return kappa * alpha * detail::power(rho, alpha - 1.0);
    };
    law.P = [kappa, alpha](double rho) {
        return kappa * (detail::power(rho, alpha + 1.0) - 1.0) / (alpha + 1.0);
    };
    return law;
}

enum class SystemKind { gas, nlwe };

/// Lagrangian state (eta, w, v) = (gamma_x, rho0 gamma_t, rho0); v is frozen.
struct SystemState {
    GridFunction eta;
    GridFunction w;
    GridFunction v;
};

using SystemTrajectory = Trajectory<SystemState>;

inline SystemState init_system(const GridFunction& rho0, const GridFunction& u0) {
    SystemState s;
    s.eta = rho0;
    std::fill(s.eta.values.begin(), s.eta.values.end(), 1.0);
    s.w = rho0;
    for (int i = 0; i < rho0.n(); ++i)
        s.w.values[static_cast<std::size_t>(i)] =
            rho0.values[static_cast<std::size_t>(i)] *
            u0.values[static_cast<std::size_t>(i)];
    s.v = rho0;
    return s;
}

struct SystemFluxValue {
    double eta = 0.0;
    double w = 0.0;
};

namespace detail {

inline SystemFluxValue physical_system_flux(SystemKind kind, const PressureLaw& p,
                                            double eta, double w, double v) {
    SystemFluxValue f;
    f.eta = -w / v;
    f.w = p.p(v / eta);
    if (kind == SystemKind::nlwe) f.w -= w * w / (eta * v);
    return f;
}

inline double system_wave_speed(const PressureLaw& p, double eta, double w, double v) {
    double pp = p.p_prime(v / eta);
    if (!(pp > 0.0))
        throw NonHyperbolic("p' not positive at rho=" + std::to_string(v / eta));
    return std::abs(w / (v * eta)) + std::sqrt(pp) / eta;
}

}  // namespace detail

/// Local Lax-Friedrichs (Rusanov) flux on the (eta, w) pair with v frozen;
/// the wave-speed bound |w/(v eta)| + sqrt(p'(v/eta))/eta is the exact
/// spectral radius of the nlwe block and an upper bound for the gas block.
inline SystemFluxValue system_flux(SystemKind kind, const PressureLaw& p,
                                   double eta_l, double w_l, double v_l,
                                   double eta_r, double w_r, double v_r) {
    SystemFluxValue fl = detail::physical_system_flux(kind, p, eta_l, w_l, v_l);
    SystemFluxValue fr = detail::physical_system_flux(kind, p, eta_r, w_r, v_r);
    double lam = std::max(detail::system_wave_speed(p, eta_l, w_l, v_l),
                          detail::system_wave_speed(p, eta_r, w_r, v_r));
    SystemFluxValue f;
    f.eta = 0.5 * (fl.eta + fr.eta) - 0.5 * lam * (eta_r - eta_l);
    f.w = 0.5 * (fl.w + fr.w) - 0.5 * lam * (w_r - w_l);
    return f;
}

class SystemSolver {
public:
    SystemSolver(SystemKind kind, PressureLaw p) : kind_(kind), p_(std::move(p)) {}

    static constexpr double kEtaMin = 1e-8;

    double max_wave_speed(const SystemState& s) const {
        double m = 0.0;
        for (int i = 0; i < s.eta.n(); ++i)
            m = std::max(m, detail::system_wave_speed(
                                p_, s.eta.values[static_cast<std::size_t>(i)],
                                s.w.values[static_cast<std::size_t>(i)],
                                s.v.values[static_cast<std::size_t>(i)]));
        return m;
    }

    SystemState step(const SystemState& s, double dt) const {
        int n = s.eta.n();
        std::vector<SystemFluxValue> fh(static_cast<std::size_t>(n + 1));
        for (int i = 0; i <= n; ++i)
            fh[static_cast<std::size_t>(i)] =
                system_flux(kind_, p_, s.eta.at(i - 1L), s.w.at(i - 1L), s.v.at(i - 1L),
                            s.eta.at(i), s.w.at(i), s.v.at(i));
        SystemState out;
        out.eta = s.eta;
        out.w = s.w;
        out.v = s.v;  // frozen field, copied bit-identically
        double r = dt / s.eta.dx;
        for (int i = 0; i < n; ++i) {
            auto& fp = fh[static_cast<std::size_t>(i + 1)];
            auto& fm = fh[static_cast<std::size_t>(i)];
            double eta_new = s.eta.values[static_cast<std::size_t>(i)] -
                             r * (fp.eta - fm.eta);
            if (!(eta_new > kEtaMin))
                throw PositivityLoss("eta fell to " + std::to_string(eta_new) +
                                     " at cell " + std::to_string(i));
            out.eta.values[static_cast<std::size_t>(i)] = eta_new;
            out.w.values[static_cast<std::size_t>(i)] =
                s.w.values[static_cast<std::size_t>(i)] - r * (fp.w - fm.w);
        }
        return out;
    }

    SystemTrajectory solve(const SystemState& s0, const std::vector<double>& output_times,
                           MarchOptions opt = {}) const {
        validate_smooth_rho0(s0.v);
        return march(s0, output_times, s0.eta.dx,
                     [this](const SystemState& s, double dt) { return step(s, dt); },
                     [this](const SystemState& s) { return max_wave_speed(s); }, opt);
    }

private:
    /// rho0 enters the variational equations through its derivative, so it
    /// must be C1 as sampled: second differences stay a small fraction of the
    /// data range on a grid that resolves it.
    static void validate_smooth_rho0(const GridFunction& v) {
        double scale = max_value(v) - min_value(v);
        if (scale == 0.0) return;
        for (int i = 0; i < v.n(); ++i) {
            double d2 = std::abs(v.at(i + 1L) - 2.0 * v.at(i) + v.at(i - 1L));
            if (d2 > 0.5 * scale)
                throw ConfigError("rho0 not C1-smooth as sampled (second-difference "
                                  "bound exceeded at cell " + std::to_string(i) + ")");
        }
    }

    SystemKind kind_;
    PressureLaw p_;
};

/// Discriminant AC - B^2 of the principal part of the second-order
/// diffeomorphism equation; equals -p'(rho0/eta) identically, and must be
/// negative for hyperbolicity.
inline double hyperbolicity_check(const PressureLaw& p, double rho0, double eta,
                                  double gamma_t) {
    double A = eta;
    double B = -gamma_t;
    double C = -(p.p_prime(rho0 / eta) - gamma_t * gamma_t) / eta;
    double disc = A * C - B * B;
    if (disc >= 0.0)
        throw NonHyperbolic("AC - B^2 = " + std::to_string(disc) + " >= 0");
    return disc;
}

/// Action density b(r, s, q) with r = gamma_t, s = gamma_x, q = rho0.
/// gas:  q r^2 / (2s) + (1/s) int_1^s p(q/sigma) dsigma
/// nlwe: (r q / s)^2 / 2 - P(q/s)
inline double system_action_density(SystemKind kind, const PressureLaw& p, double r,
                                    double s, double q) {
    if (kind == SystemKind::gas) {
        double integral = adaptive_simpson([&p, q](double sigma) { return p.p(q / sigma); },
                                           1.0, s, 1e-10, 20);
        return q * r * r / (2.0 * s) + integral / s;
    }
    double rq_s = r * q / s;
    return 0.5 * rq_s * rq_s - p.P(q / s);
}

/// Flow maps of a system trajectory: gamma_x = eta, gamma_t = w/v.
inline ReconstructionResult reconstruct_system(const SystemTrajectory& traj) {
    std::vector<const GridFunction*> etas;
    etas.reserve(traj.states.size());
    for (const auto& s : traj.states) etas.push_back(&s.eta);
    auto cell_velocity = [&traj](int level, long cell) {
        const SystemState& s = traj.states[static_cast<std::size_t>(level)];
        return s.w.at(cell) / s.v.at(cell);
    };
    return detail::reconstruct_core(traj.times, etas, cell_velocity);
}

namespace detail {

/// rho0 at a node from the frozen cell field v: mean of the adjacent cells.
inline double rho0_node(const GridFunction& v, int j) {
    return 0.5 * (v.at(j - 1L) + v.at(j));
}

/// rho0' at a node: the cell difference across the edge (centered there).
inline double rho0_prime_node(const GridFunction& v, int j) {
    return (v.at(j) - v.at(j - 1L)) / v.dx;
}

}  // namespace detail

/// Max-norm residual of the second-order variational equation over interior
/// nodes, all derivatives by centered differences of the node-grid map.
/// gas:  rho0 g_tt - (p'(rho0/g_x) rho0/g_x^2) g_xx + p'(rho0/g_x) rho0'/g_x
/// nlwe: g_x g_tt - 2 g_t g_tx - (1/g_x)[p'(rho0/g_x) - g_t^2] g_xx
///       + (rho0'/rho0)[p'(rho0/g_x) - g_t^2]
inline double euler_lagrange_residual(SystemKind kind, const SpacetimeMap& map,
                                      const GridFunction& v, const PressureLaw& p) {
    int n = map.nx() - 1;
    bool periodic = map.boundary == Boundary::periodic;
    int j_lo = periodic ? 0 : 2;
    int j_hi = periodic ? n : n - 1;
    double res = 0.0;
    for (int k = 1; k + 1 < map.nt(); ++k) {
        for (int j = j_lo; j < j_hi; ++j) {
            double q = detail::rho0_node(v, j);
            double qp = detail::rho0_prime_node(v, j);
            double gt = detail::dt_centered(map, k, j);
            double gx = detail::dx_centered(map, k, j);
            double gtt = detail::dt2_centered(map, k, j);
            double gxx = detail::dx2_centered(map, k, j);
            double value;
            if (kind == SystemKind::gas) {
                double pp = p.p_prime(q / gx);
                value = q * gtt - pp * q / (gx * gx) * gxx + pp * qp / gx;
            } else {
                double gtx = detail::dxdt_centered(map, k, j);
                double bracket = p.p_prime(q / gx) - gt * gt;
                value = gx * gtt - 2.0 * gt * gtx - bracket / gx * gxx +
                        qp / q * bracket;
            }
            res = std::max(res, std::abs(value));
        }
    }
    return res;
}

/// Discrete action of the systems Lagrangian: integral of
/// b(gamma_t, gamma_x, rho0) gamma_x over the node grid.
inline double system_action_value(SystemKind kind, const SpacetimeMap& map,
                                  const GridFunction& v, const PressureLaw& p) {
    double total = 0.0;
    for (int k = 0; k < map.nt(); ++k) {
        double wt = detail::weight_t(map, k);
        double row = 0.0;
        for (int j = 0; j < map.nx(); ++j) {
            double gt = detail::dt_centered(map, k, j);
            double gx = detail::dx_centered(map, k, j);
            double q = detail::rho0_node(v, j);
            row += detail::weight_x(map, j) *
                   system_action_density(kind, p, gt, gx, q) * gx;
        }
        total += wt * row;
    }
    return total;
}

inline double system_first_variation(SystemKind kind, const SpacetimeMap& map,
                                     const GridFunction& v, const PressureLaw& p,
                                     const PerturbationField& zeta, double eps) {
    return directional_derivative(map, zeta, eps,
                                  [kind, &v, &p](const SpacetimeMap& m) {
                                      return system_action_value(kind, m, v, p);
                                  });
}

}  // namespace lagrangeflow
