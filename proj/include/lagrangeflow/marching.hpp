#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "lagrangeflow/errors.hpp"

namespace lagrangeflow {

template <class State>
struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    double cfl = 0.0;

    int size() const { return static_cast<int>(times.size()); }
};

struct MarchOptions {
    double cfl = 0.45;
    /// false: output times snap to the nearest completed step (final partial
    /// step lands on T exactly). true: steps are cut so every requested
    /// output time is hit exactly, which keeps stored time levels uniform
    /// for the variational grids.
    bool exact_output_times = false;
};

namespace detail {

inline std::vector<double> output_schedule(const std::vector<double>& requested,
                                           double* T_out) {
    std::vector<double> times = requested;
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    if (times.empty() || times.front() < 0.0)
        throw ConfigError("output times must be non-negative");
    if (times.front() > 0.0) times.insert(times.begin(), 0.0);
    *T_out = times.back();
    return times;
}

}  // namespace detail

/// Explicit conservative time loop shared by all solvers. `step(s, dt)`
/// advances one step, `max_speed(s)` yields the CFL wave-speed bound.
template <class State, class StepFn, class SpeedFn>
Trajectory<State> march(const State& initial, const std::vector<double>& requested,
                        double dx, StepFn&& step, SpeedFn&& max_speed,
                        MarchOptions opt = {}) {
    if (!(opt.cfl > 0.0) || opt.cfl > 0.9)
        throw CFLViolation("cfl must lie in (0, 0.9]");
    double T = 0.0;
    std::vector<double> targets = detail::output_schedule(requested, &T);

    Trajectory<State> traj;
    traj.cfl = opt.cfl;
    traj.times.push_back(0.0);
    traj.states.push_back(initial);
    auto record = [&traj](double time, const State& state) {
        if (traj.times.back() != time) {
            traj.times.push_back(time);
            traj.states.push_back(state);
        }
    };

    State s = initial;
    double t = 0.0;
    for (std::size_t j = 1; j < targets.size(); ++j) {
        double tau = targets[j];
        bool recorded = false;
        while (t < tau) {
            double lam = std::max(max_speed(s), 1e-30);
            double dt = opt.cfl * dx / lam;
            if (opt.exact_output_times) dt = std::min(dt, tau - t);
            // Landing times are assigned, not accumulated, so rounding can
            // never leave t stranded just below a target.
            double t_next;
            if (dt >= T - t) {
                dt = T - t;
                t_next = T;
            } else if (opt.exact_output_times && dt >= tau - t) {
                dt = tau - t;
                t_next = tau;
            } else {
                t_next = t + dt;
            }
            if (!opt.exact_output_times && t_next >= tau && (tau - t) < (t_next - tau)) {
                // The already-completed step is nearer to tau than the one
                // about to finish: snapshot before stepping on.
                record(t, s);
                recorded = true;
            }
            s = step(s, dt);
            t = t_next;
            if (t >= tau) break;
        }
        if (!recorded) record(t, s);
    }
    return traj;
}

}  // namespace lagrangeflow
