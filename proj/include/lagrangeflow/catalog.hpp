#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lagrangeflow/errors.hpp"
#include "lagrangeflow/flux_calculus.hpp"
#include "lagrangeflow/grid.hpp"
#include "lagrangeflow/systems.hpp"

namespace lagrangeflow {

/// Named flux built-ins. "cubic" pins K = 0 so the velocity law is exactly
/// F = rho^2, the companion of the quadratic (L^2) action potential.
struct FluxCatalogEntry {
    std::string name;
    std::string formula;
    RealFn f;
    RealFn f_prime;
    Interval default_raw_range;
    std::optional<double> K_override;
};

inline const std::vector<FluxCatalogEntry>& flux_catalog() {
    static const std::vector<FluxCatalogEntry> entries = {
        {"burgers", "f(rho) = rho^2/2",
         [](double r) { return 0.5 * r * r; },
         [](double r) { return r; },
         {1.0, 2.0},
         std::nullopt},
        {"cubic", "f(rho) = rho^3",
         [](double r) { return r * r * r; },
         [](double r) { return 3.0 * r * r; },
         {0.5, 2.0},
         0.0},
        {"lwr", "f(rho) = rho(1-rho)",
         [](double r) { return r * (1.0 - r); },
         [](double r) { return 1.0 - 2.0 * r; },
         {0.15, 0.3},
         std::nullopt},
    };
    return entries;
}

inline const FluxCatalogEntry& find_flux(const std::string& name) {
    for (const auto& e : flux_catalog())
        if (e.name == name) return e;
    throw ConfigError("unknown flux \"" + name + "\"");
}

/// Polynomial flux sum c_k rho^k from a coefficient list (constant first).
inline std::pair<RealFn, RealFn> polynomial_flux(const std::vector<double>& coeff) {
    if (coeff.empty()) throw ConfigError("empty polynomial coefficient list");
    RealFn f = [coeff](double r) {
        double acc = 0.0;
        for (std::size_t k = coeff.size(); k-- > 0;) acc = acc * r + coeff[k];
        return acc;
    };
    RealFn fp = [coeff](double r) {
        double acc = 0.0;
        for (std::size_t k = coeff.size(); k-- > 1;)
            acc = acc * r + coeff[k] * static_cast<double>(k);
        return acc;
    };
    return {f, fp};
}

inline FluxSpec make_catalog_flux(const std::string& name, NormalizeOptions opt = {}) {
    const auto& e = find_flux(name);
    if (!opt.K_override && e.K_override) opt.K_override = e.K_override;
    return normalize(e.f, e.f_prime, e.default_raw_range, opt);
}

// --- initial profiles ------------------------------------------------------

inline RealFn profile_constant(double value) {
    return [value](double) { return value; };
}

inline RealFn profile_riemann(double left, double right, double x_jump) {
    return [left, right, x_jump](double x) { return x < x_jump ? left : right; };
}

/// mean + amplitude * sin(2 pi k (x - a) / (b - a) + phase) on [a, b].
inline RealFn profile_sine(double mean, double amplitude, double periods, double a,
                           double b, double phase = 0.0) {
    double omega = 2.0 * 3.14159265358979323846 * periods / (b - a);
    return [mean, amplitude, omega, a, phase](double x) {
        return mean + amplitude * std::sin(omega * (x - a) + phase);
    };
}

/// base + amplitude * cos^2(pi (x - center) / (2 width)) inside the support.
inline RealFn profile_bump(double base, double amplitude, double center, double width) {
    return [base, amplitude, center, width](double x) {
        double s = (x - center) / width;
        if (std::abs(s) >= 1.0) return base;
        double c = std::cos(1.5707963267948966 * s);
        return base + amplitude * c * c;
    };
}

inline const std::vector<std::string>& profile_catalog() {
    static const std::vector<std::string> names = {"constant", "riemann", "sine", "bump"};
    return names;
}

/// Catalog listing printed by `lagrangeflow catalog`; byte-stable.
inline std::string catalog_text() {
    std::string out;
    out += "fluxes:\n";
    for (const auto& e : flux_catalog()) {
        out += "  " + e.name + "  " + e.formula + "  raw range [" +
               std::to_string(e.default_raw_range.lo) + ", " +
               std::to_string(e.default_raw_range.hi) + "]";
        if (e.K_override) out += "  (K fixed to " + std::to_string(*e.K_override) + ")";
        out += "\n";
    }
    out += "  polynomial  f(rho) = sum c_k rho^k via \"coefficients\": [c0, c1, ...]\n";
    out += "pressure laws:\n";
    out += "  power  p(rho) = kappa rho^alpha (defaults kappa=1, alpha=2)\n";
    out += "initial profiles:\n";
    out += "  constant  {value}\n";
    out += "  riemann   {left, right, jump}\n";
    out += "  sine      {mean, amplitude, periods, phase}\n";
    out += "  bump      {base, amplitude, center, width}\n";
    out += "pipelines:\n";
    out += "  eulerian temple correspondence variational gas nlwe metric-roundtrip\n";
    return out;
}

}  // namespace lagrangeflow
