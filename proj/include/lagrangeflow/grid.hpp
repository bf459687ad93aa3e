#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <vector>

#include "lagrangeflow/numerics.hpp"

namespace lagrangeflow {

enum class Boundary { periodic, constant_extension };

/// Piecewise-constant (cell-averaged) field on a uniform 1-D mesh.
struct GridFunction {
    std::vector<double> values;
    double dx = 0.0;
    double x0 = 0.0;  // left edge of the domain
    Boundary boundary = Boundary::periodic;

    int n() const { return static_cast<int>(values.size()); }
    double length() const { return dx * n(); }
    double x1() const { return x0 + length(); }
    double center(int i) const { return x0 + (i + 0.5) * dx; }
    double edge(int i) const { return x0 + i * dx; }

    /// Cell value with ghost handling: periodic wrap or constant extension.
    double at(long i) const {
        long m = n();
        if (boundary == Boundary::periodic) {
            long j = i % m;
            if (j < 0) j += m;
            return values[static_cast<std::size_t>(j)];
        }
        return values[static_cast<std::size_t>(std::clamp(i, 0L, m - 1))];
    }

    /// Index of the cell containing x (clamped to the domain).
    int cell_index(double x) const {
        int i = static_cast<int>(std::floor((x - x0) / dx));
        return std::clamp(i, 0, n() - 1);
    }
};

inline GridFunction make_grid(int n, double a, double b, Boundary bc,
                              const std::function<double(double)>& fn) {
    GridFunction g;
    g.dx = (b - a) / n;
    g.x0 = a;
    g.boundary = bc;
    g.values.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g.values[static_cast<std::size_t>(i)] = fn(g.center(i));
    return g;
}

/// Total mass sum(v_i * dx), accumulated left to right for reproducibility.
inline double total_mass(const GridFunction& g) {
    double s = 0.0;
    for (double v : g.values) s += v;
    return s * g.dx;
}

/// Total variation; wraps around in the periodic case.
inline double total_variation(const GridFunction& g) {
    double tv = 0.0;
    for (int i = 1; i < g.n(); ++i)
        tv += std::abs(g.values[static_cast<std::size_t>(i)] -
                       g.values[static_cast<std::size_t>(i - 1)]);
    if (g.boundary == Boundary::periodic && g.n() > 1)
        tv += std::abs(g.values.front() - g.values.back());
    return tv;
}

inline double min_value(const GridFunction& g) {
    return *std::min_element(g.values.begin(), g.values.end());
}

inline double max_value(const GridFunction& g) {
    return *std::max_element(g.values.begin(), g.values.end());
}

/// L1 distance of two fields on the same mesh, sum |a-b| * dx.
inline double l1_distance(const GridFunction& a, const GridFunction& b) {
    double s = 0.0;
    for (int i = 0; i < a.n(); ++i)
        s += std::abs(a.values[static_cast<std::size_t>(i)] -
                      b.values[static_cast<std::size_t>(i)]);
    return s * a.dx;
}

/// Bitwise equality, used to verify exact invariance of frozen fields.
inline bool bit_identical(const GridFunction& a, const GridFunction& b) {
    if (a.n() != b.n()) return false;
    return std::memcmp(a.values.data(), b.values.data(),
                       a.values.size() * sizeof(double)) == 0;
}

}  // namespace lagrangeflow
