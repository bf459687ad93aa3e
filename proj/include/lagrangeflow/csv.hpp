#pragma once

#include <cstdio>
#include <string>

#include "lagrangeflow/errors.hpp"
#include "lagrangeflow/eulerian.hpp"
#include "lagrangeflow/flow_map.hpp"
#include "lagrangeflow/systems.hpp"
#include "lagrangeflow/temple.hpp"

namespace lagrangeflow {

/// CSV writers, 17 significant digits so doubles round-trip exactly.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : f_(std::fopen(path.c_str(), "wb")) {
        if (!f_) throw ConfigError("cannot open " + path + " for writing");
    }
    ~CsvWriter() {
        if (f_) std::fclose(f_);
    }
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void header(const std::string& h) { std::fprintf(f_, "%s\n", h.c_str()); }

    void row(std::initializer_list<double> values) {
        bool first = true;
        for (double v : values) {
            std::fprintf(f_, first ? "%.17g" : ",%.17g", v);
            first = false;
        }
        std::fputc('\n', f_);
    }

private:
    std::FILE* f_;
};

inline void write_eulerian_csv(const std::string& path, const EulerianTrajectory& traj) {
    CsvWriter w(path);
    w.header("t,x,rho");
    for (int k = 0; k < traj.size(); ++k) {
        const GridFunction& g = traj.states[static_cast<std::size_t>(k)];
        for (int i = 0; i < g.n(); ++i)
            w.row({traj.times[static_cast<std::size_t>(k)], g.center(i),
                   g.values[static_cast<std::size_t>(i)]});
    }
}

inline void write_temple_csv(const std::string& path, const TempleTrajectory& traj) {
    CsvWriter w(path);
    w.header("t,x,eta,v");
    for (int k = 0; k < traj.size(); ++k) {
        const TempleState& s = traj.states[static_cast<std::size_t>(k)];
        for (int i = 0; i < s.eta.n(); ++i)
            w.row({traj.times[static_cast<std::size_t>(k)], s.eta.center(i),
                   s.eta.values[static_cast<std::size_t>(i)],
                   s.v.values[static_cast<std::size_t>(i)]});
    }
}

inline void write_gamma_csv(const std::string& path, const ReconstructionResult& rec) {
    CsvWriter w(path);
    w.header("t,x,gamma");
    for (const FlowMap& m : rec.maps)
        for (std::size_t j = 0; j < m.gamma.size(); ++j)
            w.row({m.t, m.x0 + static_cast<double>(j) * m.dx, m.gamma[j]});
}

inline void write_system_csv(const std::string& path, const SystemTrajectory& traj) {
    CsvWriter w(path);
    w.header("t,x,eta,w,v");
    for (int k = 0; k < traj.size(); ++k) {
        const SystemState& s = traj.states[static_cast<std::size_t>(k)];
        for (int i = 0; i < s.eta.n(); ++i)
            w.row({traj.times[static_cast<std::size_t>(k)], s.eta.center(i),
                   s.eta.values[static_cast<std::size_t>(i)],
                   s.w.values[static_cast<std::size_t>(i)],
                   s.v.values[static_cast<std::size_t>(i)]});
    }
}

}  // namespace lagrangeflow
