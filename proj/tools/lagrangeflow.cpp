// Scenario runner CLI:
//   lagrangeflow run <config.json> [--jobs K] [--out DIR]
//   lagrangeflow catalog
//
// Exit status: 0 all checks pass, 2 some check failed, 1 error.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "lagrangeflow/lagrangeflow.hpp"

namespace {

struct RunOutcome {
    std::string line;
    int status = 0;  // 0 pass, 2 check failure, 1 error
};

RunOutcome run_one(const lagrangeflow::Scenario& sc, const std::string& out_root) {
    RunOutcome oc;
    std::string dir = sc.output_dir.empty() ? sc.name : sc.output_dir;
    if (!out_root.empty())
        dir = (std::filesystem::path(out_root) / dir).string();
    try {
        lagrangeflow::ScenarioResult res = lagrangeflow::run_scenario(sc, dir);
        int passed = 0;
        for (const auto& c : res.checks) passed += c.pass ? 1 : 0;
        bool ok = res.all_pass();
        oc.status = ok ? 0 : 2;
        oc.line = std::string(ok ? "[PASS] " : "[FAIL] ") + sc.name + " (" +
                  std::to_string(passed) + "/" + std::to_string(res.checks.size()) +
                  " checks) -> " + dir;
        if (!ok)
            for (const auto& c : res.checks)
                if (!c.pass)
                    oc.line += "\n       failed: " + c.name + " value=" +
                               std::to_string(c.value) + " bound=" +
                               std::to_string(c.bound);
    } catch (const lagrangeflow::Error& e) {
        oc.status = 1;
        oc.line = "[ERROR] " + sc.name + ": " + e.what();
    }
    return oc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lagrangeflow: scalar conservation laws, Lagrangian Temple systems, "
                 "flow maps, and their action functionals"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_root;
    int jobs = 1;
    CLI::App* run = app.add_subcommand("run", "execute a scenario config (object or array)");
    run->add_option("config", config_path, "scenario config JSON")->required();
    run->add_option("--jobs", jobs, "run scenarios of an array config in parallel")
        ->check(CLI::PositiveNumber);
    run->add_option("--out", out_root, "root directory for artifacts");

    CLI::App* cat = app.add_subcommand("catalog", "list built-in fluxes, pressure laws, profiles");

    CLI11_PARSE(app, argc, argv);

    if (cat->parsed()) {
        std::fputs(lagrangeflow::catalog_text().c_str(), stdout);
        return 0;
    }

    std::vector<lagrangeflow::Scenario> scenarios;
    try {
        scenarios = lagrangeflow::parse_config_file(config_path);
    } catch (const lagrangeflow::Error& e) {
        std::cerr << "[ERROR] " << e.what() << "\n";
        return 1;
    }

    std::vector<RunOutcome> outcomes(scenarios.size());
    if (jobs <= 1 || scenarios.size() <= 1) {
        for (std::size_t i = 0; i < scenarios.size(); ++i)
            outcomes[i] = run_one(scenarios[i], out_root);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs && t < static_cast<int>(scenarios.size()); ++t)
            pool.emplace_back([&scenarios, &outcomes, &next, &out_root]() {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= scenarios.size()) return;
                    outcomes[i] = run_one(scenarios[i], out_root);
                }
            });
        for (auto& th : pool) th.join();
    }

    int status = 0;
    for (const auto& oc : outcomes) {
        std::cout << oc.line << "\n";
        if (oc.status == 1) status = 1;
        if (oc.status == 2 && status == 0) status = 2;
    }
    return status;
}
