// Command-line harness: single runs and p-sweeps over the simulated
// asynchronous solver. Exit codes: 0 converged, 2 iteration cap hit,
// 1 configuration or runtime error.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "skewsim/runner.hpp"

namespace {

std::vector<int> ParseSweepList(const std::string& arg) {
    std::string body = arg;
    if (body.rfind("p=", 0) == 0) {
        body = body.substr(2);
    }
    std::vector<int> out;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) {
            continue;
        }
        out.push_back(std::stoi(item));
    }
    if (out.empty()) {
        throw CLI::ValidationError("--sweep", "expected a list like p=2,4,8");
    }
    return out;
}

void PrintSummary(const skewsim::RunMetrics& m) {
    std::printf("mode=%s p=%d converged=%d k=[%llu..%llu] cycles=%llu epochs=%llu "
                "msgs=%llu res_glb=%.3e err=%.3e time=%.1f hash=%016llx\n",
                skewsim::mode_name(m.mode), m.p, m.converged ? 1 : 0,
                static_cast<unsigned long long>(m.min_k()),
                static_cast<unsigned long long>(m.max_k()),
                static_cast<unsigned long long>(m.reduction_cycles),
                static_cast<unsigned long long>(m.snapshot_epochs),
                static_cast<unsigned long long>(m.total_msgs()), m.res_glb, m.error_inf,
                m.sim_time, static_cast<unsigned long long>(m.trace_hash));
}

} // namespace

int main(int argc, char** argv) {
    skewsim::RunConfig cfg;
    std::string mode_str = "exact";
    std::string sweep_arg;
    std::string out_path;

    CLI::App app{"Asynchronous fixed-point solver over a simulated message-passing network"};
    app.set_config("--config", "", "Plain key=value config file; flags override it");
    app.add_option("--p", cfg.p, "Process count")->capture_default_str();
    app.add_option("--n", cfg.n, "Unknowns in the 1D problem")->capture_default_str();
    app.add_option("--epsilon", cfg.epsilon, "Convergence threshold")->capture_default_str();
    app.add_option("--mode", mode_str, "Detection mode: inexact, exact, sync")
        ->check(CLI::IsMember({"inexact", "exact", "sync"}))
        ->capture_default_str();
    app.add_option("--omega", cfg.omega, "Relaxation weight in (0,1]")->capture_default_str();
    app.add_option("--delay-min", cfg.delay_min, "Lower channel delay bound")->capture_default_str();
    app.add_option("--delay-max", cfg.delay_max, "Upper channel delay bound")->capture_default_str();
    app.add_option("--speed-jitter", cfg.speed_jitter,
                   "Per-iteration duration multiplier range [1, 1+jitter]")
        ->capture_default_str();
    app.add_option("--seed", cfg.seed, "Run seed")->capture_default_str();
    app.add_option("--max-iters", cfg.max_iters, "Per-process iteration cap")->capture_default_str();
    app.add_option("--out", out_path, "Metrics JSON (single run) or CSV (sweep) path");
    app.add_option("--trace", cfg.trace_path, "Message trace output path");
    app.add_option("--sweep", sweep_arg, "Run a p-sweep, e.g. --sweep p=2,4,8");
    app.add_flag("--all-to-all", cfg.all_to_all_data, "Publish iterate blocks to every rank");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    static const std::map<std::string, skewsim::DetectMode> modes = {
        {"inexact", skewsim::DetectMode::Inexact},
        {"exact", skewsim::DetectMode::Exact},
        {"sync", skewsim::DetectMode::SyncBaseline},
    };
    cfg.mode = modes.at(mode_str);

    try {
        if (sweep_arg.empty()) {
            const skewsim::RunMetrics m = skewsim::run(cfg);
            PrintSummary(m);
            if (!out_path.empty()) {
                std::ofstream out(out_path);
                if (!out) {
                    throw std::invalid_argument("cannot open --out path " + out_path);
                }
                skewsim::write_metrics_json(m, out);
            }
            return m.converged ? 0 : 2;
        }

        const std::vector<int> p_values = ParseSweepList(sweep_arg);
        std::ofstream file;
        std::ostream* csv = &std::cout;
        if (!out_path.empty()) {
            file.open(out_path);
            if (!file) {
                throw std::invalid_argument("cannot open --out path " + out_path);
            }
            csv = &file;
        }
        const auto all = skewsim::sweep(cfg, p_values, *csv);
        for (const auto& m : all) {
            if (!m.converged) {
                return 2;
            }
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
