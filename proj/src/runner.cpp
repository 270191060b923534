#include "skewsim/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace skewsim {

std::uint64_t RunMetrics::max_k() const {
    return iterations.empty() ? 0 : *std::max_element(iterations.begin(), iterations.end());
}

std::uint64_t RunMetrics::min_k() const {
    return iterations.empty() ? 0 : *std::min_element(iterations.begin(), iterations.end());
}

double RunMetrics::mean_k() const {
    if (iterations.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (std::uint64_t k : iterations) {
        sum += static_cast<double>(k);
    }
    return sum / static_cast<double>(iterations.size());
}

void validate_config(const RunConfig& cfg) {
    if (cfg.p < 1) {
        throw std::invalid_argument("config: p must be >= 1");
    }
    if (cfg.n < cfg.p) {
        throw std::invalid_argument("config: need n >= p so every block is non-empty");
    }
    if (!(cfg.epsilon > 0.0) || !std::isfinite(cfg.epsilon)) {
        throw std::invalid_argument("config: epsilon must be positive and finite");
    }
    if (!(cfg.omega > 0.0) || cfg.omega > 1.0) {
        throw std::invalid_argument("config: omega must lie in (0, 1]");
    }
    if (!(cfg.delay_min >= 0.0) || !(cfg.delay_max >= cfg.delay_min) ||
        !std::isfinite(cfg.delay_max)) {
        throw std::invalid_argument("config: need 0 <= delay_min <= delay_max < inf");
    }
    if (!(cfg.speed_jitter >= 0.0) || !std::isfinite(cfg.speed_jitter)) {
        throw std::invalid_argument("config: speed_jitter must be finite and >= 0");
    }
    if (cfg.max_iters < 1) {
        throw std::invalid_argument("config: max_iters must be >= 1");
    }
    if (cfg.b_override && cfg.b_override->size() != static_cast<std::size_t>(cfg.n)) {
        throw std::invalid_argument("config: b override must have n entries");
    }
}

RunMetrics run(const RunConfig& cfg) {
    validate_config(cfg);

    const Problem problem =
        cfg.b_override ? make_problem(cfg.n, *cfg.b_override) : make_problem(cfg.n, cfg.seed);
    const Partition part = Partition::balanced(cfg.n, cfg.p);
    const Topology topo = Topology::for_processes(cfg.p);

    Network net(NetworkConfig{cfg.p, cfg.delay_min, cfg.delay_max, cfg.speed_jitter, cfg.seed});
    std::ofstream trace_file;
    if (!cfg.trace_path.empty()) {
        trace_file.open(cfg.trace_path);
        if (!trace_file) {
            throw std::invalid_argument("config: cannot open trace path " + cfg.trace_path);
        }
        net.attach_trace(&trace_file);
    }

    const DetectorConfig dc{cfg.epsilon, cfg.mode, cfg.omega, cfg.all_to_all_data};
    std::vector<Process> procs;
    procs.reserve(static_cast<std::size_t>(cfg.p));
    for (Rank r = 0; r < cfg.p; ++r) {
        procs.emplace_back(dc, problem, part, topo, r);
    }

    // Liveness guard: bodies per process are bounded by a small multiple of
    // the iteration cap, since every reduction or snapshot in flight
    // completes within a bounded number of bodies.
    const std::uint64_t body_limit =
        cfg.max_iters * static_cast<std::uint64_t>(cfg.p) * 64 + (1ULL << 20);
    std::uint64_t bodies = 0;
    bool converged = true;

    for (;;) {
        Rank next = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Rank r = 0; r < cfg.p; ++r) {
            if (!procs[static_cast<std::size_t>(r)].done() && net.now(r) < best) {
                best = net.now(r);
                next = r;
            }
        }
        if (next < 0) {
            break;  // all processes exited their loops
        }
        if (procs[static_cast<std::size_t>(next)].iterations() >= cfg.max_iters) {
            converged = false;
            break;
        }
        procs[static_cast<std::size_t>(next)].step(net);
        net.advance(next);
        if (++bodies > body_limit) {
            throw std::runtime_error("run: scheduler watchdog tripped (no progress)");
        }
    }

    RunMetrics m;
    m.p = cfg.p;
    m.mode = cfg.mode;
    m.converged = converged;
    m.iterations.reserve(static_cast<std::size_t>(cfg.p));
    double res = 0.0;
    std::uint64_t cycles = 0;
    std::uint64_t epochs = 0;
    double sim_time = 0.0;
    for (Rank r = 0; r < cfg.p; ++r) {
        const Process& proc = procs[static_cast<std::size_t>(r)];
        m.iterations.push_back(proc.iterations());
        res = std::max(res, proc.global_residual());
        cycles = std::max(cycles, proc.reduction_cycles());
        epochs = std::max(epochs, proc.snapshot_epochs());
        sim_time = std::max(sim_time, net.now(r));
    }
    m.res_glb = res;
    m.reduction_cycles = cycles;
    m.snapshot_epochs = epochs;
    m.sim_time = sim_time;
    m.data_msgs = net.sent_count(MsgKind::IterData);
    m.coll_msgs = net.sent_count(MsgKind::Collective);
    m.snap_msgs = net.sent_count(MsgKind::Snapshot);
    m.trace_hash = net.trace_hash();

    if (converged && !(m.res_glb < cfg.epsilon)) {
        throw std::runtime_error("run: converged without the reduced residual under epsilon");
    }

    std::vector<double> final_x;
    final_x.reserve(static_cast<std::size_t>(cfg.n));
    for (Rank r = 0; r < cfg.p; ++r) {
        const auto& b = procs[static_cast<std::size_t>(r)].local().block;
        final_x.insert(final_x.end(), b.begin(), b.end());
    }
    const std::vector<double>* residual_target = &final_x;
    if (cfg.mode == DetectMode::Exact && !procs[0].archived_snapshot().empty()) {
        residual_target = &procs[0].archived_snapshot();
    }
    m.oracle_residual =
        residual_inf(relax_vector(*residual_target, problem, cfg.omega), *residual_target);
    m.error_inf = residual_inf(final_x, oracle_solve(problem));
    return m;
}

const char* mode_name(DetectMode mode) {
    switch (mode) {
    case DetectMode::Inexact: return "inexact";
    case DetectMode::Exact: return "exact";
    default: return "sync";
    }
}

void write_metrics_json(const RunMetrics& m, std::ostream& out) {
    nlohmann::json j;
    j["p"] = m.p;
    j["mode"] = mode_name(m.mode);
    j["converged"] = m.converged;
    j["iterations"] = m.iterations;
    j["data_msgs"] = m.data_msgs;
    j["coll_msgs"] = m.coll_msgs;
    j["snap_msgs"] = m.snap_msgs;
    j["reduction_cycles"] = m.reduction_cycles;
    j["snapshot_epochs"] = m.snapshot_epochs;
    j["sim_time"] = m.sim_time;
    j["res_glb"] = m.res_glb;
    j["oracle_residual"] = m.oracle_residual;
    j["error_inf"] = m.error_inf;
    j["trace_hash"] = m.trace_hash;
    out << j.dump(2) << '\n';
}

std::vector<RunMetrics> sweep(const RunConfig& base, const std::vector<int>& p_values,
                              std::ostream& csv) {
    if (p_values.empty()) {
        throw std::invalid_argument("sweep: empty p list");
    }
    struct Row {
        const char* mode;
        const char* detector;
        DetectMode m;
    };
    static constexpr Row rows[] = {
        {"sync", "baseline", DetectMode::SyncBaseline},
        {"async", "inexact", DetectMode::Inexact},
        {"async", "exact", DetectMode::Exact},
    };

    std::vector<RunMetrics> out;
    csv << sweep_csv_header << '\n';
    csv.flush();
    for (int p : p_values) {
        for (const Row& row : rows) {
            RunConfig cfg = base;
            cfg.p = p;
            cfg.mode = row.m;
            RunMetrics m = run(cfg);
            char mean[32];
            std::snprintf(mean, sizeof mean, "%.2f", m.mean_k());
            csv << p << ',' << row.mode << ',' << row.detector << ',' << m.max_k() << ','
                << m.min_k() << ',' << mean << ',' << m.total_msgs() << ','
                << m.reduction_cycles << ',' << (m.converged ? 1 : 0) << '\n';
            csv.flush();
            out.push_back(std::move(m));
        }
    }
    return out;
}

} // namespace skewsim
