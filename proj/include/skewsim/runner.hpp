#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "skewsim/detector.hpp"

namespace skewsim {

struct RunConfig {
    int p = 4;
    int n = 1000;
    double epsilon = 1e-8;
    DetectMode mode = DetectMode::Exact;
    double omega = 1.0;
    double delay_min = 0.0;
    double delay_max = 0.5;
    double speed_jitter = 0.0;
    std::uint64_t seed = 1;
    std::uint64_t max_iters = 10'000'000;
    bool all_to_all_data = false;
    std::string trace_path;                          // empty: no trace file
    std::optional<std::vector<double>> b_override;   // test hook: forces b
};

struct RunMetrics {
    int p = 0;
    DetectMode mode = DetectMode::Exact;
    bool converged = false;
    std::vector<std::uint64_t> iterations;  // per-rank k at exit
    std::uint64_t data_msgs = 0;
    std::uint64_t coll_msgs = 0;
    std::uint64_t snap_msgs = 0;
    std::uint64_t reduction_cycles = 0;
    std::uint64_t snapshot_epochs = 0;
    double sim_time = 0.0;
    double res_glb = 0.0;        // committed value of the final reduction
    double oracle_residual = 0.0;  // one-sweep residual of the final iterate
                                   // (exact mode: of the archived snapshot)
    double error_inf = 0.0;      // distance of the final iterate to the
                                 // direct tridiagonal solve
    std::uint64_t trace_hash = 0;

    std::uint64_t max_k() const;
    std::uint64_t min_k() const;
    double mean_k() const;
    std::uint64_t total_msgs() const { return data_msgs + coll_msgs + snap_msgs; }
};

// Throws std::invalid_argument on a bad configuration.
void validate_config(const RunConfig& cfg);

// Full simulated solve under the event scheduler: always steps the process
// with the smallest local clock (ties to the lowest rank). Stops when every
// process has exited its detection loop, or when any process would pass
// max_iters (converged = false).
RunMetrics run(const RunConfig& cfg);

const char* mode_name(DetectMode mode);

void write_metrics_json(const RunMetrics& m, std::ostream& out);

inline constexpr const char* sweep_csv_header =
    "p,mode,detector,max_k,min_k,mean_k,messages,reduction_cycles,converged";

// One run per (p, detector): the blocking baseline plus both non-blocking
// detectors. Streams one CSV row per run so a failure preserves the rows
// already produced.
std::vector<RunMetrics> sweep(const RunConfig& base, const std::vector<int>& p_values,
                              std::ostream& csv);

} // namespace skewsim
