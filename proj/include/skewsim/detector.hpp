#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "skewsim/collective.hpp"
#include "skewsim/snapshot.hpp"
#include "skewsim/solver.hpp"
#include "skewsim/topology.hpp"
#include "skewsim/transport.hpp"

namespace skewsim {

enum class DetectMode { Inexact, Exact, SyncBaseline };

struct DetectorConfig {
    double epsilon = 1e-8;
    DetectMode mode = DetectMode::Exact;
    double omega = 1.0;
    bool all_to_all_data = false;
};

// One process of the distributed solve: relaxation, data exchange, and the
// convergence protocol for the configured mode. step() runs one loop body;
// the caller owns scheduling and clock advancement.
//
// Inexact mode reduces each process's latest successive-iterate change with
// Max and stops once the reduced value drops under epsilon. The first cycle
// carries the epsilon bootstrap value, so meaningful detection starts one
// cycle later. Detection can misfire: the reduced changes say nothing about
// data still in flight.
//
// Exact mode alternates a snapshot epoch with a reduction cycle. When an
// epoch completes, the process applies one relaxation to its slice of the
// assembled global iterate and contributes the resulting change to the next
// reduction; the reduced value then equals the true residual of that
// snapshot, evaluated identically on every rank.
//
// SyncBaseline is the blocking reference: one relaxation per round, then a
// full reduction; the next round's stencil waits for both neighbors' blocks
// from the round just published, so round counts match a sequential sweep
// loop regardless of delays.
//
// All modes exit only after the reduction cycle whose value drops under
// epsilon completes locally; every rank sees the same value per cycle, a
// completed cycle implies all of the exiting rank's sends are out, and data
// messages are never waited on in the async modes, so no peer can block on
// an exited process.
class Process {
public:
    Process(const DetectorConfig& cfg, const Problem& problem, const Partition& part,
            const Topology& topo, Rank rank);

    // One loop body. Returns done().
    bool step(Network& net);

    bool done() const noexcept { return done_; }
    Rank rank() const noexcept { return rank_; }
    const LocalState& local() const noexcept { return state_; }
    std::uint64_t iterations() const noexcept { return state_.k; }

    // res_glb of the most recently committed reduction cycle; epsilon until
    // the first cycle completes.
    double global_residual() const noexcept { return res_norm_; }
    double local_residual() const noexcept { return res_loc_; }

    std::uint64_t reduction_cycles() const noexcept { return coll_.completed_cycles(); }
    std::uint64_t snapshot_epochs() const noexcept { return snap_.epoch(); }

    // Exact mode: the assembled iterate of the last completed epoch.
    const std::vector<double>& archived_snapshot() const noexcept { return archived_; }

    // Replaces the zero initial iterate; only valid before the first step.
    void seed_block(std::vector<double> block);

private:
    void route_(Network& net);
    bool drive_reduction_(Network& net);
    bool step_inexact_(Network& net);
    bool step_exact_(Network& net);
    bool step_sync_(Network& net);

    DetectorConfig cfg_;
    const Problem* problem_;
    const Partition* part_;
    Topology topo_;
    Rank rank_;
    LocalState state_;
    Collective coll_;
    SnapshotBuffer snap_;

    double res_loc_;
    double res_norm_;
    bool done_ = false;

    // Exact mode: snapshot phase flag and in-flight marker.
    bool sflag_ = true;
    bool snap_started_ = false;
    std::vector<double> archived_;

    // Sync baseline: whether the round's reduction is in flight, plus
    // round-tagged neighbor edges keyed by the sender's iteration count.
    bool reducing_ = false;
    std::map<std::uint64_t, double> left_by_k_;
    std::map<std::uint64_t, double> right_by_k_;
};

} // namespace skewsim
