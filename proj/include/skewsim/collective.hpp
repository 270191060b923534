#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "skewsim/messages.hpp"
#include "skewsim/topology.hpp"
#include "skewsim/transport.hpp"

namespace skewsim {

enum class ReduceOp { Max, Min, Sum };

// Fixed combine order (resident first) keeps Sum results independent of
// message timing.
double combine(ReduceOp op, double resident, double incoming);

enum class CollPhase { Idle, BackShiftSend, BackShiftRecv, Doubling, FwdShiftSend, FwdShiftRecv, Done };

// One process's slice of the non-blocking allreduce. Roles per cycle:
//
//   extra (rank >= p0):      BackShiftSend -> FwdShiftRecv -> Done
//   host (rank < p - p0):    BackShiftRecv -> Doubling(0..mu0) -> FwdShiftSend -> Done
//   other pivot ranks:       Doubling(0..mu0) -> Done
//   p == p0:                 no shift phases; p == 1 completes at start().
//
// progress() is invoked repeatedly and never blocks: it sends the current
// phase's message once, consumes at most one pending message, and advances
// through any send-only phases that become complete. Messages are slotted by
// (cycle, phase, sender); a message for a future cycle is buffered until that
// cycle starts, one for a past cycle or an occupied slot is a protocol error.
class Collective {
public:
    Collective(const Topology& topo, Rank rank);

    // Begins the next cycle with this process's contribution. Requires no
    // cycle in flight. For p = 1 the cycle completes immediately.
    void start(double local_value, ReduceOp op);

    void progress(Network& net);

    // Buffers or slots an incoming reduction value. Called by the owner's
    // message loop for every Collective-kind envelope.
    void deliver(Rank src, const CollMsg& msg);

    bool is_complete() const noexcept { return phase_ == CollPhase::Done; }

    // Final reduced value; resets to Idle. Requires a completed cycle.
    double take_result();

    CollPhase phase() const noexcept { return phase_; }
    int round() const noexcept { return round_; }
    std::uint64_t cycle() const noexcept { return cycle_; }
    std::uint64_t completed_cycles() const noexcept { return completed_; }

private:
    enum class SlotState : std::uint8_t { Empty, Present, Consumed };
    struct Slot {
        SlotState state = SlotState::Empty;
        double value = 0.0;
    };

    int slot_index_(CollPhaseTag tag, int round) const;
    void check_sender_(CollPhaseTag tag, int round, Rank src) const;
    void store_current_(Rank src, const CollMsg& msg);
    std::optional<double> take_slot_(int index);
    void send_once_(Network& net, CollPhaseTag tag, int round, Rank to);
    void enter_(CollPhase phase, int round);
    void finish_(double result);

    Topology topo_;
    Rank rank_;
    ReduceOp op_ = ReduceOp::Max;
    CollPhase phase_ = CollPhase::Idle;
    int round_ = 0;
    bool sent_ = false;
    double acc_ = 0.0;
    double result_ = 0.0;
    std::uint64_t cycle_ = 0;
    std::uint64_t completed_ = 0;
    std::vector<Slot> slots_;
    std::vector<std::pair<Rank, CollMsg>> future_;
};

} // namespace skewsim
