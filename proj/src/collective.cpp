#include "skewsim/collective.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace skewsim {

double combine(ReduceOp op, double resident, double incoming) {
    switch (op) {
    case ReduceOp::Max: return resident >= incoming ? resident : incoming;
    case ReduceOp::Min: return resident <= incoming ? resident : incoming;
    default: return resident + incoming;
    }
}

Collective::Collective(const Topology& topo, Rank rank) : topo_(topo), rank_(rank) {
    if (rank < 0 || rank >= topo.p) {
        throw std::invalid_argument("Collective: rank " + std::to_string(rank) +
                                    " outside [0," + std::to_string(topo.p) + ")");
    }
}

// Slot layout per cycle: [0] backward shift, [1..mu0] doubling rounds,
// [mu0+1] forward shift.
int Collective::slot_index_(CollPhaseTag tag, int round) const {
    switch (tag) {
    case CollPhaseTag::BackShift: return 0;
    case CollPhaseTag::Doubling: return 1 + round;
    default: return 1 + topo_.mu0;
    }
}

void Collective::check_sender_(CollPhaseTag tag, int round, Rank src) const {
    bool ok = false;
    switch (tag) {
    case CollPhaseTag::BackShift:
        ok = topo_.is_host(rank_) && src == topo_.extra_of(rank_);
        break;
    case CollPhaseTag::Doubling:
        ok = rank_ < topo_.p0 && round >= 0 && round < topo_.mu0 &&
             src == topo_.partner(rank_, round);
        break;
    case CollPhaseTag::FwdShift:
        ok = topo_.is_extra(rank_) && src == topo_.host_of(rank_);
        break;
    }
    if (!ok) {
        throw std::runtime_error("Collective: rank " + std::to_string(rank_) +
                                 " got a reduction message it can never consume (from rank " +
                                 std::to_string(src) + ")");
    }
}

void Collective::store_current_(Rank src, const CollMsg& msg) {
    Slot& slot = slots_[static_cast<std::size_t>(slot_index_(msg.tag, msg.round))];
    if (slot.state != SlotState::Empty) {
        throw std::runtime_error("Collective: duplicate reduction message from rank " +
                                 std::to_string(src) + " in cycle " + std::to_string(msg.cycle));
    }
    slot.state = SlotState::Present;
    slot.value = msg.value;
}

void Collective::deliver(Rank src, const CollMsg& msg) {
    check_sender_(msg.tag, msg.round, src);
    if (msg.cycle == 0) {
        throw std::runtime_error("Collective: cycle ids start at 1");
    }
    if (msg.cycle > cycle_) {
        future_.emplace_back(src, msg);
        return;
    }
    if (msg.cycle < cycle_) {
        throw std::runtime_error("Collective: stale message for cycle " + std::to_string(msg.cycle) +
                                 " at rank " + std::to_string(rank_) + " (current cycle " +
                                 std::to_string(cycle_) + ")");
    }
    store_current_(src, msg);
}

std::optional<double> Collective::take_slot_(int index) {
    Slot& slot = slots_[static_cast<std::size_t>(index)];
    if (slot.state != SlotState::Present) {
        return std::nullopt;
    }
    slot.state = SlotState::Consumed;
    return slot.value;
}

void Collective::send_once_(Network& net, CollPhaseTag tag, int round, Rank to) {
    if (sent_) {
        return;
    }
    net.send(rank_, to, CollMsg{cycle_, tag, round, acc_});
    sent_ = true;
}

void Collective::enter_(CollPhase phase, int round) {
    phase_ = phase;
    round_ = round;
    sent_ = false;
}

void Collective::finish_(double result) {
    result_ = result;
    phase_ = CollPhase::Done;
    ++completed_;
}

void Collective::start(double local_value, ReduceOp op) {
    if (phase_ != CollPhase::Idle && phase_ != CollPhase::Done) {
        throw std::runtime_error("Collective::start: cycle " + std::to_string(cycle_) +
                                 " still in flight at rank " + std::to_string(rank_));
    }
    ++cycle_;
    op_ = op;
    acc_ = local_value;
    round_ = 0;
    sent_ = false;
    slots_.assign(static_cast<std::size_t>(topo_.mu0) + 2, Slot{});

    if (topo_.p == 1) {
        finish_(local_value);
        return;
    }
    if (topo_.is_extra(rank_)) {
        phase_ = CollPhase::BackShiftSend;
    } else if (topo_.is_host(rank_)) {
        phase_ = CollPhase::BackShiftRecv;
    } else {
        phase_ = CollPhase::Doubling;
    }

    // Values that raced ahead of this start() become consumable now.
    if (!future_.empty()) {
        std::vector<std::pair<Rank, CollMsg>> keep;
        for (auto& [src, msg] : future_) {
            if (msg.cycle == cycle_) {
                store_current_(src, msg);
            } else if (msg.cycle > cycle_) {
                keep.emplace_back(src, msg);
            } else {
                throw std::runtime_error("Collective: buffered message for already-finished cycle");
            }
        }
        future_ = std::move(keep);
    }
}

void Collective::progress(Network& net) {
    if (phase_ == CollPhase::Idle) {
        throw std::runtime_error("Collective::progress: no cycle in flight at rank " +
                                 std::to_string(rank_));
    }
    // At most one message consumption per call; send-only phases chain
    // through so a freshly entered phase's message goes out in the same call.
    bool combined = false;
    for (;;) {
        switch (phase_) {
        case CollPhase::BackShiftSend:
            send_once_(net, CollPhaseTag::BackShift, 0, topo_.host_of(rank_));
            enter_(CollPhase::FwdShiftRecv, 0);
            continue;
        case CollPhase::BackShiftRecv: {
            if (combined) return;
            auto v = take_slot_(slot_index_(CollPhaseTag::BackShift, 0));
            if (!v) return;
            acc_ = combine(op_, acc_, *v);
            combined = true;
            enter_(CollPhase::Doubling, 0);
            continue;
        }
        case CollPhase::Doubling: {
            send_once_(net, CollPhaseTag::Doubling, round_, topo_.partner(rank_, round_));
            if (combined) return;
            auto v = take_slot_(slot_index_(CollPhaseTag::Doubling, round_));
            if (!v) return;
            acc_ = combine(op_, acc_, *v);
            combined = true;
            if (round_ + 1 < topo_.mu0) {
                enter_(CollPhase::Doubling, round_ + 1);
            } else if (topo_.is_host(rank_)) {
                enter_(CollPhase::FwdShiftSend, 0);
            } else {
                finish_(acc_);
            }
            continue;
        }
        case CollPhase::FwdShiftSend:
            send_once_(net, CollPhaseTag::FwdShift, 0, topo_.extra_of(rank_));
            finish_(acc_);
            continue;
        case CollPhase::FwdShiftRecv: {
            if (combined) return;
            auto v = take_slot_(slot_index_(CollPhaseTag::FwdShift, 0));
            if (!v) return;
            // The host's value already folds in this extra's contribution.
            finish_(*v);
            return;
        }
        case CollPhase::Done:
            return;
        case CollPhase::Idle:
            return;
        }
    }
}

double Collective::take_result() {
    if (phase_ != CollPhase::Done) {
        throw std::runtime_error("Collective::take_result: cycle " + std::to_string(cycle_) +
                                 " not complete at rank " + std::to_string(rank_));
    }
    phase_ = CollPhase::Idle;
    return result_;
}

} // namespace skewsim
