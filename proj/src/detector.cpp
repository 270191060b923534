#include "skewsim/detector.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace skewsim {

Process::Process(const DetectorConfig& cfg, const Problem& problem, const Partition& part,
                 const Topology& topo, Rank rank)
    : cfg_(cfg), problem_(&problem), part_(&part), topo_(topo), rank_(rank),
      state_(rank, part), coll_(topo, rank), snap_(topo.p, rank),
      res_loc_(cfg.epsilon), res_norm_(cfg.epsilon) {
    if (!(cfg.epsilon > 0.0)) {
        throw std::invalid_argument("Process: epsilon must be positive");
    }
    if (!(cfg.omega > 0.0) || cfg.omega > 1.0) {
        throw std::invalid_argument("Process: omega must lie in (0, 1]");
    }
}

void Process::seed_block(std::vector<double> block) {
    if (state_.k != 0) {
        throw std::runtime_error("Process::seed_block: already started");
    }
    if (block.size() != state_.block.size()) {
        throw std::invalid_argument("Process::seed_block: size mismatch");
    }
    state_.block = std::move(block);
}

void Process::route_(Network& net) {
    for (auto& env : net.poll(rank_)) {
        switch (env.kind()) {
        case MsgKind::IterData: {
            const auto& msg = std::get<IterDataMsg>(env.payload);
            if (cfg_.mode == DetectMode::SyncBaseline) {
                // Rounds consume matching-k edges; latest-wins would let a
                // neighbor running ahead smear into the current round.
                if (env.src == rank_ - 1) {
                    left_by_k_[msg.k] = msg.block.back();
                } else if (env.src == rank_ + 1) {
                    right_by_k_[msg.k] = msg.block.front();
                }
            } else {
                apply_iter_data(state_, env.src, msg);
            }
            break;
        }
        case MsgKind::Collective:
            coll_.deliver(env.src, std::get<CollMsg>(env.payload));
            break;
        case MsgKind::Snapshot:
            if (cfg_.mode != DetectMode::Exact) {
                throw std::runtime_error("Process: snapshot message in a mode without snapshots");
            }
            snap_.absorb(env.src, std::get<SnapMsg>(env.payload));
            break;
        }
    }
}

// One reduction invocation per loop body: starts a cycle if none is in
// flight, otherwise advances the one that is. On completion commits the
// reduced value into res_norm_ and reports it.
bool Process::drive_reduction_(Network& net) {
    if (coll_.phase() == CollPhase::Idle) {
        coll_.start(res_loc_, ReduceOp::Max);
        coll_.progress(net);
    } else {
        coll_.progress(net);
    }
    if (!coll_.is_complete()) {
        return false;
    }
    res_norm_ = coll_.take_result();
    return true;
}

bool Process::step(Network& net) {
    if (done_) {
        return true;
    }
    switch (cfg_.mode) {
    case DetectMode::Inexact: return step_inexact_(net);
    case DetectMode::Exact: return step_exact_(net);
    default: return step_sync_(net);
    }
}

bool Process::step_inexact_(Network& net) {
    route_(net);
    std::vector<double> z = state_.block;
    state_.block = relax_block(state_, *problem_, *part_, cfg_.omega);
    ++state_.k;
    publish(state_, net, cfg_.all_to_all_data);

    if (drive_reduction_(net)) {
        res_loc_ = residual_inf(state_.block, z);
        if (res_norm_ < cfg_.epsilon) {
            done_ = true;
        } else {
            // Next cycle departs in the same body with the fresh change.
            coll_.start(res_loc_, ReduceOp::Max);
            coll_.progress(net);
        }
    }
    return done_;
}

bool Process::step_exact_(Network& net) {
    route_(net);
    state_.block = relax_block(state_, *problem_, *part_, cfg_.omega);
    ++state_.k;
    publish(state_, net, cfg_.all_to_all_data);

    if (sflag_) {
        if (!snap_started_) {
            snap_.initiate(state_.block, net);
            snap_started_ = true;
        }
        if (snap_.complete()) {
            // One relaxation applied to the frozen global iterate; its
            // change on this slice feeds the next reduction.
            archived_ = snap_.assemble();
            const int off = part_->offset(rank_);
            const int sz = part_->size(rank_);
            LocalState frozen;
            frozen.rank = rank_;
            frozen.block.assign(archived_.begin() + off, archived_.begin() + off + sz);
            frozen.left_edge = off > 0 ? archived_[static_cast<std::size_t>(off - 1)] : 0.0;
            frozen.right_edge = off + sz < problem_->n
                                    ? archived_[static_cast<std::size_t>(off + sz)]
                                    : 0.0;
            const std::vector<double> relaxed = relax_block(frozen, *problem_, *part_, cfg_.omega);
            res_loc_ = residual_inf(relaxed, frozen.block);
            sflag_ = false;
            snap_started_ = false;
        }
    } else if (drive_reduction_(net)) {
        if (res_norm_ < cfg_.epsilon) {
            done_ = true;
        } else {
            sflag_ = true;
        }
    }
    return done_;
}

bool Process::step_sync_(Network& net) {
    route_(net);
    if (!reducing_) {
        // A round may start only with both neighbors' blocks from the round
        // just reduced.
        if (state_.k > 0) {
            const std::uint64_t want = state_.k;
            const bool left_ok = rank_ == 0 || left_by_k_.count(want) > 0;
            const bool right_ok = rank_ == topo_.p - 1 || right_by_k_.count(want) > 0;
            if (!left_ok || !right_ok) {
                return done_;
            }
            if (rank_ > 0) {
                state_.left_edge = left_by_k_[want];
                left_by_k_.erase(left_by_k_.begin(), left_by_k_.upper_bound(want));
            }
            if (rank_ < topo_.p - 1) {
                state_.right_edge = right_by_k_[want];
                right_by_k_.erase(right_by_k_.begin(), right_by_k_.upper_bound(want));
            }
        }
        std::vector<double> z = state_.block;
        state_.block = relax_block(state_, *problem_, *part_, cfg_.omega);
        ++state_.k;
        publish(state_, net, cfg_.all_to_all_data);
        res_loc_ = residual_inf(state_.block, z);
        if (drive_reduction_(net)) {
            if (res_norm_ < cfg_.epsilon) {
                done_ = true;
            }
            // Not converged: stay out of the reducing state, next body
            // relaxes the next round (single-process case).
        } else {
            reducing_ = true;
        }
    } else if (drive_reduction_(net)) {
        if (res_norm_ < cfg_.epsilon) {
            done_ = true;
        } else {
            reducing_ = false;
        }
    }
    return done_;
}

} // namespace skewsim
