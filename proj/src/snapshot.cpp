#include "skewsim/snapshot.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace skewsim {

namespace {
std::vector<Rank> all_others(int p, Rank rank) {
    std::vector<Rank> out;
    for (Rank r = 0; r < p; ++r) {
        if (r != rank) out.push_back(r);
    }
    return out;
}
} // namespace

SnapshotBuffer::SnapshotBuffer(int p, Rank rank)
    : SnapshotBuffer(p, rank, all_others(p, rank), all_others(p, rank)) {
    all_to_all_ = true;
}

SnapshotBuffer::SnapshotBuffer(int p, Rank rank, std::vector<Rank> dependents,
                               std::vector<Rank> essential)
    : p_(p), rank_(rank), dependents_(std::move(dependents)), essential_(std::move(essential)) {
    if (p_ < 1 || rank_ < 0 || rank_ >= p_) {
        throw std::invalid_argument("SnapshotBuffer: bad rank/process count");
    }
    for (Rank r : dependents_) {
        if (r < 0 || r >= p_ || r == rank_) {
            throw std::invalid_argument("SnapshotBuffer: bad dependent rank");
        }
    }
    for (Rank r : essential_) {
        if (r < 0 || r >= p_ || r == rank_) {
            throw std::invalid_argument("SnapshotBuffer: bad essential rank");
        }
    }
    all_to_all_ = essential_.size() == static_cast<std::size_t>(p_) - 1 &&
                  dependents_.size() == static_cast<std::size_t>(p_) - 1;
    blocks_.resize(static_cast<std::size_t>(p_));
    have_.assign(static_cast<std::size_t>(p_), false);
}

void SnapshotBuffer::initiate(std::span<const double> local_block, Network& net) {
    if (!complete_) {
        throw std::runtime_error("SnapshotBuffer: epoch " + std::to_string(epoch_) +
                                 " still in flight at rank " + std::to_string(rank_));
    }
    ++epoch_;
    own_block_.assign(local_block.begin(), local_block.end());
    std::fill(have_.begin(), have_.end(), false);
    missing_ = essential_.size();
    complete_ = missing_ == 0;

    for (Rank dst : dependents_) {
        net.send(rank_, dst, SnapMsg{epoch_, own_block_});
    }

    // Blocks from peers that opened this epoch before we did.
    auto stash = std::move(next_epoch_);
    next_epoch_.clear();
    for (auto& [src, msg] : stash) {
        absorb(src, msg);
    }
}

void SnapshotBuffer::absorb(Rank src, const SnapMsg& msg) {
    if (src < 0 || src >= p_ || src == rank_) {
        throw std::invalid_argument("SnapshotBuffer: bad source rank " + std::to_string(src));
    }
    if (std::find(essential_.begin(), essential_.end(), src) == essential_.end()) {
        throw std::runtime_error("SnapshotBuffer: block from non-essential rank " +
                                 std::to_string(src));
    }
    if (msg.epoch == epoch_ + 1) {
        next_epoch_.emplace_back(src, msg);
        return;
    }
    if (msg.epoch != epoch_ || epoch_ == 0 || complete_) {
        // Either a stale epoch or a block for an epoch this rank already
        // closed; both mean the alternation protocol was violated.
        throw std::runtime_error("SnapshotBuffer: rank " + std::to_string(rank_) +
                                 " cannot accept epoch " + std::to_string(msg.epoch) +
                                 " (current " + std::to_string(epoch_) + ")");
    }
    if (have_[static_cast<std::size_t>(src)]) {
        throw std::runtime_error("SnapshotBuffer: duplicate block from rank " +
                                 std::to_string(src) + " in epoch " + std::to_string(msg.epoch));
    }
    have_[static_cast<std::size_t>(src)] = true;
    blocks_[static_cast<std::size_t>(src)] = msg.block;
    if (--missing_ == 0) {
        complete_ = true;
    }
}

std::vector<double> SnapshotBuffer::assemble() const {
    if (!complete_ || epoch_ == 0) {
        throw std::runtime_error("SnapshotBuffer::assemble: no complete epoch");
    }
    if (!all_to_all_) {
        throw std::runtime_error("SnapshotBuffer::assemble: requires the all-to-all pattern");
    }
    std::vector<double> out;
    for (Rank r = 0; r < p_; ++r) {
        const auto& b = r == rank_ ? own_block_ : blocks_[static_cast<std::size_t>(r)];
        out.insert(out.end(), b.begin(), b.end());
    }
    return out;
}

const std::vector<double>& SnapshotBuffer::block(Rank r) const {
    if (r == rank_) {
        return own_block_;
    }
    if (r < 0 || r >= p_ || !have_[static_cast<std::size_t>(r)]) {
        throw std::invalid_argument("SnapshotBuffer::block: no block for rank " +
                                    std::to_string(r));
    }
    return blocks_[static_cast<std::size_t>(r)];
}

} // namespace skewsim
