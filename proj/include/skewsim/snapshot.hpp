#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "skewsim/messages.hpp"
#include "skewsim/topology.hpp"
#include "skewsim/transport.hpp"

namespace skewsim {

// Collects one consistent global iterate per epoch. Every participant records
// its own block at initiation and mails it to its dependents; an epoch is
// complete once blocks from all essential peers have arrived. With FIFO
// channels and strictly alternating epochs, peers run at most one epoch
// ahead, so a single next-epoch stash suffices.
//
// Default construction wires the all-to-all pattern (everyone depends on
// everyone); the peer sets are parameters so sparser dependency graphs fit
// the same shape, though assemble() requires the full pattern.
class SnapshotBuffer {
public:
    SnapshotBuffer(int p, Rank rank);
    SnapshotBuffer(int p, Rank rank, std::vector<Rank> dependents, std::vector<Rank> essential);

    // Opens epoch() + 1: records local_block and sends it to all dependents.
    // Requires the previous epoch to be complete (or none run yet).
    void initiate(std::span<const double> local_block, Network& net);

    // Files a peer's block. Accepts the current epoch and buffers the next;
    // anything else (stale epoch, duplicate sender, non-essential sender)
    // is a protocol error.
    void absorb(Rank src, const SnapMsg& msg);

    bool complete() const noexcept { return complete_; }
    std::uint64_t epoch() const noexcept { return epoch_; }

    // Concatenation of all blocks in rank order. Requires a complete epoch
    // and the all-to-all pattern.
    std::vector<double> assemble() const;

    const std::vector<double>& own_block() const noexcept { return own_block_; }
    const std::vector<double>& block(Rank r) const;

private:
    int p_;
    Rank rank_;
    std::vector<Rank> dependents_;
    std::vector<Rank> essential_;
    std::uint64_t epoch_ = 0;
    bool complete_ = true;  // vacuously, before the first epoch
    bool all_to_all_ = true;
    std::size_t missing_ = 0;
    std::vector<double> own_block_;
    std::vector<std::vector<double>> blocks_;
    std::vector<bool> have_;
    std::vector<std::pair<Rank, SnapMsg>> next_epoch_;
};

} // namespace skewsim
