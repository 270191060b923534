#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "skewsim/topology.hpp"

namespace skewsim {

enum class MsgKind { IterData, Collective, Snapshot };

// Which phase of a reduction cycle a collective message belongs to. `round`
// is meaningful only for Doubling.
enum class CollPhaseTag : std::uint8_t { BackShift, Doubling, FwdShift };

// Iterate block published by a process; `k` is the sender's iteration count
// after the relax that produced `block`.
struct IterDataMsg {
    std::uint64_t k = 0;
    std::vector<double> block;
};

// One reduction value in flight. Cycle ids start at 1 and identify which
// reduction the value belongs to; values from different cycles never mix.
struct CollMsg {
    std::uint64_t cycle = 0;
    CollPhaseTag tag = CollPhaseTag::Doubling;
    int round = 0;
    double value = 0.0;
};

// A sender's own block recorded at initiation of snapshot `epoch`.
struct SnapMsg {
    std::uint64_t epoch = 0;
    std::vector<double> block;
};

using Payload = std::variant<IterDataMsg, CollMsg, SnapMsg>;

MsgKind kind_of(const Payload& payload);

// Nominal payload size for trace records and byte accounting.
std::size_t payload_bytes(const Payload& payload);

// Trace "cycle" column: iteration k for data, cycle id for collective
// messages, epoch for snapshot blocks.
std::uint64_t payload_tag(const Payload& payload);

const char* kind_name(MsgKind kind);

struct Envelope {
    Rank src = -1;
    Rank dst = -1;
    double send_time = 0.0;
    double deliver_time = 0.0;
    std::uint64_t seq = 0;
    Payload payload;

    MsgKind kind() const { return kind_of(payload); }
};

} // namespace skewsim
