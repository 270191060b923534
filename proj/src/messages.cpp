#include "skewsim/messages.hpp"

namespace skewsim {

MsgKind kind_of(const Payload& payload) {
    switch (payload.index()) {
    case 0: return MsgKind::IterData;
    case 1: return MsgKind::Collective;
    default: return MsgKind::Snapshot;
    }
}

std::size_t payload_bytes(const Payload& payload) {
    if (const auto* d = std::get_if<IterDataMsg>(&payload)) {
        return sizeof(double) * d->block.size() + sizeof(std::uint64_t);
    }
    if (std::get_if<CollMsg>(&payload) != nullptr) {
        return sizeof(double);
    }
    const auto& s = std::get<SnapMsg>(payload);
    return sizeof(double) * s.block.size() + sizeof(std::uint64_t);
}

std::uint64_t payload_tag(const Payload& payload) {
    if (const auto* d = std::get_if<IterDataMsg>(&payload)) {
        return d->k;
    }
    if (const auto* c = std::get_if<CollMsg>(&payload)) {
        return c->cycle;
    }
    return std::get<SnapMsg>(payload).epoch;
}

const char* kind_name(MsgKind kind) {
    switch (kind) {
    case MsgKind::IterData: return "data";
    case MsgKind::Collective: return "coll";
    default: return "snap";
    }
}

} // namespace skewsim
