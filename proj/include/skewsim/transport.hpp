#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <unordered_map>
#include <vector>

#include "skewsim/messages.hpp"
#include "skewsim/topology.hpp"

namespace skewsim {

struct NetworkConfig {
    int p = 1;
    double delay_min = 0.0;     // requires 0 <= delay_min <= delay_max < inf
    double delay_max = 0.0;
    double speed_jitter = 0.0;  // per-iteration duration multiplier drawn from [1, 1+jitter]
    std::uint64_t seed = 1;
};

// Replaces the random per-channel delay draw; used to script fixed
// (adversarial) schedules in tests. Must return a finite delay >= 0.
using DelayModel = std::function<double(Rank src, Rank dst)>;

// Deterministic simulated message-passing fabric. Each process has a local
// clock advanced one iteration at a time; sends never block; a message
// becomes visible to poll() once the receiver's clock passes its delivery
// time. Per (src,dst) channel, delivery order always equals send order:
// delivery times are clamped to be non-decreasing along a channel, and ties
// break by send sequence.
//
// All randomness (delay draws, iteration jitter) comes from streams derived
// from the config seed, independent of call interleaving across channels, so
// identical configs replay identical traces.
class Network {
public:
    explicit Network(const NetworkConfig& cfg);

    int size() const noexcept { return cfg_.p; }
    double now(Rank r) const;

    // Advances r's clock by one iteration: base cost 1.0 times the process
    // speed multiplier times a jitter draw from [1, 1+speed_jitter].
    // Returns the new local time.
    double advance(Rank r);

    void send(Rank src, Rank dst, Payload payload);

    // All envelopes for dst with deliver_time <= now(dst), in global delivery
    // order (deliver_time, then send sequence).
    std::vector<Envelope> poll(Rank dst);

    // Test hooks.
    void set_speed_multiplier(Rank r, double multiplier);
    void set_delay_model(DelayModel model);

    std::uint64_t sent_count(MsgKind kind) const;
    std::uint64_t delivered_count(MsgKind kind) const;
    std::uint64_t total_sent() const;

    // FNV-1a over the formatted trace lines of every send, whether or not a
    // sink is attached.
    std::uint64_t trace_hash() const noexcept { return hash_; }

    // Line-delimited records "send_time,src,dst,kind,cycle,bytes". Caller
    // keeps the stream alive; pass nullptr to detach.
    void attach_trace(std::ostream* sink) noexcept { trace_ = sink; }

private:
    double draw_delay_(Rank src, Rank dst);
    void record_(const Envelope& env);

    struct LaterDelivery {
        bool operator()(const Envelope& a, const Envelope& b) const {
            if (a.deliver_time != b.deliver_time) return a.deliver_time > b.deliver_time;
            return a.seq > b.seq;
        }
    };

    NetworkConfig cfg_;
    std::vector<double> now_;
    std::vector<double> multiplier_;
    std::vector<std::mt19937_64> jitter_rng_;
    std::vector<std::vector<Envelope>> inbox_;  // min-heap per destination
    std::unordered_map<std::uint64_t, double> channel_last_deliver_;
    std::unordered_map<std::uint64_t, std::mt19937_64> channel_rng_;
    DelayModel delay_model_;
    std::uint64_t seq_ = 0;
    std::uint64_t hash_;
    std::array<std::uint64_t, 3> sent_{};
    std::array<std::uint64_t, 3> delivered_{};
    std::ostream* trace_ = nullptr;
};

} // namespace skewsim
