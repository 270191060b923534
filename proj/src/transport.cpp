#include "skewsim/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace skewsim {
namespace {

constexpr std::uint64_t fnv_offset = 1469598103934665603ULL;
constexpr std::uint64_t fnv_prime = 1099511628211ULL;

std::uint64_t fnv1a(std::uint64_t h, const char* data, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= fnv_prime;
    }
    return h;
}

// splitmix64 finalizer; decorrelates stream seeds derived from the run seed.
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform in [0,1) from the top 53 bits; avoids distribution objects so the
// draw sequence is identical across standard library implementations.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

Network::Network(const NetworkConfig& cfg) : cfg_(cfg), hash_(fnv_offset) {
    if (cfg_.p < 1) {
        throw std::invalid_argument("Network: p must be >= 1");
    }
    if (!(cfg_.delay_min >= 0.0) || !(cfg_.delay_max >= cfg_.delay_min) ||
        !std::isfinite(cfg_.delay_max)) {
        throw std::invalid_argument("Network: need 0 <= delay_min <= delay_max < inf");
    }
    if (!(cfg_.speed_jitter >= 0.0) || !std::isfinite(cfg_.speed_jitter)) {
        throw std::invalid_argument("Network: speed_jitter must be finite and >= 0");
    }
    now_.assign(static_cast<std::size_t>(cfg_.p), 0.0);
    multiplier_.assign(static_cast<std::size_t>(cfg_.p), 1.0);
    inbox_.resize(static_cast<std::size_t>(cfg_.p));
    jitter_rng_.reserve(static_cast<std::size_t>(cfg_.p));
    for (int r = 0; r < cfg_.p; ++r) {
        jitter_rng_.emplace_back(mix64(cfg_.seed ^ mix64(0x5a5a0000ULL + static_cast<std::uint64_t>(r))));
    }
}

double Network::now(Rank r) const {
    if (r < 0 || r >= cfg_.p) {
        throw std::invalid_argument("Network::now: bad rank " + std::to_string(r));
    }
    return now_[static_cast<std::size_t>(r)];
}

double Network::advance(Rank r) {
    if (r < 0 || r >= cfg_.p) {
        throw std::invalid_argument("Network::advance: bad rank " + std::to_string(r));
    }
    double step = multiplier_[static_cast<std::size_t>(r)];
    if (cfg_.speed_jitter > 0.0) {
        step *= 1.0 + cfg_.speed_jitter * uniform01(jitter_rng_[static_cast<std::size_t>(r)]);
    }
    now_[static_cast<std::size_t>(r)] += step;
    return now_[static_cast<std::size_t>(r)];
}

void Network::set_speed_multiplier(Rank r, double multiplier) {
    if (r < 0 || r >= cfg_.p) {
        throw std::invalid_argument("Network::set_speed_multiplier: bad rank");
    }
    if (!(multiplier > 0.0) || !std::isfinite(multiplier)) {
        throw std::invalid_argument("Network::set_speed_multiplier: multiplier must be positive");
    }
    multiplier_[static_cast<std::size_t>(r)] = multiplier;
}

void Network::set_delay_model(DelayModel model) { delay_model_ = std::move(model); }

double Network::draw_delay_(Rank src, Rank dst) {
    if (delay_model_) {
        double d = delay_model_(src, dst);
        if (!(d >= 0.0) || !std::isfinite(d)) {
            throw std::runtime_error("Network: delay model returned invalid delay");
        }
        return d;
    }
    if (cfg_.delay_max == cfg_.delay_min) {
        return cfg_.delay_min;
    }
    const std::uint64_t key =
        static_cast<std::uint64_t>(src) * static_cast<std::uint64_t>(cfg_.p) +
        static_cast<std::uint64_t>(dst);
    auto it = channel_rng_.find(key);
    if (it == channel_rng_.end()) {
        it = channel_rng_.emplace(key, std::mt19937_64(mix64(cfg_.seed ^ mix64(key + 1)))).first;
    }
    return cfg_.delay_min + (cfg_.delay_max - cfg_.delay_min) * uniform01(it->second);
}

void Network::record_(const Envelope& env) {
    char line[96];
    int len = std::snprintf(line, sizeof line, "%.9g,%d,%d,%s,%llu,%llu\n",
                            env.send_time, env.src, env.dst, kind_name(env.kind()),
                            static_cast<unsigned long long>(payload_tag(env.payload)),
                            static_cast<unsigned long long>(payload_bytes(env.payload)));
    if (len < 0 || len >= static_cast<int>(sizeof line)) {
        throw std::runtime_error("Network: trace line overflow");
    }
    hash_ = fnv1a(hash_, line, static_cast<std::size_t>(len));
    if (trace_ != nullptr) {
        trace_->write(line, len);
    }
}

void Network::send(Rank src, Rank dst, Payload payload) {
    if (src < 0 || src >= cfg_.p || dst < 0 || dst >= cfg_.p) {
        throw std::invalid_argument("Network::send: rank out of range");
    }
    if (src == dst) {
        throw std::invalid_argument("Network::send: self-send not allowed");
    }
    const std::uint64_t key =
        static_cast<std::uint64_t>(src) * static_cast<std::uint64_t>(cfg_.p) +
        static_cast<std::uint64_t>(dst);
    const double send_time = now_[static_cast<std::size_t>(src)];
    double deliver = send_time + draw_delay_(src, dst);
    // FIFO clamp: never deliver before an earlier message on the same channel.
    auto [it, inserted] = channel_last_deliver_.try_emplace(key, deliver);
    if (!inserted) {
        deliver = std::max(deliver, it->second);
        it->second = deliver;
    }

    Envelope env;
    env.src = src;
    env.dst = dst;
    env.send_time = send_time;
    env.deliver_time = deliver;
    env.seq = seq_++;
    env.payload = std::move(payload);

    sent_[static_cast<std::size_t>(env.kind())]++;
    record_(env);

    auto& heap = inbox_[static_cast<std::size_t>(dst)];
    heap.push_back(std::move(env));
    std::push_heap(heap.begin(), heap.end(), LaterDelivery{});
}

std::vector<Envelope> Network::poll(Rank dst) {
    if (dst < 0 || dst >= cfg_.p) {
        throw std::invalid_argument("Network::poll: bad rank " + std::to_string(dst));
    }
    auto& heap = inbox_[static_cast<std::size_t>(dst)];
    const double t = now_[static_cast<std::size_t>(dst)];
    std::vector<Envelope> out;
    while (!heap.empty() && heap.front().deliver_time <= t) {
        std::pop_heap(heap.begin(), heap.end(), LaterDelivery{});
        out.push_back(std::move(heap.back()));
        heap.pop_back();
        delivered_[static_cast<std::size_t>(out.back().kind())]++;
    }
    return out;
}

std::uint64_t Network::sent_count(MsgKind kind) const {
    return sent_[static_cast<std::size_t>(kind)];
}

std::uint64_t Network::delivered_count(MsgKind kind) const {
    return delivered_[static_cast<std::size_t>(kind)];
}

std::uint64_t Network::total_sent() const { return sent_[0] + sent_[1] + sent_[2]; }

} // namespace skewsim
