#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <variant>
#include <vector>

#include "skewsim/messages.hpp"
#include "skewsim/transport.hpp"

using skewsim::Envelope;
using skewsim::IterDataMsg;
using skewsim::MsgKind;
using skewsim::Network;
using skewsim::NetworkConfig;

namespace {

// Reference FNV-1a, recomputed here so the hash the network reports can be
// checked against the bytes it wrote to the trace sink.
std::uint64_t fnv1a_text(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t tag_of(const Envelope& env) {
    return std::get<IterDataMsg>(env.payload).k;
}

} // namespace

TEST_CASE("zero-delay messages are visible at the send instant") {
    NetworkConfig cfg;
    cfg.p = 2;
    Network net(cfg);
    net.send(0, 1, IterDataMsg{7, {1.5, -2.5}});
    auto got = net.poll(1);
    REQUIRE(got.size() == 1);
    CHECK(got[0].src == 0);
    CHECK(got[0].dst == 1);
    CHECK(got[0].send_time == 0.0);
    CHECK(got[0].deliver_time == 0.0);
    CHECK(got[0].kind() == MsgKind::IterData);
    CHECK(tag_of(got[0]) == 7);
    CHECK(net.poll(1).empty());
    CHECK(net.sent_count(MsgKind::IterData) == 1);
    CHECK(net.delivered_count(MsgKind::IterData) == 1);
}

TEST_CASE("per-channel delivery order equals send order") {
    NetworkConfig cfg;
    cfg.p = 2;
    cfg.delay_min = 0.0;
    cfg.delay_max = 5.0;
    cfg.seed = 11;
    Network net(cfg);
    for (std::uint64_t k = 0; k < 50; ++k) {
        net.send(0, 1, IterDataMsg{k, {}});
        net.advance(0);
    }
    for (int i = 0; i < 100; ++i) net.advance(1);
    auto got = net.poll(1);
    REQUIRE(got.size() == 50);
    for (std::uint64_t k = 0; k < 50; ++k) {
        CHECK(tag_of(got[k]) == k);
        if (k > 0) CHECK(got[k].deliver_time >= got[k - 1].deliver_time);
    }
}

TEST_CASE("poll merges channels in delivery order") {
    NetworkConfig cfg;
    cfg.p = 3;
    cfg.delay_min = 0.1;
    cfg.delay_max = 3.0;
    cfg.seed = 5;
    Network net(cfg);
    for (std::uint64_t k = 0; k < 30; ++k) {
        net.send(0, 1, IterDataMsg{100 + k, {}});
        net.send(2, 1, IterDataMsg{200 + k, {}});
        net.advance(0);
        net.advance(2);
    }
    for (int i = 0; i < 100; ++i) net.advance(1);
    auto got = net.poll(1);
    REQUIRE(got.size() == 60);
    std::uint64_t next_from_0 = 100, next_from_2 = 200;
    for (std::size_t i = 0; i < got.size(); ++i) {
        if (i > 0) {
            const bool ordered = got[i].deliver_time > got[i - 1].deliver_time ||
                                 (got[i].deliver_time == got[i - 1].deliver_time &&
                                  got[i].seq > got[i - 1].seq);
            CHECK(ordered);
        }
        if (got[i].src == 0) CHECK(tag_of(got[i]) == next_from_0++);
        if (got[i].src == 2) CHECK(tag_of(got[i]) == next_from_2++);
    }
    CHECK(next_from_0 == 130);
    CHECK(next_from_2 == 230);
}

TEST_CASE("identical configurations replay identical schedules") {
    NetworkConfig cfg;
    cfg.p = 4;
    cfg.delay_min = 0.05;
    cfg.delay_max = 2.0;
    cfg.speed_jitter = 0.4;
    cfg.seed = 99;

    auto script = [](Network& net) {
        for (std::uint64_t k = 0; k < 40; ++k) {
            const int src = static_cast<int>(k % 4);
            const int dst = static_cast<int>((k + 1) % 4);
            net.send(src, dst, IterDataMsg{k, {0.25}});
            net.advance(src);
        }
    };

    Network a(cfg), b(cfg);
    script(a);
    script(b);
    CHECK(a.trace_hash() == b.trace_hash());
    CHECK(a.trace_hash() != 0);

    NetworkConfig other = cfg;
    other.seed = 100;
    Network c(other);
    script(c);
    CHECK(a.trace_hash() != c.trace_hash());
}

TEST_CASE("every message is eventually delivered") {
    NetworkConfig cfg;
    cfg.p = 4;
    cfg.delay_min = 0.2;
    cfg.delay_max = 4.0;
    cfg.seed = 3;
    Network net(cfg);
    int sent = 0;
    for (int round = 0; round < 25; ++round) {
        for (int src = 0; src < 4; ++src) {
            for (int dst = 0; dst < 4; ++dst) {
                if (src == dst) continue;
                net.send(src, dst, IterDataMsg{static_cast<std::uint64_t>(sent++), {}});
            }
            net.advance(src);
        }
    }
    for (int r = 0; r < 4; ++r) {
        for (int i = 0; i < 100; ++i) net.advance(r);
    }
    std::size_t received = 0;
    for (int r = 0; r < 4; ++r) received += net.poll(r).size();
    CHECK(received == static_cast<std::size_t>(sent));
    CHECK(net.total_sent() == static_cast<std::uint64_t>(sent));
    CHECK(net.delivered_count(MsgKind::IterData) == static_cast<std::uint64_t>(sent));
}

TEST_CASE("advance applies speed multiplier and jitter bounds") {
    NetworkConfig cfg;
    cfg.p = 2;
    Network net(cfg);
    CHECK(net.advance(0) == 1.0);
    CHECK(net.advance(0) == 2.0);
    net.set_speed_multiplier(0, 2.5);
    CHECK(net.advance(0) == 4.5);
    CHECK(net.now(1) == 0.0);

    NetworkConfig jit = cfg;
    jit.speed_jitter = 0.5;
    jit.seed = 17;
    Network jnet(jit);
    double prev = 0.0;
    bool saw_varied = false;
    double first_step = -1.0;
    for (int i = 0; i < 100; ++i) {
        const double t = jnet.advance(0);
        const double step = t - prev;
        CHECK(step >= 1.0);
        CHECK(step < 1.5);
        if (first_step < 0.0) first_step = step;
        else if (step != first_step) saw_varied = true;
        prev = t;
    }
    CHECK(saw_varied);
}

TEST_CASE("a delay model overrides the random draw") {
    NetworkConfig cfg;
    cfg.p = 3;
    cfg.delay_min = 0.0;
    cfg.delay_max = 10.0;
    Network net(cfg);
    net.set_delay_model([](int src, int) { return 0.75 * (src + 1); });
    net.send(0, 1, IterDataMsg{0, {}});
    net.send(2, 1, IterDataMsg{1, {}});
    net.advance(1);  // t = 1.0 > 0.75, < 2.25
    auto got = net.poll(1);
    REQUIRE(got.size() == 1);
    CHECK(got[0].src == 0);
    CHECK(got[0].deliver_time == 0.75);
    net.advance(1);
    net.advance(1);
    got = net.poll(1);
    REQUIRE(got.size() == 1);
    CHECK(got[0].deliver_time == 2.25);

    net.set_delay_model([](int, int) { return -1.0; });
    CHECK_THROWS_AS(net.send(0, 1, IterDataMsg{2, {}}), std::runtime_error);
}

TEST_CASE("rank and configuration validation") {
    NetworkConfig cfg;
    cfg.p = 2;
    Network net(cfg);
    CHECK_THROWS_AS(net.send(-1, 0, IterDataMsg{0, {}}), std::invalid_argument);
    CHECK_THROWS_AS(net.send(0, 2, IterDataMsg{0, {}}), std::invalid_argument);
    CHECK_THROWS_AS(net.send(1, 1, IterDataMsg{0, {}}), std::invalid_argument);
    CHECK_THROWS_AS(net.poll(2), std::invalid_argument);
    CHECK_THROWS_AS(net.now(-1), std::invalid_argument);
    CHECK_THROWS_AS(net.advance(5), std::invalid_argument);
    CHECK_THROWS_AS(net.set_speed_multiplier(0, 0.0), std::invalid_argument);

    NetworkConfig bad = cfg;
    bad.delay_min = 2.0;
    bad.delay_max = 1.0;
    CHECK_THROWS_AS(Network{bad}, std::invalid_argument);
    bad = cfg;
    bad.speed_jitter = -0.5;
    CHECK_THROWS_AS(Network{bad}, std::invalid_argument);
    bad = cfg;
    bad.p = 0;
    CHECK_THROWS_AS(Network{bad}, std::invalid_argument);
}

TEST_CASE("trace sink receives the hashed bytes") {
    NetworkConfig cfg;
    cfg.p = 3;
    cfg.delay_min = 0.125;
    cfg.delay_max = 0.125;
    Network net(cfg);
    std::ostringstream sink;
    net.attach_trace(&sink);
    net.send(0, 1, IterDataMsg{4, {1.0, 2.0, 3.0}});
    net.advance(0);
    net.send(0, 2, skewsim::CollMsg{1, skewsim::CollPhaseTag::Doubling, 0, 6.5});
    net.send(1, 0, skewsim::SnapMsg{2, {0.0}});
    net.attach_trace(nullptr);
    net.send(1, 2, IterDataMsg{9, {}});  // hashed but not written

    const std::string text = sink.str();
    std::size_t lines = 0;
    for (char c : text) lines += (c == '\n') ? 1 : 0;
    CHECK(lines == 3);
    CHECK(text.find("0,0,1,data,4,32") != std::string::npos);
    CHECK(text.find("1,0,2,coll,1,8") != std::string::npos);
    CHECK(text.find("0,1,0,snap,2,16") != std::string::npos);

    // The reported hash covers all four sends; the first three match the
    // sink bytes exactly.
    const std::string fourth = "0,1,2,data,9,8\n";
    CHECK(net.trace_hash() == fnv1a_text(text + fourth));
}
