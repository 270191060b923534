#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <stdexcept>
#include <variant>
#include <vector>

#include "skewsim/snapshot.hpp"
#include "skewsim/transport.hpp"

using skewsim::Network;
using skewsim::NetworkConfig;
using skewsim::SnapMsg;
using skewsim::SnapshotBuffer;

namespace {

void absorb_all(SnapshotBuffer& buf, Network& net, int rank) {
    for (const auto& env : net.poll(rank)) {
        buf.absorb(env.src, std::get<SnapMsg>(env.payload));
    }
}

} // namespace

TEST_CASE("all ranks assemble the same epoch") {
    NetworkConfig cfg;
    cfg.p = 3;
    Network net(cfg);
    const std::vector<std::vector<double>> blocks = {{1.0, 2.0}, {11.0, 12.0}, {21.0}};
    std::vector<SnapshotBuffer> bufs;
    for (int r = 0; r < 3; ++r) bufs.emplace_back(3, r);
    for (int r = 0; r < 3; ++r) bufs[r].initiate(blocks[r], net);
    for (int r = 0; r < 3; ++r) absorb_all(bufs[r], net, r);

    const std::vector<double> expect = {1.0, 2.0, 11.0, 12.0, 21.0};
    for (int r = 0; r < 3; ++r) {
        REQUIRE(bufs[r].complete());
        CHECK(bufs[r].epoch() == 1);
        CHECK(bufs[r].assemble() == expect);
        CHECK(bufs[r].block(2) == blocks[2]);
    }
}

TEST_CASE("a single process completes its epoch at initiation") {
    NetworkConfig cfg;
    cfg.p = 1;
    Network net(cfg);
    SnapshotBuffer buf(1, 0);
    buf.initiate(std::vector<double>{1.0, 2.0, 3.0}, net);
    CHECK(buf.complete());
    CHECK(buf.epoch() == 1);
    CHECK(buf.assemble() == std::vector<double>{1.0, 2.0, 3.0});
    buf.initiate(std::vector<double>{4.0}, net);
    CHECK(buf.epoch() == 2);
    CHECK(buf.assemble() == std::vector<double>{4.0});
    CHECK(net.total_sent() == 0);
}

TEST_CASE("re-initiation before completion is rejected") {
    NetworkConfig cfg;
    cfg.p = 2;
    Network net(cfg);
    SnapshotBuffer buf(2, 0);
    buf.initiate(std::vector<double>{0.5}, net);
    CHECK_FALSE(buf.complete());
    CHECK_THROWS_AS(buf.initiate(std::vector<double>{0.5}, net), std::runtime_error);
}

TEST_CASE("duplicate, stale, and non-essential blocks are rejected") {
    NetworkConfig cfg;
    cfg.p = 3;
    Network net(cfg);
    SnapshotBuffer buf(3, 0);
    buf.initiate(std::vector<double>{0.0}, net);

    buf.absorb(1, SnapMsg{1, {1.5}});
    CHECK_THROWS_AS(buf.absorb(1, SnapMsg{1, {1.5}}), std::runtime_error);  // duplicate
    CHECK_THROWS_AS(buf.absorb(2, SnapMsg{3, {2.5}}), std::runtime_error);  // skipped ahead
    CHECK_THROWS_AS(buf.absorb(0, SnapMsg{1, {0.0}}), std::invalid_argument);
    buf.absorb(2, SnapMsg{1, {2.5}});
    REQUIRE(buf.complete());

    buf.initiate(std::vector<double>{0.1}, net);
    buf.absorb(1, SnapMsg{2, {1.6}});
    buf.absorb(2, SnapMsg{2, {2.6}});
    CHECK_THROWS_AS(buf.absorb(1, SnapMsg{1, {9.9}}), std::runtime_error);  // stale epoch
}

TEST_CASE("blocks for the next epoch wait until it opens") {
    NetworkConfig cfg;
    cfg.p = 2;
    Network net(cfg);
    SnapshotBuffer a(2, 0), b(2, 1);
    b.initiate(std::vector<double>{7.0}, net);
    absorb_all(a, net, 0);      // buffered: a has not opened epoch 1 yet
    CHECK(a.epoch() == 0);
    a.initiate(std::vector<double>{3.0}, net);
    REQUIRE(a.complete());      // stash drained at initiation
    CHECK(a.assemble() == std::vector<double>{3.0, 7.0});
    absorb_all(b, net, 1);
    REQUIRE(b.complete());
    CHECK(b.assemble() == std::vector<double>{3.0, 7.0});
}

TEST_CASE("epochs agree across ranks under skewed delayed histories") {
    const int p = 3;
    const int epochs = 5;
    NetworkConfig cfg;
    cfg.p = p;
    cfg.delay_min = 0.0;
    cfg.delay_max = 2.0;
    cfg.speed_jitter = 0.3;
    cfg.seed = 13;
    Network net(cfg);
    net.set_speed_multiplier(0, 2.5);

    auto block_at = [](int rank, int epoch) {
        return std::vector<double>{rank + 0.5 * epoch, rank - 0.25 * epoch};
    };

    std::vector<SnapshotBuffer> bufs;
    for (int r = 0; r < p; ++r) bufs.emplace_back(p, r);
    // assembled[r][e] is rank r's view of epoch e+1.
    std::vector<std::vector<std::vector<double>>> assembled(p);

    for (int guard = 0; guard < 100000; ++guard) {
        bool all_recorded = true;
        for (int r = 0; r < p; ++r) {
            absorb_all(bufs[r], net, r);
            if (assembled[r].size() < static_cast<std::size_t>(epochs)) {
                all_recorded = false;
                if (bufs[r].complete()) {
                    if (bufs[r].epoch() > 0) {
                        assembled[r].push_back(bufs[r].assemble());
                    }
                    if (bufs[r].epoch() < static_cast<std::uint64_t>(epochs)) {
                        bufs[r].initiate(block_at(r, static_cast<int>(bufs[r].epoch()) + 1), net);
                    }
                }
            }
            net.advance(r);
        }
        if (all_recorded) break;
    }

    for (int e = 0; e < epochs; ++e) {
        std::vector<double> expect;
        for (int r = 0; r < p; ++r) {
            const auto b = block_at(r, e + 1);
            expect.insert(expect.end(), b.begin(), b.end());
        }
        for (int r = 0; r < p; ++r) {
            REQUIRE(assembled[r].size() == static_cast<std::size_t>(epochs));
            CHECK(assembled[r][e] == expect);
        }
    }
}

TEST_CASE("sparser peer sets complete without full assembly") {
    NetworkConfig cfg;
    cfg.p = 3;
    Network net(cfg);
    SnapshotBuffer buf(3, 0, {1}, {2});
    buf.initiate(std::vector<double>{5.0}, net);
    CHECK(net.sent_count(skewsim::MsgKind::Snapshot) == 1);
    CHECK_FALSE(buf.complete());
    buf.absorb(2, SnapMsg{1, {6.0}});
    REQUIRE(buf.complete());
    CHECK_THROWS_AS(buf.assemble(), std::runtime_error);
    CHECK(buf.block(2) == std::vector<double>{6.0});
    CHECK_THROWS_AS(buf.block(1), std::invalid_argument);
    CHECK_THROWS_AS(buf.absorb(1, SnapMsg{1, {9.0}}), std::runtime_error);

    CHECK_THROWS_AS(SnapshotBuffer(3, 0, {0}, {1}), std::invalid_argument);
    CHECK_THROWS_AS(SnapshotBuffer(3, 0, {1}, {3}), std::invalid_argument);
    CHECK_THROWS_AS(SnapshotBuffer(0, 0), std::invalid_argument);
}
