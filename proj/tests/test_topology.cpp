#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>
#include <stdexcept>

#include "skewsim/topology.hpp"

using skewsim::Topology;

TEST_CASE("pivot group for sample sizes") {
    const Topology t7 = Topology::for_processes(7);
    CHECK(t7.mu0 == 2);
    CHECK(t7.p0 == 4);
    CHECK_FALSE(t7.power_of_two());

    const Topology t8 = Topology::for_processes(8);
    CHECK(t8.mu0 == 3);
    CHECK(t8.p0 == 8);
    CHECK(t8.power_of_two());

    const Topology t1 = Topology::for_processes(1);
    CHECK(t1.mu0 == 0);
    CHECK(t1.p0 == 1);
    CHECK(t1.power_of_two());
}

TEST_CASE("pivot invariants hold for every size up to 2^20") {
    for (int p = 1; p <= (1 << 20); ++p) {
        const Topology t = Topology::for_processes(p);
        REQUIRE(t.p0 <= p);
        REQUIRE(p < 2 * t.p0);
        REQUIRE((t.p0 & (t.p0 - 1)) == 0);
        REQUIRE(t.p0 == (1 << t.mu0));
    }
}

TEST_CASE("partner is an involution and spans the pivot group") {
    for (int p : {2, 3, 5, 12, 33, 64}) {
        const Topology t = Topology::for_processes(p);
        for (int r = 0; r < t.p0; ++r) {
            for (int j = 0; j < t.mu0; ++j) {
                const int q = t.partner(r, j);
                REQUIRE(q >= 0);
                REQUIRE(q < t.p0);
                REQUIRE(t.partner(q, j) == r);
                REQUIRE(q != r);
            }
        }
        // Walking all round edges from rank 0 reaches the whole pivot group.
        std::set<int> seen{0};
        for (int j = 0; j < t.mu0; ++j) {
            std::set<int> next = seen;
            for (int r : seen) next.insert(t.partner(r, j));
            seen = next;
        }
        CHECK(static_cast<int>(seen.size()) == t.p0);
    }
}

TEST_CASE("host and extra pairing invert each other") {
    const Topology t = Topology::for_processes(7);
    CHECK(t.is_host(0));
    CHECK(t.is_host(2));
    CHECK_FALSE(t.is_host(3));
    CHECK_FALSE(t.is_extra(3));
    CHECK(t.is_extra(4));
    CHECK(t.is_extra(6));
    CHECK_FALSE(t.is_extra(7));
    for (int e = 4; e < 7; ++e) {
        CHECK(t.host_of(e) == e - 4);
        CHECK(t.extra_of(e - 4) == e);
    }

    const Topology t8 = Topology::for_processes(8);
    for (int r = 0; r < 8; ++r) {
        CHECK_FALSE(t8.is_host(r));
        CHECK_FALSE(t8.is_extra(r));
    }
}

TEST_CASE("rank arithmetic rejects out-of-range arguments") {
    CHECK_THROWS_AS(Topology::for_processes(0), std::invalid_argument);
    CHECK_THROWS_AS(Topology::for_processes(-3), std::invalid_argument);

    const Topology t = Topology::for_processes(7);
    CHECK_THROWS_AS(t.host_of(2), std::invalid_argument);   // a host, not an extra
    CHECK_THROWS_AS(t.host_of(7), std::invalid_argument);
    CHECK_THROWS_AS(t.extra_of(3), std::invalid_argument);  // unpaired pivot rank
    CHECK_THROWS_AS(t.extra_of(-1), std::invalid_argument);
    CHECK_THROWS_AS(t.partner(4, 0), std::invalid_argument); // outside pivot group
    CHECK_THROWS_AS(t.partner(0, 2), std::invalid_argument); // round >= mu0
    CHECK_THROWS_AS(t.partner(0, -1), std::invalid_argument);
}

TEST_CASE("per-cycle step and message counts") {
    CHECK(skewsim::sync_step_count(1) == 0);
    CHECK(skewsim::sync_step_count(7) == 4);
    CHECK(skewsim::sync_step_count(8) == 3);
    CHECK(skewsim::cycle_data_count(1) == 0);
    CHECK(skewsim::cycle_data_count(7) == 14);
    CHECK(skewsim::cycle_data_count(8) == 24);

    for (int p = 1; p <= 64; ++p) {
        const Topology t = Topology::for_processes(p);
        const int expect_steps = (p == 1) ? 0 : (t.power_of_two() ? t.mu0 : t.mu0 + 2);
        CHECK(skewsim::sync_step_count(p) == expect_steps);
        CHECK(skewsim::cycle_data_count(p) == t.p0 * t.mu0 + 2 * (p - t.p0));
    }
}
