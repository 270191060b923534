#include "skewsim/topology.hpp"

#include <stdexcept>
#include <string>

namespace skewsim {

Topology Topology::for_processes(int p) {
    if (p < 1) {
        throw std::invalid_argument("Topology: process count must be >= 1, got " +
                                    std::to_string(p));
    }
    Topology t;
    t.p = p;
    t.mu0 = 0;
    while ((2 << t.mu0) <= p) {
        ++t.mu0;
    }
    t.p0 = 1 << t.mu0;
    return t;
}

Rank Topology::host_of(Rank extra) const {
    if (!is_extra(extra)) {
        throw std::invalid_argument("Topology::host_of: rank " + std::to_string(extra) +
                                    " is not an extra rank for p=" + std::to_string(p));
    }
    return extra - p0;
}

Rank Topology::extra_of(Rank host) const {
    if (!is_host(host)) {
        throw std::invalid_argument("Topology::extra_of: rank " + std::to_string(host) +
                                    " is not a host rank for p=" + std::to_string(p));
    }
    return host + p0;
}

Rank Topology::partner(Rank rank, int round) const {
    if (rank < 0 || rank >= p0) {
        throw std::invalid_argument("Topology::partner: rank " + std::to_string(rank) +
                                    " outside pivot group [0," + std::to_string(p0) + ")");
    }
    if (round < 0 || round >= mu0) {
        throw std::invalid_argument("Topology::partner: round " + std::to_string(round) +
                                    " outside [0," + std::to_string(mu0) + ")");
    }
    return rank ^ (1 << round);
}

int sync_step_count(int p) {
    Topology t = Topology::for_processes(p);
    if (t.p == 1) {
        return 0;
    }
    return t.power_of_two() ? t.mu0 : t.mu0 + 2;
}

int cycle_data_count(int p) {
    Topology t = Topology::for_processes(p);
    return t.p0 * t.mu0 + 2 * (t.p - t.p0);
}

} // namespace skewsim
