#pragma once

#include <cstdint>

namespace skewsim {

using Rank = int;

// Rank arithmetic for one reduction group: the pivot subgroup that runs the
// doubling rounds, and the host/extra pairing used by the shift phases.
//
// Invariants: p0 = 2^mu0 and p0 <= p < 2*p0. Ranks [0, p0) form the pivot
// group; ranks [p0, p) are "extras". Extra e is paired with host e - p0, so
// hosts are exactly ranks [0, p - p0).
struct Topology {
    int p = 1;
    int mu0 = 0;
    int p0 = 1;

    // Largest power of two not exceeding p. Rejects p < 1.
    static Topology for_processes(int p);

    bool power_of_two() const noexcept { return p == p0; }
    bool is_extra(Rank r) const noexcept { return r >= p0 && r < p; }
    bool is_host(Rank r) const noexcept { return r >= 0 && r < p - p0; }

    Rank host_of(Rank extra) const;
    Rank extra_of(Rank host) const;

    // Exchange peer in doubling round `round`: rank with bit `round` flipped,
    // distance 2^round. An involution on [0, p0).
    Rank partner(Rank rank, int round) const;
};

// Communication steps of one synchronous cycle: mu0 + 2 in general, mu0 when
// the shifts are skipped (p a power of two), 0 for p = 1.
int sync_step_count(int p);

// Messages exchanged over one full cycle, summed over all processes, with one
// reduction value per message: p0*mu0 + 2*(p - p0).
int cycle_data_count(int p);

} // namespace skewsim
