#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "skewsim/messages.hpp"
#include "skewsim/topology.hpp"
#include "skewsim/transport.hpp"

namespace skewsim {

// Two-point boundary value problem -u'' = b on (0,1) with zero Dirichlet
// ends, discretized by central differences on n interior points. The factory
// sets h = 1/(n+1); the fields stay open so tests can force b and h.
struct Problem {
    int n = 0;
    double h = 0.0;
    std::vector<double> b;
};

// b drawn uniformly from [-10, 10], reproducible from the seed.
Problem make_problem(int n, std::uint64_t seed);
Problem make_problem(int n, std::vector<double> b);

// Contiguous block ownership; first n % p blocks get the extra point.
// Every block is non-empty, so p <= n is required.
struct Partition {
    int n = 0;
    int p = 0;
    std::vector<int> offsets;
    std::vector<int> sizes;

    static Partition balanced(int n, int p);

    int offset(Rank r) const { return offsets[static_cast<std::size_t>(r)]; }
    int size(Rank r) const { return sizes[static_cast<std::size_t>(r)]; }
};

// One process's share of the iterate plus the latest known neighbor edge
// values. Edges for the domain boundary stay pinned at zero.
struct LocalState {
    Rank rank = 0;
    std::uint64_t k = 0;
    std::vector<double> block;
    double left_edge = 0.0;
    double right_edge = 0.0;

    LocalState() = default;
    LocalState(Rank r, const Partition& part);
};

// One weighted Jacobi update of the owned block against the current edges:
// x_j <- (1-w) x_j + w (x_{j-1} + x_{j+1} + h^2 b_j) / 2.
// Throws if any input or output magnitude exceeds the divergence guard.
std::vector<double> relax_block(const LocalState& state, const Problem& problem,
                                const Partition& part, double omega);

// Same update applied to a full iterate; used for residual checks.
std::vector<double> relax_vector(const std::vector<double>& x, const Problem& problem,
                                 double omega);

double residual_inf(std::span<const double> a, std::span<const double> b);

// Direct tridiagonal solve of the discretized system.
std::vector<double> oracle_solve(const Problem& problem);

// Mails the owned block (tagged with k) to both adjacent ranks, or to every
// other rank when all_to_all is set.
void publish(const LocalState& state, Network& net, bool all_to_all);

// Latest-wins halo refresh from IterData envelopes; only adjacent senders
// carry stencil data, others are accepted and dropped.
void apply_iter_data(LocalState& state, Rank src, const IterDataMsg& msg);
void ingest(LocalState& state, const std::vector<Envelope>& envelopes);

inline constexpr double divergence_guard = 1e12;

} // namespace skewsim
