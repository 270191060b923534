#include "skewsim/solver.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace skewsim {
namespace {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void check_finite(double v) {
    if (!std::isfinite(v) || std::abs(v) > divergence_guard) {
        throw std::runtime_error("solver: iterate exceeded the divergence guard");
    }
}

double relax_point(double left, double mid, double right, double b, double h, double omega) {
    return (1.0 - omega) * mid + omega * (left + right + h * h * b) / 2.0;
}

} // namespace

Problem make_problem(int n, std::uint64_t seed) {
    if (n < 1) {
        throw std::invalid_argument("make_problem: n must be >= 1");
    }
    Problem p;
    p.n = n;
    p.h = 1.0 / (n + 1);
    p.b.resize(static_cast<std::size_t>(n));
    std::mt19937_64 rng(mix64(seed ^ 0xb0b0b0b0ULL));
    for (double& v : p.b) {
        v = -10.0 + 20.0 * uniform01(rng);
    }
    return p;
}

Problem make_problem(int n, std::vector<double> b) {
    if (n < 1 || b.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("make_problem: b must have n entries");
    }
    return Problem{n, 1.0 / (n + 1), std::move(b)};
}

Partition Partition::balanced(int n, int p) {
    if (n < 1 || p < 1 || p > n) {
        throw std::invalid_argument("Partition: need 1 <= p <= n");
    }
    Partition part;
    part.n = n;
    part.p = p;
    part.offsets.resize(static_cast<std::size_t>(p));
    part.sizes.resize(static_cast<std::size_t>(p));
    const int base = n / p;
    const int rem = n % p;
    int off = 0;
    for (int r = 0; r < p; ++r) {
        part.offsets[static_cast<std::size_t>(r)] = off;
        part.sizes[static_cast<std::size_t>(r)] = base + (r < rem ? 1 : 0);
        off += part.sizes[static_cast<std::size_t>(r)];
    }
    return part;
}

LocalState::LocalState(Rank r, const Partition& part) : rank(r) {
    if (r < 0 || r >= part.p) {
        throw std::invalid_argument("LocalState: bad rank");
    }
    block.assign(static_cast<std::size_t>(part.size(r)), 0.0);
}

std::vector<double> relax_block(const LocalState& state, const Problem& problem,
                                const Partition& part, double omega) {
    const int off = part.offset(state.rank);
    const int sz = part.size(state.rank);
    if (state.block.size() != static_cast<std::size_t>(sz)) {
        throw std::invalid_argument("relax_block: block size mismatch");
    }
    std::vector<double> out(static_cast<std::size_t>(sz));
    for (int j = 0; j < sz; ++j) {
        const double left = j > 0 ? state.block[static_cast<std::size_t>(j - 1)] : state.left_edge;
        const double right =
            j + 1 < sz ? state.block[static_cast<std::size_t>(j + 1)] : state.right_edge;
        const double v = relax_point(left, state.block[static_cast<std::size_t>(j)], right,
                                     problem.b[static_cast<std::size_t>(off + j)], problem.h, omega);
        check_finite(v);
        out[static_cast<std::size_t>(j)] = v;
    }
    return out;
}

std::vector<double> relax_vector(const std::vector<double>& x, const Problem& problem,
                                 double omega) {
    if (x.size() != static_cast<std::size_t>(problem.n)) {
        throw std::invalid_argument("relax_vector: size mismatch");
    }
    std::vector<double> out(x.size());
    for (int j = 0; j < problem.n; ++j) {
        const double left = j > 0 ? x[static_cast<std::size_t>(j - 1)] : 0.0;
        const double right = j + 1 < problem.n ? x[static_cast<std::size_t>(j + 1)] : 0.0;
        const double v = relax_point(left, x[static_cast<std::size_t>(j)], right,
                                     problem.b[static_cast<std::size_t>(j)], problem.h, omega);
        check_finite(v);
        out[static_cast<std::size_t>(j)] = v;
    }
    return out;
}

double residual_inf(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("residual_inf: length mismatch");
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(a[i] - b[i]);
        if (d > m) m = d;
    }
    return m;
}

std::vector<double> oracle_solve(const Problem& problem) {
    // Thomas elimination on tridiag(-1, 2, -1) x = h^2 b.
    const int n = problem.n;
    std::vector<double> c(static_cast<std::size_t>(n), 0.0);
    std::vector<double> d(static_cast<std::size_t>(n), 0.0);
    const double h2 = problem.h * problem.h;
    double diag = 2.0;
    c[0] = -1.0 / diag;
    d[0] = h2 * problem.b[0] / diag;
    for (int i = 1; i < n; ++i) {
        diag = 2.0 + c[static_cast<std::size_t>(i - 1)];
        c[static_cast<std::size_t>(i)] = -1.0 / diag;
        d[static_cast<std::size_t>(i)] =
            (h2 * problem.b[static_cast<std::size_t>(i)] + d[static_cast<std::size_t>(i - 1)]) / diag;
    }
    std::vector<double> x(static_cast<std::size_t>(n));
    x[static_cast<std::size_t>(n - 1)] = d[static_cast<std::size_t>(n - 1)];
    for (int i = n - 2; i >= 0; --i) {
        x[static_cast<std::size_t>(i)] = d[static_cast<std::size_t>(i)] -
                                         c[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i + 1)];
    }
    return x;
}

void publish(const LocalState& state, Network& net, bool all_to_all) {
    const int p = net.size();
    if (p == 1) {
        return;
    }
    IterDataMsg msg{state.k, state.block};
    if (all_to_all) {
        for (Rank dst = 0; dst < p; ++dst) {
            if (dst != state.rank) net.send(state.rank, dst, msg);
        }
        return;
    }
    if (state.rank > 0) net.send(state.rank, state.rank - 1, msg);
    if (state.rank + 1 < p) net.send(state.rank, state.rank + 1, msg);
}

void apply_iter_data(LocalState& state, Rank src, const IterDataMsg& msg) {
    if (msg.block.empty()) {
        throw std::invalid_argument("apply_iter_data: empty block");
    }
    if (src == state.rank - 1) {
        state.left_edge = msg.block.back();
    } else if (src == state.rank + 1) {
        state.right_edge = msg.block.front();
    }
    // Non-adjacent blocks carry no stencil dependency; accepted and dropped.
}

void ingest(LocalState& state, const std::vector<Envelope>& envelopes) {
    for (const auto& env : envelopes) {
        if (env.kind() != MsgKind::IterData) {
            throw std::invalid_argument("ingest: non-data envelope");
        }
        apply_iter_data(state, env.src, std::get<IterDataMsg>(env.payload));
    }
}

} // namespace skewsim
