#pragma once

// Exact enumeration of self-avoiding walks on the square and triangular
// lattices: counts, connectivity-constant bounds, the non-intersection
// identity and diameter histograms.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "conflab/error.hpp"
#include "conflab/parallel.hpp"

namespace conflab {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

enum class Lattice { square, triangular };

inline const char* to_string(Lattice l) { return l == Lattice::square ? "square" : "triangular"; }

inline int saw_cap(Lattice l) { return l == Lattice::square ? 16 : 12; }

struct SawCountTable {
    Lattice lattice = Lattice::square;
    std::vector<BigInt> counts;  // counts[n - 1] = a_n

    [[nodiscard]] int max_n() const { return static_cast<int>(counts.size()); }
    [[nodiscard]] const BigInt& a(int n) const {
        if (n < 1 || n > max_n()) throw DomainError("SawCountTable: a_" + std::to_string(n) + " not in table");
        return counts[static_cast<std::size_t>(n - 1)];
    }
};

/// Squared diameters are stored as integers: d^2 itself on the square
/// lattice, 4 d^2 on the triangular lattice (key_scale).
struct DiameterDistribution {
    int n = 0;
    Lattice lattice = Lattice::square;
    int key_scale = 1;
    std::map<std::int64_t, BigInt> histogram;

    [[nodiscard]] BigInt total() const {
        BigInt t = 0;
        for (const auto& [k, c] : histogram) t += c;
        return t;
    }
    /// Mean Euclidean diameter over uniform walks.
    [[nodiscard]] double mean_diameter() const {
        double s = 0.0;
        for (const auto& [k, c] : histogram) s += c.convert_to<double>() * std::sqrt(static_cast<double>(k) / key_scale);
        return s / total().convert_to<double>();
    }
};

namespace detail {

struct LatticeSteps {
    int count;
    std::array<int, 6> dx, dy;
};

// Triangular lattice in axial coordinates (q, r): position q + r/2 + i r sqrt(3)/2.
inline const LatticeSteps& steps_of(Lattice l) {
    static const LatticeSteps square{4, {1, 0, -1, 0, 0, 0}, {0, 1, 0, -1, 0, 0}};
    static const LatticeSteps tri{6, {1, 0, -1, -1, 0, 1}, {0, 1, 1, 0, -1, -1}};
    return l == Lattice::square ? square : tri;
}

/// Squared distance (times key_scale) between lattice points.
inline std::int64_t dist_key(Lattice l, int x1, int y1, int x2, int y2) {
    const std::int64_t dx = x1 - x2, dy = y1 - y2;
    if (l == Lattice::square) return dx * dx + dy * dy;
    const std::int64_t u = 2 * dx + dy;  // twice the horizontal separation
    return u * u + 3 * dy * dy;
}

/// Depth-first enumeration below a fixed prefix. Occupancy lives in a
/// (2N+1)^2 array centred at the origin.
class SawWalker {
public:
    SawWalker(Lattice l, int nmax, bool diameters)
        : l_(l), st_(steps_of(l)), N_(nmax), W_(2 * nmax + 1), occ_(static_cast<std::size_t>(W_ * W_), 0),
          counts_(static_cast<std::size_t>(nmax) + 1, 0), diam_(diameters), hist_(static_cast<std::size_t>(nmax) + 1) {}

    /// Enumerates all extensions of `prefix` (step indices), counting each
    /// walk of length n >= prefix length with the given multiplicity.
    void run(const std::vector<int>& prefix, std::uint64_t weight) {
        weight_ = weight;
        xs_.assign(1, 0);
        ys_.assign(1, 0);
        dk_.assign(1, 0);
        std::fill(occ_.begin(), occ_.end(), 0);
        occ_[cell(0, 0)] = 1;
        for (int s : prefix) {
            const int x = xs_.back() + st_.dx[s], y = ys_.back() + st_.dy[s];
            if (occ_[cell(x, y)]) return;
            push(x, y);
        }
        record();
        if (depth() < N_) extend();
    }

    [[nodiscard]] const std::vector<std::uint64_t>& counts() const { return counts_; }
    [[nodiscard]] const std::vector<std::map<std::int64_t, std::uint64_t>>& hist() const { return hist_; }

private:
    [[nodiscard]] int depth() const { return static_cast<int>(xs_.size()) - 1; }
    [[nodiscard]] std::size_t cell(int x, int y) const {
        return static_cast<std::size_t>(y + N_) * static_cast<std::size_t>(W_) + static_cast<std::size_t>(x + N_);
    }

    void push(int x, int y) {
        std::int64_t d = dk_.back();
        if (diam_)
            for (std::size_t k = 0; k < xs_.size(); ++k) d = std::max(d, dist_key(l_, x, y, xs_[k], ys_[k]));
        xs_.push_back(x);
        ys_.push_back(y);
        dk_.push_back(d);
        occ_[cell(x, y)] = 1;
    }
    void pop() {
        occ_[cell(xs_.back(), ys_.back())] = 0;
        xs_.pop_back();
        ys_.pop_back();
        dk_.pop_back();
    }
    void record() {
        const int n = depth();
        if (n == 0) return;
        counts_[static_cast<std::size_t>(n)] += weight_;
        if (diam_) hist_[static_cast<std::size_t>(n)][dk_.back()] += weight_;
    }
    void extend() {
        const int x0 = xs_.back(), y0 = ys_.back();
        for (int s = 0; s < st_.count; ++s) {
            const int x = x0 + st_.dx[s], y = y0 + st_.dy[s];
            if (occ_[cell(x, y)]) continue;
            push(x, y);
            record();
            if (depth() < N_) extend();
            pop();
        }
    }

    Lattice l_;
    const LatticeSteps& st_;
    int N_, W_;
    std::vector<std::uint8_t> occ_;
    std::vector<int> xs_, ys_;
    std::vector<std::int64_t> dk_;
    std::vector<std::uint64_t> counts_;
    bool diam_;
    std::vector<std::map<std::int64_t, std::uint64_t>> hist_;
    std::uint64_t weight_ = 1;
};

struct Branch {
    std::vector<int> prefix;
    std::uint64_t weight;
};

/// Symmetry-reduced starting branches. Square: first step east; walks that
/// are straight so far weigh 4, walks whose first turn goes north weigh 8 and
/// those turning south are dropped. Triangular: first step fixed, weight 6.
/// Without pruning every first step is a branch of weight 1.
inline std::vector<Branch> branches(Lattice l, int nmax, bool prune) {
    std::vector<Branch> out;
    if (!prune) {
        for (int s = 0; s < steps_of(l).count; ++s) out.push_back({{s}, 1});
        return out;
    }
    if (l == Lattice::triangular) return {{{0}, 6}};
    // Straight prefixes E^k of each length are counted separately so their
    // weight differs; every walk is E^k N (anything) for some k >= 1, or E^n.
    for (int k = 1; k < nmax; ++k) {
        std::vector<int> p(static_cast<std::size_t>(k), 0);
        p.push_back(1);
        out.push_back({p, 8});
    }
    return out;
}

}  // namespace detail

/// Exact counts a_1..a_n by backtracking; `prune` uses the lattice symmetry
/// and must not change any count.
inline SawCountTable enumerate_saws(int n, Lattice l, bool prune = true, unsigned threads = 1) {
    if (n < 1 || n > saw_cap(l))
        throw DomainError("enumerate_saws: n must lie in [1, " + std::to_string(saw_cap(l)) + "] for the " +
                          to_string(l) + " lattice");
    const auto br = detail::branches(l, n, prune);
    auto parts = parallel_map(br.size(), threads, [&](std::size_t b) {
        detail::SawWalker w(l, n, false);
        w.run(br[b].prefix, br[b].weight);
        return w.counts();
    });
    SawCountTable t{l, std::vector<BigInt>(static_cast<std::size_t>(n), 0)};
    for (const auto& c : parts)
        for (int k = 1; k <= n; ++k) t.counts[static_cast<std::size_t>(k - 1)] += c[static_cast<std::size_t>(k)];
    if (prune && l == Lattice::square)
        for (auto& c : t.counts) c += 4;  // the straight walks E^k, times 4 directions
    return t;
}

struct ConnectivityBounds {
    double mu_upper = 0.0;    // min_n a_n^{1/n}, an upper bound on mu
    double ratio_last = 0.0;  // a_N / a_{N-1}
};

inline ConnectivityBounds connectivity_bounds(const SawCountTable& t) {
    if (t.max_n() < 2) throw DomainError("connectivity_bounds: need at least two counts");
    ConnectivityBounds b;
    b.mu_upper = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= t.max_n(); ++n)
        b.mu_upper = std::min(b.mu_upper, std::exp(std::log(t.a(n).convert_to<double>()) / n));
    b.ratio_last = BigRational(t.a(t.max_n()), t.a(t.max_n() - 1)).convert_to<double>();
    return b;
}

/// a_{2n} / a_n^2: the probability that two independent uniform n-step walks
/// from 0 meet only at 0.
inline BigRational nonintersection_exact(int n, const SawCountTable& t) {
    if (n < 1 || 2 * n > t.max_n()) throw DomainError("nonintersection_exact: table lacks a_" + std::to_string(2 * n));
    return BigRational(t.a(2 * n), t.a(n) * t.a(n));
}

/// Exact squared-diameter histograms for every length 1..n (index n - 1).
inline std::vector<DiameterDistribution> diameter_distributions(int n, Lattice l, unsigned threads = 1) {
    if (n < 1 || n > saw_cap(l))
        throw DomainError("diameter_distribution: n must lie in [1, " + std::to_string(saw_cap(l)) + "]");
    const auto br = detail::branches(l, n, true);
    auto parts = parallel_map(br.size(), threads, [&](std::size_t b) {
        detail::SawWalker w(l, n, true);
        w.run(br[b].prefix, br[b].weight);
        return w.hist();
    });
    std::vector<DiameterDistribution> out(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) {
        auto& d = out[static_cast<std::size_t>(k - 1)];
        d.n = k;
        d.lattice = l;
        d.key_scale = l == Lattice::square ? 1 : 4;
        for (const auto& h : parts)
            for (const auto& [key, c] : h[static_cast<std::size_t>(k)]) d.histogram[key] += c;
        if (l == Lattice::square) d.histogram[static_cast<std::int64_t>(k) * k] += 4;
    }
    return out;
}

inline DiameterDistribution diameter_distribution(int n, Lattice l, unsigned threads = 1) {
    return diameter_distributions(n, l, threads).back();
}

}  // namespace conflab
