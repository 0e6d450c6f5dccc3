#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "conflab/saw.hpp"

using namespace conflab;

namespace {

using Site = std::pair<int, int>;

// Plain recursive enumeration with a std::set of visited sites.
void oracle(int n, std::set<Site>& seen, Site at, std::vector<std::uint64_t>& counts, int depth) {
    static const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
    for (int s = 0; s < 4; ++s) {
        const Site next{at.first + dx[s], at.second + dy[s]};
        if (seen.count(next)) continue;
        ++counts[static_cast<std::size_t>(depth + 1)];
        if (depth + 1 < n) {
            seen.insert(next);
            oracle(n, seen, next, counts, depth + 1);
            seen.erase(next);
        }
    }
}

std::vector<std::vector<Site>> all_walks(int n) {
    std::vector<std::vector<Site>> out;
    std::vector<Site> w{{0, 0}};
    static const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
    auto rec = [&](auto&& self) -> void {
        if (static_cast<int>(w.size()) == n + 1) {
            out.push_back(w);
            return;
        }
        for (int s = 0; s < 4; ++s) {
            const Site next{w.back().first + dx[s], w.back().second + dy[s]};
            if (std::find(w.begin(), w.end(), next) != w.end()) continue;
            w.push_back(next);
            self(self);
            w.pop_back();
        }
    };
    rec(rec);
    return out;
}

}  // namespace

TEST_CASE("square lattice counts", "[saw]") {
    const auto t = enumerate_saws(12, Lattice::square);
    REQUIRE(t.a(1) == 4);
    REQUIRE(t.a(2) == 12);
    REQUIRE(t.a(3) == 36);
    REQUIRE(t.a(4) == 100);

    std::vector<std::uint64_t> oc(13, 0);
    std::set<Site> seen{{0, 0}};
    oracle(12, seen, {0, 0}, oc, 0);
    for (int n = 1; n <= 12; ++n) REQUIRE(t.a(n) == oc[static_cast<std::size_t>(n)]);

    const auto unpruned = enumerate_saws(10, Lattice::square, false);
    for (int n = 1; n <= 10; ++n) REQUIRE(unpruned.a(n) == t.a(n));
    REQUIRE(enumerate_saws(12, Lattice::square, true, 3).counts == t.counts);

    for (int n = 1; n <= 12; ++n) {
        REQUIRE(t.a(n) >= BigInt(1) << n);
        for (int m = 1; n + m <= 12; ++m) REQUIRE(t.a(n + m) <= t.a(n) * t.a(m));
    }
    REQUIRE_THROWS_AS(enumerate_saws(17, Lattice::square), DomainError);
    REQUIRE_THROWS_AS(enumerate_saws(13, Lattice::triangular), DomainError);
}

TEST_CASE("triangular lattice counts", "[saw]") {
    const auto t = enumerate_saws(9, Lattice::triangular);
    const auto u = enumerate_saws(9, Lattice::triangular, false);
    REQUIRE(t.counts == u.counts);
    REQUIRE(t.a(1) == 6);
    REQUIRE(t.a(2) == 30);
    for (int n = 1; n <= 9; ++n) {
        REQUIRE(t.a(n) >= BigInt(3) * (BigInt(1) << (n - 1)));
        REQUIRE(std::pow(t.a(n).convert_to<double>(), 1.0 / n) >= 3.0);
        for (int m = 1; n + m <= 9; ++m) REQUIRE(t.a(n + m) <= t.a(n) * t.a(m));
    }
}

TEST_CASE("connectivity bounds", "[saw]") {
    const auto t = enumerate_saws(14, Lattice::square);
    double prev = 10.0;
    for (int N = 2; N <= 14; ++N) {
        SawCountTable part{Lattice::square, {t.counts.begin(), t.counts.begin() + N}};
        const auto b = connectivity_bounds(part);
        REQUIRE(b.mu_upper <= prev);
        prev = b.mu_upper;
        REQUIRE(b.mu_upper >= 2.0);
    }
    REQUIRE(connectivity_bounds(t).mu_upper < 3.0);
    REQUIRE(connectivity_bounds(t).ratio_last == Catch::Approx(t.a(14).convert_to<double>() / t.a(13).convert_to<double>()));
    REQUIRE_THROWS_AS(connectivity_bounds(SawCountTable{Lattice::square, {4}}), DomainError);
}

TEST_CASE("non-intersection identity", "[saw]") {
    const auto t = enumerate_saws(12, Lattice::square);
    REQUIRE(nonintersection_exact(1, t) == BigRational(3, 4));
    REQUIRE(nonintersection_exact(2, t) == BigRational(100, 144));
    for (int n = 1; n + 1 <= 6; ++n) REQUIRE(nonintersection_exact(n + 1, t) <= nonintersection_exact(n, t));
    REQUIRE_THROWS_AS(nonintersection_exact(7, t), DomainError);

    // Ordered pairs of n-step walks meeting only at 0, counted directly.
    for (int n = 1; n <= 6; ++n) {
        const auto walks = all_walks(n);
        REQUIRE(walks.size() == t.a(n));
        std::vector<std::set<Site>> sets;
        for (const auto& w : walks) sets.emplace_back(w.begin() + 1, w.end());
        std::uint64_t pairs = 0;
        for (const auto& a : sets)
            for (const auto& b : sets) {
                bool ok = true;
                for (const auto& s : a)
                    if (b.count(s)) {
                        ok = false;
                        break;
                    }
                pairs += ok;
            }
        REQUIRE(pairs == t.a(2 * n));
    }
}

TEST_CASE("diameter histograms", "[saw]") {
    const auto d1 = diameter_distribution(1, Lattice::square);
    REQUIRE(d1.histogram == std::map<std::int64_t, BigInt>{{1, 4}});
    const auto d2 = diameter_distribution(2, Lattice::square);
    REQUIRE(d2.histogram == std::map<std::int64_t, BigInt>{{2, 8}, {4, 4}});

    const auto all = diameter_distributions(10, Lattice::square);
    const auto t = enumerate_saws(10, Lattice::square);
    for (int n = 1; n <= 10; ++n) REQUIRE(all[static_cast<std::size_t>(n - 1)].total() == t.a(n));
    // Brute-force max pairwise distance at n = 5.
    std::map<std::int64_t, BigInt> brute;
    for (const auto& w : all_walks(5)) {
        std::int64_t m = 0;
        for (const auto& a : w)
            for (const auto& b : w) {
                const std::int64_t dx = a.first - b.first, dy = a.second - b.second;
                m = std::max(m, dx * dx + dy * dy);
            }
        brute[m] += 1;
    }
    REQUIRE(all[4].histogram == brute);

    const auto tri = diameter_distribution(1, Lattice::triangular);
    REQUIRE(tri.key_scale == 4);
    REQUIRE(tri.histogram == std::map<std::int64_t, BigInt>{{4, 6}});
    const auto tri2 = diameter_distribution(2, Lattice::triangular);
    REQUIRE(tri2.total() == 30);
    // Two steps at 60 degrees: distance 1; at 120 degrees: sqrt 3; straight: 2.
    REQUIRE(tri2.histogram == std::map<std::int64_t, BigInt>{{4, 12}, {12, 12}, {16, 6}});
    REQUIRE(tri2.mean_diameter() == Catch::Approx((12 * 1.0 + 12 * std::sqrt(3.0) + 6 * 2.0) / 30));
}
