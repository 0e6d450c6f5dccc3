#include <catch2/catch_amalgamated.hpp>

#include <deque>
#include <set>
#include <tuple>

#include "conflab/percolation.hpp"

using namespace conflab;

namespace {

BondConfig from_code(int cols, int rows, std::uint64_t code) {
    BondConfig c(cols, rows);
    for (auto& e : c.h_open) {
        e = code & 1;
        code >>= 1;
    }
    for (auto& e : c.v_open) {
        e = code & 1;
        code >>= 1;
    }
    return c;
}

// Breadth-first search over open edges from the left column.
bool bfs_left_right(const BondConfig& c) {
    std::vector<char> seen(static_cast<std::size_t>(c.cols * c.rows), 0);
    std::deque<std::pair<int, int>> q;
    for (int y = 0; y < c.rows; ++y) {
        seen[c.vertex(0, y)] = 1;
        q.emplace_back(0, y);
    }
    while (!q.empty()) {
        auto [x, y] = q.front();
        q.pop_front();
        if (x == c.cols - 1) return true;
        auto go = [&](int nx, int ny, bool open) {
            if (open && !seen[c.vertex(nx, ny)]) {
                seen[c.vertex(nx, ny)] = 1;
                q.emplace_back(nx, ny);
            }
        };
        if (x + 1 < c.cols) go(x + 1, y, c.h(x, y));
        if (x > 0) go(x - 1, y, c.h(x - 1, y));
        if (y + 1 < c.rows) go(x, y + 1, c.v(x, y));
        if (y > 0) go(x, y - 1, c.v(x, y - 1));
    }
    return false;
}

}  // namespace

TEST_CASE("bond sampling", "[perc]") {
    RngStream rng(1, 0);
    auto none = sample_bonds(10, 10, 0.0, rng), all = sample_bonds(10, 10, 1.0, rng);
    for (auto e : none.h_open) REQUIRE(e == 0);
    for (auto e : all.v_open) REQUIRE(e == 1);
    auto half = sample_bonds(708, 708, 0.5, rng);  // about 10^6 edges
    std::size_t open = 0;
    for (auto e : half.h_open) open += e;
    for (auto e : half.v_open) open += e;
    auto est = stats::binomial(open, half.edges());
    REQUIRE(half.edges() > 1000000);
    REQUIRE(std::abs(est.value - 0.5) <= 3 * est.error);
    REQUIRE_THROWS_AS(sample_bonds(3, 3, 1.5, rng), DomainError);
}

TEST_CASE("crossing_exists trivial configurations", "[perc]") {
    BondConfig c(5, 4);
    REQUIRE_FALSE(crossing_exists(c, Direction::left_right));
    REQUIRE_FALSE(crossing_exists(c, Direction::top_bottom));
    c.fill(true);
    REQUIRE(crossing_exists(c, Direction::left_right));
    REQUIRE(crossing_exists(c, Direction::top_bottom));
    c.fill(false);
    for (int x = 0; x + 1 < c.cols; ++x) c.set_h(x, 2, true);
    REQUIRE(crossing_exists(c, Direction::left_right));
    REQUIRE_FALSE(crossing_exists(c, Direction::top_bottom));
}

TEST_CASE("duality holds configuration by configuration", "[perc]") {
    for (int n : {2, 3}) {
        for (auto [cols, rows] : {std::pair{n, n + 1}, std::pair{n + 1, n}}) {
            const std::size_t E = BondConfig(cols, rows).edges();
            std::size_t tb = 0, lr = 0;
            for (std::uint64_t code = 0; code < (std::uint64_t{1} << E); ++code) {
                const auto c = from_code(cols, rows, code);
                const bool primal_lr = crossing_exists(c, Direction::left_right);
                const bool primal_tb = crossing_exists(c, Direction::top_bottom);
                REQUIRE(primal_lr != dual_crossing_exists(c, Direction::top_bottom));
                REQUIRE(primal_tb != dual_crossing_exists(c, Direction::left_right));
                tb += primal_tb;
                lr += primal_lr;
            }
            // Self-dual geometry: exactly half of all configurations cross.
            if (rows == cols + 1) REQUIRE(2 * tb == (std::size_t{1} << E));
            if (cols == rows + 1) REQUIRE(2 * lr == (std::size_t{1} << E));
        }
    }
}

TEST_CASE("union-find agrees with breadth-first search", "[perc]") {
    RngStream rng(2, 0);
    for (int k = 0; k < 1000; ++k) {
        const auto c = sample_bonds(6, 6, 0.5, rng);
        REQUIRE(crossing_exists(c, Direction::left_right) == bfs_left_right(c));
    }
}

TEST_CASE("crossing probability estimates", "[perc]") {
    const RngStream rng(3, 0);
    auto sd = self_dual_crossing_mc(64, 0.5, 20000, rng);
    REQUIRE(std::abs(sd.value - 0.5) <= 3 * sd.error);
    REQUIRE(crossing_probability_mc({2, 1}, 8, 0.0, 100, rng).value == 0.0);
    REQUIRE_THROWS_AS(crossing_probability_mc({0.1, 1}, 5, 0.5, 10, rng), DomainError);

    auto rect = crossing_probability_mc({2, 1}, 32, 0.5, 10000, rng);
    REQUIRE(std::abs(rect.value - special::rectangle_crossing_probability({2, 1})) <= 3 * rect.error + 0.02);

    // Coupled in p: the same uniforms can only add crossings as p grows.
    for (std::uint64_t k = 0; k < 300; ++k) {
        RngStream a = rng.substream(k), b = rng.substream(k);
        const bool lo = crossing_exists(sample_bonds(17, 9, 0.45, a), Direction::left_right);
        const bool hi = crossing_exists(sample_bonds(17, 9, 0.55, b), Direction::left_right);
        REQUIRE((!lo || hi));
    }
    REQUIRE(crossing_probability_mc({1, 1}, 16, 0.4, 2000, rng).value <
            crossing_probability_mc({1, 1}, 16, 0.6, 2000, rng).value);
}

TEST_CASE("largest cluster boundary", "[perc]") {
    BondConfig c(6, 5);
    REQUIRE_THROWS_AS(largest_cluster_boundary(c), DomainError);
    c.set_h(2, 3, true);
    auto one = largest_cluster_boundary(c);
    REQUIRE(one.perimeter == 6);
    REQUIRE(one.vertices == 2);
    REQUIRE(one.mask.get(2, 3));
    REQUIRE(one.mask.get(3, 3));
    c.fill(true);
    auto full = largest_cluster_boundary(c);
    REQUIRE(full.perimeter == 2 * (6 + 5));
    REQUIRE(full.vertices == 30);

    // A ring: its hole is filled, so the perimeter is that of the outer square.
    BondConfig ring(5, 5);
    for (int k = 0; k < 4; ++k) {
        ring.set_h(k, 0, true);
        ring.set_h(k, 4, true);
        ring.set_v(0, k, true);
        ring.set_v(4, k, true);
    }
    ring.set_h(1, 2, true);  // short cluster inside does not win
    auto r = largest_cluster_boundary(ring);
    REQUIRE(r.vertices == 16);
    REQUIRE(r.mask.count() == 25);
    REQUIRE(r.perimeter == 20);

    // A fjord whose mouth is one closed edge between two cluster vertices
    // stays outside the hull even though its cells are sealed on the raster.
    BondConfig fjord(5, 4);
    for (int k = 0; k < 4; ++k) fjord.set_h(k, 0, true);
    for (int k = 0; k < 3; ++k) {
        fjord.set_v(0, k, true);
        fjord.set_v(4, k, true);
    }
    fjord.set_h(0, 3, true);
    fjord.set_h(1, 3, true);
    fjord.set_h(3, 3, true);
    auto f = largest_cluster_boundary(fjord);
    REQUIRE(f.vertices == 14);
    REQUIRE(f.mask.count() == 14);
    REQUIRE_FALSE(f.mask.get(2, 2));
    REQUIRE(f.perimeter == 18 + 10);
    fjord.set_h(2, 3, true);
    auto closed = largest_cluster_boundary(fjord);
    REQUIRE(closed.mask.count() == 20);
    REQUIRE(closed.perimeter == 18);
}

namespace {

using Q = std::pair<int, int>;

// Checks every step of an exploration path against the edge states: a step
// crossing a primal edge needs it closed, a step crossing a dual edge needs
// the corresponding primal edge open.
void check_noncrossing(const BondConfig& c, int x0, const ExplorationPath& path) {
    auto state = [&](int x, int y, bool horizontal) {
        if (horizontal && y == 0) return x < 0;
        if (horizontal) return c.h(x + x0, y);
        if (y < 0) return false;
        return c.v(x + x0, y);
    };
    auto floor4 = [](int v) { return v >= 0 ? v / 4 : -((-v + 3) / 4); };
    for (std::size_t k = 1; k < path.vertices.size(); ++k) {
        auto [X0, Y0] = path.vertices[k - 1];
        auto [X1, Y1] = path.vertices[k];
        REQUIRE(std::abs(X1 - X0) + std::abs(Y1 - Y0) == 2);
        if (X0 == X1) {
            const int mid = (Y0 + Y1) / 2;  // line crossed, in quarter units
            const int x = floor4(X0);       // primal column to the left of the step
            if (mid % 4 == 0) {
                // horizontal primal edge (x, mid/4)-(x+1, mid/4)
                REQUIRE_FALSE(state(x, mid / 4, true));
            } else {
                // dual edge at height mid/4, dual of vertical edge at the nearer column
                const int col = (X0 - 4 * x) == 1 ? x : x + 1;
                REQUIRE(state(col, floor4(mid), false));
            }
        } else {
            const int mid = (X0 + X1) / 2;
            const int y = floor4(Y0);
            if (mid % 4 == 0) {
                REQUIRE_FALSE(state(mid / 4, y, false));
            } else {
                const int row = (Y0 - 4 * y) == 1 ? y : y + 1;
                REQUIRE(state(floor4(mid), row, true));
            }
        }
    }
}

}  // namespace

TEST_CASE("exploration process hand-traced instances", "[perc][explore]") {
    BondConfig c(4, 4);
    const auto closed = exploration_process(c, 2, 100);
    REQUIRE(closed.vertices == std::vector<Q>{{1, -1}, {1, 1}, {-1, 1}, {-3, 1}, {-5, 1}, {-7, 1}, {-9, 1}});
    REQUIRE(closed.turns == std::vector<Turn>{Turn::left, Turn::straight, Turn::straight, Turn::straight, Turn::straight});
    REQUIRE(closed.exited);
    check_noncrossing(c, 2, closed);

    c.fill(true);
    const auto open = exploration_process(c, 2, 100);
    REQUIRE(open.vertices ==
            std::vector<Q>{{1, -1}, {1, 1}, {1, 3}, {3, 3}, {3, 1}, {3, -1}, {5, -1}});
    REQUIRE(open.turns.front() == Turn::straight);
    REQUIRE(open.turns[1] == Turn::right);
    REQUIRE(open.exited);
    check_noncrossing(c, 2, open);

    const auto capped = exploration_process(c, 2, 3);
    REQUIRE(capped.vertices.size() == 4);
    REQUIRE_FALSE(capped.exited);
}

TEST_CASE("exploration on random configurations", "[perc][explore]") {
    RngStream rng(4, 0);
    for (int k = 0; k < 50; ++k) {
        const auto c = sample_bonds(40, 30, 0.5, rng);
        const auto path = exploration_process(c, 20, 1000000);
        REQUIRE(path.exited);
        REQUIRE(path.vertices.size() - 1 <= 4 * c.edges());
        check_noncrossing(c, 20, path);
        REQUIRE(path.turns.size() + 2 == path.vertices.size());
        // No directed step is repeated.
        std::set<std::tuple<int, int, int, int>> steps;
        for (std::size_t i = 1; i < path.vertices.size(); ++i)
            REQUIRE(steps.insert({path.vertices[i - 1].first, path.vertices[i - 1].second, path.vertices[i].first,
                                  path.vertices[i].second})
                        .second);
        REQUIRE(exploration_process(c, 20, 1000000).vertices == path.vertices);
    }
}

TEST_CASE("triangle endpoint law", "[perc][triangle]") {
    const RngStream rng(5, 0);
    auto smoke = triangle_endpoint_mc(8, 200, rng);
    REQUIRE(smoke.positions.size() == 200);
    REQUIRE(std::is_sorted(smoke.positions.begin(), smoke.positions.end()));
    REQUIRE(smoke.positions.front() >= 0.0);
    REQUIRE(smoke.positions.back() <= 1.0);
    double prev = 0.0;
    for (double x = 0.0; x <= 1.0; x += 0.01) {
        REQUIRE(smoke.cdf(x) >= prev);
        prev = smoke.cdf(x);
    }
    REQUIRE(smoke.cdf(1.0) == 1.0);

    auto full = triangle_endpoint_mc(16, 20, rng, 1.0);
    REQUIRE(full.positions.front() == full.positions.back());
    REQUIRE(full.positions.front() < 0.1);

    auto law = triangle_endpoint_mc(256, 10000, rng);
    REQUIRE(law.ks_uniform() <= 0.05);
}
