#pragma once

// Bond percolation on rectangles of Z^2: sampling, crossings by union-find,
// cluster boundaries, the half-plane exploration interface and the triangle
// endpoint experiment.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include <boost/pending/disjoint_sets.hpp>

#include "conflab/error.hpp"
#include "conflab/geometry.hpp"
#include "conflab/parallel.hpp"
#include "conflab/rng.hpp"
#include "conflab/special_functions.hpp"
#include "conflab/stats.hpp"

namespace conflab {

/// Edge states on a cols x rows block of vertices (x, y), 0 <= x < cols,
/// 0 <= y < rows. Horizontal edge (x, y)-(x+1, y) is h_open[y (cols-1) + x];
/// vertical edge (x, y)-(x, y+1) is v_open[y cols + x].
struct BondConfig {
    int cols = 0;
    int rows = 0;
    double p = 0.5;
    std::vector<std::uint8_t> h_open;
    std::vector<std::uint8_t> v_open;

    BondConfig() = default;
    BondConfig(int c, int r, double prob = 0.5) : cols(c), rows(r), p(prob) {
        if (c < 1 || r < 1) throw DomainError("BondConfig: need at least one vertex in each direction");
        h_open.assign(static_cast<std::size_t>(c - 1) * static_cast<std::size_t>(r), 0);
        v_open.assign(static_cast<std::size_t>(c) * static_cast<std::size_t>(r - 1), 0);
    }

    [[nodiscard]] std::size_t edges() const { return h_open.size() + v_open.size(); }
    [[nodiscard]] std::size_t vertex(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(x);
    }
    [[nodiscard]] bool h(int x, int y) const { return h_open[static_cast<std::size_t>(y) * (cols - 1) + x] != 0; }
    [[nodiscard]] bool v(int x, int y) const { return v_open[static_cast<std::size_t>(y) * cols + x] != 0; }
    void set_h(int x, int y, bool open) { h_open.at(static_cast<std::size_t>(y) * (cols - 1) + x) = open; }
    void set_v(int x, int y, bool open) { v_open.at(static_cast<std::size_t>(y) * cols + x) = open; }

    void fill(bool open) {
        std::fill(h_open.begin(), h_open.end(), open);
        std::fill(v_open.begin(), v_open.end(), open);
    }
};

/// Edge e is open iff U_e < p, with one uniform per edge in a fixed order
/// (horizontal edges, then vertical), so one stream couples all values of p.
inline BondConfig sample_bonds(int cols, int rows, double p, RngStream& rng) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("sample_bonds: p must lie in [0, 1]");
    BondConfig c(cols, rows, p);
    for (auto& e : c.h_open) e = rng.uniform() < p;
    for (auto& e : c.v_open) e = rng.uniform() < p;
    return c;
}

enum class Direction { left_right, top_bottom };

namespace detail {

using DisjointSets = boost::disjoint_sets_with_storage<>;

inline DisjointSets make_sets(std::size_t n) {
    DisjointSets ds(n);
    for (std::size_t i = 0; i < n; ++i) ds.make_set(i);
    return ds;
}

}  // namespace detail

/// Open path joining the two sides named by `dir` (left/right columns or
/// bottom/top rows). Union-find with two virtual terminals.
inline bool crossing_exists(const BondConfig& c, Direction dir) {
    const std::size_t n = static_cast<std::size_t>(c.cols) * static_cast<std::size_t>(c.rows);
    const std::size_t s = n, t = n + 1;
    auto ds = detail::make_sets(n + 2);
    for (int y = 0; y < c.rows; ++y)
        for (int x = 0; x + 1 < c.cols; ++x)
            if (c.h(x, y)) ds.union_set(c.vertex(x, y), c.vertex(x + 1, y));
    for (int y = 0; y + 1 < c.rows; ++y)
        for (int x = 0; x < c.cols; ++x)
            if (c.v(x, y)) ds.union_set(c.vertex(x, y), c.vertex(x, y + 1));
    if (dir == Direction::left_right) {
        for (int y = 0; y < c.rows; ++y) {
            ds.union_set(s, c.vertex(0, y));
            ds.union_set(t, c.vertex(c.cols - 1, y));
        }
    } else {
        for (int x = 0; x < c.cols; ++x) {
            ds.union_set(s, c.vertex(x, 0));
            ds.union_set(t, c.vertex(x, c.rows - 1));
        }
    }
    return ds.find_set(s) == ds.find_set(t);
}

/// Crossing of the dual graph by duals of closed edges. Dual vertices are the
/// (cols-1) x (rows-1) faces plus two exterior terminals on the sides named by
/// `dir`; a dual edge is open when its primal edge is closed. A dual
/// top-bottom crossing blocks every primal left-right crossing and conversely.
inline bool dual_crossing_exists(const BondConfig& c, Direction dir) {
    const int fc = c.cols - 1, fr = c.rows - 1;
    const std::size_t n = static_cast<std::size_t>(std::max(fc, 0)) * static_cast<std::size_t>(std::max(fr, 0));
    const std::size_t s = n, t = n + 1;
    auto ds = detail::make_sets(n + 2);
    auto face = [&](int x, int y) -> std::size_t {
        if (dir == Direction::top_bottom) {
            if (y < 0) return s;
            if (y >= fr) return t;
        } else {
            if (x < 0) return s;
            if (x >= fc) return t;
        }
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(fc) + static_cast<std::size_t>(x);
    };
    if (dir == Direction::top_bottom) {
        // Closed horizontal edge (x, y)-(x+1, y) joins faces (x, y-1) and (x, y).
        for (int y = 0; y < c.rows; ++y)
            for (int x = 0; x < fc; ++x)
                if (!c.h(x, y)) ds.union_set(face(x, y - 1), face(x, y));
        // Closed interior vertical edge (x, y)-(x, y+1) joins faces (x-1, y) and (x, y).
        for (int y = 0; y < fr; ++y)
            for (int x = 1; x < fc; ++x)
                if (!c.v(x, y)) ds.union_set(face(x - 1, y), face(x, y));
    } else {
        for (int y = 0; y < fr; ++y)
            for (int x = 0; x < c.cols; ++x)
                if (!c.v(x, y)) ds.union_set(face(x - 1, y), face(x, y));
        for (int y = 1; y < fr; ++y)
            for (int x = 0; x < fc; ++x)
                if (!c.h(x, y)) ds.union_set(face(x, y - 1), face(x, y));
    }
    return ds.find_set(s) == ds.find_set(t);
}

/// Left-right crossing of the rectangle [0, floor(L n)] x [0, floor(l n)].
inline stats::Estimate crossing_probability_mc(const special::RectangleShape& shape, int n, double p, std::size_t trials,
                                               const RngStream& rng, unsigned threads = 1) {
    const int a = static_cast<int>(std::floor(shape.L * n)), b = static_cast<int>(std::floor(shape.l * n));
    if (a < 1 || b < 1) throw DomainError("crossing_probability_mc: rectangle has a side of length 0");
    if (trials < 1) throw DomainError("crossing_probability_mc: need trials >= 1");
    const std::size_t hits = parallel_count(trials, threads, [&](std::size_t k) {
        RngStream r = rng.substream(k);
        return crossing_exists(sample_bonds(a + 1, b + 1, p, r), Direction::left_right);
    });
    return stats::binomial(hits, trials);
}

/// Top-bottom crossing of the self-dual block of n columns and n + 1 rows of
/// vertices; exactly 1/2 at p = 1/2.
inline stats::Estimate self_dual_crossing_mc(int n, double p, std::size_t trials, const RngStream& rng,
                                             unsigned threads = 1) {
    if (n < 1 || trials < 1) throw DomainError("self_dual_crossing_mc: need n >= 1 and trials >= 1");
    const std::size_t hits = parallel_count(trials, threads, [&](std::size_t k) {
        RngStream r = rng.substream(k);
        return crossing_exists(sample_bonds(n, n + 1, p, r), Direction::top_bottom);
    });
    return stats::binomial(hits, trials);
}

struct ClusterBoundary {
    GridMask mask;               // hull of the cluster on the vertex raster
    std::size_t perimeter = 0;   // cell edges between hull and non-hull cells
    std::size_t vertices = 0;    // cluster size
};

/// Open cluster of largest bounding-box diagonal (ties: more vertices, then
/// smaller lowest vertex index). Vertex (x, y) is cell (x, y) of a unit grid
/// with origin (-1/2, -1/2), so an open edge joins two 4-adjacent cells.
///
/// The hull is taken in the plane, not on the raster: the exterior is the set
/// of faces reachable from outside the box across edges that are not edges
/// of the cluster, and a vertex off the cluster is exterior when one of its
/// four faces is. Fjords entered through a closed edge between two cluster
/// vertices therefore stay outside the hull, although their cells are sealed
/// off on the raster; the perimeter counts cell edges between hull and
/// non-hull cells (or the grid border) directly.
inline ClusterBoundary largest_cluster_boundary(const BondConfig& c) {
    if (std::none_of(c.h_open.begin(), c.h_open.end(), [](auto e) { return e != 0; }) &&
        std::none_of(c.v_open.begin(), c.v_open.end(), [](auto e) { return e != 0; }))
        throw DomainError("largest_cluster_boundary: empty configuration");
    const std::size_t n = static_cast<std::size_t>(c.cols) * static_cast<std::size_t>(c.rows);
    auto ds = detail::make_sets(n);
    for (int y = 0; y < c.rows; ++y)
        for (int x = 0; x + 1 < c.cols; ++x)
            if (c.h(x, y)) ds.union_set(c.vertex(x, y), c.vertex(x + 1, y));
    for (int y = 0; y + 1 < c.rows; ++y)
        for (int x = 0; x < c.cols; ++x)
            if (c.v(x, y)) ds.union_set(c.vertex(x, y), c.vertex(x, y + 1));

    struct Box {
        int x0 = std::numeric_limits<int>::max(), y0 = std::numeric_limits<int>::max(), x1 = -1, y1 = -1;
        std::size_t size = 0, first = std::numeric_limits<std::size_t>::max();
    };
    std::vector<std::size_t> root(n);
    std::vector<Box> box(n);
    for (int y = 0; y < c.rows; ++y)
        for (int x = 0; x < c.cols; ++x) {
            const std::size_t v = c.vertex(x, y);
            const std::size_t r = ds.find_set(v);
            root[v] = r;
            Box& b = box[r];
            b.x0 = std::min(b.x0, x);
            b.y0 = std::min(b.y0, y);
            b.x1 = std::max(b.x1, x);
            b.y1 = std::max(b.y1, y);
            ++b.size;
            b.first = std::min(b.first, v);
        }
    std::size_t best = n;
    long best_d2 = -1;
    for (std::size_t r = 0; r < n; ++r) {
        const Box& b = box[r];
        if (b.size == 0) continue;
        const long dx = b.x1 - b.x0, dy = b.y1 - b.y0, d2 = dx * dx + dy * dy;
        const bool better = best == n || d2 > best_d2 ||
                            (d2 == best_d2 && (b.size > box[best].size ||
                                               (b.size == box[best].size && b.first < box[best].first)));
        if (better) {
            best = r;
            best_d2 = d2;
        }
    }
    const int W = c.cols + 1, H = c.rows + 1;  // faces (x, y), -1 <= x < cols, -1 <= y < rows
    auto face = [&](int x, int y) { return static_cast<std::size_t>(y + 1) * static_cast<std::size_t>(W) + static_cast<std::size_t>(x + 1); };
    auto in_cluster = [&](int x, int y) { return root[c.vertex(x, y)] == best; };
    std::vector<std::uint8_t> ext(static_cast<std::size_t>(W) * static_cast<std::size_t>(H), 0);
    std::vector<std::pair<int, int>> stack;
    auto push = [&](int x, int y) {
        if (!ext[face(x, y)]) {
            ext[face(x, y)] = 1;
            stack.emplace_back(x, y);
        }
    };
    for (int x = -1; x < c.cols; ++x) {
        push(x, -1);
        push(x, c.rows - 1);
    }
    for (int y = -1; y < c.rows; ++y) {
        push(-1, y);
        push(c.cols - 1, y);
    }
    while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        // Crossing to (x+1, y) passes the vertical edge (x+1, y)-(x+1, y+1); to
        // (x, y+1) the horizontal edge (x, y+1)-(x+1, y+1).
        if (x + 1 < c.cols && y >= 0 && y + 1 < c.rows && !(c.v(x + 1, y) && in_cluster(x + 1, y))) push(x + 1, y);
        if (x >= 0 && y >= 0 && y + 1 < c.rows && !(c.v(x, y) && in_cluster(x, y))) push(x - 1, y);
        if (y + 1 < c.rows && x >= 0 && x + 1 < c.cols && !(c.h(x, y + 1) && in_cluster(x, y + 1))) push(x, y + 1);
        if (y >= 0 && x >= 0 && x + 1 < c.cols && !(c.h(x, y) && in_cluster(x, y))) push(x, y - 1);
    }
    ClusterBoundary out;
    out.mask = GridMask(GridSpec{{-0.5, -0.5}, 1.0, c.cols, c.rows});
    for (int y = 0; y < c.rows; ++y)
        for (int x = 0; x < c.cols; ++x) {
            const bool outside = !in_cluster(x, y) &&
                                 (ext[face(x - 1, y - 1)] || ext[face(x, y - 1)] || ext[face(x - 1, y)] || ext[face(x, y)]);
            out.mask.bits[c.vertex(x, y)] = outside ? 0 : 1;
        }
    for (int y = 0; y < c.rows; ++y)
        for (int x = 0; x < c.cols; ++x) {
            if (!out.mask.get(x, y)) continue;
            out.perimeter += !out.mask.get(x + 1, y) + !out.mask.get(x - 1, y) + !out.mask.get(x, y + 1) + !out.mask.get(x, y - 1);
        }
    out.vertices = box[best].size;
    return out;
}

// ---------------------------------------------------------------------------
// Exploration interface

enum class Turn { left, right, straight };

/// Interface points in quarter units: (X, Y) stands for (X/4, Y/4) relative
/// to the exploration origin; both coordinates are odd. Each point is the
/// midpoint of a primal vertex of the explored cluster and a neighbouring dual
/// vertex; steps have length 2 (half a lattice unit).
struct ExplorationPath {
    std::vector<std::pair<int, int>> vertices;
    std::vector<Turn> turns;  // turns[k] is the turn made at vertices[k + 1]
    bool exited = false;      // stopped because the next edge left the slab

    [[nodiscard]] PlanarPath to_planar(double scale = 1.0) const {
        PlanarPath p;
        p.kind = PathKind::interface;
        p.time_step = 1.0;
        for (auto [X, Y] : vertices) p.points.emplace_back(0.25 * scale * X, 0.25 * scale * Y);
        return p;
    }
};

/// Edge state in the half-plane exploration setting: the bottom row is forced
/// (edges [x, x+1] open for x < 0, closed for x >= 0) and edges leaving the
/// half-plane downwards do not exist. Coordinates are relative to column x0.
struct HalfPlaneEdges {
    const BondConfig* config;
    int x0;

    /// Edge from (x, y) along unit vector (tx, ty); nullopt when it leaves the
    /// slab sideways or at the top.
    [[nodiscard]] std::optional<bool> open(int x, int y, int tx, int ty) const {
        const int ax = x + x0, ay = y, bx = ax + tx, by = ay + ty;
        if (by < 0) return false;
        if (bx < 0 || bx >= config->cols || by >= config->rows) return std::nullopt;
        if (ty == 0) {
            const int lx = std::min(ax, bx);
            if (ay == 0) return lx - x0 < 0;
            return config->h(lx, ay);
        }
        return config->v(ax, std::min(ay, by));
    }
};

/// Left-most interface along the cluster attached to the negative half-axis,
/// started at (1/4, -1/4) between vertex (0, 0) and the dual vertex
/// (1/2, -1/2). The explored cluster stays on the left. In quarter units the
/// state is a primal vertex u and a dual vertex d = u + (sx, sy)/2; the next
/// edge leaves u along (sx, 0) when sx sy < 0 and along (0, sy) otherwise.
/// An open edge moves u across it, a closed edge reflects d across it.
inline ExplorationPath exploration_process(const BondConfig& c, int x0, std::size_t max_steps) {
    if (max_steps < 1) throw DomainError("exploration_process: max_steps must be >= 1");
    if (x0 < 1 || x0 >= c.cols) throw DomainError("exploration_process: origin column must have a left neighbour");
    const HalfPlaneEdges edges{&c, x0};
    ExplorationPath out;
    int ux = 0, uy = 0, sx = 1, sy = -1;
    auto point = [&] { return std::pair{4 * ux + sx, 4 * uy + sy}; };
    out.vertices.push_back(point());
    int px = 0, py = 0;  // previous step direction
    for (std::size_t k = 0; k < max_steps; ++k) {
        const int tx = sx * sy < 0 ? sx : 0, ty = sx * sy < 0 ? 0 : sy;
        const auto open = edges.open(ux, uy, tx, ty);
        if (!open) {
            out.exited = true;
            break;
        }
        const auto before = point();
        if (*open) {
            ux += tx;
            uy += ty;
            sx = tx != 0 ? -sx : sx;
            sy = ty != 0 ? -sy : sy;
        } else {
            sx = tx != 0 ? sx : -sx;
            sy = ty != 0 ? sy : -sy;
        }
        const auto after = point();
        const int dx = (after.first - before.first) / 2, dy = (after.second - before.second) / 2;
        if (k > 0) {
            const int cross = px * dy - py * dx;
            out.turns.push_back(cross > 0 ? Turn::left : cross < 0 ? Turn::right : Turn::straight);
        }
        px = dx;
        py = dy;
        out.vertices.push_back(after);
    }
    return out;
}

/// Exploration of a fresh critical configuration on a width x height slab
/// with the origin in the middle column.
inline ExplorationPath sample_exploration(int width, int height, double p, std::size_t max_steps, RngStream& rng) {
    const BondConfig c = sample_bonds(width, height, p, rng);
    return exploration_process(c, width / 2, max_steps);
}

// ---------------------------------------------------------------------------
// Triangle endpoint

struct TriangleEndpoints {
    std::vector<double> positions;  // sorted, in [0, 1] from B to C
    std::size_t unconnected = 0;    // trials recorded at B for lack of a connection

    /// Empirical CDF at x.
    [[nodiscard]] double cdf(double x) const {
        return static_cast<double>(std::upper_bound(positions.begin(), positions.end(), x) - positions.begin()) /
               static_cast<double>(positions.size());
    }
    [[nodiscard]] double ks_uniform() const {
        return stats::ks_distance(positions, [](double x) { return std::clamp(x, 0.0, 1.0); });
    }
};

/// Square-lattice discretization of the triangle A = 0, B = s e^{2 i pi/3},
/// C = s e^{i pi/3} for side s: vertices (x, y) with 0 <= y <= Y =
/// floor(s sqrt(3)/2) and |x| <= y / sqrt(3). The top row stands for [B, C];
/// vertices whose right neighbour lies outside stand for [A, C].
struct TriangleLattice {
    int Y = 0;
    std::vector<int> lo, hi;  // column range of row y

    explicit TriangleLattice(int side) {
        if (side < 8) throw DomainError("triangle lattice: side must be >= 8");
        Y = static_cast<int>(std::floor(side * std::numbers::sqrt3 / 2.0));
        for (int y = 0; y <= Y; ++y) {
            const int r = static_cast<int>(std::floor(y / std::numbers::sqrt3 + 1e-12));
            lo.push_back(-r);
            hi.push_back(r);
        }
    }
    /// Position of top-row column x along [B, C].
    [[nodiscard]] double position(int x) const {
        const double half = Y / std::numbers::sqrt3;
        return std::clamp((x + half) / (2.0 * half), 0.0, 1.0);
    }
};

/// One trial: normalized position of the left-most top-row vertex connected
/// inside the triangle to the right side, or -1 when there is none.
inline double triangle_endpoint_trial(const TriangleLattice& T, double p, RngStream& rng) {
    std::vector<std::size_t> offset(T.Y + 2, 0);
    for (int y = 0; y <= T.Y; ++y) offset[y + 1] = offset[y] + static_cast<std::size_t>(T.hi[y] - T.lo[y] + 1);
    const std::size_t n = offset[T.Y + 1], right = n;
    auto id = [&](int x, int y) { return offset[y] + static_cast<std::size_t>(x - T.lo[y]); };
    auto ds = detail::make_sets(n + 1);
    for (int y = 0; y <= T.Y; ++y) {
        for (int x = T.lo[y]; x <= T.hi[y]; ++x) {
            if (x + 1 <= T.hi[y] && rng.uniform() < p) ds.union_set(id(x, y), id(x + 1, y));
            if (y + 1 <= T.Y && rng.uniform() < p) ds.union_set(id(x, y), id(x, y + 1));
        }
        ds.union_set(right, id(T.hi[y], y));
    }
    const std::size_t rr = ds.find_set(right);
    for (int x = T.lo[T.Y]; x <= T.hi[T.Y]; ++x)
        if (ds.find_set(id(x, T.Y)) == rr) return T.position(x);
    return -1.0;
}

/// Endpoint law over independent trials; unconnected trials count as B.
inline TriangleEndpoints triangle_endpoint_mc(int side, std::size_t trials, const RngStream& rng, double p = 0.5,
                                              unsigned threads = 1) {
    if (trials < 1) throw DomainError("triangle_endpoint_mc: need trials >= 1");
    const TriangleLattice T(side);
    auto pos = parallel_map(trials, threads, [&](std::size_t k) {
        RngStream r = rng.substream(k);
        return triangle_endpoint_trial(T, p, r);
    });
    TriangleEndpoints out;
    for (double& x : pos)
        if (x < 0.0) {
            x = 0.0;
            ++out.unconnected;
        }
    std::sort(pos.begin(), pos.end());
    out.positions = std::move(pos);
    return out;
}

}  // namespace conflab
