#pragma once

// Composite experiments. Every driver takes typed parameters, a master
// stream and a thread count; trial k of scale s always draws from
// rng.substream(s).substream(k), so results do not depend on `threads`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "conflab/error.hpp"
#include "conflab/experiment_result.hpp"
#include "conflab/geometry.hpp"
#include "conflab/loewner.hpp"
#include "conflab/parallel.hpp"
#include "conflab/percolation.hpp"
#include "conflab/random_paths.hpp"
#include "conflab/rng.hpp"
#include "conflab/saw.hpp"
#include "conflab/special_functions.hpp"
#include "conflab/stats.hpp"

namespace conflab {

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

inline ExperimentResult new_result(const std::string& id, const RngStream& rng) {
    ExperimentResult r;
    r.experiment_id = id;
    r.master_seed = rng.master_seed();
    return r;
}

inline void param(ExperimentResult& r, const std::string& k, double v) { r.parameters[k] = Config::format_number(v); }
inline void param(ExperimentResult& r, const std::string& k, long long v) { r.parameters[k] = std::to_string(v); }
inline void param(ExperimentResult& r, const std::string& k, const std::string& v) { r.parameters[k] = v; }
inline void param(ExperimentResult& r, const std::string& k, const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + Config::format_number(v[i]);
    r.parameters[k] = s;
}

inline void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Self-avoiding walks

struct SawCountParams {
    int n = 12;
    Lattice lattice = Lattice::square;
};

/// Exact a_1..a_n; points are (n, a_n, 0).
inline ExperimentResult saw_count_experiment(const SawCountParams& p, const RngStream& rng, unsigned threads = 1) {
    const auto t0 = detail::Clock::now();
    auto r = detail::new_result("saw-count", rng);
    detail::param(r, "n", static_cast<long long>(p.n));
    detail::param(r, "lattice", std::string(to_string(p.lattice)));
    const auto t = enumerate_saws(p.n, p.lattice, true, threads);
    for (int k = 1; k <= t.max_n(); ++k) r.points.push_back({double(k), t.a(k).convert_to<double>(), 0.0});
    if (t.max_n() >= 2) {
        const auto b = connectivity_bounds(t);
        r.metrics["mu_upper"] = b.mu_upper;
        r.metrics["ratio_last"] = b.ratio_last;
        r.metrics["nonintersection_1"] = nonintersection_exact(1, t).convert_to<double>();
    }
    r.runtime_seconds = detail::seconds_since(t0);
    return r;
}

struct SawDiameterParams {
    int n = 16;
    int fit_from = 6;
    Lattice lattice = Lattice::square;
};

/// Mean Euclidean diameter of uniform n-step walks for every length, exact;
/// the fit runs over lengths fit_from..n.
inline ExperimentResult saw_diameter_experiment(const SawDiameterParams& p, const RngStream& rng, unsigned threads = 1) {
    const auto t0 = detail::Clock::now();
    auto r = detail::new_result("saw-diameter", rng);
    detail::param(r, "n", static_cast<long long>(p.n));
    detail::param(r, "fit_from", static_cast<long long>(p.fit_from));
    detail::param(r, "lattice", std::string(to_string(p.lattice)));
    detail::require(p.fit_from >= 1 && p.fit_from + 2 <= p.n, "saw-diameter: need 1 <= fit_from <= n - 2");
    const auto all = diameter_distributions(p.n, p.lattice, threads);
    std::vector<ScalePoint> fit_pts;
    for (const auto& d : all) {
        r.points.push_back({double(d.n), d.mean_diameter(), 0.0});
        if (d.n >= p.fit_from) fit_pts.push_back(r.points.back());
    }
    r.fit = fit_exponent(fit_pts);
    r.runtime_seconds = detail::seconds_since(t0);
    return r;
}

// ---------------------------------------------------------------------------
// Random walks

struct SrwNonintersectionParams {
    std::vector<double> lengths{64, 128, 256, 512, 1024, 2048, 4096};
    std::size_t trials = 100000;
};

inline ExperimentResult srw_nonintersection_experiment(const SrwNonintersectionParams& p, const RngStream& rng,
                                                       unsigned threads = 1) {
    const auto t0 = detail::Clock::now();
    auto r = detail::new_result("srw-nonintersection", rng);
    detail::param(r, "lengths", p.lengths);
    detail::param(r, "trials", static_cast<long long>(p.trials));
    for (std::size_t s = 0; s < p.lengths.size(); ++s) {
        const auto n = static_cast<std::size_t>(p.lengths[s]);
        const auto e = srw_nonintersection_mc(n, p.trials, rng.substream(s), threads);
        r.points.push_back({double(n), e.value, e.error});
    }
    r.fit = fit_exponent(r.points);
    r.runtime_seconds = detail::seconds_since(t0);
    return r;
}

/// Number of cut times of a lattice walk S_0..S_n: times 1 <= k <= n - 1 with
/// S[0..k] and S[k+1..n] disjoint. A site first visited at f and last at l
/// blocks exactly the times f <= k < l, so one pass with a difference array
/// suffices.
inline std::size_t cut_point_count(const PlanarPath& walk) {
    const std::size_t n = walk.points.empty() ? 0 : walk.points.size() - 1;
    if (n < 2) return 0;
    std::unordered_map<std::uint64_t, std::pair<std::size_t, std::size_t>> span;
    span.reserve(walk.points.size());
    for (std::size_t k = 0; k <= n; ++k) {
        const auto x = static_cast<std::int32_t>(std::lround(walk.points[k].real()));
        const auto y = static_cast<std::int32_t>(std::lround(walk.points[k].imag()));
        auto [it, fresh] = span.try_emplace(pack_site(x, y), k, k);
        if (!fresh) it->second.second = k;
    }
    std::vector<long> diff(n + 1, 0);
    for (const auto& [site, fl] : span) {
        if (fl.first == fl.second) continue;
        ++diff[fl.first];
        --diff[fl.second];
    }
    std::size_t cuts = 0;
    long cover = 0;
    for (std::size_t k = 0; k < n; ++k) {
        cover += diff[k];
        if (k >= 1 && cover == 0) ++cuts;
    }
    return cuts;
}

struct CutPointParams {
    std::vector<double> lengths{1024, 2048, 4096, 8192, 16384};
    std::size_t trials = 2000;
};

/// Mean number of cut times against n. Exploratory: the expected growth
/// n^{3/8} is a heuristic consequence of the non-intersection exponent.
inline ExperimentResult cut_point_experiment(const CutPointParams& p, const RngStream& rng, unsigned threads = 1) {
    const auto t0 = detail::Clock::now();
    auto r = detail::new_result("cut-points", rng);
    detail::param(r, "lengths", p.lengths);
    detail::param(r, "trials", static_cast<long long>(p.trials));
    detail::require(p.trials >= 2, "cut-points: trials must be >= 2");
    for (std::size_t s = 0; s < p.lengths.size(); ++s) {
        const auto n = static_cast<std::size_t>(p.lengths[s]);
        const RngStream base = rng.substream(s);
        const auto counts = parallel_map(p.trials, threads, [&](std::size_t k) {
            RngStream g = base.substream(k);
            return static_cast<double>(cut_point_count(simple_random_walk(n, g)));
        });
        const auto e = stats::mean(counts);
        r.points.push_back({double(n), e.value, e.error});
    }
    if (r.points.size() >= 3) r.fit = fit_exponent(r.points);
    r.runtime_seconds = detail::seconds_since(t0);
    return r;
}

// ---------------------------------------------------------------------------
// Brownian frontier

enum class FrontierSet { frontier, hull, segment };

inline const char* to_string(FrontierSet s) {
    switch (s) {
        case FrontierSet::frontier: return "frontier";
        case FrontierSet::hull: return "hull";
        case FrontierSet::segment: return "segment";
    }
    return "?";
}

struct FrontierParams {
    double spacing = 1.0 / 2048;
    std::size_t trials = 20;
    std::vector<double> scales{4, 8, 16, 32, 64, 128};
    FrontierSet set = FrontierSet::frontier;  // hull and segment are controls
};

namespace detail {

/// Cells of the filled hull lying along its outer contour: for every edge of
/// the traced boundary, the adjacent cell that belongs to the hull.
inline GridMask frontier_cells(const GridMask& filled) {
    GridMask out(filled.spec);
    const auto trace = outer_boundary(filled);
    const double h = filled.spec.spacing;
    for (const Complex& m : trace.path.points) {
        const double u = (m.real() - filled.spec.origin.real()) / h, v = (m.imag() - filled.spec.origin.imag()) / h;
        const long i = std::lround(std::floor(u)), j = std::lround(std::floor(v));
        const bool vertical_edge = std::abs(u - std::round(u)) < 0.25;
        const long ia = vertical_edge ? std::lround(u) - 1 : i, ja = vertical_edge ? j : std::lround(v) - 1;
        const long ib = vertical_edge ? std::lround(u) : i, jb = vertical_edge ? j : std::lround(v);
        if (filled.get(ia, ja)) out.set(ia, ja);
        if (filled.get(ib, jb)) out.set(ib, jb);
    }
    return out;
}

/// Square grid covering the points with `margin` spare cells on each side.
inline GridSpec grid_around(const std::vector<Complex>& pts, double h, int margin) {
    double x0 = pts.front().real(), x1 = x0, y0 = pts.front().imag(), y1 = y0;
    for (const auto& z : pts) {
        x0 = std::min(x0, z.real());
        x1 = std::max(x1, z.real());
        y0 = std::min(y0, z.imag());
        y1 = std::max(y1, z.imag());
    }
    const int side = static_cast<int>(std::ceil(std::max(x1 - x0, y1 - y0) / h)) + 2 * margin;
    GridSpec g{Complex(x0 - margin * h, y0 - margin * h), h, side, side};
    g.validate();
    return g;
}

}  // namespace detail

/// Box-counting dimension of the outer boundary of B[0, 1]. Each trial
/// rasterizes the path (dt = spacing^2) on a grid around it, fills the hull,
/// keeps the cells along the outer contour and fits log N(s) against log 1/s.
/// Points are the mean box counts per box size; the headline number is the
/// mean per-trial slope (metric "dimension").
inline ExperimentResult bm_frontier_dimension(const FrontierParams& p, const RngStream& rng, unsigned threads = 1) {
    const auto t0 = detail::Clock::now();
    auto r = detail::new_result("bm-frontier", rng);
    detail::param(r, "spacing", p.spacing);
    detail::param(r, "trials", static_cast<long long>(p.trials));
    detail::param(r, "scales", p.scales);
    detail::param(r, "set", std::string(to_string(p.set)));
    detail::require(p.spacing > 0.0 && p.spacing <= 0.1, "bm-frontier: spacing must lie in (0, 0.1]");
    detail::require(p.trials >= 2, "bm-frontier: trials must be >= 2");
    std::vector<int> scales;
    for (double s : p.scales) scales.push_back(static_cast<int>(s));
    struct Trial {
        double slope = 0.0;
        std::vector<double> boxes;
    };
    const auto trials = parallel_map(p.trials, threads, [&](std::size_t k) {
        RngStream g = rng.substream(k);
        PlanarPath path;
        if (p.set == FrontierSet::segment) {
            const double angle = 2.0 * std::numbers::pi * g.uniform();
            path.points = {Complex(0, 0), std::polar(1.0, angle)};
        } else {
            path = brownian_path(1.0, p.spacing * p.spacing, g);
        }
        const auto spec = detail::grid_around(path.points, p.spacing, 2);
        GridMask set = rasterize_path(path, spec);
        if (p.set != FrontierSet::segment) {
            set = fill_hull(set);
            if (p.set == FrontierSet::frontier) set = detail::frontier_cells(set);
        }
        Trial t;
        t.slope = box_counting_dimension(set, scales).slope;
        for (int s : scales) t.boxes.push_back(static_cast<double>(occupied_boxes(set, s)));
        return t;
    });
    std::vector<double> slopes;
    for (const auto& t : trials) slopes.push_back(t.slope);
    for (std::size_t i = 0; i < scales.size(); ++i) {
        std::vector<double> b;
        for (const auto& t : trials) b.push_back(t.boxes[i]);
        const auto e = stats::mean(b);
        r.points.push_back({scales[i] * p.spacing, e.value, e.error});
    }
    const auto d = stats::mean(slopes);
    r.metrics["dimension"] = d.value;
    r.metrics["dimension_stderr"] = d.error;
    if (r.points.size() >= 3) r.fit = fit_exponent(r.points);
    r.runtime_seconds = detail::seconds_since(t0);
    return r;
}

// ---------------------------------------------------------------------------
// Disconnection

struct DisconnectionParams {
    std::vector<double> lengths{1024, 2048, 4096, 8192, 16384, 32768, 65536};
    std::size_t trials = 4000;
    int distance = 1;  // the marked site is (distance, 0)
};

/// Whether the site (d, 0) lies in the unbounded complementary component of
/// the union of the walks, viewed as polygonal curves. Faces of Z^2 are
/// joined across unit edges that no walk traverses; the flood fill starts
/// from the four faces around the site and succeeds once it leaves the
/// bounding box of the walks. A site on a walk counts as disconnected.
inline bool site_connected_to_infinity(const std::vector<const PlanarPath*>& walks, int d) {
    int x0 = d, x1 = d, y0 = 0, y1 = 0;
    for (const auto* w : walks)
        for (const auto& z : w->points) {
            x0 = std::min(x0, static_cast<int>(std::lround(z.real())));
            x1 = std::max(x1, static_cast<int>(std::lround(z.real())));
            y0 = std::min(y0, static_cast<int>(std::lround(z.imag())));
            y1 = std::max(y1, static_cast<int>(std::lround(z.imag())));
        }
    // Faces (x, y) = [x, x+1] x [y, y+1] with x0-1 <= x <= x1, y0-1 <= y <= y1.
    const int W = x1 - x0 + 3, H = y1 - y0 + 3;
    auto at = [&](int x, int y) { return static_cast<std::size_t>(y - y0 + 1) * static_cast<std::size_t>(W) + static_cast<std::size_t>(x - x0 + 1); };
    std::vector<std::uint8_t> hedge(static_cast<std::size_t>(W) * H, 0), vedge(hedge.size(), 0), site(hedge.size(), 0);
    for (const auto* w : walks) {
        for (std::size_t k = 0; k < w->points.size(); ++k) {
            const int x = static_cast<int>(std::lround(w->points[k].real())), y = static_cast<int>(std::lround(w->points[k].imag()));
            site[at(x, y)] = 1;
            if (k == 0) continue;
            const int px = static_cast<int>(std::lround(w->points[k - 1].real())), py = static_cast<int>(std::lround(w->points[k - 1].imag()));
            if (py == y) hedge[at(std::min(px, x), y)] = 1;  // edge (x, y)-(x+1, y)
            else vedge[at(x, std::min(py, y))] = 1;           // edge (x, y)-(x, y+1)
        }
    }
    if (site[at(d, 0)]) return false;
    std::vector<std::uint8_t> seen(hedge.size(), 0);
    std::vector<std::pair<int, int>> stack;
    auto push = [&](int x, int y) {
        if (!seen[at(x, y)]) {
            seen[at(x, y)] = 1;
            stack.emplace_back(x, y);
        }
    };
    push(d, 0);
    push(d - 1, 0);
    push(d, -1);
    push(d - 1, -1);
    while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        if (x < x0 || x >= x1 || y < y0 || y >= y1) return true;  // a face touching the box edge is outside every loop
        if (!vedge[at(x + 1, y)]) push(x + 1, y);
        if (!vedge[at(x, y)]) push(x - 1, y);
        if (!hedge[at(x, y + 1)]) push(x, y + 1);
        if (!hedge[at(x, y)]) push(x, y - 1);
    }
    return false;
}

/// P[the union of two independent t-step walks from 0 does not disconnect
/// (distance, 0) from infinity] for each t.
inline ExperimentResult bm_disconnection_mc(const DisconnectionParams& p, const RngStream& rng, unsigned threads = 1) {
    const auto t0 = detail::Clock::now();
    auto r = detail::new_result("bm-disconnection", rng);
    detail::param(r, "lengths", p.lengths);
    detail::param(r, "trials", static_cast<long long>(p.trials));
    detail::param(r, "distance", static_cast<long long>(p.distance));
    detail::require(p.distance >= 1, "bm-disconnection: distance must be >= 1");
    detail::require(p.trials >= 1, "bm-disconnection: trials must be >= 1");
    for (std::size_t s = 0; s < p.lengths.size(); ++s) {
        const auto n = static_cast<std::size_t>(p.lengths[s]);
        detail::require(n >= 1, "bm-disconnection: lengths must be >= 1");
        const RngStream base = rng.substream(s);
        const auto hits = parallel_count(p.trials, threads, [&](std::size_t k) {
            RngStream g = base.substream(k);
            const auto a = simple_random_walk(n, g), b = simple_random_walk(n, g);
            return site_connected_to_infinity({&a, &b}, p.distance);
        });
        const auto e = stats::binomial(hits, p.trials);
        r.points.push_back({double(n), e.value, e.error});
    }
    if (r.points.size() >= 3) r.fit = fit_exponent(r.points);
    r.runtime_seconds = detail::seconds_since(t0);
    return r;
}

// ---------------------------------------------------------------------------
// Percolation

struct PercCrossingParams {
    double L = 2.0;
    double l = 1.0;
    int n = 128;
    std::size_t trials = 100000;
    double p = 0.5;
};

/// Left-right crossing of an L x l rectangle at mesh 1/n against Cardy's
/// formula.
inline ExperimentResult perc_crossing_experiment(const PercCrossingParams& q, const RngStream& rng, unsigned threads = 1) {
    const auto t0 = detail::Clock::now();
    auto r = detail::new_result("perc-crossing", rng);
    detail::param(r, "L", q.L);
    detail::param(r, "l", q.l);
    detail::param(r, "n", static_cast<long long>(q.n));
    detail::param(r, "trials", static_cast<long long>(q.trials));
    detail::param(r, "p", q.p);
    const special::RectangleShape shape{q.L, q.l};
    const auto e = crossing_probability_mc(shape, q.n, q.p, q.trials, rng, threads);
    r.points.push_back({double(q.n), e.value, e.error});
    const double F = special::rectangle_crossing_probability(shape);
    r.metrics["cardy"] = F;
    r.metrics["deviation"] = e.value - F;
    r.metrics["sigma"] = e.error;
    r.runtime_seconds = detail::seconds_since(t0);
    return r;
}

struct PercSelfDualParams {
    int n = 64;
    std::size_t trials = 100000;
};

inline ExperimentResult perc_self_dual_experiment(const PercSelfDualParams& q, const RngStream& rng, unsigned threads = 1) {
    const auto t0 = detail::Clock::now();
    auto r = detail::new_result("perc-self-dual", rng);
    detail::param(r, "n", static_cast<long long>(q.n));
    detail::param(r, "trials", static_cast<long long>(q.trials));
    const auto e = self_dual_crossing_mc(q.n, 0.5, q.trials, rng, threads);
    r.points.push_back({double(q.n), e.value, e.error});
    r.metrics["z"] = e.error > 0 ? (e.value - 0.5) / e.error : 0.0;
    r.runtime_seconds = detail::seconds_since(t0);
    return r;
}

struct PercBoundaryParams {
    std::vector<double> sizes{64, 128, 256, 512};
    std::size_t trials = 200;
    double p = 0.5;
};

/// Mean outer perimeter of the largest cluster in an n x n box against n.
inline ExperimentResult perc_boundary_experiment(const PercBoundaryParams& q, const RngStream& rng, unsigned threads = 1) {
    const auto t0 = detail::Clock::now();
    auto r = detail::new_result("perc-boundary", rng);
    detail::param(r, "sizes", q.sizes);
    detail::param(r, "trials", static_cast<long long>(q.trials));
    detail::param(r, "p", q.p);
    detail::require(q.trials >= 2, "perc-boundary: trials must be >= 2");
    for (std::size_t s = 0; s < q.sizes.size(); ++s) {
        const int n = static_cast<int>(q.sizes[s]);
        detail::require(n >= 2, "perc-boundary: sizes must be >= 2");
        const RngStream base = rng.substream(s);
        const auto per = parallel_map(q.trials, threads, [&](std::size_t k) {
            RngStream g = base.substream(k);
            return static_cast<double>(largest_cluster_boundary(sample_bonds(n, n, q.p, g)).perimeter);
        });
        const auto e = stats::mean(per);
        r.points.push_back({double(n), e.value, e.error});
    }
    if (r.points.size() >= 3) r.fit = fit_exponent(r.points);
    r.runtime_seconds = detail::seconds_since(t0);
    return r;
}

struct PercTriangleParams {
    int side = 256;
    std::size_t trials = 10000;
    double p = 0.5;
};

/// Endpoint of the lowest crossing in the triangle against the uniform law.
inline ExperimentResult perc_triangle_experiment(const PercTriangleParams& q, const RngStream& rng, unsigned threads = 1) {
    const auto t0 = detail::Clock::now();
    auto r = detail::new_result("perc-triangle", rng);
    detail::param(r, "side", static_cast<long long>(q.side));
    detail::param(r, "trials", static_cast<long long>(q.trials));
    detail::param(r, "p", q.p);
    const auto e = triangle_endpoint_mc(q.side, q.trials, rng, q.p, threads);
    const auto m = stats::mean(e.positions);
    r.points.push_back({double(q.side), m.value, m.error});
    r.metrics["ks"] = e.ks_uniform();
    r.metrics["ks_pvalue"] = stats::ks_pvalue(r.metrics["ks"], static_cast<double>(e.positions.size()));
    r.metrics["unconnected"] = static_cast<double>(e.unconnected);
    r.runtime_seconds = detail::seconds_since(t0);
    return r;
}

// ---------------------------------------------------------------------------
// SLE real-point races

struct SleCardyParams {
    double kappa = 6.0;
    std::size_t trials = 10000;
    double eps = 0.01;
};

/// P(T_{-1} < T_1) and P(T_{-2} < T_1); for kappa = 6 the targets are 1/2
/// and F(1/3).
inline ExperimentResult sle_cardy_experiment(const SleCardyParams& q, const RngStream& rng, unsigned threads = 1) {
    const auto t0 = detail::Clock::now();
    auto r = detail::new_result("sle-cardy", rng);
    detail::param(r, "kappa", q.kappa);
    detail::param(r, "trials", static_cast<long long>(q.trials));
    detail::param(r, "eps", q.eps);
    const double lefts[2] = {1.0, 2.0};
    for (std::size_t s = 0; s < 2; ++s) {
        const RngStream base = rng.substream(s);
        const auto hits = parallel_count(q.trials, threads, [&](std::size_t k) {
            RngStream g = base.substream(k);
            return sle_swallow_race(q.kappa, lefts[s], 1.0, q.eps, g).left_first;
        });
        const auto e = stats::binomial(hits, q.trials);
        r.points.push_back({lefts[s], e.value, e.error});
    }
    r.metrics["target_1"] = 0.5;
    r.metrics["target_2"] = special::cardy_F(1.0 / 3.0);
    r.runtime_seconds = detail::seconds_since(t0);
    return r;
}

// ---------------------------------------------------------------------------
// Harmonic measure identity

struct HarmonicParams {
    std::vector<double> epsilons{0.125, 0.0625, 0.03125, 0.015625};
    std::size_t trials = 2000;  // hulls K(B)
    std::size_t walkers = 20;   // walkers per hull, per method and epsilon
    double spacing = 1.0 / 512;
};

namespace detail {

/// Point where the segment a -> b (|a| < r <= |b|) crosses the circle |z| = r.
inline Complex circle_crossing(Complex a, Complex b, double r) {
    const Complex d = b - a;
    const double A = std::norm(d), B = 2.0 * (a.real() * d.real() + a.imag() * d.imag()), C = std::norm(a) - r * r;
    const double s = (-B + std::sqrt(B * B - 4.0 * A * C)) / (2.0 * A);
    return a + std::clamp(s, 0.0, 1.0) * d;
}

/// Brownian motion from `start` with step dt until it leaves the unit disc;
/// the final point is the exact crossing of the last step.
inline PlanarPath bm_to_unit_circle(Complex start, double dt, RngStream& g) {
    PlanarPath p;
    p.time_step = dt;
    p.points.push_back(start);
    const double s = std::sqrt(dt);
    Complex z = start;
    while (std::abs(z) < 1.0) {
        const Complex next = z + Complex(s * g.normal(), s * g.normal());
        p.points.push_back(std::abs(next) >= 1.0 ? circle_crossing(z, next, 1.0) : next);
        z = next;
    }
    return p;
}

/// Whether a Brownian motion from `start` leaves the unit disc before its
/// polygonal path meets a cell of `obstacle`.
inline bool bm_escapes(const GridMask& obstacle, Complex start, double dt, RngStream& g) {
    const GridSpec& sp = obstacle.spec;
    const double h = sp.spacing, s = std::sqrt(dt);
    bool hit = false;
    auto visit = [&](int i, int j) { hit = hit || obstacle.get(i, j); };
    auto u = [&](Complex z) { return std::pair{(z.real() - sp.origin.real()) / h, (z.imag() - sp.origin.imag()) / h}; };
    Complex z = start;
    for (;;) {
        Complex next = z + Complex(s * g.normal(), s * g.normal());
        const bool out = std::abs(next) >= 1.0;
        if (out) next = circle_crossing(z, next, 1.0);
        const auto [ax, ay] = u(z);
        const auto [bx, by] = u(next);
        detail::traverse_segment(ax, ay, bx, by, sp.cols, sp.rows, visit);
        if (hit) return false;
        if (out) return true;
        z = next;
    }
}

}  // namespace detail

/// P[B and B' disjoint] for B from 0 and B' from epsilon, both stopped on the
/// unit circle, estimated two ways on the same hulls K(B): (i) Brownian
/// motions B' run against the rasterized hull, (ii) lattice walks giving the
/// harmonic measure of the circle from epsilon in the complement of K(B).
/// Points carry method (i); per-epsilon metrics give both methods and the
/// paired z-score of their difference.
inline ExperimentResult harmonic_identity_check(const HarmonicParams& q, const RngStream& rng, unsigned threads = 1) {
    const auto t0 = detail::Clock::now();
    auto r = detail::new_result("harmonic-identity", rng);
    detail::param(r, "epsilons", q.epsilons);
    detail::param(r, "trials", static_cast<long long>(q.trials));
    detail::param(r, "walkers", static_cast<long long>(q.walkers));
    detail::param(r, "spacing", q.spacing);
    detail::require(q.trials >= 2 && q.walkers >= 1, "harmonic-identity: need trials >= 2, walkers >= 1");
    detail::require(q.spacing > 0.0 && q.spacing <= 0.05, "harmonic-identity: spacing must lie in (0, 0.05]");
    for (double e : q.epsilons) detail::require(e > 0.0 && e < 0.25, "harmonic-identity: epsilons must lie in (0, 1/4)");
    const int cells = static_cast<int>(std::lround(2.0 / q.spacing)) + 8;
    const GridSpec grid = centered_grid(0.0, cells * q.spacing, cells);
    const GridMask domain = disc_mask(grid, 0.0, 1.0);
    GridMask target(grid);
    for (std::size_t k = 0; k < target.bits.size(); ++k) target.bits[k] = domain.bits[k] ? 0 : 1;
    const double dt = q.spacing * q.spacing;
    const std::size_t E = q.epsilons.size();

    const auto per_hull = parallel_map(q.trials, threads, [&](std::size_t k) {
        const RngStream g = rng.substream(k);
        RngStream gb = g.substream(0);
        const GridMask hull = fill_hull(rasterize_path(detail::bm_to_unit_circle(0.0, dt, gb), grid));
        std::vector<std::pair<double, double>> out(E, {0.0, 0.0});
        for (std::size_t e = 0; e < E; ++e) {
            const Complex start(q.epsilons[e], 0.0);
            const auto c = grid.cell_of(start);
            if (hull.get(c->first, c->second)) continue;
            RngStream gi = g.substream(1 + e);
            std::size_t esc = 0;
            for (std::size_t m = 0; m < q.walkers; ++m) esc += detail::bm_escapes(hull, start, dt, gi);
            out[e].first = double(esc) / double(q.walkers);
            out[e].second = harmonic_measure_estimate(domain, hull, target, start, q.walkers, g.substream(1 + E + e)).value;
        }
        return out;
    });

    std::vector<ScalePoint> lattice_pts;
    for (std::size_t e = 0; e < E; ++e) {
        std::vector<double> a, b, d;
        for (const auto& h : per_hull) {
            a.push_back(h[e].first);
            b.push_back(h[e].second);
            d.push_back(h[e].first - h[e].second);
        }
        const auto ea = stats::mean(a), eb = stats::mean(b), ed = stats::mean(d);
        r.points.push_back({q.epsilons[e], ea.value, ea.error});
        lattice_pts.push_back({q.epsilons[e], eb.value, eb.error});
        const std::string s = std::to_string(e);
        r.metrics["direct_" + s] = ea.value;
        r.metrics["lattice_" + s] = eb.value;
        r.metrics["lattice_stderr_" + s] = eb.error;
        r.metrics["z_" + s] = ed.error > 0 ? ed.value / ed.error : 0.0;
    }
    auto positive = [](const std::vector<ScalePoint>& v) {
        return std::all_of(v.begin(), v.end(), [](const ScalePoint& p) { return p.estimate > 0.0; });
    };
    if (E >= 3 && positive(r.points)) r.fit = fit_exponent(r.points);
    if (E >= 3 && positive(lattice_pts)) r.metrics["slope_lattice"] = fit_exponent(lattice_pts).slope;
    r.runtime_seconds = detail::seconds_since(t0);
    return r;
}

// ---------------------------------------------------------------------------
// SLE_6 against reflected Brownian motion

/// One-row mask whose cell centers sample the segment [left, right] + i height.
inline GridMask segment_obstacle(double left, double right, double height, double spacing) {
    if (!(right > left) || !(height > 0.0) || !(spacing > 0.0)) throw DomainError("segment_obstacle: bad segment");
    const int cols = static_cast<int>(std::lround((right - left) / spacing)) + 1;
    GridMask m(GridSpec{Complex(left - spacing / 2, height - spacing / 2), spacing, cols, 1});
    std::fill(m.bits.begin(), m.bits.end(), 1);
    return m;
}

struct ContactOptions {
    double kappa = 6.0;
    double dt = 2.5e-4;
    double horizon = 16.0;
    double chunk = 0.25;  // time between checks for a first contact
    double collide_scale = 2.0;
};

/// Real part of the first point of J (cell centers of the mask) swallowed by
/// chordal SLE; ties within one step are averaged. nullopt at the horizon.
inline std::optional<double> sle_first_contact(const GridMask& J, const ContactOptions& o, RngStream& g) {
    std::vector<Complex> probes;
    for (int j = 0; j < J.spec.rows; ++j)
        for (int i = 0; i < J.spec.cols; ++i)
            if (J.get(i, j)) probes.push_back(J.spec.cell_center(i, j));
    if (probes.empty()) throw DomainError("sle_first_contact: empty obstacle");
    for (const auto& z : probes)
        if (!(z.imag() > 0.0)) throw DomainError("sle_first_contact: obstacle must lie in the open half-plane");
    const auto d = sle_driving(o.kappa, o.dt, o.horizon, DrivingKind::chordal_real, g);
    const ChordalFlow flow(d, {o.collide_scale, ChordalFlow::Options{}.block_c});
    const std::size_t n = flow.intervals();
    const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(o.chunk / o.dt)));
    std::vector<Complex> w = probes, disp(probes.size(), 0.0);
    for (std::size_t k0 = 0; k0 < n; k0 += m) {
        const std::size_t k1 = std::min(n, k0 + m);
        std::size_t best = std::numeric_limits<std::size_t>::max();
        double sum = 0.0;
        int ties = 0;
        for (std::size_t p = 0; p < probes.size(); ++p) {
            const auto hit = flow.run(w[p], disp[p], k0, k1);
            if (!hit) continue;
            if (*hit < best) {
                best = *hit;
                sum = 0.0;
                ties = 0;
            }
            if (*hit == best) {
                sum += probes[p].real();
                ++ties;
            }
        }
        if (ties) return sum / ties;
    }
    return std::nullopt;
}

/// Real part of the center of the first cell of J met by reflected Brownian
/// motion from 0 (steps sampled every spacing/4). nullopt at the horizon.
inline std::optional<double> rbm_first_contact(const GridMask& J, const ReflectionField& field, double dt, double horizon,
                                               RngStream& g) {
    field.validate();
    const double s = std::sqrt(dt), sub = J.spec.spacing / 4;
    Complex z = 0.0;
    for (double t = 0.0; t < horizon; t += dt) {
        Complex next = z + Complex(s * g.normal(), s * g.normal());
        reflect(next, field);
        const int parts = std::max(1, static_cast<int>(std::ceil(std::abs(next - z) / sub)));
        for (int k = 1; k <= parts; ++k) {
            const Complex x = z + (next - z) * (double(k) / parts);
            if (const auto c = J.spec.cell_of(x); c && J.get(c->first, c->second))
                return J.spec.cell_center(c->first, c->second).real();
        }
        z = next;
    }
    return std::nullopt;
}

struct SleRbmParams {
    double j_left = -8.0, j_right = 8.0, j_height = 1.0, j_spacing = 0.02;
    std::size_t trials = 2000;  // per side
    ContactOptions sle{};
    double rbm_dt = 1e-4;
    bool control = false;  // run SLE_6 on both sides
};

/// First-contact coordinate with J for chordal SLE_6 and for the reflected
/// Brownian motion with the pi/3, 2 pi/3 field, compared by two-sample KS.
inline ExperimentResult sle_vs_reflected_bm(const GridMask& J, const SleRbmParams& q, const RngStream& rng,
                                            unsigned threads = 1) {
    const auto t0 = detail::Clock::now();
    auto r = detail::new_result("sle-vs-rbm", rng);
    detail::param(r, "j_left", q.j_left);
    detail::param(r, "j_right", q.j_right);
    detail::param(r, "j_height", q.j_height);
    detail::param(r, "j_spacing", q.j_spacing);
    detail::param(r, "trials", static_cast<long long>(q.trials));
    detail::param(r, "kappa", q.sle.kappa);
    detail::param(r, "dt", q.sle.dt);
    detail::param(r, "horizon", q.sle.horizon);
    detail::param(r, "chunk", q.sle.chunk);
    detail::param(r, "collide_scale", q.sle.collide_scale);
    detail::param(r, "rbm_dt", q.rbm_dt);
    detail::param(r, "control", static_cast<long long>(q.control));
    detail::require(q.trials >= 2, "sle-vs-rbm: trials must be >= 2");
    const RngStream sa = rng.substream(0), sb = rng.substream(1);
    const auto a = parallel_map(q.trials, threads, [&](std::size_t k) {
        RngStream g = sa.substream(k);
        return sle_first_contact(J, q.sle, g);
    });
    const auto b = parallel_map(q.trials, threads, [&](std::size_t k) {
        RngStream g = sb.substream(k);
        return q.control ? sle_first_contact(J, q.sle, g) : rbm_first_contact(J, ReflectionField{}, q.rbm_dt, q.sle.horizon, g);
    });
    std::vector<double> xa, xb;
    for (const auto& v : a)
        if (v) xa.push_back(*v);
    for (const auto& v : b)
        if (v) xb.push_back(*v);
    r.metrics["stopped_sle"] = double(xa.size());
    r.metrics["stopped_other"] = double(xb.size());
    if (xa.empty() || xb.empty())
        throw NotStoppedError("sle-vs-rbm: horizon exhausted before contact (" + std::to_string(xa.size()) + " and " +
                                  std::to_string(xb.size()) + " trials stopped)",
                              double(std::max(xa.size(), xb.size())));
    const auto ma = stats::mean(xa), mb = stats::mean(xb);
    r.points.push_back({1.0, ma.value, ma.error});
    r.points.push_back({2.0, mb.value, mb.error});
    const double ks = stats::ks_distance_2(xa, xb);
    const double neff = double(xa.size()) * double(xb.size()) / double(xa.size() + xb.size());
    r.metrics["ks"] = ks;
    r.metrics["ks_pvalue"] = stats::ks_pvalue(ks, neff);
    r.runtime_seconds = detail::seconds_since(t0);
    return r;
}

// ---------------------------------------------------------------------------
// Reflected Brownian motion and Cardy's formula

struct RbmCardyParams {
    std::size_t trials = 10000;
    double dt = 1e-4;
    double M = 1.0;
    bool vertical = false;  // symmetric reflection, the negative control
    double max_time = 1e30;  // effectively unbounded; escape ends long runs
    double escape = 1e8;
};

/// Reflected Brownian motion from 0 stopped on [M, inf), mapped to the
/// equilateral triangle; the stopping point's distance from B along [B, C]
/// is compared with the uniform law. Runs that never stop count as hitting
/// at infinity, i.e. at B.
inline ExperimentResult reflected_bm_cardy(const RbmCardyParams& q, const RngStream& rng, unsigned threads = 1) {
    const auto t0 = detail::Clock::now();
    auto r = detail::new_result("rbm-cardy", rng);
    detail::param(r, "trials", static_cast<long long>(q.trials));
    detail::param(r, "dt", q.dt);
    detail::param(r, "M", q.M);
    detail::param(r, "vertical", static_cast<long long>(q.vertical));
    detail::param(r, "max_time", q.max_time);
    detail::param(r, "escape", q.escape);
    detail::require(q.trials >= 2 && q.M > 0.0, "rbm-cardy: need trials >= 2 and M > 0");
    const ReflectionField field = q.vertical ? ReflectionField::vertical() : ReflectionField{};
    const auto hits = parallel_map(q.trials, threads, [&](std::size_t k) {
        RngStream g = rng.substream(k);
        return reflected_hit_halfline(0.0, field, q.M, q.dt, q.max_time, q.escape, g);
    });
    const Complex B = std::polar(1.0, 2.0 * std::numbers::pi / 3.0), C = std::polar(1.0, std::numbers::pi / 3.0);
    std::vector<double> pos;
    double off_segment = 0.0, mismatch = 0.0;
    std::size_t unstopped = 0;
    for (const auto& h : hits) {
        if (!h.stopped) {
            ++unstopped;
            pos.push_back(0.0);
            continue;
        }
        const double x = std::max(1.0, h.x / q.M);
        const Complex w = special::triangle_map(x);
        const double along = std::clamp((w - B).real() / (C - B).real(), 0.0, 1.0);
        off_segment = std::max(off_segment, std::abs(w - (B + along * (C - B))));
        const double d = std::abs(w - B);
        mismatch = std::max(mismatch, std::abs(d - special::triangle_side_position(x)));
        pos.push_back(d);
    }
    const auto m = stats::mean(pos);
    r.points.push_back({q.M, m.value, m.error});
    const double ks = stats::ks_distance(pos, [](double v) { return std::clamp(v, 0.0, 1.0); });
    r.metrics["ks"] = ks;
    r.metrics["ks_pvalue"] = stats::ks_pvalue(ks, double(pos.size()));
    r.metrics["max_off_segment"] = off_segment;
    r.metrics["max_position_mismatch"] = mismatch;
    r.metrics["unstopped"] = double(unstopped);
    r.runtime_seconds = detail::seconds_since(t0);
    return r;
}

// ---------------------------------------------------------------------------
// Exploration process against SLE_6

struct ExplorationSleParams {
    int height = 64;        // N: contact line at height N lattice units
    int half_width = 8;     // slab half-width in units of N
    std::size_t trials = 2000;
    ContactOptions sle{};
    double j_spacing = 0.02;
};

/// Exploratory comparison: first crossing of height N by the exploration
/// path (rescaled by N) against the first contact of SLE_6 with the segment
/// [-half_width, half_width] + i. No acceptance threshold.
inline ExperimentResult exploration_vs_sle(const ExplorationSleParams& q, const RngStream& rng, unsigned threads = 1) {
    const auto t0 = detail::Clock::now();
    auto r = detail::new_result("exploration-vs-sle", rng);
    detail::param(r, "height", static_cast<long long>(q.height));
    detail::param(r, "half_width", static_cast<long long>(q.half_width));
    detail::param(r, "trials", static_cast<long long>(q.trials));
    detail::param(r, "dt", q.sle.dt);
    detail::param(r, "horizon", q.sle.horizon);
    detail::param(r, "j_spacing", q.j_spacing);
    detail::require(q.height >= 2 && q.half_width >= 1 && q.trials >= 2, "exploration-vs-sle: bad parameters");
    const int N = q.height, width = 2 * q.half_width * N + 1;
    const RngStream sa = rng.substream(0), sb = rng.substream(1);
    const auto a = parallel_map(q.trials, threads, [&](std::size_t k) -> std::optional<double> {
        RngStream g = sa.substream(k);
        const auto path = sample_exploration(width, N + 2, 0.5, std::size_t{1} << 26, g);
        for (auto [X, Y] : path.vertices)
            if (Y > 4 * N) return double(X) / (4.0 * N);
        return std::nullopt;
    });
    const GridMask J = segment_obstacle(-q.half_width, q.half_width, 1.0, q.j_spacing);
    const auto b = parallel_map(q.trials, threads, [&](std::size_t k) {
        RngStream g = sb.substream(k);
        return sle_first_contact(J, q.sle, g);
    });
    std::vector<double> xa, xb;
    for (const auto& v : a)
        if (v) xa.push_back(*v);
    for (const auto& v : b)
        if (v) xb.push_back(*v);
    r.metrics["stopped_exploration"] = double(xa.size());
    r.metrics["stopped_sle"] = double(xb.size());
    if (xa.empty() || xb.empty()) throw NotStoppedError("exploration-vs-sle: no trial reached the contact line", 0.0);
    const auto ma = stats::mean(xa), mb = stats::mean(xb);
    r.points.push_back({double(N), ma.value, ma.error});
    r.points.push_back({double(N), mb.value, mb.error});
    const double ks = stats::ks_distance_2(xa, xb);
    r.metrics["ks"] = ks;
    r.metrics["ks_pvalue"] = stats::ks_pvalue(ks, double(xa.size()) * double(xb.size()) / double(xa.size() + xb.size()));
    r.runtime_seconds = detail::seconds_since(t0);
    return r;
}

// ---------------------------------------------------------------------------
// Config dispatch

namespace detail {

inline Lattice lattice_key(Config& c) {
    const auto s = c.get_string("lattice", std::string("square"));
    if (s == "square") return Lattice::square;
    if (s == "triangular") return Lattice::triangular;
    throw ConfigError("lattice", "config: key 'lattice' must be square or triangular, got '" + s + "'");
}

inline std::size_t count_key(Config& c, const std::string& k, long long fallback) {
    return static_cast<std::size_t>(c.get_positive(k, fallback));
}

inline bool flag_key(Config& c, const std::string& k) {
    const auto v = c.get_string(k, "false");
    if (v == "1" || v == "true") return true;
    if (v == "0" || v == "false") return false;
    throw ConfigError(k, "config: key '" + k + "' must be true or false");
}

inline ContactOptions contact_keys(Config& c) {
    ContactOptions o;
    o.kappa = c.get_double("kappa", o.kappa);
    o.dt = c.get_double("dt", o.dt);
    o.horizon = c.get_double("horizon", o.horizon);
    o.chunk = c.get_double("chunk", o.chunk);
    o.collide_scale = c.get_double("collide_scale", o.collide_scale);
    return o;
}

using Runner = std::function<ExperimentResult(Config&, const RngStream&, unsigned)>;

inline const std::map<std::string, Runner>& runners() {
    static const std::map<std::string, Runner> table{
        {"saw-count",
         [](Config& c, const RngStream& g, unsigned th) {
             SawCountParams p;
             p.n = static_cast<int>(c.get_positive("n", p.n));
             p.lattice = lattice_key(c);
             c.reject_unused();
             return saw_count_experiment(p, g, th);
         }},
        {"saw-diameter",
         [](Config& c, const RngStream& g, unsigned th) {
             SawDiameterParams p;
             p.n = static_cast<int>(c.get_positive("n", p.n));
             p.fit_from = static_cast<int>(c.get_positive("fit_from", p.fit_from));
             p.lattice = lattice_key(c);
             c.reject_unused();
             return saw_diameter_experiment(p, g, th);
         }},
        {"srw-nonintersection",
         [](Config& c, const RngStream& g, unsigned th) {
             SrwNonintersectionParams p;
             p.lengths = c.get_list("lengths", p.lengths);
             p.trials = count_key(c, "trials", static_cast<long long>(p.trials));
             c.reject_unused();
             return srw_nonintersection_experiment(p, g, th);
         }},
        {"cut-points",
         [](Config& c, const RngStream& g, unsigned th) {
             CutPointParams p;
             p.lengths = c.get_list("lengths", p.lengths);
             p.trials = count_key(c, "trials", static_cast<long long>(p.trials));
             c.reject_unused();
             return cut_point_experiment(p, g, th);
         }},
        {"bm-frontier",
         [](Config& c, const RngStream& g, unsigned th) {
             FrontierParams p;
             p.spacing = c.get_double("spacing", p.spacing);
             p.trials = count_key(c, "trials", static_cast<long long>(p.trials));
             p.scales = c.get_list("scales", p.scales);
             const auto s = c.get_string("set", std::string("frontier"));
             if (s == "frontier") p.set = FrontierSet::frontier;
             else if (s == "hull") p.set = FrontierSet::hull;
             else if (s == "segment") p.set = FrontierSet::segment;
             else throw ConfigError("set", "config: key 'set' must be frontier, hull or segment");
             c.reject_unused();
             return bm_frontier_dimension(p, g, th);
         }},
        {"bm-disconnection",
         [](Config& c, const RngStream& g, unsigned th) {
             DisconnectionParams p;
             p.lengths = c.get_list("lengths", p.lengths);
             p.trials = count_key(c, "trials", static_cast<long long>(p.trials));
             p.distance = static_cast<int>(c.get_positive("distance", p.distance));
             c.reject_unused();
             return bm_disconnection_mc(p, g, th);
         }},
        {"harmonic-identity",
         [](Config& c, const RngStream& g, unsigned th) {
             HarmonicParams p;
             p.epsilons = c.get_list("epsilons", p.epsilons);
             p.trials = count_key(c, "trials", static_cast<long long>(p.trials));
             p.walkers = count_key(c, "walkers", static_cast<long long>(p.walkers));
             p.spacing = c.get_double("spacing", p.spacing);
             c.reject_unused();
             return harmonic_identity_check(p, g, th);
         }},
        {"sle-vs-rbm",
         [](Config& c, const RngStream& g, unsigned th) {
             SleRbmParams p;
             p.j_left = c.get_double("j_left", p.j_left);
             p.j_right = c.get_double("j_right", p.j_right);
             p.j_height = c.get_double("j_height", p.j_height);
             p.j_spacing = c.get_double("j_spacing", p.j_spacing);
             p.trials = count_key(c, "trials", static_cast<long long>(p.trials));
             p.sle = contact_keys(c);
             p.rbm_dt = c.get_double("rbm_dt", p.rbm_dt);
             p.control = flag_key(c, "control");
             c.reject_unused();
             return sle_vs_reflected_bm(segment_obstacle(p.j_left, p.j_right, p.j_height, p.j_spacing), p, g, th);
         }},
        {"rbm-cardy",
         [](Config& c, const RngStream& g, unsigned th) {
             RbmCardyParams p;
             p.trials = count_key(c, "trials", static_cast<long long>(p.trials));
             p.dt = c.get_double("dt", p.dt);
             p.M = c.get_double("M", p.M);
             p.vertical = flag_key(c, "vertical");
             p.max_time = c.get_double("max_time", p.max_time);
             p.escape = c.get_double("escape", p.escape);
             c.reject_unused();
             return reflected_bm_cardy(p, g, th);
         }},
        {"sle-cardy",
         [](Config& c, const RngStream& g, unsigned th) {
             SleCardyParams p;
             p.kappa = c.get_double("kappa", p.kappa);
             p.trials = count_key(c, "trials", static_cast<long long>(p.trials));
             p.eps = c.get_double("eps", p.eps);
             c.reject_unused();
             return sle_cardy_experiment(p, g, th);
         }},
        {"perc-crossing",
         [](Config& c, const RngStream& g, unsigned th) {
             PercCrossingParams p;
             p.L = c.get_double("L", p.L);
             p.l = c.get_double("l", p.l);
             p.n = static_cast<int>(c.get_positive("n", p.n));
             p.trials = count_key(c, "trials", static_cast<long long>(p.trials));
             p.p = c.get_double("p", p.p);
             c.reject_unused();
             return perc_crossing_experiment(p, g, th);
         }},
        {"perc-self-dual",
         [](Config& c, const RngStream& g, unsigned th) {
             PercSelfDualParams p;
             p.n = static_cast<int>(c.get_positive("n", p.n));
             p.trials = count_key(c, "trials", static_cast<long long>(p.trials));
             c.reject_unused();
             return perc_self_dual_experiment(p, g, th);
         }},
        {"perc-boundary",
         [](Config& c, const RngStream& g, unsigned th) {
             PercBoundaryParams p;
             p.sizes = c.get_list("sizes", p.sizes);
             p.trials = count_key(c, "trials", static_cast<long long>(p.trials));
             p.p = c.get_double("p", p.p);
             c.reject_unused();
             return perc_boundary_experiment(p, g, th);
         }},
        {"perc-triangle",
         [](Config& c, const RngStream& g, unsigned th) {
             PercTriangleParams p;
             p.side = static_cast<int>(c.get_positive("side", p.side));
             p.trials = count_key(c, "trials", static_cast<long long>(p.trials));
             p.p = c.get_double("p", p.p);
             c.reject_unused();
             return perc_triangle_experiment(p, g, th);
         }},
        {"exploration-vs-sle",
         [](Config& c, const RngStream& g, unsigned th) {
             ExplorationSleParams p;
             p.height = static_cast<int>(c.get_positive("height", p.height));
             p.half_width = static_cast<int>(c.get_positive("half_width", p.half_width));
             p.trials = count_key(c, "trials", static_cast<long long>(p.trials));
             p.sle = contact_keys(c);
             p.j_spacing = c.get_double("j_spacing", p.j_spacing);
             c.reject_unused();
             return exploration_vs_sle(p, g, th);
         }},
    };
    return table;
}

}  // namespace detail

inline std::vector<std::string> experiment_ids() {
    std::vector<std::string> ids;
    for (const auto& [k, v] : detail::runners()) ids.push_back(k);
    return ids;
}

/// Runs the experiment named by the config key `experiment`. Unknown keys
/// and invalid values raise ConfigError naming the key; domain errors from
/// the drivers are reported the same way under "parameters".
inline ExperimentResult run_experiment(Config cfg, std::uint64_t seed, unsigned threads = 1) {
    const auto id = cfg.get_string("experiment");
    const auto& table = detail::runners();
    const auto it = table.find(id);
    if (it == table.end()) throw ConfigError("experiment", "config: unknown experiment '" + id + "'");
    try {
        return it->second(cfg, RngStream(seed, 0), threads);
    } catch (const DomainError& e) {
        throw ConfigError("parameters", std::string("invalid parameters: ") + e.what());
    }
}

}  // namespace conflab
