#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "conflab/geometry.hpp"

using namespace conflab;

namespace {

GridMask from_rows(const std::vector<std::string>& rows) {
    // rows[0] is the top row.
    const int H = static_cast<int>(rows.size()), W = static_cast<int>(rows[0].size());
    GridMask m(GridSpec{{0, 0}, 1.0, W, H});
    for (int r = 0; r < H; ++r)
        for (int i = 0; i < W; ++i)
            if (rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)] == '#') m.set(i, H - 1 - r);
    return m;
}

// Brute-force exterior: repeated relaxation until nothing changes.
GridMask fill_oracle(const GridMask& m) {
    const int W = m.spec.cols, H = m.spec.rows;
    std::vector<int> ext(m.bits.size(), 0);
    bool changed = true;
    while (changed) {
        changed = false;
        for (int j = 0; j < H; ++j)
            for (int i = 0; i < W; ++i) {
                const auto k = m.index(i, j);
                if (m.bits[k] || ext[k]) continue;
                bool reach = i == 0 || j == 0 || i == W - 1 || j == H - 1;
                if (i > 0 && ext[m.index(i - 1, j)]) reach = true;
                if (i + 1 < W && ext[m.index(i + 1, j)]) reach = true;
                if (j > 0 && ext[m.index(i, j - 1)]) reach = true;
                if (j + 1 < H && ext[m.index(i, j + 1)]) reach = true;
                if (reach) {
                    ext[k] = 1;
                    changed = true;
                }
            }
    }
    GridMask out(m.spec);
    for (std::size_t k = 0; k < ext.size(); ++k) out.bits[k] = ext[k] ? 0 : 1;
    return out;
}

// Exposed edges of a hole-free mask: each set cell contributes its sides that
// face an unset or off-grid cell.
std::size_t edge_count(const GridMask& m) {
    std::size_t n = 0;
    for (int j = 0; j < m.spec.rows; ++j)
        for (int i = 0; i < m.spec.cols; ++i)
            if (m.get(i, j)) n += !m.get(i + 1, j) + !m.get(i - 1, j) + !m.get(i, j + 1) + !m.get(i, j - 1);
    return n;
}

double signed_area(const std::vector<Complex>& p) {
    double a = 0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const Complex u = p[k], v = p[(k + 1) % p.size()];
        a += u.real() * v.imag() - v.real() * u.imag();
    }
    return a / 2;
}

// Harmonic measure of the arc {e^{it}: t1 < t < t2} seen from z in the unit
// disc, via the automorphism sending z to 0.
double arc_measure(Complex z, double t1, double t2) {
    auto phi = [z](double t) {
        const Complex w = std::polar(1.0, t);
        return std::arg((w - z) / (1.0 - std::conj(z) * w));
    };
    double d = phi(t2) - phi(t1);
    while (d < 0) d += 2 * std::numbers::pi;
    return d / (2 * std::numbers::pi);
}

}  // namespace

TEST_CASE("grid spec validation and cell lookup", "[geometry]") {
    REQUIRE_THROWS_AS((GridSpec{{0, 0}, 0.0, 4, 4}.validate()), DomainError);
    REQUIRE_THROWS_AS((GridSpec{{0, 0}, 1.0, 0, 4}.validate()), DomainError);
    REQUIRE_THROWS_AS((GridSpec{{0, 0}, 1.0, 1 << 15, 1 << 15}.validate()), DomainError);
    GridSpec s{{-1, -1}, 0.5, 4, 4};
    REQUIRE(s.cell_of({-1, -1}) == std::pair{0, 0});
    REQUIRE(s.cell_of({1, 1}) == std::pair{3, 3});
    REQUIRE_FALSE(s.cell_of({1.01, 0}));
    REQUIRE(s.cell_center(0, 0) == Complex(-0.75, -0.75));
}

TEST_CASE("rasterize_path basic cases", "[geometry][raster]") {
    GridSpec s{{0, 0}, 1.0, 4, 4};
    SECTION("horizontal segment") {
        auto m = rasterize_path({{{0.5, 1.5}, {2.5, 1.5}}}, s);
        REQUIRE(m.count() == 3);
        REQUIRE((m.get(0, 1) && m.get(1, 1) && m.get(2, 1)));
    }
    SECTION("single point") {
        auto m = rasterize_path({{{2.2, 3.7}}}, s);
        REQUIRE(m.count() == 1);
        REQUIRE(m.get(2, 3));
    }
    SECTION("diagonal gives a 4-connected chain") {
        // Hand trace: the segment passes exactly through the cell corners; the
        // x step is taken first at each corner, giving the staircase
        // (0,0) (1,0) (1,1) (2,1) (2,2) (3,2) (3,3).
        auto m = rasterize_path({{{0.5, 0.5}, {3.5, 3.5}}}, s);
        REQUIRE(m.count() == 7);
        for (auto [i, j] : std::vector<std::pair<int, int>>{{0, 0}, {1, 0}, {1, 1}, {2, 1}, {2, 2}, {3, 2}, {3, 3}})
            REQUIRE(m.get(i, j));
        REQUIRE(label_components(m).sizes.size() == 1);
    }
    SECTION("out of bounds names the point") {
        try {
            rasterize_path({{{0.5, 0.5}, {4.5, 0.5}}}, s);
            FAIL("expected throw");
        } catch (const OutOfBoundsError& e) {
            REQUIRE(std::string(e.what()).find("4.5") != std::string::npos);
        }
    }
}

TEST_CASE("rasterize_path covers cells near the segment", "[geometry][raster]") {
    // Every cell whose centre is within h/2 of a segment must be set, and the
    // raster of a random polyline is 4-connected.
    RngStream rng(5, 5);
    GridSpec s{{0, 0}, 0.25, 40, 40};
    for (int trial = 0; trial < 50; ++trial) {
        PlanarPath p;
        for (int k = 0; k < 6; ++k) p.points.emplace_back(10 * rng.uniform(), 10 * rng.uniform());
        auto m = rasterize_path(p, s);
        REQUIRE(label_components(m).sizes.size() == 1);
        for (int j = 0; j < 40; ++j)
            for (int i = 0; i < 40; ++i) {
                const Complex c = s.cell_center(i, j);
                for (std::size_t k = 1; k < p.points.size(); ++k) {
                    const Complex a = p.points[k - 1], d = p.points[k] - a;
                    const double t = std::clamp(std::real((c - a) * std::conj(d)) / std::norm(d), 0.0, 1.0);
                    // Strictly inside h/2 in the sup norm means the segment enters the cell.
                    const Complex off = c - (a + t * d);
                    if (std::max(std::abs(off.real()), std::abs(off.imag())) < 0.5 * 0.25 - 1e-9) REQUIRE(m.get(i, j));
                }
            }
    }
}

TEST_CASE("fill_hull examples", "[geometry][hull]") {
    auto ring = from_rows({"###", "#.#", "###"});
    auto filled = fill_hull(ring);
    REQUIRE(filled.count() == 9);
    auto single = from_rows({"...", ".#.", "..."});
    REQUIRE(fill_hull(single) == single);
    auto u = from_rows({".....", ".#.#.", ".#.#.", ".###.", "....."});
    REQUIRE(fill_hull(u) == u);
    REQUIRE(fill_hull(u) == fill_oracle(u));
    GridMask empty(GridSpec{{0, 0}, 1.0, 5, 5});
    REQUIRE(fill_hull(empty).empty());
}

TEST_CASE("fill_hull is idempotent, monotone and matches the oracle", "[geometry][hull]") {
    RngStream rng(11, 0);
    for (int trial = 0; trial < 40; ++trial) {
        GridMask m(GridSpec{{0, 0}, 1.0, 12, 9});
        for (auto& b : m.bits) b = rng.uniform() < 0.35;
        auto f = fill_hull(m);
        REQUIRE(f == fill_oracle(m));
        REQUIRE(fill_hull(f) == f);
        for (std::size_t k = 0; k < m.bits.size(); ++k)
            if (m.bits[k]) REQUIRE(f.bits[k]);
    }
}

TEST_CASE("outer_boundary examples", "[geometry][boundary]") {
    auto one = from_rows({"...", ".#.", "..."});
    auto t1 = outer_boundary(one);
    REQUIRE(t1.perimeter == 4);
    REQUIRE(t1.components == 1);
    REQUIRE(t1.path.kind == PathKind::interface);
    REQUIRE(t1.path.points.front() == Complex(1.5, 1.0));
    REQUIRE(signed_area(t1.path.points) > 0);  // counterclockwise

    REQUIRE(outer_boundary(from_rows({"##", "##"})).perimeter == 8);
    // L-tromino: hand trace of the contour gives 8 unit edges.
    REQUIRE(outer_boundary(from_rows({"#.", "##"})).perimeter == 8);
    GridMask empty(GridSpec{{0, 0}, 1.0, 3, 3});
    REQUIRE(outer_boundary(empty).perimeter == 0);
}

TEST_CASE("outer_boundary on rectangles and random hulls", "[geometry][boundary]") {
    for (int a = 1; a <= 5; ++a)
        for (int b = 1; b <= 4; ++b) {
            GridMask m(GridSpec{{0, 0}, 1.0, 8, 8});
            for (int j = 1; j <= b; ++j)
                for (int i = 2; i < 2 + a; ++i) m.set(i, j);
            REQUIRE(outer_boundary(m).perimeter == static_cast<std::size_t>(2 * (a + b)));
        }
    RngStream rng(3, 1);
    for (int trial = 0; trial < 40; ++trial) {
        GridMask m(GridSpec{{0, 0}, 1.0, 10, 10});
        for (auto& b : m.bits) b = rng.uniform() < 0.6;
        auto comps = label_components(m);
        // Keep only the largest component and fill its holes.
        const auto big = static_cast<int>(std::max_element(comps.sizes.begin(), comps.sizes.end()) - comps.sizes.begin()) + 1;
        for (std::size_t k = 0; k < m.bits.size(); ++k) m.bits[k] = comps.label[k] == big;
        auto f = fill_hull(m);
        auto tr = outer_boundary(f);
        REQUIRE(tr.components == 1);
        REQUIRE(tr.perimeter == edge_count(f));
        std::set<std::pair<double, double>> seen;
        for (auto z : tr.path.points) seen.insert({z.real(), z.imag()});
        REQUIRE(seen.size() == tr.perimeter);
        REQUIRE(signed_area(tr.path.points) > 0);
    }
}

TEST_CASE("outer_boundary picks the largest component", "[geometry][boundary]") {
    auto m = from_rows({"#....", ".....", "..###", "..###"});
    auto tr = outer_boundary(m);
    REQUIRE(tr.components == 2);
    REQUIRE(tr.interior_cells == 6);
    REQUIRE(tr.perimeter == 10);
    // Diagonal touch is not a 4-connection.
    REQUIRE(outer_boundary(from_rows({"#.", ".#"})).components == 2);
}

TEST_CASE("outer_boundary grows with enclosed growth", "[geometry][boundary]") {
    auto m = from_rows({"......", ".####.", ".#..#.", ".####.", "......"});
    auto before = outer_boundary(fill_hull(m)).perimeter;
    m.set(2, 2);
    REQUIRE(outer_boundary(fill_hull(m)).perimeter >= before);
}

TEST_CASE("box counting on simple sets", "[geometry][box]") {
    const std::vector<int> scales{1, 2, 4, 8, 16};
    GridSpec s{{0, 0}, 1.0 / 256, 256, 256};
    GridMask line(s), full(s);
    for (int i = 0; i < 256; ++i) line.set(i, 100);
    std::fill(full.bits.begin(), full.bits.end(), 1);
    auto dl = box_counting_dimension(line, scales);
    auto df = box_counting_dimension(full, scales);
    REQUIRE(std::abs(dl.slope - 1.0) < 0.05);
    REQUIRE(std::abs(df.slope - 2.0) < 0.05);
    REQUIRE_THROWS_AS(box_counting_dimension(line, {1, 2, 128}), DomainError);
    GridMask empty(s);
    REQUIRE(box_counting_dimension(empty, scales).slope == 0.0);
    // Random masks stay within [0, 2].
    RngStream rng(1, 2);
    GridMask r(s);
    for (auto& b : r.bits) b = rng.uniform() < 0.01;
    auto dr = box_counting_dimension(r, scales);
    REQUIRE(dr.slope >= -3 * dr.error);
    REQUIRE(dr.slope <= 2 + 3 * dr.error);
}

TEST_CASE("harmonic measure in a disc", "[geometry][harmonic]") {
    const GridSpec s = centered_grid({0, 0}, 2.2, 88);  // spacing 1/40
    const GridMask domain = disc_mask(s, {0, 0}, 1.0);
    const GridMask none(s);
    GridMask all(s), upper(s), lower(s), arc(s);
    const double t1 = -0.4, t2 = 1.3;
    for (int j = 0; j < s.rows; ++j)
        for (int i = 0; i < s.cols; ++i) {
            if (domain.get(i, j)) continue;
            const Complex c = s.cell_center(i, j);
            all.set(i, j);
            (c.imag() > 0 ? upper : lower).set(i, j);
            const double th = std::arg(c);
            if (th > t1 && th < t2) arc.set(i, j);
        }
    const RngStream rng(77, 3);
    SECTION("full boundary is certain") {
        REQUIRE(harmonic_measure_estimate(domain, none, all, {0, 0}, 200, rng).value == 1.0);
    }
    SECTION("complementary targets sum to one exactly") {
        auto a = harmonic_measure_estimate(domain, none, upper, {0.3, 0.1}, 500, rng);
        auto b = harmonic_measure_estimate(domain, none, lower, {0.3, 0.1}, 500, rng);
        REQUIRE(a.value + b.value == 1.0);
    }
    SECTION("half circle from the centre") {
        // The cell grid is symmetric under reflection in the real axis only when
        // the centre cell is excluded from both halves; use the left/right split.
        GridMask right(s);
        for (int j = 0; j < s.rows; ++j)
            for (int i = s.cols / 2; i < s.cols; ++i)
                if (!domain.get(i, j)) right.set(i, j);
        auto e = harmonic_measure_estimate(domain, none, right, {0.01, 0.01}, 4000, rng);
        REQUIRE(std::abs(e.value - 0.5) <= 3 * e.error + 0.02);
    }
    SECTION("arc from an off-centre point") {
        const Complex z{0.35, -0.2};
        // Cross-check the automorphism formula against the Poisson integral.
        const double poisson = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                                   [z](double t) {
                                       return (1 - std::norm(z)) / std::norm(std::polar(1.0, t) - z);
                                   },
                                   t1, t2, 10, 1e-12) /
                               (2 * std::numbers::pi);
        REQUIRE(std::abs(poisson - arc_measure(z, t1, t2)) < 1e-10);
        auto e = harmonic_measure_estimate(domain, none, arc, z, 4000, rng, 4);
        REQUIRE(std::abs(e.value - arc_measure(z, t1, t2)) <= 3 * e.error + 2 * s.spacing);
    }
    SECTION("thread count does not change the estimate") {
        auto a = harmonic_measure_estimate(domain, none, arc, {0.1, 0.2}, 300, rng, 1);
        auto b = harmonic_measure_estimate(domain, none, arc, {0.1, 0.2}, 300, rng, 5);
        REQUIRE(a.value == b.value);
    }
    SECTION("start inside the obstacle is rejected") {
        GridMask obs(s);
        const auto c = s.cell_of({0, 0});
        obs.set(c->first, c->second);
        REQUIRE_THROWS_AS(harmonic_measure_estimate(domain, obs, all, {0, 0}, 10, rng), DomainError);
        REQUIRE_THROWS_AS(harmonic_measure_estimate(domain, none, all, {1.05, 0}, 10, rng), DomainError);
    }
}

TEST_CASE("mask bitmap round trip", "[geometry][io]") {
    RngStream rng(8, 8);
    GridMask m(GridSpec{{-0.3, 1.0 / 3.0}, 0.1, 13, 7});  // 91 cells: partial last byte
    for (auto& b : m.bits) b = rng.uniform() < 0.5;
    std::stringstream ss;
    write_mask(ss, m);
    const std::string raw = ss.str();
    const auto header_end = raw.find('\n', raw.find('\n') + 1) + 1;
    REQUIRE(raw.size() - header_end == 12);
    // Least significant bit first.
    REQUIRE(((static_cast<unsigned char>(raw[header_end]) & 1u) != 0) == (m.bits[0] != 0));
    REQUIRE(((static_cast<unsigned char>(raw[header_end]) >> 3 & 1u) != 0) == (m.bits[3] != 0));
    auto back = read_mask(ss);
    REQUIRE(back == m);
    std::stringstream bad("CONFLABMASK 1\n3 3 0 0 1\n\x01");
    REQUIRE_THROWS(read_mask(bad));
}
