#pragma once

// Grid geometry: masks, path rasterization, hull filling, outer-boundary
// tracing, box counting and lattice-walk harmonic measure.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "conflab/error.hpp"
#include "conflab/parallel.hpp"
#include "conflab/rng.hpp"
#include "conflab/stats.hpp"

namespace conflab {

using Complex = std::complex<double>;

inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

inline std::string format_point(Complex z) {
    std::ostringstream os;
    os << std::setprecision(17) << '(' << z.real() << ", " << z.imag() << ')';
    return os.str();
}

/// Upper bound on cols * rows for any grid (one byte per cell).
inline constexpr std::size_t kMaxGridCells = std::size_t{1} << 28;

/// Square grid; cell (i, j) covers origin + [i h, (i+1) h] x [j h, (j+1) h].
struct GridSpec {
    Complex origin{0.0, 0.0};
    double spacing = 1.0;
    int cols = 1;
    int rows = 1;

    void validate() const {
        if (!is_finite(origin)) throw DomainError("GridSpec: origin must be finite");
        if (!(spacing > 0.0) || !std::isfinite(spacing)) throw DomainError("GridSpec: spacing must be > 0");
        if (cols < 1 || rows < 1) throw DomainError("GridSpec: cols and rows must be >= 1");
        if (static_cast<std::size_t>(cols) * static_cast<std::size_t>(rows) > kMaxGridCells)
            throw DomainError("GridSpec: grid exceeds the cell cap");
    }

    [[nodiscard]] std::size_t size() const {
        return static_cast<std::size_t>(cols) * static_cast<std::size_t>(rows);
    }
    [[nodiscard]] bool contains_cell(long i, long j) const { return i >= 0 && j >= 0 && i < cols && j < rows; }
    [[nodiscard]] Complex cell_center(long i, long j) const {
        return origin + Complex((static_cast<double>(i) + 0.5) * spacing, (static_cast<double>(j) + 0.5) * spacing);
    }
    /// Cell containing z; points on the far edges belong to the last cell.
    [[nodiscard]] std::optional<std::pair<int, int>> cell_of(Complex z) const {
        const double u = (z.real() - origin.real()) / spacing;
        const double v = (z.imag() - origin.imag()) / spacing;
        if (!(u >= 0.0 && v >= 0.0 && u <= cols && v <= rows)) return std::nullopt;
        return std::pair{std::min(cols - 1, static_cast<int>(u)), std::min(rows - 1, static_cast<int>(v))};
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Square grid of side `extent` centered at `center` with `cells` per side.
inline GridSpec centered_grid(Complex center, double extent, int cells) {
    GridSpec s{center - Complex(extent / 2, extent / 2), extent / cells, cells, cells};
    s.validate();
    return s;
}

/// Row-major raster, one byte per cell.
struct GridMask {
    GridSpec spec;
    std::vector<std::uint8_t> bits;

    GridMask() = default;
    explicit GridMask(const GridSpec& s) : spec(s) {
        spec.validate();
        bits.assign(spec.size(), 0);
    }

    [[nodiscard]] std::size_t index(long i, long j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(spec.cols) + static_cast<std::size_t>(i);
    }
    [[nodiscard]] bool get(long i, long j) const { return spec.contains_cell(i, j) && bits[index(i, j)] != 0; }
    void set(long i, long j, bool v = true) {
        if (!spec.contains_cell(i, j)) throw OutOfBoundsError("GridMask: cell outside grid");
        bits[index(i, j)] = v ? 1 : 0;
    }
    [[nodiscard]] std::size_t count() const {
        return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](auto b) { return b != 0; }));
    }
    [[nodiscard]] bool empty() const { return count() == 0; }

    friend bool operator==(const GridMask&, const GridMask&) = default;
};

enum class PathKind { lattice_walk, diffusion_sample, interface };

struct PlanarPath {
    std::vector<Complex> points;
    PathKind kind = PathKind::diffusion_sample;
    double time_step = 0.0;  // 0 for lattice walks
};

inline const char* to_string(PathKind k) {
    switch (k) {
        case PathKind::lattice_walk: return "lattice-walk";
        case PathKind::diffusion_sample: return "diffusion-sample";
        case PathKind::interface: return "interface";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Rasterization

namespace detail {

/// Cells crossed by the segment a -> b (grid units), stepping through shared
/// edges only so the chain is 4-connected. At an exact corner crossing the x
/// step is taken first.
template <class Visit>
void traverse_segment(double ax, double ay, double bx, double by, int cols, int rows, Visit&& visit) {
    auto cell = [](double u, int n) { return std::min(n - 1, static_cast<int>(std::floor(u))); };
    int i = cell(ax, cols), j = cell(ay, rows);
    const int ie = cell(bx, cols), je = cell(by, rows);
    visit(i, j);
    const double dx = bx - ax, dy = by - ay;
    const int si = dx > 0 ? 1 : -1, sj = dy > 0 ? 1 : -1;
    const double inf = std::numeric_limits<double>::infinity();
    const double tdx = dx != 0 ? std::abs(1.0 / dx) : inf;
    const double tdy = dy != 0 ? std::abs(1.0 / dy) : inf;
    double tx = dx != 0 ? ((si > 0 ? (i + 1) - ax : ax - i) * tdx) : inf;
    double ty = dy != 0 ? ((sj > 0 ? (j + 1) - ay : ay - j) * tdy) : inf;
    const int steps = std::abs(ie - i) + std::abs(je - j);
    for (int k = 0; k < steps; ++k) {
        if ((tx <= ty && i != ie) || j == je) {
            i += si;
            tx += tdx;
        } else {
            j += sj;
            ty += tdy;
        }
        visit(i, j);
    }
}

}  // namespace detail

/// Marks every cell crossed by the polygonal path. Consecutive samples are
/// joined through edge-adjacent cells, so the raster of a connected path is
/// 4-connected.
inline GridMask rasterize_path(const PlanarPath& path, const GridSpec& spec) {
    GridMask m(spec);
    const double h = spec.spacing;
    std::vector<std::pair<double, double>> uv;
    uv.reserve(path.points.size());
    for (const auto& z : path.points) {
        if (!is_finite(z) || !spec.cell_of(z)) throw OutOfBoundsError("rasterize_path: point " + format_point(z) + " outside grid");
        uv.emplace_back((z.real() - spec.origin.real()) / h, (z.imag() - spec.origin.imag()) / h);
    }
    auto mark = [&](int i, int j) { m.bits[m.index(i, j)] = 1; };
    if (uv.size() == 1) detail::traverse_segment(uv[0].first, uv[0].second, uv[0].first, uv[0].second, spec.cols, spec.rows, mark);
    for (std::size_t k = 1; k < uv.size(); ++k)
        detail::traverse_segment(uv[k - 1].first, uv[k - 1].second, uv[k].first, uv[k].second, spec.cols, spec.rows, mark);
    return m;
}

// ---------------------------------------------------------------------------
// Hulls and components

/// Cells of the complement reachable from the border by 4-connected moves.
inline std::vector<std::uint8_t> exterior_cells(const GridMask& mask) {
    const int W = mask.spec.cols, H = mask.spec.rows;
    std::vector<std::uint8_t> ext(mask.bits.size(), 0);
    std::vector<std::size_t> stack;
    auto push = [&](int i, int j) {
        const std::size_t k = mask.index(i, j);
        if (!mask.bits[k] && !ext[k]) {
            ext[k] = 1;
            stack.push_back(k);
        }
    };
    for (int i = 0; i < W; ++i) {
        push(i, 0);
        push(i, H - 1);
    }
    for (int j = 0; j < H; ++j) {
        push(0, j);
        push(W - 1, j);
    }
    while (!stack.empty()) {
        const std::size_t k = stack.back();
        stack.pop_back();
        const int i = static_cast<int>(k % static_cast<std::size_t>(W)), j = static_cast<int>(k / static_cast<std::size_t>(W));
        if (i > 0) push(i - 1, j);
        if (i + 1 < W) push(i + 1, j);
        if (j > 0) push(i, j - 1);
        if (j + 1 < H) push(i, j + 1);
    }
    return ext;
}

/// Input plus every cell not 4-connected to the border through unset cells.
inline GridMask fill_hull(const GridMask& mask) {
    GridMask out(mask.spec);
    if (mask.empty()) return out;
    const auto ext = exterior_cells(mask);
    for (std::size_t k = 0; k < out.bits.size(); ++k) out.bits[k] = ext[k] ? 0 : 1;
    return out;
}

/// 4-connected component labels (0 = unset, components numbered from 1).
struct Components {
    std::vector<int> label;
    std::vector<std::size_t> sizes;  // sizes[c - 1] for label c
};

inline Components label_components(const GridMask& mask) {
    const int W = mask.spec.cols, H = mask.spec.rows;
    Components c;
    c.label.assign(mask.bits.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < mask.bits.size(); ++s) {
        if (!mask.bits[s] || c.label[s]) continue;
        const int id = static_cast<int>(c.sizes.size()) + 1;
        std::size_t n = 0;
        c.label[s] = id;
        stack.push_back(s);
        while (!stack.empty()) {
            const std::size_t k = stack.back();
            stack.pop_back();
            ++n;
            const int i = static_cast<int>(k % static_cast<std::size_t>(W)), j = static_cast<int>(k / static_cast<std::size_t>(W));
            auto visit = [&](int a, int b) {
                const std::size_t q = mask.index(a, b);
                if (mask.bits[q] && !c.label[q]) {
                    c.label[q] = id;
                    stack.push_back(q);
                }
            };
            if (i > 0) visit(i - 1, j);
            if (i + 1 < W) visit(i + 1, j);
            if (j > 0) visit(i, j - 1);
            if (j + 1 < H) visit(i, j + 1);
        }
        c.sizes.push_back(n);
    }
    return c;
}

struct BoundaryTrace {
    PlanarPath path;                 // edge midpoints, counterclockwise
    std::size_t perimeter = 0;       // number of unit edges
    std::size_t components = 0;      // 4-connected components of the input
    std::size_t interior_cells = 0;  // cells of the traced component
};

/// Outer contour of the largest 4-connected component, traced
/// counterclockwise along cell edges with the component on the left.
inline BoundaryTrace outer_boundary(const GridMask& mask) {
    BoundaryTrace out;
    out.path.kind = PathKind::interface;
    const auto comps = label_components(mask);
    out.components = comps.sizes.size();
    if (comps.sizes.empty()) return out;
    const int best = static_cast<int>(std::max_element(comps.sizes.begin(), comps.sizes.end()) - comps.sizes.begin()) + 1;
    out.interior_cells = comps.sizes[static_cast<std::size_t>(best - 1)];
    const auto& spec = mask.spec;
    auto inside = [&](int i, int j) { return spec.contains_cell(i, j) && comps.label[mask.index(i, j)] == best; };

    // Row-major order puts the lowest, then leftmost cell first.
    const std::size_t first = static_cast<std::size_t>(std::find(comps.label.begin(), comps.label.end(), best) - comps.label.begin());
    const int x0 = static_cast<int>(first % static_cast<std::size_t>(spec.cols));
    const int y0 = static_cast<int>(first / static_cast<std::size_t>(spec.cols));
    int x = x0, y = y0, dx = 1, dy = 0;
    const double h = spec.spacing;
    do {
        out.path.points.push_back(spec.origin + Complex((x + 0.5 * dx) * h, (y + 0.5 * dy) * h));
        x += dx;
        y += dy;
        // Cells ahead-left and ahead-right of vertex (x, y) for heading (dx, dy).
        const int lx = -dy, ly = dx;
        const bool al = inside(x + (dx + lx - 1) / 2, y + (dy + ly - 1) / 2);
        const bool ar = inside(x + (dx - lx - 1) / 2, y + (dy - ly - 1) / 2);
        if (!al) {
            std::tie(dx, dy) = std::pair{lx, ly};
        } else if (ar) {
            std::tie(dx, dy) = std::pair{dy, -dx};
        }
    } while (!(x == x0 && y == y0 && dx == 1 && dy == 0));
    out.perimeter = out.path.points.size();
    return out;
}

// ---------------------------------------------------------------------------
// Box counting

struct SlopeEstimate {
    double slope = 0.0;
    double error = 0.0;
};

/// Number of s x s boxes (cells, anchored at the origin) meeting the mask.
inline std::size_t occupied_boxes(const GridMask& mask, int s) {
    const int bw = (mask.spec.cols + s - 1) / s, bh = (mask.spec.rows + s - 1) / s;
    std::vector<std::uint8_t> hit(static_cast<std::size_t>(bw) * static_cast<std::size_t>(bh), 0);
    for (int j = 0; j < mask.spec.rows; ++j)
        for (int i = 0; i < mask.spec.cols; ++i)
            if (mask.bits[mask.index(i, j)]) hit[static_cast<std::size_t>(j / s) * static_cast<std::size_t>(bw) + static_cast<std::size_t>(i / s)] = 1;
    return static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
}

/// Least-squares slope of log N(s) against log(1/s). Scales leaving fewer
/// than 4 boxes per side are dropped; at least 3 must remain.
inline SlopeEstimate box_counting_dimension(const GridMask& mask, const std::vector<int>& scales) {
    std::vector<int> usable;
    for (int s : scales)
        if (s >= 1 && mask.spec.cols / s >= 4 && mask.spec.rows / s >= 4) usable.push_back(s);
    if (usable.size() < 3) throw DomainError("box_counting_dimension: fewer than 3 usable scales");
    if (mask.empty()) return {};
    std::vector<double> x, y;
    for (int s : usable) {
        x.push_back(-std::log(static_cast<double>(s) * mask.spec.spacing));
        y.push_back(std::log(static_cast<double>(occupied_boxes(mask, s))));
    }
    const auto fit = stats::linear_fit(x, y);
    return {fit.slope, fit.slope_stderr};
}

// ---------------------------------------------------------------------------
// Harmonic measure

/// Cells whose centers lie in the closed disc.
inline GridMask disc_mask(const GridSpec& spec, Complex center, double radius) {
    GridMask m(spec);
    for (int j = 0; j < spec.rows; ++j)
        for (int i = 0; i < spec.cols; ++i)
            if (std::abs(spec.cell_center(i, j) - center) <= radius) m.bits[m.index(i, j)] = 1;
    return m;
}

/// Outcome of one absorbed walk.
enum class Absorption { target, other_boundary, obstacle };

/// Nearest-neighbour walk from `start` until it leaves `domain` or steps onto
/// `obstacle`. Leaving onto a `target` cell counts as a hit; leaving the grid
/// altogether never does.
inline Absorption absorb_walk(const GridMask& domain, const GridMask& obstacle, const GridMask& target,
                              int i, int j, RngStream& rng) {
    static constexpr int kDi[4] = {1, -1, 0, 0}, kDj[4] = {0, 0, 1, -1};
    for (;;) {
        const unsigned d = rng.below(4);
        i += kDi[d];
        j += kDj[d];
        if (!domain.get(i, j)) return target.get(i, j) ? Absorption::target : Absorption::other_boundary;
        if (obstacle.get(i, j)) return Absorption::obstacle;
    }
}

/// Fraction of lattice walks from `start` that exit `domain` through
/// `target` before touching `obstacle`. Trial k uses rng.substream(k), so the
/// estimate does not depend on `threads`. The lattice introduces an O(spacing)
/// bias that is not corrected.
inline stats::Estimate harmonic_measure_estimate(const GridMask& domain, const GridMask& obstacle,
                                                 const GridMask& target, Complex start, std::size_t trials,
                                                 const RngStream& rng, unsigned threads = 1) {
    if (trials == 0) throw DomainError("harmonic_measure_estimate: trials must be >= 1");
    if (!(obstacle.spec == domain.spec) || !(target.spec == domain.spec))
        throw DomainError("harmonic_measure_estimate: masks must share one grid");
    const auto c = domain.spec.cell_of(start);
    if (!c || !domain.get(c->first, c->second)) throw DomainError("harmonic_measure_estimate: start outside domain");
    if (obstacle.get(c->first, c->second)) throw DomainError("harmonic_measure_estimate: start inside obstacle");
    const std::size_t hits = parallel_count(trials, threads, [&](std::size_t k) {
        RngStream r = rng.substream(k);
        return absorb_walk(domain, obstacle, target, c->first, c->second, r) == Absorption::target;
    });
    return stats::binomial(hits, trials);
}

// ---------------------------------------------------------------------------
// Bitmap IO: a text header followed by row-major bits, 8 cells per byte,
// least significant bit first.

inline constexpr std::string_view kMaskMagic = "CONFLABMASK";

inline void write_mask(std::ostream& os, const GridMask& m) {
    os << kMaskMagic << " 1\n"
       << std::setprecision(17) << m.spec.cols << ' ' << m.spec.rows << ' ' << m.spec.origin.real() << ' '
       << m.spec.origin.imag() << ' ' << m.spec.spacing << '\n';
    std::vector<char> payload((m.bits.size() + 7) / 8, 0);
    for (std::size_t k = 0; k < m.bits.size(); ++k)
        if (m.bits[k]) payload[k / 8] = static_cast<char>(static_cast<unsigned char>(payload[k / 8]) | (1u << (k % 8)));
    os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!os) throw std::runtime_error("write_mask: stream failure");
}

inline GridMask read_mask(std::istream& is) {
    std::string magic;
    int version = 0;
    GridSpec spec;
    double ox = 0, oy = 0;
    is >> magic >> version >> spec.cols >> spec.rows >> ox >> oy >> spec.spacing;
    if (!is || magic != kMaskMagic || version != 1) throw std::runtime_error("read_mask: bad header");
    if (is.get() != '\n') throw std::runtime_error("read_mask: bad header terminator");
    spec.origin = {ox, oy};
    GridMask m(spec);
    std::vector<char> payload((m.bits.size() + 7) / 8);
    is.read(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (is.gcount() != static_cast<std::streamsize>(payload.size())) throw std::runtime_error("read_mask: truncated payload");
    for (std::size_t k = 0; k < m.bits.size(); ++k)
        m.bits[k] = (static_cast<unsigned char>(payload[k / 8]) >> (k % 8)) & 1u;
    return m;
}

inline void save_mask(const std::string& file, const GridMask& m) {
    std::ofstream os(file, std::ios::binary);
    if (!os) throw std::runtime_error("save_mask: cannot open " + file);
    write_mask(os, m);
}

inline GridMask load_mask(const std::string& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw std::runtime_error("load_mask: cannot open " + file);
    return read_mask(is);
}

}  // namespace conflab
