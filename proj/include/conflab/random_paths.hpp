#pragma once

// Samplers for lattice walks, planar Brownian motion and obliquely reflected
// Brownian motion in the upper half-plane, with stopping rules.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <unordered_set>
#include <utility>
#include <vector>

#include "conflab/error.hpp"
#include "conflab/geometry.hpp"
#include "conflab/parallel.hpp"
#include "conflab/rng.hpp"
#include "conflab/stats.hpp"

namespace conflab {

/// Unit steps of the square lattice: east, north, west, south.
inline constexpr int kStepX[4] = {1, 0, -1, 0};
inline constexpr int kStepY[4] = {0, 1, 0, -1};

inline std::uint64_t pack_site(std::int32_t x, std::int32_t y) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) | static_cast<std::uint32_t>(y);
}

/// n-step simple random walk on Z^2 started at 0.
inline PlanarPath simple_random_walk(std::size_t n, RngStream& rng) {
    PlanarPath p;
    p.kind = PathKind::lattice_walk;
    p.points.reserve(n + 1);
    int x = 0, y = 0;
    p.points.emplace_back(0.0, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const unsigned d = rng.below(4);
        x += kStepX[d];
        y += kStepY[d];
        p.points.emplace_back(x, y);
    }
    return p;
}

/// Planar Brownian motion sampled at times k dt on [0, T]; the final step is
/// shortened when dt does not divide T.
inline PlanarPath brownian_path(double T, double dt, RngStream& rng) {
    if (!(T > 0.0) || !(dt > 0.0) || dt > T) throw DomainError("brownian_path: need 0 < dt <= T");
    const auto n = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
    PlanarPath p;
    p.time_step = dt;
    p.points.reserve(n + 1);
    Complex z{0.0, 0.0};
    p.points.push_back(z);
    for (std::size_t k = 0; k < n; ++k) {
        const double h = (k + 1 == n) ? T - dt * static_cast<double>(n - 1) : dt;
        const double s = std::sqrt(h);
        const double gx = rng.normal(), gy = rng.normal();
        z += Complex(s * gx, s * gy);
        p.points.push_back(z);
    }
    return p;
}

/// Boundary reflection directions on the real axis. The default points at
/// angle pi/3 for x >= 0 and 2 pi/3 for x < 0, away from the origin on both
/// rays.
struct ReflectionField {
    Complex right = std::polar(1.0, std::numbers::pi / 3.0);
    Complex left = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);

    static ReflectionField vertical() { return {{0.0, 1.0}, {0.0, 1.0}}; }

    [[nodiscard]] Complex at(double x) const { return x >= 0.0 ? right : left; }

    void validate() const {
        for (Complex u : {right, left})
            if (!(u.imag() > 0.0) || std::abs(std::abs(u) - 1.0) > 1e-12)
                throw DomainError("ReflectionField: vectors must be unit with positive imaginary part");
    }
};

/// Moves a point below the axis back onto it along the field, returning the
/// push length (the local-time increment); points with Im >= 0 are untouched.
inline double reflect(Complex& w, const ReflectionField& field) {
    if (!(w.imag() < 0.0)) return 0.0;
    const Complex u = field.at(w.real());
    const double s = -w.imag() / u.imag();
    w = Complex(w.real() + s * u.real(), 0.0);
    return s;
}

struct ReflectedPath {
    std::vector<Complex> points;
    std::vector<double> local_time;
    double time_step = 0.0;
};

/// Euler scheme with post-step projection along the field.
inline ReflectedPath reflected_bm_halfplane(double T, double dt, const ReflectionField& field, RngStream& rng,
                                            Complex start = {0.0, 0.0}) {
    if (!(T > 0.0) || !(dt > 0.0)) throw DomainError("reflected_bm_halfplane: need T > 0, dt > 0");
    if (!(start.imag() >= 0.0)) throw DomainError("reflected_bm_halfplane: start must lie in the closed half-plane");
    field.validate();
    const auto n = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
    ReflectedPath p;
    p.time_step = dt;
    p.points.reserve(n + 1);
    p.local_time.reserve(n + 1);
    Complex z = start;
    double ell = 0.0;
    p.points.push_back(z);
    p.local_time.push_back(ell);
    for (std::size_t k = 0; k < n; ++k) {
        const double h = (k + 1 == n) ? T - dt * static_cast<double>(n - 1) : dt;
        const double s = std::sqrt(h);
        const double gx = rng.normal(), gy = rng.normal();
        z += Complex(s * gx, s * gy);
        ell += reflect(z, field);
        p.points.push_back(z);
        p.local_time.push_back(ell);
    }
    return p;
}

template <class Path>
struct Stopped {
    Path truncated;
    Complex hit;
    std::size_t index = 0;  // first sample at or beyond the stopping set
};

/// Truncates at the first sample with |z| >= radius; the last point is
/// replaced by the exact crossing of the final segment with the circle.
inline Stopped<PlanarPath> stop_at_circle(const PlanarPath& path, double radius) {
    if (path.points.empty() || !(std::abs(path.points.front()) < radius))
        throw DomainError("stop_at_circle: path must start strictly inside the circle");
    double max_r = 0.0;
    for (std::size_t k = 1; k < path.points.size(); ++k) {
        const Complex b = path.points[k];
        max_r = std::max(max_r, std::abs(b));
        if (std::abs(b) < radius) continue;
        const Complex a = path.points[k - 1], d = b - a;
        // |a + s d| = radius, root in (0, 1].
        const double A = std::norm(d), B = std::real(std::conj(a) * d), C = std::norm(a) - radius * radius;
        const double disc = std::sqrt(std::max(0.0, B * B - A * C));
        const double s = (B >= 0.0) ? -C / (B + disc) : (disc - B) / A;
        Complex hit = a + std::clamp(s, 0.0, 1.0) * d;
        hit *= radius / std::abs(hit);
        Stopped<PlanarPath> out{{{path.points.begin(), path.points.begin() + static_cast<std::ptrdiff_t>(k)}, path.kind, path.time_step}, hit, k};
        out.truncated.points.push_back(hit);
        return out;
    }
    throw NotStoppedError("stop_at_circle: path never reached the circle", max_r);
}

/// Truncates at the first step that crosses the segment [a, b], detected by a
/// sign change of the signed distance to its supporting line.
inline Stopped<ReflectedPath> stop_at_segment(const ReflectedPath& path, std::pair<Complex, Complex> segment) {
    const auto [a, b] = segment;
    const Complex e = b - a;
    if (path.points.empty() || std::abs(e) == 0.0) throw DomainError("stop_at_segment: empty path or degenerate segment");
    auto side = [&](Complex z) { return (e.real() * (z - a).imag() - e.imag() * (z - a).real()) / std::abs(e); };
    const double s0 = side(path.points.front());
    if (s0 == 0.0) throw DomainError("stop_at_segment: path starts on the segment line");
    const double sign = s0 > 0 ? 1.0 : -1.0;
    double progress = -std::abs(s0);
    for (std::size_t k = 1; k < path.points.size(); ++k) {
        const Complex p = path.points[k - 1], q = path.points[k];
        const double sp = sign * side(p), sq = sign * side(q);
        progress = std::max(progress, -sq);
        if (sq > 0.0 || (sp <= 0.0 && sq < 0.0)) continue;
        // Landing exactly on the line (as reflected paths do) counts as a crossing at q.
        const Complex hit = sq == 0.0 ? q : p + sp / (sp - sq) * (q - p);
        const double along = std::real((hit - a) * std::conj(e)) / std::norm(e);
        if (along < 0.0 || along > 1.0) continue;
        Stopped<ReflectedPath> out;
        out.truncated.time_step = path.time_step;
        out.truncated.points.assign(path.points.begin(), path.points.begin() + static_cast<std::ptrdiff_t>(k));
        out.truncated.local_time.assign(path.local_time.begin(), path.local_time.begin() + static_cast<std::ptrdiff_t>(k));
        out.truncated.points.push_back(hit);
        out.truncated.local_time.push_back(path.local_time[k]);
        out.hit = hit;
        out.index = k;
        return out;
    }
    throw NotStoppedError("stop_at_segment: path never crossed the segment", progress);
}

struct HalfLineHit {
    bool stopped = false;
    double x = 0.0;           // hit position on [M, inf) when stopped
    double time = 0.0;
    double local_time = 0.0;
    double max_modulus = 0.0;
    std::size_t steps = 0;
};

/// Reflected BM from `start` run until it is pushed onto [M, inf). Steps are
/// dt * min(max(1, |Z|)^2, |Z - M|^2): far excursions cost O(1) steps per
/// scale, and near the corner at M, where the hitting density blows up like
/// (x - M)^{-2/3}, the step shrinks with the distance (down to a floor of
/// 1e-24). The run ends unstopped once time exceeds max_time or |Z| exceeds
/// escape_radius.
inline HalfLineHit reflected_hit_halfline(Complex start, const ReflectionField& field, double M, double dt,
                                          double max_time, double escape_radius, RngStream& rng) {
    if (!(dt > 0.0) || !(start.imag() >= 0.0)) throw DomainError("reflected_hit_halfline: bad dt or start");
    field.validate();
    HalfLineHit out;
    Complex z = start;
    while (out.time < max_time) {
        const double r = std::abs(z);
        out.max_modulus = std::max(out.max_modulus, r);
        if (r > escape_radius) return out;
        const double c = std::abs(z - M);
        const double h = std::max(1e-24, dt * std::min(std::max(1.0, r * r), c * c));
        const double s = std::sqrt(h);
        const double gx = rng.normal(), gy = rng.normal();
        z += Complex(s * gx, s * gy);
        const double push = reflect(z, field);
        out.time += h;
        out.local_time += push;
        ++out.steps;
        if (push > 0.0 && z.real() >= M) {
            out.stopped = true;
            out.x = z.real();
            return out;
        }
    }
    return out;
}

/// One trial of the non-intersection event for two independent walks from 0:
/// S{1..n} and S'{0..n} disjoint. Both walks advance together so the trial
/// ends at the first collision.
inline bool srw_disjoint_trial(std::size_t n, RngStream& rng) {
    std::unordered_set<std::uint64_t> a, b;
    a.reserve(64);
    b.reserve(64);
    int ax = 0, ay = 0, bx = 0, by = 0;
    b.insert(pack_site(0, 0));
    for (std::size_t k = 1; k <= n; ++k) {
        const unsigned da = rng.below(4), db = rng.below(4);
        ax += kStepX[da];
        ay += kStepY[da];
        const auto pa = pack_site(ax, ay);
        if (b.count(pa)) return false;
        a.insert(pa);
        bx += kStepX[db];
        by += kStepY[db];
        const auto pb = pack_site(bx, by);
        if (a.count(pb)) return false;
        b.insert(pb);
    }
    return true;
}

/// Monte Carlo estimate of P[S{1..n} and S'{0..n} are disjoint].
inline stats::Estimate srw_nonintersection_mc(std::size_t n, std::size_t trials, const RngStream& rng,
                                              unsigned threads = 1) {
    if (n < 1 || trials < 1) throw DomainError("srw_nonintersection_mc: need n >= 1 and trials >= 1");
    const std::size_t hits = parallel_count(trials, threads, [&](std::size_t k) {
        RngStream r = rng.substream(k);
        return srw_disjoint_trial(n, r);
    });
    return stats::binomial(hits, trials);
}

/// CSV export: index,re,im (and local_time for reflected paths).
inline void write_path_csv(std::ostream& os, const PlanarPath& p) {
    os << "index,re,im\n" << std::setprecision(17);
    for (std::size_t k = 0; k < p.points.size(); ++k) os << k << ',' << p.points[k].real() << ',' << p.points[k].imag() << '\n';
}

inline void write_path_csv(std::ostream& os, const ReflectedPath& p) {
    os << "index,re,im,local_time\n" << std::setprecision(17);
    for (std::size_t k = 0; k < p.points.size(); ++k)
        os << k << ',' << p.points[k].real() << ',' << p.points[k].imag() << ',' << p.local_time[k] << '\n';
}

}  // namespace conflab
