#pragma once

// Chordal and radial Loewner evolutions driven by sampled functions.
//
// Chordal: g_t is a composition of elementary slit maps
//   e(w) = a + sqrt((w - a)^2 + 4 dt),
// the exact flow of dg = 2 dt / (g - a) for constant driving a. Radial: the
// exterior flow df = -f (f + zeta) / (f - zeta) dt, integrated by RK4 with
// zeta constant on each driving interval.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "conflab/error.hpp"
#include "conflab/geometry.hpp"
#include "conflab/parallel.hpp"
#include "conflab/rng.hpp"

namespace conflab {

using Rational = boost::multiprecision::cpp_rational;

enum class DrivingKind { chordal_real, radial_angle };

/// Sampled driving function. On [times[k], times[k+1]) the driving value is
/// held at values[k].
struct DrivingFunction {
    DrivingKind kind = DrivingKind::chordal_real;
    std::vector<double> times;
    std::vector<double> values;

    [[nodiscard]] std::size_t intervals() const { return times.empty() ? 0 : times.size() - 1; }

    void validate() const {
        if (times.size() != values.size() || times.empty()) throw DomainError("DrivingFunction: times/values size mismatch");
        for (std::size_t k = 1; k < times.size(); ++k)
            if (!(times[k] > times[k - 1])) throw DomainError("DrivingFunction: times must be strictly increasing");
    }

    /// Number of whole intervals ending at or before `horizon`.
    [[nodiscard]] std::size_t intervals_until(double horizon) const {
        const double tol = 1e-9 * std::max(1.0, std::abs(horizon));
        const auto it = std::upper_bound(times.begin(), times.end(), horizon + tol);
        const auto n = static_cast<std::size_t>(it - times.begin());
        return n == 0 ? 0 : n - 1;
    }
};

/// Brownian driving with increments of variance kappa * dt on
/// [t_start, t_start + horizon]. Chordal drivers start at 0, radial ones at a
/// uniform angle.
inline DrivingFunction sle_driving(double kappa, double dt, double horizon, DrivingKind kind, RngStream& rng,
                                   double t_start = 0.0) {
    if (!(kappa >= 0.0) || !(dt > 0.0) || !(horizon > 0.0)) throw DomainError("sle_driving: need kappa >= 0, dt > 0, horizon > 0");
    const auto n = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
    DrivingFunction d;
    d.kind = kind;
    d.times.resize(n + 1);
    d.values.resize(n + 1);
    double v = kind == DrivingKind::radial_angle ? 2.0 * std::numbers::pi * rng.uniform() : 0.0;
    const double s = std::sqrt(kappa * dt);
    for (std::size_t k = 0; k <= n; ++k) {
        d.times[k] = t_start + dt * static_cast<double>(k);
        d.values[k] = v;
        v += s * rng.normal();
    }
    return d;
}

inline void write_driving_csv(std::ostream& os, const DrivingFunction& d) {
    os << "t,value\n" << std::setprecision(17);
    for (std::size_t k = 0; k < d.times.size(); ++k) os << d.times[k] << ',' << d.values[k] << '\n';
}

// ---------------------------------------------------------------------------
// Chordal slit maps

/// Applies one elementary slit map (duration tau, driving a) to w and adds
/// the displacement to `disp`. The displacement is computed without
/// cancellation, so z + disp keeps full relative precision of g(z) - z even
/// when |z| is huge.
inline void slit_step(Complex& w, Complex& disp, double tau, double a) {
    const Complex u = w - a;
    const Complex x = 4.0 * tau / (u * u);
    const Complex r = std::sqrt(1.0 + x);
    Complex s = u * r;
    bool flip = s.imag() < 0.0;
    if (s.imag() == 0.0 && u.imag() == 0.0) flip = (s.real() > 0.0) != (u.real() > 0.0);
    if (flip) {
        s = -s;
        disp += s - u;
    } else {
        disp += u * x / (r + 1.0);
    }
    w = a + s;
}

/// Composition of elementary slit maps with an exactly summed capacity.
class ChordalState {
public:
    struct Step {
        double dt;
        double a;
    };

    ChordalState() = default;

    static ChordalState from_driving(const DrivingFunction& d, double horizon) {
        d.validate();
        if (d.kind != DrivingKind::chordal_real) throw DomainError("ChordalState: needs a chordal driving function");
        ChordalState s;
        const std::size_t n = d.intervals_until(horizon);
        for (std::size_t k = 0; k < n; ++k) s.push(d.times[k + 1] - d.times[k], d.values[k]);
        return s;
    }

    void push(double dt, double a) {
        if (!(dt > 0.0) || !std::isfinite(a)) throw DomainError("ChordalState: step needs dt > 0 and finite driving");
        steps_.push_back({dt, a});
        dt_sum_ += Rational(dt);
    }

    void append(const ChordalState& other) {
        steps_.insert(steps_.end(), other.steps_.begin(), other.steps_.end());
        dt_sum_ += other.dt_sum_;
    }

    [[nodiscard]] ChordalState prefix(std::size_t k) const {
        ChordalState s;
        for (std::size_t i = 0; i < std::min(k, steps_.size()); ++i) s.push(steps_[i].dt, steps_[i].a);
        return s;
    }

    [[nodiscard]] const std::vector<Step>& steps() const { return steps_; }
    /// 2 * sum of dt, held exactly.
    [[nodiscard]] Rational total_capacity_exact() const { return 2 * dt_sum_; }
    [[nodiscard]] double total_capacity() const { return static_cast<double>(total_capacity_exact()); }

private:
    std::vector<Step> steps_;
    Rational dt_sum_ = 0;
};

struct ChordalImage {
    Complex w;             // g(z)
    Complex displacement;  // g(z) - z
};

/// Index of the step at whose start z is found swallowed, or nullopt. The
/// test before step k: |w - a_k| <= delta_k, or the driving jumped across w
/// (Im w <= delta_k and Re w between a_{k-1} and a_k), with
/// delta_k = collide_scale * sqrt(dt_k).
inline std::optional<std::size_t> chordal_swallow_step(const ChordalState& state, Complex z, double collide_scale,
                                                       ChordalImage* image = nullptr) {
    if (!(z.imag() >= 0.0) || !is_finite(z)) throw DomainError("chordal_apply: z must be finite with Im z >= 0");
    Complex w = z, disp{0.0, 0.0};
    const auto& st = state.steps();
    for (std::size_t k = 0; k < st.size(); ++k) {
        const double delta = collide_scale * std::sqrt(st[k].dt);
        if (std::abs(w - st[k].a) <= delta) return k;
        if (k > 0 && w.imag() <= delta && (w.real() - st[k - 1].a) * (w.real() - st[k].a) <= 0.0) return k;
        slit_step(w, disp, st[k].dt, st[k].a);
    }
    if (image) *image = {w, disp};
    return std::nullopt;
}

/// g(z) for the composed state, or nullopt when z is swallowed.
inline std::optional<ChordalImage> chordal_apply(const ChordalState& state, Complex z, double collide_scale = 2.0) {
    ChordalImage img{z, {0.0, 0.0}};
    if (chordal_swallow_step(state, z, collide_scale, &img)) return std::nullopt;
    return img;
}

// ---------------------------------------------------------------------------
// Block-accelerated chordal flow for uniform time steps

/// Chordal flow over a uniformly sampled driving function. A point far from
/// the driving values of an aligned block of 2^L steps is moved by a single
/// slit map with the block-mean driving plus the second-order variance term
/// 2 tau var / (w - mean)^3. A block is used only when
/// tau <= block_c * dist^2 and dist >= 4 delta, where dist is the distance
/// from w to the range of the block's driving values. block_c = 0 disables
/// merging. Zero driving is reproduced exactly either way.
class ChordalFlow {
public:
    struct Options {
        double collide_scale = 2.0;
        double block_c = 0.005;
    };

    ChordalFlow(const DrivingFunction& d, Options opt) : opt_(opt) {
        d.validate();
        if (d.kind != DrivingKind::chordal_real) throw DomainError("ChordalFlow: needs a chordal driving function");
        a_ = d.values;
        times_ = d.times;
        const std::size_t n = d.intervals();
        dt_ = n ? (d.times.back() - d.times.front()) / static_cast<double>(n) : 1.0;
        for (std::size_t k = 0; k < n; ++k)
            if (std::abs(d.times[k + 1] - d.times[k] - dt_) > 1e-9 * dt_) throw DomainError("ChordalFlow: time steps must be uniform");
        delta_ = opt_.collide_scale * std::sqrt(dt_);
        build_levels(n);
    }

    [[nodiscard]] std::size_t intervals() const { return a_.empty() ? 0 : a_.size() - 1; }
    [[nodiscard]] double dt() const { return dt_; }
    [[nodiscard]] double delta() const { return delta_; }
    [[nodiscard]] double time(std::size_t k) const { return times_[k]; }
    [[nodiscard]] const std::vector<double>& driving() const { return a_; }

    /// Flows z through intervals [k_begin, k_end). Returns the index of the
    /// swallowing test that fired (possibly k_end, the final check), and
    /// leaves the image in w/disp otherwise.
    std::optional<std::size_t> run(Complex& w, Complex& disp, std::size_t k_begin, std::size_t k_end) const {
        std::size_t k = k_begin;
        while (k < k_end) {
            if (collides(w, k)) return k;
            const int L = pick_level(w, k, k_end);
            if (L > 0) {
                const auto& lv = levels_[static_cast<std::size_t>(L - 1)];
                const std::size_t j = k >> L;
                const double tau = dt_ * static_cast<double>(std::size_t{1} << L);
                const double mean = lv.mean[j];
                slit_step(w, disp, tau, mean);
                const Complex u = w - mean;
                const Complex corr = 2.0 * tau * lv.var[j] / (u * u * u);
                w += corr;
                disp += corr;
                k += std::size_t{1} << L;
            } else {
                slit_step(w, disp, dt_, a_[k]);
                ++k;
            }
        }
        if (k_end < a_.size() && collides(w, k_end)) return k_end;
        return std::nullopt;
    }

    /// Swallow index of z within the first k_end intervals (nullopt if never).
    [[nodiscard]] std::optional<std::size_t> swallow_step(Complex z, std::size_t k_end) const {
        if (!(z.imag() >= 0.0) || !is_finite(z)) throw DomainError("ChordalFlow: z must be finite with Im z >= 0");
        Complex w = z, disp{0.0, 0.0};
        return run(w, disp, 0, std::min(k_end, intervals()));
    }

private:
    struct Level {
        std::vector<double> lo, hi, mean, var;
    };

    [[nodiscard]] bool collides(Complex w, std::size_t k) const {
        if (std::abs(w - a_[k]) <= delta_) return true;
        return k > 0 && w.imag() <= delta_ && (w.real() - a_[k - 1]) * (w.real() - a_[k]) <= 0.0;
    }

    [[nodiscard]] int pick_level(Complex w, std::size_t k, std::size_t k_end) const {
        if (opt_.block_c <= 0.0 || levels_.empty()) return 0;
        int L = k == 0 ? static_cast<int>(levels_.size()) : std::min<int>(static_cast<int>(levels_.size()), std::countr_zero(k));
        for (; L > 0; --L) {
            const std::size_t len = std::size_t{1} << L;
            if (k + len > k_end) continue;
            const auto& lv = levels_[static_cast<std::size_t>(L - 1)];
            const std::size_t j = k >> L;
            double lo = lv.lo[j], hi = lv.hi[j];
            if (k > 0) {
                lo = std::min(lo, a_[k - 1]);
                hi = std::max(hi, a_[k - 1]);
            }
            const double gap = std::max({0.0, lo - w.real(), w.real() - hi});
            const double dist2 = gap * gap + w.imag() * w.imag();
            const double tau = dt_ * static_cast<double>(len);
            if (dist2 >= 16.0 * delta_ * delta_ && tau <= opt_.block_c * dist2) return L;
        }
        return 0;
    }

    void build_levels(std::size_t n) {
        // Level L (1-based) holds blocks of 2^L intervals. The variance of a
        // merged block is the mean of the halves' variances plus the squared
        // half-difference of their means, so constant blocks get exactly 0.
        std::vector<double> lo(a_.begin(), a_.begin() + static_cast<std::ptrdiff_t>(n)), hi = lo, mean = lo;
        std::vector<double> var(n, 0.0);
        while (lo.size() >= 2 && levels_.size() < 40) {
            const std::size_t m = lo.size() / 2;
            Level lv;
            lv.lo.resize(m);
            lv.hi.resize(m);
            lv.mean.resize(m);
            lv.var.resize(m);
            for (std::size_t j = 0; j < m; ++j) {
                lv.lo[j] = std::min(lo[2 * j], lo[2 * j + 1]);
                lv.hi[j] = std::max(hi[2 * j], hi[2 * j + 1]);
                lv.mean[j] = 0.5 * (mean[2 * j] + mean[2 * j + 1]);
                const double half = 0.5 * (mean[2 * j] - mean[2 * j + 1]);
                lv.var[j] = 0.5 * (var[2 * j] + var[2 * j + 1]) + half * half;
            }
            lo = lv.lo;
            hi = lv.hi;
            mean = lv.mean;
            var = lv.var;
            levels_.push_back(std::move(lv));
        }
    }

    Options opt_;
    std::vector<double> a_, times_;
    double dt_ = 1.0, delta_ = 0.0;
    std::vector<Level> levels_;
};

// ---------------------------------------------------------------------------
// Real points

struct SwallowReport {
    double point = 0.0;
    bool swallowed = false;
    double time = std::numeric_limits<double>::infinity();
    double terminal = 0.0;  // y = g_t(x) - a(t) at the swallow time or horizon
};

/// Flow of y_t = g_t(x) - a(t) for real x. Each interval applies the exact
/// constant-driving update y -> sign(y) sqrt(y^2 + 4 dt), then subtracts the
/// driving increment; x is swallowed when y changes sign or |y| <= delta.
inline SwallowReport swallow_time_real(const DrivingFunction& d, double x, double horizon, double collide_scale = 2.0) {
    d.validate();
    if (d.kind != DrivingKind::chordal_real) throw DomainError("swallow_time_real: needs a chordal driving function");
    SwallowReport r;
    r.point = x;
    double y = x - d.values.front();
    if (y == 0.0) throw DomainError("swallow_time_real: x coincides with the starting driving value");
    const std::size_t n = d.intervals_until(horizon);
    for (std::size_t k = 0; k < n; ++k) {
        const double dt = d.times[k + 1] - d.times[k];
        const double delta = collide_scale * std::sqrt(dt);
        if (std::abs(y) <= delta) {
            r.swallowed = true;
            r.time = d.times[k];
            r.terminal = y;
            return r;
        }
        const double sgn = y > 0 ? 1.0 : -1.0;
        y = sgn * std::sqrt(y * y + 4.0 * dt) - (d.values[k + 1] - d.values[k]);
        if (y * sgn <= 0.0) {
            r.swallowed = true;
            r.time = d.times[k + 1];
            r.terminal = y;
            return r;
        }
    }
    r.terminal = y;
    return r;
}

struct RaceOutcome {
    bool left_first = false;  // -a swallowed before b
    double time = 0.0;
    std::size_t steps = 0;
};

/// Which of the real points -a < 0 < b chordal SLE_kappa swallows first. The
/// driving is generated on the fly with steps dt = eps * min(|y1|, |y2|)^2,
/// so the resolution follows the nearer point down to `floor` * (a + b).
inline RaceOutcome sle_swallow_race(double kappa, double a, double b, double eps, RngStream& rng,
                                    double floor = 1e-15, std::size_t max_steps = 100000000) {
    if (!(a > 0.0 && b > 0.0) || !(eps > 0.0)) throw DomainError("sle_swallow_race: need a, b, eps > 0");
    double y1 = -a, y2 = b;
    RaceOutcome out;
    const double stop = floor * (a + b);
    for (; out.steps < max_steps; ++out.steps) {
        const double m = std::min(-y1, y2);
        if (m <= stop) {
            out.left_first = -y1 <= y2;
            return out;
        }
        const double dt = eps * m * m;
        const double da = std::sqrt(kappa * dt) * rng.normal();
        y1 = -std::sqrt(y1 * y1 + 4.0 * dt) - da;
        y2 = std::sqrt(y2 * y2 + 4.0 * dt) - da;
        out.time += dt;
        if (y1 >= 0.0) {
            out.left_first = true;
            return out;
        }
        if (y2 <= 0.0) {
            out.left_first = false;
            return out;
        }
    }
    throw NotStoppedError("sle_swallow_race: step budget exhausted", std::min(-y1, y2));
}

// ---------------------------------------------------------------------------
// Chordal hulls

/// Mask of grid cells meeting the hull at time `horizon`, sampled at cell
/// corners: a cell is set when any of its four corners is swallowed. Corner
/// sampling keeps thin diagonal strands of the hull 4-connected. Only corners
/// in the box [min a, max a] x [0, 2 sqrt(t)] (widened by delta and one cell)
/// are queried; the hull lies inside it.
inline GridMask chordal_hull_extract(const DrivingFunction& d, const GridSpec& grid, double horizon,
                                     ChordalFlow::Options opt = {}, unsigned threads = 1) {
    GridMask m(grid);
    const ChordalFlow flow(d, opt);
    const std::size_t n = d.intervals_until(horizon);
    if (n == 0) return m;
    const auto [lo_it, hi_it] = std::minmax_element(d.values.begin(), d.values.begin() + static_cast<std::ptrdiff_t>(n + 1));
    const double t = d.times[n] - d.times.front();
    const double pad = flow.delta() + grid.spacing;
    const double lo = *lo_it - pad, hi = *hi_it + pad, top = 2.0 * std::sqrt(t) + pad;
    const long W = grid.cols + 1, H = grid.rows + 1;
    auto corner = [&](long i, long j) {
        return grid.origin + Complex(static_cast<double>(i) * grid.spacing, static_cast<double>(j) * grid.spacing);
    };
    std::vector<std::size_t> pts;
    for (long j = 0; j < H; ++j)
        for (long i = 0; i < W; ++i) {
            const Complex c = corner(i, j);
            if (c.imag() >= 0.0 && c.imag() <= top && c.real() >= lo && c.real() <= hi)
                pts.push_back(static_cast<std::size_t>(j * W + i));
        }
    const auto hit = parallel_map(pts.size(), threads, [&](std::size_t q) -> unsigned char {
        const auto i = static_cast<long>(pts[q] % static_cast<std::size_t>(W));
        const auto j = static_cast<long>(pts[q] / static_cast<std::size_t>(W));
        return flow.swallow_step(corner(i, j), n).has_value() ? 1 : 0;
    });
    for (std::size_t q = 0; q < pts.size(); ++q) {
        if (!hit[q]) continue;
        const auto i = static_cast<int>(pts[q] % static_cast<std::size_t>(W));
        const auto j = static_cast<int>(pts[q] / static_cast<std::size_t>(W));
        for (int dj = -1; dj <= 0; ++dj)
            for (int di = -1; di <= 0; ++di)
                if (grid.contains_cell(i + di, j + dj)) m.set(i + di, j + dj, true);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Radial flow

/// Radial exterior flow over a uniformly sampled angular driving function.
/// The state is integrated as g = f e^t, whose equation
///   dg/dt = -2 zeta g / (f - zeta)
/// has no exponential part, so long strides far from the unit circle keep
/// the normalization f_t(z) ~ z e^{-t} to near machine precision. Far points
/// take strides over aligned blocks of 2^L intervals with the block-mean
/// zeta when H <= 0.02 (|f| - 1)^2 and H <= 0.25; RK4 substeps satisfy
/// h <= 0.02 |f - zeta|^2. Swallowing: |f - zeta| <= delta or the driving
/// angle sweeps across arg f while ||f| - 1| <= delta.
class RadialFlow {
public:
    struct Options {
        double collide_scale = 2.0;
        double margin = 0.05;  // points with |z| <= e^{t0} (1 + margin) start swallowed
    };

    struct Report {
        bool swallowed = false;
        double time = std::numeric_limits<double>::infinity();
        Complex f{0.0, 0.0};
    };

    RadialFlow(const DrivingFunction& d, Options opt) : opt_(opt), times_(d.times), theta_(d.values) {
        d.validate();
        if (d.kind != DrivingKind::radial_angle) throw DomainError("RadialFlow: needs a radial driving function");
        const std::size_t n = d.intervals();
        dt_ = n ? (d.times.back() - d.times.front()) / static_cast<double>(n) : 1.0;
        for (std::size_t k = 0; k < n; ++k)
            if (std::abs(d.times[k + 1] - d.times[k] - dt_) > 1e-9 * dt_) throw DomainError("RadialFlow: time steps must be uniform");
        delta_ = opt_.collide_scale * std::sqrt(dt_);
        zeta_.resize(theta_.size());
        for (std::size_t k = 0; k < theta_.size(); ++k) zeta_[k] = std::polar(1.0, theta_[k]);
        std::vector<Complex> cur(zeta_.begin(), zeta_.begin() + static_cast<std::ptrdiff_t>(n));
        while (cur.size() >= 2) {
            std::vector<Complex> next(cur.size() / 2);
            for (std::size_t j = 0; j < next.size(); ++j) next[j] = 0.5 * (cur[2 * j] + cur[2 * j + 1]);
            block_mean_.push_back(next);
            cur = std::move(next);
        }
    }

    [[nodiscard]] double start_time() const { return times_.front(); }
    [[nodiscard]] double end_time() const { return times_.back(); }
    [[nodiscard]] double delta() const { return delta_; }
    [[nodiscard]] const std::vector<double>& angles() const { return theta_; }

    /// Runs the flow of z (a point of the original plane; f = z e^{-t0} at
    /// the start time t0) until time t1 or until it is swallowed.
    [[nodiscard]] Report run(Complex z, double t1) const {
        const double t0 = times_.front();
        if (!is_finite(z)) throw DomainError("RadialFlow: z must be finite");
        if (std::abs(z) <= std::exp(t0) * (1.0 + opt_.margin)) return {true, t0, z * std::exp(-t0)};
        return evolve(z * std::exp(-t0), 0, t1);
    }

    /// Flows the value f at sample time times[k_begin] up to t1.
    [[nodiscard]] Report evolve(Complex f, std::size_t k_begin, double t1) const {
        Report r;
        Complex g = f * std::exp(times_[k_begin]);  // g = f e^t
        const std::size_t k_end = std::max(k_begin, std::min(intervals(), intervals_before(t1)));
        std::size_t k = k_begin;
        while (k < k_end) {
            const double t = times_[k];
            f = g * std::exp(-t);
            if (collides(f, k)) return {true, t, f};
            const double d = std::abs(f) - 1.0;
            int L = k == 0 ? static_cast<int>(block_mean_.size()) : std::min<int>(static_cast<int>(block_mean_.size()), std::countr_zero(k));
            for (; L > 0; --L) {
                const double H = dt_ * static_cast<double>(std::size_t{1} << L);
                if (k + (std::size_t{1} << L) <= k_end && d >= 4.0 * delta_ && H <= 0.02 * d * d && H <= 0.25) break;
            }
            const std::size_t len = std::size_t{1} << L;
            const Complex zeta = L > 0 ? block_mean_[static_cast<std::size_t>(L - 1)][k >> L] : zeta_[k];
            integrate(g, t, times_[k + len], zeta);
            k += len;
        }
        const double t_end = times_[k_end];
        r.f = g * std::exp(-t_end);
        if (k_end > k_begin && collides(r.f, k_end)) {
            r.swallowed = true;
            r.time = t_end;
        }
        return r;
    }

    /// Index of the sample time equal to t (within rounding).
    [[nodiscard]] std::size_t sample_index(double t) const {
        const std::size_t k = intervals_before(t);
        if (std::abs(times_[k] - t) > 1e-9 * std::max(1.0, std::abs(t))) throw DomainError("RadialFlow: start time is not a sample time");
        return k;
    }

    /// f_{t1}(z), or nullopt if swallowed by then.
    [[nodiscard]] std::optional<Complex> apply(Complex z, double t1) const {
        const auto r = run(z, t1);
        if (r.swallowed) return std::nullopt;
        return r.f;
    }

private:
    [[nodiscard]] std::size_t intervals() const { return theta_.empty() ? 0 : theta_.size() - 1; }

    [[nodiscard]] std::size_t intervals_before(double t1) const {
        const auto it = std::upper_bound(times_.begin(), times_.end(), t1 + 1e-12 * std::max(1.0, std::abs(t1)));
        const auto n = static_cast<std::size_t>(it - times_.begin());
        return n == 0 ? 0 : n - 1;
    }

    [[nodiscard]] bool collides(Complex f, std::size_t k) const {
        if (std::abs(f - zeta_[k]) <= delta_) return true;
        if (k == 0 || std::abs(std::abs(f) - 1.0) > delta_) return false;
        const double step = theta_[k] - theta_[k - 1];
        const double rel = std::remainder(std::arg(f) - theta_[k - 1], 2.0 * std::numbers::pi);
        return rel * (rel - step) <= 0.0;
    }

    static Complex rhs(Complex g, double t, Complex zeta) {
        const Complex f = g * std::exp(-t);
        return -2.0 * zeta * g / (f - zeta);
    }

    void integrate(Complex& g, double t, double t_end, Complex zeta) const {
        while (t < t_end) {
            const Complex f = g * std::exp(-t);
            const double dz = std::abs(f - zeta);
            double h = std::min({t_end - t, 0.25, 0.02 * dz * dz});
            if (t + h > t_end - 1e-15 * std::abs(t_end)) h = t_end - t;
            const Complex k1 = rhs(g, t, zeta);
            const Complex k2 = rhs(g + 0.5 * h * k1, t + 0.5 * h, zeta);
            const Complex k3 = rhs(g + 0.5 * h * k2, t + 0.5 * h, zeta);
            const Complex k4 = rhs(g + h * k3, t + h, zeta);
            g += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t = (h == t_end - t) ? t_end : t + h;
        }
    }

    Options opt_;
    std::vector<double> times_, theta_;
    std::vector<Complex> zeta_;
    std::vector<std::vector<Complex>> block_mean_;  // level L-1: mean zeta over 2^L intervals
    double dt_ = 1.0, delta_ = 0.0;
};

/// f_{t1} o f_{t0}^{-1}: flows z, a point of the f_{t0} plane (|z| > 1), from
/// t0 to t1. Returns nullopt if z is swallowed on the way.
inline std::optional<Complex> radial_flow(const DrivingFunction& d, Complex z, double t0, double t1,
                                          RadialFlow::Options opt = {}) {
    const RadialFlow flow(d, opt);
    if (!is_finite(z)) throw DomainError("radial_flow: z must be finite");
    const auto r = flow.evolve(z, flow.sample_index(t0), t1);
    if (r.swallowed) return std::nullopt;
    return r.f;
}

struct RadialOptions {
    double kappa = 6.0;
    double dt = 1e-4;
    double t_min = -8.0;
    double t_max = 0.5;
    double collide_scale = 2.0;
    std::size_t circle_points = 1024;
};

struct RadialTouch {
    double time = 0.0;     // T: first time the hull meets the unit circle
    Complex endpoint;      // e(K): the circle sample swallowed first
    DrivingFunction driving;
};

/// Runs radial SLE from t_min and finds the first time a sample of the unit
/// circle is swallowed. Each circle point is integrated only up to the best
/// time found so far.
inline RadialTouch radial_touch(const RadialOptions& o, RngStream& rng) {
    if (o.circle_points < 4) throw DomainError("radial_touch: need at least 4 circle points");
    RadialTouch out;
    out.driving = sle_driving(o.kappa, o.dt, o.t_max - o.t_min, DrivingKind::radial_angle, rng, o.t_min);
    const RadialFlow flow(out.driving, {o.collide_scale, 0.05});
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg_best = 0;
    for (std::size_t j = 0; j < o.circle_points; ++j) {
        const Complex z = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(o.circle_points));
        const auto r = flow.run(z, std::min(best, o.t_max));
        if (r.swallowed && r.time < best) {
            best = r.time;
            arg_best = j;
        }
    }
    if (!std::isfinite(best))
        throw NotStoppedError("radial_touch: horizon exhausted before the hull reached the unit circle", std::exp(o.t_max));
    out.time = best;
    out.endpoint = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(arg_best) / static_cast<double>(o.circle_points));
    return out;
}

struct RadialHull {
    GridMask hull;
    Complex endpoint;
    double time = 0.0;
};

/// Radial SLE hull at the first time it meets the unit circle, rasterized by
/// per-cell swallow queries.
inline RadialHull radial_cci_hull(const RadialOptions& o, RngStream& rng, const GridSpec& grid, unsigned threads = 1) {
    const auto touch = radial_touch(o, rng);
    const RadialFlow flow(touch.driving, {o.collide_scale, 0.05});
    RadialHull out{GridMask(grid), touch.endpoint, touch.time};
    const double reach = 1.0 + grid.spacing;
    const auto hit = parallel_map(grid.size(), threads, [&](std::size_t idx) -> unsigned char {
        const auto i = static_cast<long>(idx % static_cast<std::size_t>(grid.cols));
        const auto j = static_cast<long>(idx / static_cast<std::size_t>(grid.cols));
        const Complex c = grid.cell_center(i, j);
        if (std::abs(c) > reach) return 0;
        return flow.run(c, touch.time).swallowed ? 1 : 0;
    });
    out.hull.bits.assign(hit.begin(), hit.end());
    return out;
}

}  // namespace conflab
