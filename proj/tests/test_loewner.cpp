#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "conflab/loewner.hpp"
#include "conflab/special_functions.hpp"

using namespace conflab;

namespace {

// sqrt(z^2 + 4t) on the branch mapping H minus the slit [0, 2i sqrt(t)] onto H.
Complex slit_closed_form(Complex z, double t) {
    Complex s = std::sqrt(z * z + 4.0 * t);
    if (s.imag() < 0 || (s.imag() == 0 && s.real() * z.real() < 0)) s = -s;
    return s;
}

DrivingFunction zero_driving(double dt, std::size_t n, DrivingKind kind = DrivingKind::chordal_real, double t0 = 0.0) {
    DrivingFunction d;
    d.kind = kind;
    for (std::size_t k = 0; k <= n; ++k) {
        d.times.push_back(t0 + dt * static_cast<double>(k));
        d.values.push_back(0.0);
    }
    return d;
}

}  // namespace

TEST_CASE("driving functions", "[loewner][driving]") {
    RngStream rng(1, 0);
    auto flat = sle_driving(0.0, 0.01, 1.0, DrivingKind::chordal_real, rng);
    REQUIRE(flat.times.size() == 101);
    for (double v : flat.values) REQUIRE(v == 0.0);
    REQUIRE(flat.intervals_until(0.5) == 50);
    REQUIRE(flat.intervals_until(10.0) == 100);

    std::vector<double> sq(10000);
    for (std::size_t t = 0; t < sq.size(); ++t) {
        RngStream r = rng.substream(t);
        const double v = sle_driving(6.0, 0.05, 2.0, DrivingKind::chordal_real, r).values.back();
        sq[t] = v * v;
    }
    auto m = stats::mean(sq);
    REQUIRE(std::abs(m.value - 12.0) <= 3 * m.error);

    std::vector<std::size_t> bins(16, 0);
    for (std::size_t t = 0; t < 2000; ++t) {
        RngStream r = rng.substream(50000 + t);
        const double th = sle_driving(6.0, 0.1, 0.1, DrivingKind::radial_angle, r).values.front();
        REQUIRE(th >= 0.0);
        REQUIRE(th < 2 * std::numbers::pi);
        ++bins[static_cast<std::size_t>(th / (2 * std::numbers::pi) * 16)];
    }
    REQUIRE(stats::chi_square_uniform_pvalue(bins) > 0.01);

    std::ostringstream os;
    write_driving_csv(os, zero_driving(0.5, 1));
    REQUIRE(os.str() == "t,value\n0,0\n0.5,0\n");
}

TEST_CASE("chordal_apply closed forms", "[loewner][chordal]") {
    ChordalState empty;
    REQUIRE(chordal_apply(empty, {0.3, 0.7})->w == Complex(0.3, 0.7));

    ChordalState one;
    one.push(1.0, 0.0);
    const auto img = chordal_apply(one, {0.0, 3.0});
    REQUIRE(std::abs(img->w - Complex(0.0, std::sqrt(5.0))) < 1e-15);

    // Many small steps with zero driving compose to the slit map exactly.
    const auto state = ChordalState::from_driving(zero_driving(1e-3, 1000), 1.0);
    REQUIRE(state.total_capacity() == Catch::Approx(2.0).epsilon(1e-12));
    RngStream rng(2, 0);
    int tested = 0;
    while (tested < 100) {
        const Complex z{6 * rng.uniform() - 3, 4 * rng.uniform()};
        if (std::abs(z.real()) < 0.1 && z.imag() < 2.2) continue;
        const auto g = chordal_apply(state, z);
        REQUIRE(g);
        REQUIRE(std::abs(g->w - slit_closed_form(z, 1.0)) < 1e-10);
        REQUIRE(g->w.imag() >= 0.0);
        ++tested;
    }
    // Points on the slit are swallowed, points above it are not.
    REQUIRE_FALSE(chordal_apply(state, {0.0, 1.5}));
    REQUIRE(chordal_apply(state, {0.0, 2.5}));
    REQUIRE_THROWS_AS(chordal_apply(state, {0.0, -1.0}), DomainError);
}

TEST_CASE("chordal expansion at infinity", "[loewner][chordal]") {
    const double t = 1.0;
    const auto zero = ChordalState::from_driving(zero_driving(1e-3, 1000), t);
    const Complex z{6e5, 8e5};  // |z| = 1e6
    const auto g = chordal_apply(zero, z);
    REQUIRE(std::abs(g->displacement - 2 * t / z) <= 1e-6 * (2 * t / std::abs(z)));

    // With Brownian driving the 1/z^2 term is odd in z; averaging z (g(z) - z)
    // over z = +-R removes it and leaves the capacity 2t.
    RngStream rng(3, 0);
    for (int rep = 0; rep < 5; ++rep) {
        RngStream r = rng.substream(static_cast<std::uint64_t>(rep));
        const auto s = ChordalState::from_driving(sle_driving(6.0, 1e-3, t, DrivingKind::chordal_real, r), t);
        const double R = 1e6;
        const double beta = 0.5 * (R * chordal_apply(s, {R, 0})->displacement.real() -
                                   R * chordal_apply(s, {-R, 0})->displacement.real());
        REQUIRE(std::abs(beta - 2 * t) <= 1e-6 * 2 * t);
    }
}

TEST_CASE("capacity is additive exactly", "[loewner][chordal]") {
    ChordalState a, b;
    for (int k = 0; k < 300; ++k) a.push(1.0 / 1024, 0.01 * k);
    for (int k = 0; k < 77; ++k) b.push(1.0 / 4096, -0.02 * k);
    ChordalState c = a;
    c.append(b);
    REQUIRE(c.total_capacity_exact() == a.total_capacity_exact() + b.total_capacity_exact());
    REQUIRE(c.total_capacity_exact() == Rational(2 * 300, 1024) + Rational(2 * 77, 4096));
    REQUIRE(c.steps().size() == 377);
    // Non-dyadic steps still add exactly as rationals of their binary values.
    ChordalState d;
    for (int k = 0; k < 10; ++k) d.push(0.1, 0.0);
    REQUIRE(d.total_capacity_exact() == 20 * Rational(0.1));
}

TEST_CASE("swallowing is monotone in the prefix", "[loewner][chordal]") {
    RngStream rng(4, 0);
    auto drv = sle_driving(6.0, 1e-3, 0.5, DrivingKind::chordal_real, rng);
    const auto full = ChordalState::from_driving(drv, 0.5);
    for (int q = 0; q < 40; ++q) {
        const Complex z{2 * rng.uniform() - 1, 1.2 * rng.uniform()};
        const auto k = chordal_swallow_step(full, z, 2.0);
        for (std::size_t len : {50u, 150u, 300u, 500u}) {
            const bool sw = !chordal_apply(full.prefix(len), z).has_value();
            REQUIRE(sw == (k.has_value() && *k < len));
            if (!sw) REQUIRE(chordal_apply(full.prefix(len), z)->w.imag() > 0.0);
        }
    }
}

TEST_CASE("block-merged flow matches the step-by-step flow", "[loewner][chordal]") {
    RngStream rng(5, 0);
    auto drv = sle_driving(6.0, 1e-4, 0.3, DrivingKind::chordal_real, rng);
    const ChordalFlow fast(drv, {2.0, 0.005});
    const ChordalFlow slow(drv, {2.0, 0.0});
    const auto n = drv.intervals();
    int agree = 0, total = 0;
    double max_err = 0.0;
    for (int q = 0; q < 200; ++q) {
        const Complex z{3 * rng.uniform() - 1.5, 1.5 * rng.uniform()};
        Complex w1 = z, d1{}, w2 = z, d2{};
        const auto s1 = fast.run(w1, d1, 0, n);
        const auto s2 = slow.run(w2, d2, 0, n);
        ++total;
        agree += s1.has_value() == s2.has_value();
        if (!s1 && !s2 && std::abs(w2 - drv.values.back()) > 0.1) max_err = std::max(max_err, std::abs(w1 - w2));
    }
    REQUIRE(agree >= total - 4);
    REQUIRE(max_err < 1e-3);
    // Zero driving: blocks are exact.
    const auto zd = zero_driving(1e-4, 10000);
    const ChordalFlow zf(zd, {2.0, 0.005});
    Complex w{0.5, 0.5}, disp{};
    REQUIRE_FALSE(zf.run(w, disp, 0, 10000));
    REQUIRE(std::abs(w - slit_closed_form({0.5, 0.5}, 1.0)) < 1e-12);
}

TEST_CASE("real-point swallowing", "[loewner][real]") {
    const auto zd = zero_driving(1e-3, 5000);
    const auto r = swallow_time_real(zd, 1.0, 5.0);
    REQUIRE_FALSE(r.swallowed);
    REQUIRE(std::abs(r.terminal * r.terminal - (1.0 + 4.0 * 5.0)) < 1e-10);
    REQUIRE_THROWS_AS(swallow_time_real(zd, 0.0, 1.0), DomainError);

    // Symmetric race with fixed-step driving.
    RngStream rng(6, 0);
    std::size_t left = 0, decided = 0;
    for (std::size_t t = 0; t < 2000; ++t) {
        RngStream r6 = rng.substream(t);
        const auto d = sle_driving(6.0, 1e-3, 20.0, DrivingKind::chordal_real, r6);
        const auto a = swallow_time_real(d, -1.0, 20.0), b = swallow_time_real(d, 1.0, 20.0);
        if (!a.swallowed && !b.swallowed) continue;
        ++decided;
        left += a.time < b.time || (a.time == b.time && std::abs(a.terminal) < std::abs(b.terminal));
    }
    REQUIRE(decided > 1900);
    auto e = stats::binomial(left, decided);
    REQUIRE(std::abs(e.value - 0.5) <= 3 * e.error);
}

TEST_CASE("adaptive SLE race reproduces the crossing function", "[loewner][real]") {
    const RngStream rng(7, 0);
    auto run = [&](double a, double b, std::size_t n, std::uint64_t base) {
        std::size_t left = 0;
        for (std::size_t t = 0; t < n; ++t) {
            RngStream r = rng.substream(base + t);
            left += sle_swallow_race(6.0, a, b, 2e-3, r).left_first;
        }
        return stats::binomial(left, n);
    };
    auto sym = run(1.0, 1.0, 3000, 0);
    REQUIRE(std::abs(sym.value - 0.5) <= 3 * sym.error);
    auto asym = run(2.0, 1.0, 3000, 100000);
    REQUIRE(std::abs(asym.value - special::cardy_F(1.0 / 3.0)) <= 3 * asym.error + 0.02);
    RngStream r0 = rng.substream(999);
    REQUIRE_THROWS_AS(sle_swallow_race(0.0, 1.0, 1.0, 1e-2, r0, 1e-15, 10000), NotStoppedError);
}

TEST_CASE("chordal hulls", "[loewner][hull]") {
    const GridSpec grid{{-1.0, 0.0}, 1.0 / 64, 128, 96};  // x = 0 runs between columns 63 and 64
    SECTION("tiny horizon gives an empty mask") {
        RngStream rng(8, 0);
        auto d = sle_driving(6.0, 1e-4, 0.01, DrivingKind::chordal_real, rng);
        REQUIRE(chordal_hull_extract(d, grid, 0.0).empty());
    }
    SECTION("zero driving gives the vertical slit") {
        const double t = 0.25;  // tip at 2 sqrt(t) = 1
        auto m = chordal_hull_extract(zero_driving(1e-5, 25000), grid, t);
        for (int j = 0; j < grid.rows; ++j)
            for (int i = 0; i < grid.cols; ++i) {
                const Complex c = grid.cell_center(i, j);
                if (m.get(i, j)) {
                    REQUIRE(std::abs(c.real()) <= grid.spacing);
                    REQUIRE(c.imag() <= 1.0 + grid.spacing);
                }
            }
        for (int j = 0; j < grid.rows; ++j)
            if (grid.cell_center(63, j).imag() < 1.0 - grid.spacing) REQUIRE((m.get(63, j) || m.get(64, j)));
        REQUIRE(m.count() >= 62);
    }
}

TEST_CASE("SLE6 hulls are connected", "[loewner][hull]") {
    const double h = 1.0 / 256;
    const GridSpec grid{{-1.0, 0.0}, h, 512, 128};
    const RngStream rng(9, 0);
    int connected = 0;
    for (std::uint64_t run = 0; run < 100; ++run) {
        RngStream r = rng.substream(run);
        auto d = sle_driving(6.0, h * h / 4, 0.02, DrivingKind::chordal_real, r);
        auto m = chordal_hull_extract(d, grid, 0.02);
        connected += label_components(m).sizes.size() == 1;
    }
    REQUIRE(connected >= 95);
}

TEST_CASE("radial flow", "[loewner][radial]") {
    SECTION("identity when t1 = t0") {
        const auto d = zero_driving(1e-3, 100, DrivingKind::radial_angle);
        REQUIRE(*radial_flow(d, {-2.0, 0.5}, 0.0, 0.0) == Complex(-2.0, 0.5));
    }
    SECTION("constant driving against a fine-step reference integration") {
        const double T = 0.5;
        const auto d = zero_driving(1e-3, 500, DrivingKind::radial_angle);
        const auto f = radial_flow(d, {-2.0, 0.0}, 0.0, T);
        REQUIRE(f);
        using State = std::array<double, 2>;
        auto rhs = [](const State& s, State& ds, double) {
            const Complex fz{s[0], s[1]};
            const Complex v = -fz * (fz + 1.0) / (fz - 1.0);
            ds = {v.real(), v.imag()};
        };
        State s{-2.0, 0.0};
        boost::numeric::odeint::integrate_const(boost::numeric::odeint::runge_kutta4<State>(), rhs, s, 0.0, T, 1e-5);
        REQUIRE(std::abs(*f - Complex(s[0], s[1])) < 1e-6);
    }
    SECTION("exterior normalization f_t(z) = z e^{-t} + O(1)") {
        RngStream rng(10, 0);
        const double t_min = -8.0;
        auto d = sle_driving(6.0, 1e-3, 8.0, DrivingKind::radial_angle, rng, t_min);
        const RadialFlow flow(d, {});
        for (double t : {-4.0, -1.0, 0.0}) {
            const Complex z = std::polar(1e6, 0.3);
            const auto r = flow.run(z, t);
            REQUIRE_FALSE(r.swallowed);
            const Complex coef = r.f / z;
            REQUIRE(std::abs(coef - std::exp(-t)) <= 1e-4 * std::exp(-t));
        }
    }
    SECTION("points inside the initial disc are swallowed at t_min") {
        RngStream rng(11, 0);
        auto d = sle_driving(6.0, 1e-3, 1.0, DrivingKind::radial_angle, rng, -8.0);
        const RadialFlow flow(d, {});
        const auto r = flow.run({1e-4, 0.0}, 0.0);
        REQUIRE(r.swallowed);
        REQUIRE(r.time == -8.0);
    }
}

TEST_CASE("radial SLE touch point is uniform", "[loewner][radial]") {
    RadialOptions o;
    o.dt = 1e-3;
    o.circle_points = 256;
    const RngStream rng(12, 0);
    std::vector<std::size_t> bins(16, 0);
    for (std::uint64_t run = 0; run < 1000; ++run) {
        RngStream r = rng.substream(run);
        const auto touch = radial_touch(o, r);
        REQUIRE(touch.time <= o.t_max);
        REQUIRE(touch.time > o.t_min);
        double th = std::arg(touch.endpoint);
        if (th < 0) th += 2 * std::numbers::pi;
        ++bins[std::min<std::size_t>(15, static_cast<std::size_t>(th / (2 * std::numbers::pi) * 16))];
    }
    REQUIRE(stats::chi_square_uniform_pvalue(bins) > 0.01);
}

TEST_CASE("radial hull contains the origin", "[loewner][radial]") {
    RadialOptions o;
    o.dt = 1e-3;
    o.circle_points = 256;
    RngStream rng(13, 0);
    const GridSpec grid = centered_grid({0, 0}, 2.2, 45);  // centre cell on 0
    const auto hull = radial_cci_hull(o, rng, grid);
    const auto c = grid.cell_of({0, 0});
    REQUIRE(hull.hull.get(c->first, c->second));
    REQUIRE(std::abs(std::abs(hull.endpoint) - 1.0) < 1e-12);
}
