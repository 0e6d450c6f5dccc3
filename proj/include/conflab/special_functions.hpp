#pragma once

// Exact-formula layer: log-gamma, 2F1(1/3,2/3;4/3;x), the crossing function
// F, rectangle cross-ratios and the half-plane -> equilateral triangle map.

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "conflab/error.hpp"
#include "conflab/quadrature.hpp"

namespace conflab::special {

using Complex = std::complex<double>;

/// Natural log of Gamma(x) for x > 0 (Lanczos, g = 7, 9 terms; reflection
/// below 1/2).
inline double gamma_ln(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("gamma_ln: x must be finite and > 0");
    static constexpr double kCoef[9] = {
        0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
        771.32342877765313,   -176.61502916214059,   12.507343278686905,
        -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    if (x < 0.5) {
        // Gamma(x) Gamma(1-x) = pi / sin(pi x), both factors positive here.
        return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - gamma_ln(1.0 - x);
    }
    const double xm = x - 1.0;
    double a = kCoef[0];
    const double t = xm + 7.5;
    for (int i = 1; i < 9; ++i) a += kCoef[i] / (xm + static_cast<double>(i));
    return 0.5 * std::log(2.0 * std::numbers::pi) + (xm + 0.5) * std::log(t) - t + std::log(a);
}

namespace detail {

/// 2F1(1/3, 2/3; 4/3; x) by its power series; converges geometrically for x <= 1/2.
inline double hyp2f1_113_series(double x) {
    double term = 1.0, sum = 1.0;
    for (int k = 0; k < 400; ++k) {
        const double kd = static_cast<double>(k);
        term *= (kd + 1.0 / 3.0) * (kd + 2.0 / 3.0) / ((kd + 4.0 / 3.0) * (kd + 1.0)) * x;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

/// 2F1(1, 2/3; 4/3; y) by its power series (terms (2/3)_k / (4/3)_k y^k).
inline double hyp2f1_1_23_43_series(double y) {
    double term = 1.0, sum = 1.0;
    for (int k = 0; k < 400; ++k) {
        const double kd = static_cast<double>(k);
        term *= (kd + 2.0 / 3.0) / (kd + 4.0 / 3.0) * y;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

/// 3 Gamma(2/3) / Gamma(1/3)^2, the normalisation of F.
inline double cardy_constant() {
    static const double c = 3.0 * std::exp(gamma_ln(2.0 / 3.0) - 2.0 * gamma_ln(1.0 / 3.0));
    return c;
}

}  // namespace detail

/// 2F1(1/3, 2/3; 4/3; x) on [0, 1). Power series up to x = 1/2; above that
/// the connection formula around x = 1, which for these parameters reduces to
///   2F1 = x^{-1/3} / c - (1-x)^{1/3} 2F1(1, 2/3; 4/3; 1-x),   c = cardy_constant().
inline double hyp2f1_113(double x) {
    if (!(x >= 0.0 && x < 1.0)) throw DomainError("hyp2f1_113: x must lie in [0, 1)");
    if (x <= 0.5) return detail::hyp2f1_113_series(x);
    return std::pow(x, -1.0 / 3.0) / detail::cardy_constant() -
           std::cbrt(1.0 - x) * detail::hyp2f1_1_23_43_series(1.0 - x);
}

/// Branch selector exposed for the overlap consistency check.
inline double hyp2f1_113_near_one(double x) {
    if (!(x > 0.0 && x < 1.0)) throw DomainError("hyp2f1_113_near_one: x must lie in (0, 1)");
    return std::pow(x, -1.0 / 3.0) / detail::cardy_constant() -
           std::cbrt(1.0 - x) * detail::hyp2f1_1_23_43_series(1.0 - x);
}

/// Crossing function F(x) = c x^{1/3} 2F1(1/3, 2/3; 4/3; x) on [0, 1].
/// The endpoints are exact.
inline double cardy_F(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("cardy_F: x must lie in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double c = detail::cardy_constant();
    if (x <= 0.5) return c * std::cbrt(x) * detail::hyp2f1_113_series(x);
    return 1.0 - c * std::cbrt(x * (1.0 - x)) * detail::hyp2f1_1_23_43_series(1.0 - x);
}

/// Side lengths of a rectangle; L is the horizontal side.
struct RectangleShape {
    double L = 1.0;
    double l = 1.0;
};

/// Cross-ratio with a flag telling whether the nome computation was clamped.
struct CrossRatio {
    double x = 0.5;
    bool clamped = false;
};

namespace detail {

/// Modular lambda at tau = i*t for t >= 1: (theta2 / theta3)^4, q = exp(-pi t).
inline CrossRatio modular_lambda_imag(double t) {
    const double log_q = -std::numbers::pi * t;
    if (log_q < -700.0) return {0.0, true};
    const double q = std::exp(log_q);
    double th2 = 0.0, th3 = 1.0;
    for (int n = 0; n < 50; ++n) {
        const double nd = static_cast<double>(n);
        const double t2 = std::exp(log_q * nd * (nd + 1.0));
        const double t3 = (n > 0) ? std::exp(log_q * nd * nd) : 0.0;
        th2 += t2;
        th3 += 2.0 * t3;
        if (t2 < 1e-18 && n > 0) break;
    }
    th2 *= 2.0 * std::pow(q, 0.25);
    const double r = th2 / th3;
    const double lam = (r * r) * (r * r);
    return {lam, lam < 1e-15};
}

}  // namespace detail

/// Cross-ratio x(L, l) of an L x l rectangle: the x for which a conformal map
/// sends the rectangle to the half-plane with its left and right sides going
/// to (-inf, 0] and [1 - x, 1]. Equals the modular lambda function at i L/l,
/// evaluated on whichever side of the duality x(L,l) + x(l,L) = 1 has the
/// smaller nome. The corner ordering is fixed so that the square gives 1/2.
inline CrossRatio rectangle_cross_ratio_checked(const RectangleShape& shape) {
    if (!(shape.L > 0.0 && shape.l > 0.0) || !std::isfinite(shape.L) || !std::isfinite(shape.l))
        throw DomainError("rectangle_cross_ratio: side lengths must be positive");
    const double t = shape.L / shape.l;
    if (t >= 1.0) return detail::modular_lambda_imag(t);
    auto dual = detail::modular_lambda_imag(1.0 / t);
    return {1.0 - dual.x, dual.clamped};
}

inline double rectangle_cross_ratio(const RectangleShape& shape) {
    return rectangle_cross_ratio_checked(shape).x;
}

/// Cardy's prediction for the left-right crossing of an L x l rectangle.
inline double rectangle_crossing_probability(const RectangleShape& shape) {
    return cardy_F(rectangle_cross_ratio(shape));
}

/// Vertices of the reference equilateral triangle.
inline const Complex kTriangleA{0.0, 0.0};
inline const Complex kTriangleB = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
inline const Complex kTriangleC = std::polar(1.0, std::numbers::pi / 3.0);

namespace detail {

/// Principal power with the cut on the negative imaginary axis side: inputs in
/// the closed upper half-plane keep arg in [0, pi] (a -0.0 imaginary part would
/// otherwise select arg = -pi on the negative real axis).
inline Complex upper_pow(Complex w, double p) {
    w = Complex(w.real(), w.imag() + 0.0);
    if (w.imag() == 0.0 && w.real() < 0.0) return std::polar(std::pow(-w.real(), p), std::numbers::pi * p);
    return std::pow(w, p);
}

/// Integral of t^{-2/3} (t-1)^{-2/3} along the straight segment from `from`
/// (the prevertex 0 or 1) to z. The substitution t = from + (z - from) s^3
/// absorbs the endpoint singularity: the factor (z - from)^{-2/3} s^{-2} of
/// the singular power cancels against the Jacobian 3 (z - from) s^2.
inline Complex sc_segment(double from, Complex z) {
    const Complex dz = z - from;
    if (std::abs(dz) == 0.0) return {0.0, 0.0};
    const Complex lead = 3.0 * upper_pow(dz, 1.0 / 3.0);
    // The regular factor is (t-1)^{-2/3} when leaving 0 and t^{-2/3} when leaving 1.
    const double shift = from == 0.0 ? -1.0 : 0.0;
    auto g = [&](double s) -> Complex {
        const Complex t = from + dz * (s * s * s);
        return lead * upper_pow(t + shift, -2.0 / 3.0);
    };
    return quad::integrate(g, 0.0, 1.0, 1e-13, 1e-13, 50);
}

inline double beta_third() {
    static const double b = std::exp(2.0 * gamma_ln(1.0 / 3.0) - gamma_ln(2.0 / 3.0));
    return b;
}

}  // namespace detail

/// Schwarz-Christoffel map from the closed upper half-plane onto the
/// equilateral triangle A = 0, B = e^{2i pi/3}, C = e^{i pi/3}:
///   Phi(z) = -(1/B(1/3,1/3)) * integral_0^z t^{-2/3} (t-1)^{-2/3} dt,
/// so Phi(0) = A, Phi(1) = C and Phi(inf) = B. The integral runs along a
/// straight segment from whichever prevertex (0 or 1) is nearer.
inline Complex triangle_map(Complex z) {
    if (!(z.imag() >= 0.0) || !std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw DomainError("triangle_map: z must be finite with Im z >= 0");
    const double scale = -1.0 / detail::beta_third();
    if (z == Complex(0.0, 0.0)) return kTriangleA;
    if (std::abs(z) <= std::abs(z - 1.0)) return scale * detail::sc_segment(0.0, z);
    return kTriangleC + scale * detail::sc_segment(1.0, z);
}

/// Position along [B, C] measured from B (in units of the side) of the image
/// of a real point x >= 1. Equals F(1/x), the closed form of the side integral.
inline double triangle_side_position(double x) {
    if (!(x >= 1.0)) throw DomainError("triangle_side_position: x must be >= 1");
    return cardy_F(1.0 / x);
}

}  // namespace conflab::special
