#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <type_traits>

namespace conflab::quad {

namespace detail {

// 15-point Kronrod nodes on [0, 1] (symmetric), with the embedded 7-point
// Gauss rule on the odd-indexed nodes.
inline constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
double magnitude(const T& v) {
    return std::abs(v);
}

template <class T, class F>
void gk15(F& f, double a, double b, T& kronrod, double& err) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const T fc = f(c);
    T k = fc * kKronrod[7];
    T g = fc * kGauss[3];
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kNodes[static_cast<std::size_t>(i)];
        const T s = f(c - dx) + f(c + dx);
        k += s * kKronrod[static_cast<std::size_t>(i)];
        if (i % 2 == 1) g += s * kGauss[static_cast<std::size_t>(i / 2)];
    }
    kronrod = k * h;
    err = magnitude(T((k - g) * h));
}

template <class T, class F>
T adapt(F& f, double a, double b, double abs_tol, double rel_tol, int depth, const T& whole,
        double whole_err) {
    if (depth <= 0 || whole_err <= std::max(abs_tol, rel_tol * magnitude(whole))) return whole;
    const double m = 0.5 * (a + b);
    T left, right;
    double el, er;
    gk15<T>(f, a, m, left, el);
    gk15<T>(f, m, b, right, er);
    return adapt<T>(f, a, m, 0.5 * abs_tol, rel_tol, depth - 1, left, el) +
           adapt<T>(f, m, b, 0.5 * abs_tol, rel_tol, depth - 1, right, er);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (7/15) quadrature of f over [a, b]. Works for real
/// or complex valued integrands. The integrand must be finite on the closed
/// interval; remove endpoint singularities by substitution first.
template <class F>
auto integrate(F&& f, double a, double b, double abs_tol = 1e-13, double rel_tol = 1e-13,
               int max_depth = 40) {
    using T = std::decay_t<std::invoke_result_t<F&, double>>;
    T whole;
    double err;
    detail::gk15<T>(f, a, b, whole, err);
    return detail::adapt<T>(f, a, b, abs_tol, rel_tol, max_depth, whole, err);
}

}  // namespace conflab::quad
