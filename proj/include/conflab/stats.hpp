#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace conflab::stats {

/// Point estimate with its standard error.
struct Estimate {
    double value = 0.0;
    double error = 0.0;  // standard error
};

/// Fraction successes/trials with the binomial standard error.
inline Estimate binomial(std::size_t successes, std::size_t trials) {
    if (trials == 0) throw std::invalid_argument("binomial: zero trials");
    const double p = static_cast<double>(successes) / static_cast<double>(trials);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials))};
}

/// Sum in index order with pairwise splitting (stable and order-fixed).
inline double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t h = xs.size() / 2;
    return pairwise_sum(xs.first(h)) + pairwise_sum(xs.subspan(h));
}

/// Sample mean and the standard error of the mean.
inline Estimate mean(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean: empty sample");
    const double n = static_cast<double>(xs.size());
    const double m = pairwise_sum(xs) / n;
    if (xs.size() == 1) return {m, 0.0};
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - m) * (xs[i] - m);
    const double var = pairwise_sum(sq) / (n - 1.0);
    return {m, std::sqrt(var / n)};
}

/// One-sample Kolmogorov-Smirnov distance against a continuous CDF.
inline double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw std::invalid_argument("ks_distance: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

/// Two-sample Kolmogorov-Smirnov distance.
inline double ks_distance_2(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance_2: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

/// Asymptotic KS critical value c(alpha)/sqrt(n_eff).
inline double ks_critical(double alpha, double n_eff) {
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(n_eff);
}

/// Asymptotic KS p-value (Kolmogorov distribution tail) for distance d.
inline double ks_pvalue(double d, double n_eff) {
    const double sn = std::sqrt(n_eff);
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

/// Pearson chi-square p-value of bin counts against equal expected counts.
inline double chi_square_uniform_pvalue(std::span<const std::size_t> counts) {
    if (counts.size() < 2) throw std::invalid_argument("chi-square: need >= 2 bins");
    double total = 0.0;
    for (auto c : counts) total += static_cast<double>(c);
    const double expected = total / static_cast<double>(counts.size());
    double chi2 = 0.0;
    for (auto c : counts) chi2 += (static_cast<double>(c) - expected) * (static_cast<double>(c) - expected) / expected;
    const double dof = static_cast<double>(counts.size() - 1);
    return boost::math::gamma_q(dof / 2.0, chi2 / 2.0);
}

/// Ordinary least squares y = slope*x + intercept.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double residual_norm = 0.0;
};

/// Weighted least squares. With `known_variance` the slope error comes from
/// the weights alone (weights = 1/sigma^2); otherwise from the residuals.
inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y,
                            std::span<const double> w, bool known_variance) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n || w.size() != n) throw std::invalid_argument("linear_fit: bad sizes");
    double sw = 0, sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0) throw std::invalid_argument("linear_fit: degenerate abscissae");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (f.slope * x[i] + f.intercept);
        rss += w[i] * r * r;
    }
    f.residual_norm = std::sqrt(rss);
    if (known_variance) {
        f.slope_stderr = std::sqrt(1.0 / sxx);
    } else {
        f.slope_stderr = n > 2 ? std::sqrt(rss / static_cast<double>(n - 2) / sxx) : 0.0;
    }
    return f;
}

inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    std::vector<double> w(x.size(), 1.0);
    return linear_fit(x, y, w, false);
}

}  // namespace conflab::stats
