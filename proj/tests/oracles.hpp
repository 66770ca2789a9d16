#pragma once

// Test-only reference implementations, kept independent of the library code
// paths they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracles {

/// Central finite differences of a scalar function of a flat vector.
inline std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> point, double step = 1e-5) {
    std::vector<double> grad(point.size());
    for (std::size_t i = 0; i < point.size(); ++i) {
        double saved = point[i];
        point[i] = saved + step;
        double hi = f(point);
        point[i] = saved - step;
        double lo = f(point);
        point[i] = saved;
        grad[i] = (hi - lo) / (2.0 * step);
    }
    return grad;
}

/// Gauss-Jordan inverse for the small dense systems in the GP oracle.
inline std::vector<double> invert_dense(std::vector<double> a, std::size_t n) {
    std::vector<double> inv(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
        if (a[pivot * n + col] == 0.0) throw std::runtime_error("invert_dense: singular matrix");
        if (pivot != col)
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(a[pivot * n + c], a[col * n + c]);
                std::swap(inv[pivot * n + c], inv[col * n + c]);
            }
        double d = a[col * n + col];
        for (std::size_t c = 0; c < n; ++c) {
            a[col * n + c] /= d;
            inv[col * n + c] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            double factor = a[r * n + col];
            if (factor == 0.0) continue;
            for (std::size_t c = 0; c < n; ++c) {
                a[r * n + c] -= factor * a[col * n + c];
                inv[r * n + c] -= factor * inv[col * n + c];
            }
        }
    }
    return inv;
}

/// Direct dense evaluation of the Gaussian-process posterior for one test
/// point: mu = k*^T (K + sn^2 I)^-1 y, var = k** - k*^T (K+sn^2 I)^-1 k* + sn^2.
struct GpOracleResult {
    double mean = 0.0;
    double sd = 0.0;
};
inline GpOracleResult gp_posterior_dense(const std::vector<std::vector<double>>& x,
                                         const std::vector<double>& y,
                                         const std::vector<double>& x_star, double signal_sd,
                                         double length_scale, double noise_sd,
                                         double target_mean = 0.0) {
    std::size_t n = y.size();
    auto kernel = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
        return signal_sd * signal_sd * std::exp(-s / (2.0 * length_scale * length_scale));
    };
    std::vector<double> k(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            k[i * n + j] = kernel(x[i], x[j]) + (i == j ? noise_sd * noise_sd : 0.0);
    std::vector<double> kinv = invert_dense(k, n);
    std::vector<double> kstar(n);
    for (std::size_t i = 0; i < n; ++i) kstar[i] = kernel(x[i], x_star);

    GpOracleResult res;
    double mu = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) mu += kstar[i] * kinv[i * n + j] * (y[j] - target_mean);
    res.mean = mu + target_mean;
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) quad += kstar[i] * kinv[i * n + j] * kstar[j];
    double var = signal_sd * signal_sd - quad + noise_sd * noise_sd;
    res.sd = std::sqrt(std::max(0.0, var));
    return res;
}

// Brute-force metric loops (deliberately plain).

inline double brute_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double brute_pcc(const std::vector<double>& y, const std::vector<double>& p) {
    double my = brute_mean(y), mp = brute_mean(p);
    double num = 0.0, dy = 0.0, dp = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        num += (y[i] - my) * (p[i] - mp);
        dy += (y[i] - my) * (y[i] - my);
        dp += (p[i] - mp) * (p[i] - mp);
    }
    return num / (std::sqrt(dy) * std::sqrt(dp));
}

inline double brute_r2(const std::vector<double>& y, const std::vector<double>& p) {
    double my = brute_mean(y);
    double res = 0.0, tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        res += (y[i] - p[i]) * (y[i] - p[i]);
        tot += (y[i] - my) * (y[i] - my);
    }
    return 1.0 - res / tot;
}

inline double brute_rmse(const std::vector<double>& y, const std::vector<double>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - p[i]) * (y[i] - p[i]);
    return std::sqrt(s / static_cast<double>(y.size()));
}

inline double brute_mae(const std::vector<double>& y, const std::vector<double>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - p[i]);
    return s / static_cast<double>(y.size());
}

inline double brute_coverage(const std::vector<double>& y,
                             const std::vector<std::pair<double, double>>& iv) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] >= iv[i].first && y[i] <= iv[i].second) ++c;
    return static_cast<double>(c) / static_cast<double>(y.size());
}

inline double brute_width(const std::vector<std::pair<double, double>>& iv) {
    double s = 0.0;
    for (const auto& [lo, hi] : iv) s += hi - lo;
    return s / static_cast<double>(iv.size());
}

inline double brute_composite(double cov, double width) { return 0.75 * cov + 0.25 / width; }

/// Sorted-array linear-interpolation quantile.
inline double sorted_quantile(std::vector<double> v, double tau) {
    std::sort(v.begin(), v.end());
    double h = (static_cast<double>(v.size()) - 1.0) * tau;
    std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] + (h - lo) * (v[lo + 1] - v[lo]);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Kolmogorov-Smirnov statistic of samples against the standard normal CDF.
inline double ks_statistic_vs_normal(std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    std::size_t n = samples.size();
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double cdf = normal_cdf(samples[i]);
        double hi = static_cast<double>(i + 1) / static_cast<double>(n);
        double lo = static_cast<double>(i) / static_cast<double>(n);
        d = std::max({d, std::abs(cdf - hi), std::abs(cdf - lo)});
    }
    return d;
}

/// Closed-form posterior for Bayesian linear regression with prior
/// N(0, tau^2 I) and known noise sd: N(A^-1 X^T y / s^2, A^-1),
/// A = X^T X / s^2 + I / tau^2.
struct BlrPosterior {
    std::vector<double> mean;
    std::vector<double> sd;  // marginal posterior standard deviations
};
inline BlrPosterior blr_posterior(const std::vector<std::vector<double>>& x,
                                  const std::vector<double>& y, double noise_sd,
                                  double prior_sd) {
    std::size_t n = y.size(), d = x[0].size();
    std::vector<double> a(d * d, 0.0), b(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t c = 0; c < d; ++c) a[r * d + c] += x[i][r] * x[i][c];
            b[r] += x[i][r] * y[i];
        }
    double inv_noise = 1.0 / (noise_sd * noise_sd);
    for (auto& v : a) v *= inv_noise;
    for (auto& v : b) v *= inv_noise;
    for (std::size_t r = 0; r < d; ++r) a[r * d + r] += 1.0 / (prior_sd * prior_sd);
    std::vector<double> ainv = invert_dense(a, d);
    BlrPosterior post;
    post.mean.assign(d, 0.0);
    post.sd.assign(d, 0.0);
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) post.mean[r] += ainv[r * d + c] * b[c];
        post.sd[r] = std::sqrt(ainv[r * d + r]);
    }
    return post;
}

}  // namespace oracles
