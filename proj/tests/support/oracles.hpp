#pragma once

// Independent reference computations used by the test suites. Nothing here calls into
// the library's statistic code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace oracle {

/// P(sup |BB| <= x) = 1 - 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 x^2).
inline double kolmogorov_cdf(double x) {
    if (x <= 0.0) return 0.0;
    double sum = 0.0;
    for (int j = 1; j <= 200; ++j) {
        const double term = std::exp(-2.0 * j * j * x * x);
        sum += (j % 2 == 1 ? term : -term);
        if (term < 1e-18) break;
    }
    return 1.0 - 2.0 * sum;
}

inline double kolmogorov_quantile(double level) {
    double lo = 0.1;
    double hi = 5.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (kolmogorov_cdf(mid) < level ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// sup_x |F_a(x) - F_b(x)| between two empirical distributions.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

/// sup_x |F_n(x) - F(x)| against a continuous CDF.
inline double ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf) {
    std::sort(a.begin(), a.end());
    const double n = static_cast<double>(a.size());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double f = cdf(a[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

inline double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Population variance (1/n).
inline double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

inline double covariance(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = mean(a);
    const double mb = mean(b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / static_cast<double>(a.size());
}

inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    return covariance(a, b) / std::sqrt(variance(a) * variance(b));
}

inline double skewness(const std::vector<double>& v) {
    const double m = mean(v);
    double m2 = 0.0;
    double m3 = 0.0;
    for (double x : v) {
        m2 += (x - m) * (x - m);
        m3 += (x - m) * (x - m) * (x - m);
    }
    const double n = static_cast<double>(v.size());
    m2 /= n;
    m3 /= n;
    return m3 / std::pow(m2, 1.5);
}

/// Type-1 empirical quantile computed by sorting a copy.
inline double quantile(std::vector<double> v, double level) {
    std::sort(v.begin(), v.end());
    auto idx = static_cast<std::size_t>(std::ceil(level * static_cast<double>(v.size()) - 1e-9));
    idx = std::clamp<std::size_t>(idx, 1, v.size());
    return v[idx - 1];
}

// Brute-force statistics on plain vectors.

/// CUSUM path of residuals e at k = 1..T-1 (index k-1), scaled by sqrt(mean(e^2) T).
inline std::vector<double> cusum(const std::vector<double>& e) {
    const std::size_t T = e.size();
    double ss = 0.0;
    double total = 0.0;
    for (double x : e) {
        ss += x * x;
        total += x;
    }
    const double denom = std::sqrt(ss / static_cast<double>(T)) * std::sqrt(static_cast<double>(T));
    std::vector<double> out;
    for (std::size_t k = 1; k < T; ++k) {
        double part = 0.0;
        for (std::size_t t = 0; t < k; ++t) part += e[t];
        out.push_back((part - static_cast<double>(k) / static_cast<double>(T) * total) / denom);
    }
    return out;
}

/// Mean-shift statistic T (ybar1 - ybar2)^2 (k/T)(1-k/T) / var(y) for one k, from scratch.
inline double mean_shift_z(const std::vector<double>& y, std::size_t k) {
    const std::size_t T = y.size();
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t t = 0; t < k; ++t) m1 += y[t];
    for (std::size_t t = k; t < T; ++t) m2 += y[t];
    m1 /= static_cast<double>(k);
    m2 /= static_cast<double>(T - k);
    const double Td = static_cast<double>(T);
    const double f = static_cast<double>(k) / Td;
    return Td * (m1 - m2) * (m1 - m2) * f * (1.0 - f) / variance(y);
}

}  // namespace oracle
