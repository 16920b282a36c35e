#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "error.hpp"

namespace dfactor {

enum class Horizon { daily, annual };

/// Mean, standard error of the mean, its t-statistic and the sample size.
/// `t_stat` is empty when the standard error is zero.
struct SummaryStats {
    double mean = 0.0;
    double std_error = 0.0;
    std::optional<double> t_stat;
    std::size_t n_obs = 0;
    Horizon horizon = Horizon::daily;
};

inline double sample_mean(std::span<const double> x) {
    if (x.empty())
        throw DataError("mean of an empty series");
    const double n = static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x)
        s += v;
    const double m = s / n;
    // corrected two-pass mean
    double c = 0.0;
    for (double v : x)
        c += v - m;
    return m + c / n;
}

/// Sample covariance with the n-1 denominator, two-pass.
inline double sample_covariance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw DataError("covariance of series with different lengths");
    if (a.size() < 2)
        throw DataError("covariance needs at least two observations");
    const double ma = sample_mean(a), mb = sample_mean(b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += (a[i] - ma) * (b[i] - mb);
    return s / static_cast<double>(a.size() - 1);
}

inline double sample_variance(std::span<const double> x) { return sample_covariance(x, x); }

inline SummaryStats summary_stats(std::span<const double> x) {
    if (x.size() < 2)
        throw DataError("summary statistics need at least two observations");
    SummaryStats s;
    s.n_obs = x.size();
    s.mean = sample_mean(x);
    s.std_error = std::sqrt(sample_variance(x) / static_cast<double>(x.size()));
    if (s.std_error > 0.0)
        s.t_stat = s.mean / s.std_error;
    return s;
}

/// Daily-to-annual scaling: mean times `days`, standard error times sqrt(days).
inline SummaryStats annualize(const SummaryStats& daily, int days = 250) {
    if (daily.horizon != Horizon::daily)
        throw DataError("annualize expects daily statistics");
    if (days <= 0)
        throw ConfigError("annualization days must be positive, got " + std::to_string(days));
    SummaryStats a = daily;
    a.horizon = Horizon::annual;
    a.mean = daily.mean * days;
    a.std_error = daily.std_error * std::sqrt(static_cast<double>(days));
    a.t_stat = a.std_error > 0.0 ? std::optional<double>(a.mean / a.std_error) : std::nullopt;
    return a;
}

/// Pearson correlation coefficient.
inline double correlation(std::span<const double> a, std::span<const double> b) {
    const double va = sample_variance(a), vb = sample_variance(b);
    if (!(va > 0.0) || !(vb > 0.0))
        throw NumericalError("correlation undefined for a zero-variance series");
    double r = sample_covariance(a, b) / std::sqrt(va * vb);
    return std::clamp(r, -1.0, 1.0);
}

} // namespace dfactor
