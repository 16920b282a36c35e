#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "error.hpp"
#include "stats.hpp"

namespace dfactor::perf {

/// Per-period risk-free rate.
struct RiskFreeRate {
    double rate = 0.0;

    explicit RiskFreeRate(double r) : rate(r) {
        if (!std::isfinite(r))
            throw DataError("risk-free rate must be finite");
    }
};

/// (R - Rf) / sigma.
inline double sharpe_ratio(double mean_return, RiskFreeRate risk_free, double std_dev) {
    if (!(std_dev > 0.0))
        throw NumericalError("Sharpe ratio needs a positive standard deviation");
    return (mean_return - risk_free.rate) / std_dev;
}

/// Sharpe ratio of a return sample, sample (n-1) standard deviation.
inline double sharpe_ratio(std::span<const double> returns, RiskFreeRate risk_free) {
    return sharpe_ratio(sample_mean(returns), risk_free, std::sqrt(sample_variance(returns)));
}

/// Downside deviation below `threshold`: sqrt(sum(min(r - T, 0)^2) / n).
inline double downside_deviation(std::span<const double> returns, double threshold) {
    if (returns.empty())
        throw DataError("downside deviation of an empty series");
    double s = 0.0;
    for (double r : returns) {
        const double d = std::min(r - threshold, 0.0);
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(returns.size()));
}

inline double sortino_ratio(std::span<const double> returns, double threshold) {
    const double theta = downside_deviation(returns, threshold);
    if (!(theta > 0.0))
        throw NumericalError("no downside observations");
    return (sample_mean(returns) - threshold) / theta;
}

/// cov(asset, market) / var(market).
inline double capm_beta(std::span<const double> asset, std::span<const double> market) {
    const double vm = sample_variance(market);
    if (!(vm > 0.0))
        throw NumericalError("beta undefined for a zero-variance market");
    return sample_covariance(asset, market) / vm;
}

/// Security market line: rf + beta (E[Rm] - rf).
constexpr double sml_expected_return(double beta, double risk_free, double market_mean) {
    return risk_free + beta * (market_mean - risk_free);
}

struct DecompositionResult {
    double beta = 0.0;
    double systematic_variance = 0.0;
    double idiosyncratic_variance = 0.0;
    double total_variance = 0.0;
};

/// Splits the asset's sample variance into beta^2 var(m) and the variance of
/// the residual asset - beta market.
inline DecompositionResult variance_decomposition(std::span<const double> asset, std::span<const double> market) {
    DecompositionResult d;
    d.beta = capm_beta(asset, market);
    d.total_variance = sample_variance(asset);
    d.systematic_variance = d.beta * d.beta * sample_variance(market);
    const double ma = sample_mean(asset), mm = sample_mean(market);
    double s = 0.0;
    for (std::size_t i = 0; i < asset.size(); ++i) {
        const double e = (asset[i] - ma) - d.beta * (market[i] - mm);
        s += e * e;
    }
    d.idiosyncratic_variance = s / static_cast<double>(asset.size() - 1);
    return d;
}

} // namespace dfactor::perf
