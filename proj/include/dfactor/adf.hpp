#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "error.hpp"
#include "regression.hpp"
#include "stats.hpp"

namespace dfactor {

enum class AdfSpec { none, constant, constant_trend };

inline std::string_view to_string(AdfSpec s) {
    switch (s) {
    case AdfSpec::none:
        return "none";
    case AdfSpec::constant:
        return "constant";
    case AdfSpec::constant_trend:
        return "constant+trend";
    }
    return "?";
}

inline std::optional<AdfSpec> adf_spec_from_string(std::string_view s) {
    for (AdfSpec a : {AdfSpec::none, AdfSpec::constant, AdfSpec::constant_trend})
        if (to_string(a) == s)
            return a;
    if (s == "c")
        return AdfSpec::constant;
    if (s == "ct")
        return AdfSpec::constant_trend;
    if (s == "nc" || s == "n")
        return AdfSpec::none;
    return std::nullopt;
}

struct ADFResult {
    double test_statistic = 0.0;
    std::size_t lag_order = 0;
    AdfSpec spec = AdfSpec::constant;
    std::size_t n_obs = 0;                    // rows in the test regression
    std::map<std::string, double> critical_values; // "1%", "5%", "10%"
    bool rejected_at_5pct = false;
};

/// MacKinnon (2010) response-surface critical values for the single-series
/// tau statistic: cv(T) = b0 + b1/T + b2/T^2 + b3/T^3.
inline std::map<std::string, double> adf_critical_values(AdfSpec spec, std::size_t nobs) {
    using Row = std::array<double, 4>;
    static constexpr std::array<Row, 3> none{{{-2.56574, -2.2358, -3.627, 0.0},
                                             {-1.94100, -0.2686, -3.365, 31.223},
                                             {-1.61682, 0.2656, -2.714, 25.364}}};
    static constexpr std::array<Row, 3> constant{{{-3.43035, -6.5393, -16.786, -79.433},
                                                 {-2.86154, -2.8903, -4.234, -40.040},
                                                 {-2.56677, -1.5384, -2.809, 0.0}}};
    static constexpr std::array<Row, 3> trend{{{-3.95877, -9.0531, -28.428, -134.155},
                                              {-3.41049, -4.3904, -9.036, -45.374},
                                              {-3.12705, -2.5856, -3.925, -22.380}}};
    const auto& table = spec == AdfSpec::none ? none : spec == AdfSpec::constant ? constant : trend;
    const double inv = 1.0 / static_cast<double>(nobs);
    auto eval = [&](const Row& b) { return b[0] + b[1] * inv + b[2] * inv * inv + b[3] * inv * inv * inv; };
    return {{"1%", eval(table[0])}, {"5%", eval(table[1])}, {"10%", eval(table[2])}};
}

namespace detail {

/// Test regression of dy_t on y_{t-1}, `lags` lagged differences and the
/// deterministic terms, using rows t >= first_row of the differenced series.
struct AdfDesign {
    Eigen::VectorXd dy;
    Eigen::MatrixXd X; // column 0 is y_{t-1}
};

inline AdfDesign adf_design(std::span<const double> y, std::size_t lags, AdfSpec spec, std::size_t first_row) {
    const std::size_t nd = y.size() - 1;
    const std::size_t rows = nd - first_row;
    const std::size_t det = spec == AdfSpec::none ? 0 : spec == AdfSpec::constant ? 1 : 2;
    AdfDesign d{Eigen::VectorXd(rows), Eigen::MatrixXd(rows, 1 + lags + det)};
    for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t t = first_row + i; // dy[t] = y[t+1] - y[t]
        const auto r = static_cast<Eigen::Index>(i);
        d.dy[r] = y[t + 1] - y[t];
        d.X(r, 0) = y[t];
        for (std::size_t l = 1; l <= lags; ++l)
            d.X(r, static_cast<Eigen::Index>(l)) = y[t + 1 - l] - y[t - l];
        if (det >= 1)
            d.X(r, static_cast<Eigen::Index>(1 + lags)) = 1.0;
        if (det == 2)
            d.X(r, static_cast<Eigen::Index>(2 + lags)) = static_cast<double>(t + 1);
    }
    return d;
}

inline std::vector<std::string> adf_names(std::size_t cols) {
    std::vector<std::string> names{"y_lag1"};
    for (std::size_t j = 1; j < cols; ++j)
        names.push_back("x" + std::to_string(j));
    return names;
}

} // namespace detail

/// Maximum lag searched by the automatic selection, floor(12 (n/100)^(1/4)).
inline std::size_t adf_max_lag(std::size_t n) {
    return static_cast<std::size_t>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

/// Augmented Dickey-Fuller test. The statistic is the classical OLS t-ratio on
/// y_{t-1}. With `lag_order` empty the lag is chosen by AIC over 0..max lag,
/// each candidate fitted on the same sample, then refitted on all usable rows.
inline ADFResult adf_test(std::span<const double> y, std::optional<std::size_t> lag_order = std::nullopt,
                          AdfSpec spec = AdfSpec::constant) {
    const std::size_t n = y.size();
    if (n < 3)
        throw DataError("ADF test needs more observations");
    for (double v : y)
        if (!std::isfinite(v))
            throw DataError("ADF input contains a non-finite value");
    if (!(sample_variance(y) > 0.0))
        throw NumericalError("ADF test on a zero-variance series");

    std::size_t lags = 0;
    if (lag_order) {
        lags = *lag_order;
        if (n <= lags + 10)
            throw DataError("ADF needs n > lag_order + 10 observations");
    } else {
        std::size_t max_lag = adf_max_lag(n);
        while (max_lag > 0 && n <= max_lag + 10)
            --max_lag;
        if (n <= max_lag + 10)
            throw DataError("ADF needs n > lag_order + 10 observations");
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p <= max_lag; ++p) {
            auto d = detail::adf_design(y, p, spec, max_lag);
            auto ls = detail::least_squares(d.dy, d.X, detail::adf_names(static_cast<std::size_t>(d.X.cols())));
            const double m = static_cast<double>(d.dy.size());
            const double ssr = ls.residuals.squaredNorm();
            if (!(ssr > 0.0))
                throw NumericalError("ADF regression fits exactly; statistic undefined");
            const double aic = m * std::log(ssr / m) + 2.0 * static_cast<double>(d.X.cols());
            if (aic < best) {
                best = aic;
                lags = p;
            }
        }
    }

    auto d = detail::adf_design(y, lags, spec, lags);
    auto ls = detail::least_squares(d.dy, d.X, detail::adf_names(static_cast<std::size_t>(d.X.cols())));
    const auto m = d.dy.size();
    const double ssr = ls.residuals.squaredNorm();
    const double s2 = ssr / static_cast<double>(m - d.X.cols());
    const double se = std::sqrt(s2 * ls.inv_gram(0, 0));
    if (!(se > 0.0))
        throw NumericalError("ADF regression fits exactly; statistic undefined");

    ADFResult r;
    r.test_statistic = ls.coef[0] / se;
    r.lag_order = lags;
    r.spec = spec;
    r.n_obs = static_cast<std::size_t>(m);
    r.critical_values = adf_critical_values(spec, r.n_obs);
    r.rejected_at_5pct = r.test_statistic < r.critical_values.at("5%");
    return r;
}

} // namespace dfactor
