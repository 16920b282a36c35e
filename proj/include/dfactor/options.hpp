#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <numbers>
#include <optional>
#include <utility>

#include "error.hpp"

namespace dfactor::options {

enum class OptionKind { call, put };

/// European option on a non-dividend-paying underlying. `rate` is
/// continuously compounded, `maturity` in years.
struct OptionQuote {
    double spot = 0.0;
    double strike = 0.0;
    double rate = 0.0;
    double maturity = 0.0;
    OptionKind kind = OptionKind::call;
    std::optional<double> price;

    void validate() const {
        if (!(spot > 0.0) || !(maturity > 0.0) || !(strike >= 0.0) || !std::isfinite(rate))
            throw DataError("option quote needs spot > 0, maturity > 0, strike >= 0");
    }
};

struct VolResult {
    double sigma = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

/// Standard normal CDF through the complementary error function, accurate in
/// both tails.
inline double norm_cdf(double x) {
    if (std::isnan(x))
        throw NumericalError("norm_cdf of NaN");
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

inline double norm_pdf(double x) {
    constexpr double inv_sqrt_2pi = 0.3989422804014326779399460599343818684759;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double discount(const OptionQuote& q) { return std::exp(-q.rate * q.maturity); }

inline std::pair<double, double> bs_d1_d2(const OptionQuote& q, double sigma) {
    q.validate();
    if (!(q.strike > 0.0) || !(sigma > 0.0))
        throw NumericalError("degenerate inputs: strike and sigma must be positive");
    const double vol_sqrt_t = sigma * std::sqrt(q.maturity);
    const double d1 = (std::log(q.spot / q.strike) + (q.rate + 0.5 * sigma * sigma) * q.maturity) / vol_sqrt_t;
    return {d1, d1 - vol_sqrt_t};
}

inline double bs_call(const OptionQuote& q, double sigma) {
    q.validate();
    if (!(sigma > 0.0))
        throw NumericalError("degenerate inputs: sigma must be positive");
    if (q.strike == 0.0)
        return q.spot;
    auto [d1, d2] = bs_d1_d2(q, sigma);
    return std::max(q.spot * norm_cdf(d1) - q.strike * discount(q) * norm_cdf(d2), 0.0);
}

/// Put price evaluated directly as K e^{-rT} N(-d2) - S0 N(-d1), which keeps
/// small out-of-the-money values accurate; it satisfies put-call parity.
inline double bs_put(const OptionQuote& q, double sigma) {
    q.validate();
    if (!(sigma > 0.0))
        throw NumericalError("degenerate inputs: sigma must be positive");
    if (q.strike == 0.0)
        return 0.0;
    auto [d1, d2] = bs_d1_d2(q, sigma);
    return std::max(q.strike * discount(q) * norm_cdf(-d2) - q.spot * norm_cdf(-d1), 0.0);
}

inline double bs_price(const OptionQuote& q, double sigma) {
    return q.kind == OptionKind::call ? bs_call(q, sigma) : bs_put(q, sigma);
}

/// dPrice/dsigma, identical for calls and puts.
inline double bs_vega(const OptionQuote& q, double sigma) {
    auto [d1, d2] = bs_d1_d2(q, sigma);
    (void)d2;
    return q.spot * norm_pdf(d1) * std::sqrt(q.maturity);
}

/// Model-free price bounds for the quote's kind.
inline std::pair<double, double> no_arb_bounds(const OptionQuote& q) {
    const double pv_strike = q.strike * discount(q);
    if (q.kind == OptionKind::call)
        return {std::max(q.spot - pv_strike, 0.0), q.spot};
    return {std::max(pv_strike - q.spot, 0.0), pv_strike};
}

struct ImpliedVolSettings {
    double sigma_min = 1e-4;
    double sigma_max = 5.0;
    double relative_price_tol = 1e-10; // times spot
    int max_iterations = 200;
    double newton_switch_width = 1e-2; // bracket width at which Newton takes over
};

/// Volatility that reproduces the quoted price: bisection brackets the root
/// on [sigma_min, sigma_max], then Newton with the analytic vega polishes it,
/// falling back to bisection whenever a step would leave the bracket.
///
/// In-the-money quotes are converted to the out-of-the-money counterpart by
/// parity before solving, so the objective is a small, well-conditioned price.
inline VolResult implied_vol(const OptionQuote& quote, const ImpliedVolSettings& cfg = {}) {
    quote.validate();
    if (!quote.price || !std::isfinite(*quote.price))
        throw DataError("implied_vol needs a quoted price");
    const double price = *quote.price;
    auto [lower, upper] = no_arb_bounds(quote);
    if (price <= lower)
        throw NumericalError("below intrinsic");
    if (price >= upper)
        throw NumericalError("above upper bound");

    OptionQuote q = quote;
    double target = price;
    const double pv_strike = q.strike * discount(q);
    if (q.kind == OptionKind::call && q.spot > pv_strike) {
        q.kind = OptionKind::put;
        target = price - q.spot + pv_strike;
    } else if (q.kind == OptionKind::put && pv_strike > q.spot) {
        q.kind = OptionKind::call;
        target = price + q.spot - pv_strike;
    }
    auto objective = [&](double s) { return bs_price(q, s) - target; };

    double lo = cfg.sigma_min, hi = cfg.sigma_max;
    double f_lo = objective(lo), f_hi = objective(hi);
    if (f_lo > 0.0 || f_hi < 0.0)
        throw NumericalError("vol out of range");

    const double tol = cfg.relative_price_tol * quote.spot;
    double sigma = 0.5 * (lo + hi);
    int it = 0;
    for (; it < cfg.max_iterations && hi - lo > cfg.newton_switch_width; ++it) {
        sigma = 0.5 * (lo + hi);
        double f = objective(sigma);
        (f < 0.0 ? lo : hi) = sigma;
        if (f == 0.0) {
            lo = hi = sigma;
            break;
        }
    }
    sigma = 0.5 * (lo + hi);
    for (; it < cfg.max_iterations; ++it) {
        double f = objective(sigma);
        if (f == 0.0)
            break;
        (f < 0.0 ? lo : hi) = sigma;
        double vega = bs_vega(q, sigma);
        double next = vega > 0.0 ? sigma - f / vega : 0.5 * (lo + hi);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        double step = std::abs(next - sigma);
        sigma = next;
        if (step <= 4.0 * std::numeric_limits<double>::epsilon() * sigma || hi - lo <= 0.0)
            break;
    }
    const double residual = bs_price(quote, sigma) - price;
    if (!(std::abs(residual) <= tol))
        throw NumericalError("implied_vol did not converge: residual " + std::to_string(residual));
    return {sigma, it, residual};
}

} // namespace dfactor::options
