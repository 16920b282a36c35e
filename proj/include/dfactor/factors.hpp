#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "panel.hpp"
#include "series.hpp"
#include "stats.hpp"

namespace dfactor {

namespace detail {

struct Ranked {
    double value;
    std::size_t entity;
};

/// Entities with both a sort value and a return on date t, sorted ascending
/// by (value, entity id).
inline std::vector<Ranked> sortable_universe(const Panel& sort_panel, const Panel& returns, std::size_t t) {
    std::vector<Ranked> u;
    u.reserve(sort_panel.n_entities());
    for (std::size_t e = 0; e < sort_panel.n_entities(); ++e)
        if (sort_panel.present(t, e) && returns.present(t, e))
            u.push_back({sort_panel.value(t, e), e});
    const auto& ids = sort_panel.entities();
    std::sort(u.begin(), u.end(), [&](const Ranked& a, const Ranked& b) {
        if (a.value != b.value)
            return a.value < b.value;
        return ids[a.entity] < ids[b.entity];
    });
    return u;
}

inline void require_aligned(const Panel& a, const Panel& b) {
    if (a.calendar() != b.calendar() || a.entities() != b.entities())
        throw DataError("sort panel and return panel are not aligned");
}

inline double leg_mean(const Panel& returns, std::span<const std::size_t> leg, std::size_t t) {
    if (leg.empty())
        return 0.0;
    double s = 0.0;
    for (std::size_t e : leg)
        s += returns.value(t, e);
    return s / static_cast<double>(leg.size());
}

} // namespace detail

/// Linear-interpolation percentile: sort, take the fractional rank
/// h = (n-1) p / 100 and interpolate between floor(h) and ceil(h).
inline double percentile_threshold(std::span<const double> values, double p) {
    if (values.empty())
        throw DataError("percentile of an empty list");
    if (!(p >= 0.0 && p <= 100.0))
        throw ConfigError("percentile must lie in [0, 100]");
    std::vector<double> s(values.begin(), values.end());
    for (double v : s)
        if (!std::isfinite(v))
            throw DataError("percentile of a non-finite value");
    std::sort(s.begin(), s.end());
    const double h = static_cast<double>(s.size() - 1) * p / 100.0;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = static_cast<std::size_t>(std::ceil(h));
    return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

/// High-minus-low sort factor rebuilt every date.
///
/// On each date the universe is every entity with both a sort value and a
/// return. The low leg holds values at or below the low percentile, the high
/// leg values at or above the high percentile. Because the percentile
/// interpolates between adjacent order statistics, "v <= threshold" selects
/// exactly the values <= s[floor(h_low)] and "v >= threshold" exactly the
/// values >= s[ceil(h_high)]; comparing against those order statistics keeps
/// memberships stable under any increasing transform of the sort field.
///
/// Entities that land in both legs (only possible through ties) are removed
/// from both and the date is flagged. A date with one empty leg is skipped;
/// when tie removal empties both legs the cross-section is flat and the factor
/// is zero for that date.
inline FactorSeries build_spread_factor(const Panel& sort_panel, const Panel& returns, const SortSpec& spec,
                                        std::string name) {
    spec.validate();
    detail::require_aligned(sort_panel, returns);
    if (returns.field() != Field::simple_return)
        throw DataError("build_spread_factor needs a return panel");

    FactorSeries out;
    out.series.name = std::move(name);
    out.entities = sort_panel.entities();
    out.spec = spec;

    for (std::size_t t = 0; t < sort_panel.n_dates(); ++t) {
        const Date date = sort_panel.calendar()[t];
        auto u = detail::sortable_universe(sort_panel, returns, t);
        if (u.empty()) {
            out.skipped.push_back({date, "empty sort universe"});
            continue;
        }
        const double n1 = static_cast<double>(u.size() - 1);
        const double low_cut = u[static_cast<std::size_t>(std::floor(n1 * spec.low_percentile / 100.0))].value;
        const double high_cut = u[static_cast<std::size_t>(std::ceil(n1 * spec.high_percentile / 100.0))].value;

        std::vector<std::size_t> low, high;
        bool tie = false;
        for (const auto& r : u) {
            const bool in_low = r.value <= low_cut;
            const bool in_high = r.value >= high_cut;
            if (in_low && in_high) {
                tie = true;
                continue;
            }
            if (in_low)
                low.push_back(r.entity);
            if (in_high)
                high.push_back(r.entity);
        }
        if (tie)
            out.tie_flagged.push_back(date);
        if (low.empty() != high.empty()) {
            out.skipped.push_back({date, low.empty() ? "empty low leg" : "empty high leg"});
            continue;
        }
        std::sort(low.begin(), low.end());
        std::sort(high.begin(), high.end());

        LegMembership m;
        m.excluded = sort_panel.n_entities() - u.size();
        if (spec.direction == LegDirection::long_high) {
            m.long_leg = std::move(high);
            m.short_leg = std::move(low);
        } else {
            m.long_leg = std::move(low);
            m.short_leg = std::move(high);
        }
        const double value =
            detail::leg_mean(returns, m.long_leg, t) - detail::leg_mean(returns, m.short_leg, t);
        out.series.dates.push_back(date);
        out.series.values.push_back(value);
        out.memberships.push_back(std::move(m));
    }
    return out;
}

inline SortSpec rmu_spec() { return {Field::cds_spread_bp, 25.0, 75.0, LegDirection::long_high}; }
inline SortSpec vmc_spec() { return {Field::implied_vol, 5.0, 95.0, LegDirection::long_high}; }

/// Risky minus unrisky: long the top CDS quartile, short the bottom quartile.
inline FactorSeries build_rmu(const Panel& cds, const Panel& returns, const SortSpec& spec = rmu_spec()) {
    if (cds.field() != Field::cds_spread_bp)
        throw DataError("build_rmu needs a cds_spread_bp panel");
    return build_spread_factor(cds, returns, spec, "rmu");
}

/// Volatile minus consistent: long the top 5% implied vols, short the bottom 5%.
inline FactorSeries build_vmc(const Panel& iv, const Panel& returns, const SortSpec& spec = vmc_spec()) {
    if (iv.field() != Field::implied_vol)
        throw DataError("build_vmc needs an implied_vol panel");
    return build_spread_factor(iv, returns, spec, "vmc");
}

/// Recomputes each factor value from the logged memberships.
inline std::vector<double> recompute_from_memberships(const FactorSeries& f, const Panel& returns) {
    std::vector<double> out;
    out.reserve(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        auto t = returns.calendar().index_of(f.series.dates[i]);
        if (!t)
            throw DataError("factor date missing from return panel");
        const auto& m = f.memberships[i];
        out.push_back(detail::leg_mean(returns, m.long_leg, *t) - detail::leg_mean(returns, m.short_leg, *t));
    }
    return out;
}

/// Daily equal-weighted returns of the long and the short leg on their own.
inline std::pair<DatedSeries, DatedSeries> leg_returns(const FactorSeries& f, const Panel& returns,
                                                       const std::string& long_name, const std::string& short_name) {
    DatedSeries lg{long_name, {}, {}}, sh{short_name, {}, {}};
    for (std::size_t i = 0; i < f.size(); ++i) {
        auto t = returns.calendar().index_of(f.series.dates[i]);
        if (!t)
            throw DataError("factor date missing from return panel");
        const auto& m = f.memberships[i];
        if (!m.long_leg.empty()) {
            lg.dates.push_back(f.series.dates[i]);
            lg.values.push_back(detail::leg_mean(returns, m.long_leg, *t));
        }
        if (!m.short_leg.empty()) {
            sh.dates.push_back(f.series.dates[i]);
            sh.values.push_back(detail::leg_mean(returns, m.short_leg, *t));
        }
    }
    return {std::move(lg), std::move(sh)};
}

/// q equal-count portfolios re-formed every date. Quantile 1 holds the lowest
/// sort values.
struct QuantilePortfolioReturns {
    std::size_t q = 0;
    std::vector<std::string> entities;
    std::vector<Date> dates;
    std::vector<DatedSeries> series;                           // one per quantile
    std::vector<std::vector<std::vector<std::size_t>>> cells;  // [date][quantile] -> entity indices
    std::vector<SkippedDate> skipped;
};

/// Ranks the sortable universe ascending by (value, entity id); rank i of n
/// goes to quantile floor(i q / n) + 1, and each quantile earns the
/// equal-weighted mean return of its members.
inline QuantilePortfolioReturns form_quantile_portfolios(const Panel& sort_panel, const Panel& returns, std::size_t q,
                                                         const std::string& label = "q") {
    if (q < 2)
        throw ConfigError("quantile count must be at least 2");
    detail::require_aligned(sort_panel, returns);
    QuantilePortfolioReturns out;
    out.q = q;
    out.entities = sort_panel.entities();
    out.series.resize(q);
    for (std::size_t j = 0; j < q; ++j)
        out.series[j].name = label + std::to_string(j + 1);

    for (std::size_t t = 0; t < sort_panel.n_dates(); ++t) {
        const Date date = sort_panel.calendar()[t];
        auto u = detail::sortable_universe(sort_panel, returns, t);
        const std::size_t n = u.size();
        if (n < q) {
            out.skipped.push_back({date, "sortable universe of " + std::to_string(n) + " smaller than q"});
            continue;
        }
        std::vector<std::vector<std::size_t>> cell(q);
        for (std::size_t i = 0; i < n; ++i)
            cell[i * q / n].push_back(u[i].entity);
        out.dates.push_back(date);
        for (std::size_t j = 0; j < q; ++j) {
            std::sort(cell[j].begin(), cell[j].end());
            out.series[j].dates.push_back(date);
            out.series[j].values.push_back(detail::leg_mean(returns, cell[j], t));
        }
        out.cells.push_back(std::move(cell));
    }
    return out;
}

/// CDS spread minus cash LIBOR spread, both in basis points. Negative values
/// mark a negative-basis trade.
constexpr double default_swap_basis(double cds_spread_bp, double cash_libor_spread_bp) {
    return cds_spread_bp - cash_libor_spread_bp;
}

struct SplitBucket {
    std::size_t n_obs = 0;
    std::optional<SummaryStats> stats; // empty when fewer than two observations
};

struct SplitReport {
    Date split_date;
    SplitBucket before; // dates <= split_date
    SplitBucket after;  // dates > split_date
};

inline SplitReport split_series(const DatedSeries& s, Date split_date) {
    if (s.empty() || split_date < s.dates.front() || split_date > s.dates.back())
        throw DataError("split date " + format_date(split_date) + " outside the series range");
    auto cut = static_cast<std::size_t>(std::upper_bound(s.dates.begin(), s.dates.end(), split_date) - s.dates.begin());
    std::span<const double> all(s.values);
    auto bucket = [](std::span<const double> part) {
        SplitBucket b;
        b.n_obs = part.size();
        if (part.size() >= 2)
            b.stats = summary_stats(part);
        return b;
    };
    return {split_date, bucket(all.first(cut)), bucket(all.subspan(cut))};
}

inline SplitReport split_series(const FactorSeries& f, Date split_date) { return split_series(f.series, split_date); }

} // namespace dfactor
