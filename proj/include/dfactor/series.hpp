#pragma once

#include <optional>
#include <string>
#include <vector>

#include "calendar.hpp"
#include "panel.hpp"

namespace dfactor {

/// Named daily series on an increasing (possibly gappy) set of dates.
struct DatedSeries {
    std::string name;
    std::vector<Date> dates;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    bool empty() const noexcept { return values.empty(); }
};

enum class LegDirection { long_high, long_low };

/// Percentile cut-offs used to pick the two legs of a sort factor.
struct SortSpec {
    Field sort_field = Field::cds_spread_bp;
    double low_percentile = 25.0;
    double high_percentile = 75.0;
    LegDirection direction = LegDirection::long_high;

    void validate() const {
        if (!(low_percentile >= 0.0 && low_percentile < 100.0) ||
            !(high_percentile > low_percentile && high_percentile <= 100.0))
            throw ConfigError("sort spec needs 0 <= low < high <= 100, got (" + std::to_string(low_percentile) + ", " +
                              std::to_string(high_percentile) + ")");
    }

    friend bool operator==(const SortSpec&, const SortSpec&) = default;
};

/// Entity indices (into FactorSeries::entities) making up each leg on a date.
/// The factor value is mean(long_leg) - mean(short_leg); an empty leg
/// contributes zero. For a long-only series such as the market, `short_leg`
/// is empty.
struct LegMembership {
    std::vector<std::size_t> long_leg;
    std::vector<std::size_t> short_leg;
    std::size_t excluded = 0; // entities dropped for a missing return

    friend bool operator==(const LegMembership&, const LegMembership&) = default;
};

struct SkippedDate {
    Date date;
    std::string reason;
};

struct FactorSeries {
    DatedSeries series;
    std::vector<std::string> entities;
    std::vector<LegMembership> memberships; // parallel to series.dates
    std::optional<SortSpec> spec;
    std::vector<SkippedDate> skipped;
    std::vector<Date> tie_flagged; // dates where tied entities were removed from both legs

    const std::string& name() const noexcept { return series.name; }
    std::size_t size() const noexcept { return series.size(); }
};

/// Equal-weighted average return of every entity present on each date.
/// Dates with no present entity are left out and recorded in `skipped`.
inline FactorSeries market_return(const Panel& returns, std::string name = "rm") {
    if (returns.n_dates() == 0 || returns.n_entities() == 0)
        throw DataError("market_return on an empty panel");
    FactorSeries out;
    out.series.name = std::move(name);
    out.entities = returns.entities();
    for (std::size_t t = 0; t < returns.n_dates(); ++t) {
        LegMembership m;
        double sum = 0.0;
        for (std::size_t e = 0; e < returns.n_entities(); ++e) {
            if (returns.present(t, e)) {
                m.long_leg.push_back(e);
                sum += returns.value(t, e);
            } else {
                ++m.excluded;
            }
        }
        if (m.long_leg.empty()) {
            out.skipped.push_back({returns.calendar()[t], "no entity has a return"});
            continue;
        }
        out.series.dates.push_back(returns.calendar()[t]);
        out.series.values.push_back(sum / static_cast<double>(m.long_leg.size()));
        out.memberships.push_back(std::move(m));
    }
    return out;
}

/// Common dates of several series, with their values laid out column-wise.
struct AlignedSeries {
    std::vector<Date> dates;
    std::vector<std::vector<double>> columns;
};

inline AlignedSeries align_series(const std::vector<const DatedSeries*>& series) {
    AlignedSeries out;
    if (series.empty())
        return out;
    std::vector<std::size_t> pos(series.size(), 0);
    out.columns.resize(series.size());
    const auto& lead = *series[0];
    for (std::size_t i = 0; i < lead.size(); ++i) {
        Date d = lead.dates[i];
        bool all = true;
        for (std::size_t s = 1; s < series.size(); ++s) {
            const auto& ds = series[s]->dates;
            while (pos[s] < ds.size() && ds[pos[s]] < d)
                ++pos[s];
            if (pos[s] >= ds.size() || ds[pos[s]] != d) {
                all = false;
                break;
            }
        }
        if (!all)
            continue;
        out.dates.push_back(d);
        out.columns[0].push_back(lead.values[i]);
        for (std::size_t s = 1; s < series.size(); ++s)
            out.columns[s].push_back(series[s]->values[pos[s]]);
    }
    return out;
}

} // namespace dfactor
