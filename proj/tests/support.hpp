#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <dfactor/calendar.hpp>
#include <dfactor/panel.hpp>
#include <dfactor/random.hpp>

namespace testing_support {

using dfactor::Date;
using dfactor::Field;
using dfactor::Panel;
using dfactor::TradingCalendar;

inline Date d(const char* iso) { return *dfactor::parse_date(iso); }

inline std::vector<std::string> ids(std::size_t n, const std::string& stem = "E") {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(stem + (i < 9 ? "0" : "") + std::to_string(i + 1));
    return out;
}

/// Dense panel from row-major values; NaN marks a missing cell.
inline Panel make_panel(Field field, std::size_t n_dates, std::vector<std::string> entities, std::vector<double> values,
                        const char* start = "2009-01-05") {
    std::vector<std::uint8_t> mask(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        mask[i] = std::isnan(values[i]) ? 0 : 1;
    return Panel(field, dfactor::business_days(d(start), n_dates), std::move(entities), std::move(values),
                 std::move(mask));
}

inline std::vector<double> uniform_values(dfactor::SplitMix64& rng, std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (auto& x : v)
        x = lo + (hi - lo) * rng.uniform();
    return v;
}

} // namespace testing_support
