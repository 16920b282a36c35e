#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace dfactor {

using Date = std::chrono::sys_days;

/// Parses a strict ISO-8601 calendar date ("YYYY-MM-DD"). Returns nullopt on
/// any malformed or impossible date.
inline std::optional<Date> parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        return std::nullopt;
    auto number = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
        int v = 0;
        const char* first = text.data() + pos;
        const char* last = first + len;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last)
            return std::nullopt;
        return v;
    };
    auto y = number(0, 4);
    auto m = number(5, 2);
    auto d = number(8, 2);
    if (!y || !m || !d)
        return std::nullopt;
    std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
                                    std::chrono::day{static_cast<unsigned>(*d)}};
    if (!ymd.ok())
        return std::nullopt;
    return Date{ymd};
}

inline std::string format_date(Date date) {
    std::chrono::year_month_day ymd{date};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

/// Strictly increasing sequence of trading dates. Every Panel is indexed by one.
class TradingCalendar {
  public:
    TradingCalendar() = default;

    /// Takes dates that are already strictly increasing; throws otherwise.
    explicit TradingCalendar(std::vector<Date> dates) : dates_(std::move(dates)) {
        for (std::size_t i = 1; i < dates_.size(); ++i)
            if (!(dates_[i - 1] < dates_[i]))
                throw DataError("calendar dates not strictly increasing at " + format_date(dates_[i]));
    }

    std::size_t size() const noexcept { return dates_.size(); }
    bool empty() const noexcept { return dates_.empty(); }
    Date operator[](std::size_t i) const { return dates_[i]; }
    Date front() const { return dates_.front(); }
    Date back() const { return dates_.back(); }
    const std::vector<Date>& dates() const noexcept { return dates_; }
    auto begin() const noexcept { return dates_.begin(); }
    auto end() const noexcept { return dates_.end(); }

    std::optional<std::size_t> index_of(Date d) const {
        auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
        if (it == dates_.end() || *it != d)
            return std::nullopt;
        return static_cast<std::size_t>(it - dates_.begin());
    }

    bool contains(Date d) const { return index_of(d).has_value(); }

    friend bool operator==(const TradingCalendar&, const TradingCalendar&) = default;

  private:
    std::vector<Date> dates_;
};

/// Sorts and deduplicates raw dates into a calendar.
inline TradingCalendar build_calendar(std::vector<Date> raw) {
    if (raw.empty())
        throw DataError("empty calendar");
    std::sort(raw.begin(), raw.end());
    raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
    return TradingCalendar(std::move(raw));
}

/// Monday-to-Friday dates starting at `first` (rolled forward to a weekday).
inline TradingCalendar business_days(Date first, std::size_t count) {
    using std::chrono::days;
    using std::chrono::weekday;
    std::vector<Date> out;
    out.reserve(count);
    Date d = first;
    while (out.size() < count) {
        weekday wd{d};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday)
            out.push_back(d);
        d += days{1};
    }
    return TradingCalendar(std::move(out));
}

} // namespace dfactor
