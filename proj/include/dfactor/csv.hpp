#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "calendar.hpp"
#include "error.hpp"
#include "panel.hpp"

namespace dfactor {

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{})
        throw DataError("cannot format number");
    return std::string(buf, ptr);
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return cells;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

} // namespace detail

/// Parses a wide CSV: header "date,<id>,<id>,...", one row per ISO date, an
/// empty cell meaning missing. `source` labels error messages.
inline Panel parse_panel_csv(std::istream& in, Field field, const std::string& source = "<input>") {
    std::string line;
    std::size_t line_no = 0;
    auto where = [&](std::size_t ln) { return source + " line " + std::to_string(ln); };

    if (!std::getline(in, line))
        throw DataError(source + ": missing header row");
    ++line_no;
    auto header = detail::split_commas(line);
    if (header.empty() || detail::trim(header[0]) != "date")
        throw DataError(where(line_no) + ": first header column must be 'date'");
    std::vector<std::string> ids;
    std::unordered_set<std::string> seen;
    for (std::size_t c = 1; c < header.size(); ++c) {
        std::string id(detail::trim(header[c]));
        if (id.empty())
            throw DataError(where(line_no) + ": empty ticker in header column " + std::to_string(c + 1));
        if (!seen.insert(id).second)
            throw DataError(where(line_no) + ": duplicate column '" + id + "'");
        ids.push_back(std::move(id));
    }

    std::vector<Date> dates;
    std::set<Date> seen_dates;
    std::vector<double> values;
    std::vector<std::uint8_t> mask;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty())
            continue;
        auto cells = detail::split_commas(line);
        if (cells.size() != ids.size() + 1)
            throw DataError(where(line_no) + ": expected " + std::to_string(ids.size() + 1) + " cells, found " +
                            std::to_string(cells.size()));
        auto date = parse_date(detail::trim(cells[0]));
        if (!date)
            throw DataError(where(line_no) + ": malformed date '" + std::string(cells[0]) + "'");
        if (!seen_dates.insert(*date).second)
            throw DataError(where(line_no) + ": duplicate date " + format_date(*date));
        dates.push_back(*date);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            auto cell = detail::trim(cells[c]);
            if (cell.empty()) {
                values.push_back(std::nan(""));
                mask.push_back(0);
                continue;
            }
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v))
                throw DataError(where(line_no) + ", column '" + ids[c - 1] + "': non-numeric cell '" +
                                std::string(cell) + "'");
            values.push_back(v);
            mask.push_back(1);
        }
    }
    if (dates.empty())
        throw DataError(source + ": no data rows");

    // Rows may arrive in any order; the panel is stored in calendar order.
    std::vector<std::size_t> order(dates.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dates[a] < dates[b]; });
    const std::size_t ne = ids.size();
    std::vector<Date> sorted_dates;
    std::vector<double> v2(values.size());
    std::vector<std::uint8_t> m2(mask.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        sorted_dates.push_back(dates[order[i]]);
        std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(order[i] * ne), ne,
                    v2.begin() + static_cast<std::ptrdiff_t>(i * ne));
        std::copy_n(mask.begin() + static_cast<std::ptrdiff_t>(order[i] * ne), ne,
                    m2.begin() + static_cast<std::ptrdiff_t>(i * ne));
    }
    try {
        return Panel(field, TradingCalendar(std::move(sorted_dates)), std::move(ids), std::move(v2), std::move(m2));
    } catch (const DataError& e) {
        throw DataError(source + ": " + e.what());
    }
}

inline Panel load_panel_csv(const std::string& path, Field field) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open " + path);
    return parse_panel_csv(in, field, path);
}

inline std::string panel_to_csv(const Panel& p) {
    std::string out = "date";
    for (const auto& id : p.entities())
        out += "," + id;
    out += "\n";
    for (std::size_t t = 0; t < p.n_dates(); ++t) {
        out += format_date(p.calendar()[t]);
        for (std::size_t e = 0; e < p.n_entities(); ++e) {
            out += ",";
            if (p.present(t, e))
                out += format_double(p.value(t, e));
        }
        out += "\n";
    }
    return out;
}

/// Range heuristics for the ingestion units: CDS in basis points, implied
/// vols as decimal fractions. Returns a description of the problem, or an
/// empty string when the panel looks right.
inline std::string unit_check(const Panel& p) {
    std::vector<double> v;
    for (std::size_t t = 0; t < p.n_dates(); ++t)
        for (std::size_t e = 0; e < p.n_entities(); ++e)
            if (p.present(t, e))
                v.push_back(p.value(t, e));
    if (v.empty())
        return {};
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
    const double median = v[v.size() / 2];
    switch (p.field()) {
    case Field::cds_spread_bp:
        if (median < 1.0)
            return "median CDS spread " + format_double(median) + " looks like a decimal fraction, expected basis points";
        break;
    case Field::implied_vol:
        if (median > 5.0)
            return "median implied vol " + format_double(median) + " looks like a percentage, expected a decimal fraction";
        break;
    default:
        break;
    }
    return {};
}

} // namespace dfactor
