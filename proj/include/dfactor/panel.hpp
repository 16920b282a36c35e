#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "calendar.hpp"
#include "error.hpp"

namespace dfactor {

enum class Field { price, cds_spread_bp, implied_vol, mb_ratio, simple_return };

inline std::string_view to_string(Field f) {
    switch (f) {
    case Field::price:
        return "price";
    case Field::cds_spread_bp:
        return "cds_spread_bp";
    case Field::implied_vol:
        return "implied_vol";
    case Field::mb_ratio:
        return "mb_ratio";
    case Field::simple_return:
        return "return";
    }
    return "?";
}

inline std::optional<Field> field_from_string(std::string_view s) {
    for (Field f : {Field::price, Field::cds_spread_bp, Field::implied_vol, Field::mb_ratio, Field::simple_return})
        if (to_string(f) == s)
            return f;
    return std::nullopt;
}

/// Range rule a present value of `field` must satisfy.
inline bool value_admissible(Field field, double v) {
    if (!std::isfinite(v))
        return false;
    switch (field) {
    case Field::price:
    case Field::implied_vol:
        return v > 0.0;
    case Field::cds_spread_bp:
        return v >= 0.0;
    case Field::simple_return:
        return v > -1.0;
    case Field::mb_ratio:
        return true;
    }
    return false;
}

/// Date x entity matrix of one field with an explicit missing mask.
///
/// Storage is row-major by date. A cell's value is meaningful only where the
/// mask is set; missing cells hold NaN.
class Panel {
  public:
    Panel() = default;

    Panel(Field field, TradingCalendar calendar, std::vector<std::string> entities, std::vector<double> values,
          std::vector<std::uint8_t> mask)
        : field_(field), calendar_(std::move(calendar)), entities_(std::move(entities)), values_(std::move(values)),
          mask_(std::move(mask)) {
        const std::size_t cells = calendar_.size() * entities_.size();
        if (values_.size() != cells || mask_.size() != cells)
            throw DataError("panel storage does not match |calendar| x |entities|");
        std::unordered_set<std::string> seen;
        for (const auto& id : entities_)
            if (!seen.insert(id).second)
                throw DataError("duplicate entity identifier '" + id + "'");
        for (std::size_t t = 0; t < calendar_.size(); ++t)
            for (std::size_t e = 0; e < entities_.size(); ++e) {
                std::size_t k = t * entities_.size() + e;
                if (!mask_[k]) {
                    values_[k] = std::nan("");
                    continue;
                }
                if (!value_admissible(field_, values_[k]))
                    throw DataError(std::string(to_string(field_)) + " value out of range at " +
                                    format_date(calendar_[t]) + "/" + entities_[e]);
            }
    }

    /// All-missing panel of the given shape.
    static Panel missing(Field field, TradingCalendar calendar, std::vector<std::string> entities) {
        std::size_t cells = calendar.size() * entities.size();
        return Panel(field, std::move(calendar), std::move(entities), std::vector<double>(cells, std::nan("")),
                     std::vector<std::uint8_t>(cells, 0));
    }

    Field field() const noexcept { return field_; }
    const TradingCalendar& calendar() const noexcept { return calendar_; }
    const std::vector<std::string>& entities() const noexcept { return entities_; }
    std::size_t n_dates() const noexcept { return calendar_.size(); }
    std::size_t n_entities() const noexcept { return entities_.size(); }

    bool present(std::size_t t, std::size_t e) const { return mask_[t * entities_.size() + e] != 0; }
    double value(std::size_t t, std::size_t e) const { return values_[t * entities_.size() + e]; }
    std::optional<double> get(std::size_t t, std::size_t e) const {
        if (!present(t, e))
            return std::nullopt;
        return value(t, e);
    }

    std::span<const double> row(std::size_t t) const {
        return {values_.data() + t * entities_.size(), entities_.size()};
    }

    std::optional<std::size_t> entity_index(std::string_view id) const {
        for (std::size_t e = 0; e < entities_.size(); ++e)
            if (entities_[e] == id)
                return e;
        return std::nullopt;
    }

    std::size_t present_count() const {
        return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
    }

    const std::vector<double>& raw_values() const noexcept { return values_; }
    const std::vector<std::uint8_t>& raw_mask() const noexcept { return mask_; }

    /// Same cells with the present values mapped through `fn` (used for unit
    /// rescaling and for affine invariance checks).
    template <class Fn>
    Panel transformed(Fn&& fn) const {
        std::vector<double> v = values_;
        for (std::size_t k = 0; k < v.size(); ++k)
            if (mask_[k])
                v[k] = fn(v[k]);
        return Panel(field_, calendar_, entities_, std::move(v), mask_);
    }

    friend bool operator==(const Panel& a, const Panel& b) {
        if (a.field_ != b.field_ || a.calendar_ != b.calendar_ || a.entities_ != b.entities_ || a.mask_ != b.mask_)
            return false;
        for (std::size_t k = 0; k < a.values_.size(); ++k)
            if (a.mask_[k] && a.values_[k] != b.values_[k])
                return false;
        return true;
    }

  private:
    Field field_ = Field::price;
    TradingCalendar calendar_;
    std::vector<std::string> entities_;
    std::vector<double> values_;
    std::vector<std::uint8_t> mask_;
};

/// Simple daily returns P(t)/P(t-1) - 1. A return exists only where both
/// prices exist; the first calendar date never has one.
inline Panel compute_returns(const Panel& prices) {
    if (prices.field() != Field::price)
        throw DataError("compute_returns needs a price panel, got " + std::string(to_string(prices.field())));
    const std::size_t nt = prices.n_dates(), ne = prices.n_entities();
    std::vector<double> v(nt * ne, std::nan(""));
    std::vector<std::uint8_t> m(nt * ne, 0);
    for (std::size_t t = 1; t < nt; ++t)
        for (std::size_t e = 0; e < ne; ++e)
            if (prices.present(t, e) && prices.present(t - 1, e)) {
                v[t * ne + e] = prices.value(t, e) / prices.value(t - 1, e) - 1.0;
                m[t * ne + e] = 1;
            }
    return Panel(Field::simple_return, prices.calendar(), prices.entities(), std::move(v), std::move(m));
}

/// Re-expresses `p` on another calendar and entity list. Cells absent from
/// `p` come out missing.
inline Panel reindex(const Panel& p, const TradingCalendar& calendar, const std::vector<std::string>& entities) {
    std::unordered_map<std::string_view, std::size_t> col;
    for (std::size_t e = 0; e < p.n_entities(); ++e)
        col.emplace(p.entities()[e], e);
    const std::size_t ne = entities.size();
    std::vector<double> v(calendar.size() * ne, std::nan(""));
    std::vector<std::uint8_t> m(calendar.size() * ne, 0);
    for (std::size_t t = 0; t < calendar.size(); ++t) {
        auto src_t = p.calendar().index_of(calendar[t]);
        if (!src_t)
            continue;
        for (std::size_t e = 0; e < ne; ++e) {
            auto it = col.find(entities[e]);
            if (it == col.end() || !p.present(*src_t, it->second))
                continue;
            v[t * ne + e] = p.value(*src_t, it->second);
            m[t * ne + e] = 1;
        }
    }
    return Panel(p.field(), calendar, entities, std::move(v), std::move(m));
}

/// Restricts every panel to the common dates and the common entities. Entity
/// order follows the first panel.
inline std::vector<Panel> align(std::span<const Panel> panels) {
    if (panels.empty())
        throw DataError("align needs at least one panel");
    std::vector<Date> dates = panels[0].calendar().dates();
    std::vector<std::string> ids = panels[0].entities();
    for (std::size_t i = 1; i < panels.size(); ++i) {
        const auto& other = panels[i].calendar();
        std::erase_if(dates, [&](Date d) { return !other.contains(d); });
        std::unordered_set<std::string> theirs(panels[i].entities().begin(), panels[i].entities().end());
        std::erase_if(ids, [&](const std::string& id) { return !theirs.contains(id); });
    }
    if (dates.empty() || ids.empty())
        throw DataError("no overlapping dates/entities");
    TradingCalendar cal(std::move(dates));
    std::vector<Panel> out;
    out.reserve(panels.size());
    for (const auto& p : panels)
        out.push_back(reindex(p, cal, ids));
    return out;
}

inline std::vector<Panel> align(std::initializer_list<Panel> panels) {
    return align(std::span<const Panel>(panels.begin(), panels.size()));
}

struct EqualWeighted {
    double mean = 0.0;
    std::size_t count = 0;   // members that contributed
    std::size_t excluded = 0; // members missing a return on the date
};

/// Arithmetic mean of the present member returns on date index `t`.
inline EqualWeighted equal_weighted_return(const Panel& returns, std::span<const std::size_t> members, std::size_t t) {
    EqualWeighted out;
    double sum = 0.0;
    for (std::size_t e : members) {
        if (returns.present(t, e)) {
            sum += returns.value(t, e);
            ++out.count;
        } else {
            ++out.excluded;
        }
    }
    if (out.count == 0)
        throw DataError("empty portfolio on date " + format_date(returns.calendar()[t]));
    out.mean = sum / static_cast<double>(out.count);
    return out;
}

/// Convenience overload keyed by entity identifiers and calendar date.
inline EqualWeighted equal_weighted_return(const Panel& returns, const std::vector<std::string>& members, Date date) {
    auto t = returns.calendar().index_of(date);
    if (!t)
        throw DataError("date " + format_date(date) + " not in calendar");
    std::vector<std::size_t> idx;
    std::unordered_set<std::string_view> seen;
    for (const auto& id : members) {
        if (!seen.insert(id).second)
            continue;
        auto e = returns.entity_index(id);
        if (!e)
            throw DataError("unknown entity '" + id + "'");
        idx.push_back(*e);
    }
    return equal_weighted_return(returns, idx, *t);
}

} // namespace dfactor
