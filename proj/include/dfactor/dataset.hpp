#pragma once

#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "csv.hpp"
#include "panel.hpp"

namespace dfactor {

/// The per-field panels of one study, aligned to a shared calendar and
/// entity list.
struct DatasetBundle {
    Panel prices;
    Panel cds;
    Panel mb;
    std::optional<Panel> iv;
    TradingCalendar calendar;
    std::vector<std::string> provenance; // one line per source
    std::vector<std::string> warnings;   // dropped entities, unit notes

    const std::vector<std::string>& entities() const { return prices.entities(); }
};

/// Aligns raw panels into a bundle. Prices, CDS and MB are intersected on
/// dates; entities without any CDS observation (or missing from any required
/// panel) are dropped, each with one logged reason. Implied vols may cover a
/// shorter window and are reindexed onto the bundle calendar.
inline DatasetBundle assemble_bundle(const Panel& prices, const Panel& cds, const Panel& mb,
                                     const std::optional<Panel>& iv, std::vector<std::string> provenance = {}) {
    if (prices.field() != Field::price || cds.field() != Field::cds_spread_bp || mb.field() != Field::mb_ratio)
        throw DataError("bundle panels have the wrong fields");
    if (iv && iv->field() != Field::implied_vol)
        throw DataError("bundle implied-vol panel has the wrong field");

    DatasetBundle b;
    b.provenance = std::move(provenance);

    std::vector<Date> dates = prices.calendar().dates();
    std::erase_if(dates, [&](Date d) { return !cds.calendar().contains(d) || !mb.calendar().contains(d); });
    if (dates.empty())
        throw DataError("no overlapping dates/entities");
    b.calendar = TradingCalendar(std::move(dates));

    std::vector<std::string> ids;
    for (std::size_t e = 0; e < prices.n_entities(); ++e) {
        const auto& id = prices.entities()[e];
        auto c = cds.entity_index(id);
        if (!c) {
            b.warnings.push_back("dropped entity " + id + ": no CDS column");
            continue;
        }
        bool any = false;
        for (std::size_t t = 0; t < cds.n_dates() && !any; ++t)
            any = cds.present(t, *c);
        if (!any) {
            b.warnings.push_back("dropped entity " + id + ": CDS column has no observations");
            continue;
        }
        if (!mb.entity_index(id)) {
            b.warnings.push_back("dropped entity " + id + ": no MB column");
            continue;
        }
        ids.push_back(id);
    }
    std::unordered_set<std::string> kept(prices.entities().begin(), prices.entities().end());
    for (const auto& id : cds.entities())
        if (!kept.contains(id))
            b.warnings.push_back("CDS column " + id + " has no matching price column");
    if (ids.empty())
        throw DataError("no overlapping dates/entities");

    b.prices = reindex(prices, b.calendar, ids);
    b.cds = reindex(cds, b.calendar, ids);
    b.mb = reindex(mb, b.calendar, ids);
    if (iv)
        b.iv = reindex(*iv, b.calendar, ids);
    return b;
}

} // namespace dfactor
