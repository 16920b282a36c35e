#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "calendar.hpp"
#include "dataset.hpp"
#include "error.hpp"
#include "panel.hpp"
#include "random.hpp"
#include "series.hpp"

namespace dfactor {

/// Daily factor path: x_t = mean + ar (x_{t-1} - mean) + vol sqrt(1 - ar^2) z_t,
/// so `vol` is the stationary standard deviation for any |ar| < 1.
struct FactorProcess {
    double mean = 0.0;
    double vol = 0.01;
    double ar = 0.0;
};

/// Parameters of a synthetic market with planted factor structure.
///
/// Entity returns follow r_e(t) = beta_e M(t) + c_e RMU(t) + v_e VMC(t) + eps_e(t)
/// with exogenous factor paths. A latent distress score per entity drives the
/// sort fields: more distress means higher CDS spreads, higher implied vols and
/// a lower market-to-book ratio. Empty per-entity vectors take the defaults
/// below, which interpolate linearly across planted MB deciles (decile 1 =
/// most distressed = lowest MB).
struct SyntheticSpec {
    std::size_t n_entities = 80;
    std::size_t n_days = 2000;
    std::uint64_t seed = 1;
    std::string start_date = "2005-01-03";

    FactorProcess market{0.0003, 0.012, 0.0};
    FactorProcess rmu{0.0002, 0.006, 0.0};
    FactorProcess vmc{0.0, 0.008, 0.0};
    double idiosyncratic_vol = 0.01;

    std::vector<double> market_betas;
    std::vector<double> rmu_loadings;
    std::vector<double> vmc_loadings;
    std::vector<double> distress_driver;

    double default_beta = 1.0;
    double rmu_loading_low_mb = 1.0;  // decile 1
    double rmu_loading_high_mb = -0.3; // decile 10
    double vmc_loading_low_mb = 0.4;
    double vmc_loading_high_mb = -0.1;

    double sort_noise = 0.02;    // sd of the daily log-noise on each sort field
    std::size_t iv_start_day = 0; // implied vols missing before this day index

    void validate() const {
        if (n_entities < 20)
            throw ConfigError("synthetic spec needs n_entities >= 20");
        if (n_days < 100)
            throw ConfigError("synthetic spec needs n_days >= 100");
        if (!parse_date(start_date))
            throw ConfigError("synthetic start_date is not an ISO date: " + start_date);
        for (const FactorProcess* f : {&market, &rmu, &vmc})
            if (!(f->vol >= 0.0) || !std::isfinite(f->mean) || !(std::abs(f->ar) < 1.0))
                throw ConfigError("factor process needs vol >= 0, finite mean, |ar| < 1");
        if (!(idiosyncratic_vol >= 0.0) || !(sort_noise >= 0.0))
            throw ConfigError("volatilities must be non-negative");
        for (const auto* v : {&market_betas, &rmu_loadings, &vmc_loadings, &distress_driver})
            if (!v->empty() && v->size() != n_entities)
                throw ConfigError("per-entity vectors must have n_entities elements");
        if (iv_start_day >= n_days)
            throw ConfigError("iv_start_day must be below n_days");
    }
};

/// Everything planted in a synthetic bundle, for checking estimators.
struct GroundTruth {
    std::vector<std::string> entities;
    std::vector<double> distress;
    std::vector<int> mb_decile; // 1..10 by planted distress rank
    std::vector<double> betas;
    std::vector<double> rmu_loadings;
    std::vector<double> vmc_loadings;
    DatedSeries market_path;
    DatedSeries rmu_path;
    DatedSeries vmc_path;
    Panel returns; // exact generated returns (first date missing)
};

struct SyntheticMarket {
    DatasetBundle bundle;
    GroundTruth truth;
};

namespace detail {

inline std::vector<double> decile_profile(const std::vector<int>& decile, double first, double last) {
    std::vector<double> out(decile.size());
    for (std::size_t e = 0; e < decile.size(); ++e)
        out[e] = first + (last - first) * static_cast<double>(decile[e] - 1) / 9.0;
    return out;
}

inline std::string entity_id(std::size_t i, std::size_t n) {
    const int width = n >= 1000 ? 4 : 3;
    char buf[32];
    std::snprintf(buf, sizeof buf, "E%0*zu", width, i + 1);
    return buf;
}

inline void simulate_factor(SplitMix64& rng, const FactorProcess& f, std::vector<double>& path) {
    const double shock = f.vol * std::sqrt(1.0 - f.ar * f.ar);
    double x = f.mean;
    for (double& v : path) {
        x = f.mean + f.ar * (x - f.mean) + shock * rng.normal();
        v = x;
    }
}

} // namespace detail

/// Deterministic in (spec, seed): draws come from fixed SplitMix64 streams,
/// 0 for entity attributes, 1 for factor paths, 2 for idiosyncratic noise and
/// 3 for sort-field noise.
inline SyntheticMarket generate_synthetic_market(const SyntheticSpec& spec) {
    spec.validate();
    const std::size_t ne = spec.n_entities, nt = spec.n_days;
    auto attrs = make_stream(spec.seed, 0);
    auto factor_rng = make_stream(spec.seed, 1);
    auto idio_rng = make_stream(spec.seed, 2);
    auto sort_rng = make_stream(spec.seed, 3);

    GroundTruth gt;
    for (std::size_t e = 0; e < ne; ++e)
        gt.entities.push_back(detail::entity_id(e, ne));

    // Evenly spaced distress in [-1.5, 1.5], shuffled so entity ids carry no rank.
    if (spec.distress_driver.empty()) {
        std::vector<std::size_t> perm(ne);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = ne - 1; i > 0; --i)
            std::swap(perm[i], perm[attrs.next() % (i + 1)]);
        gt.distress.resize(ne);
        for (std::size_t e = 0; e < ne; ++e)
            gt.distress[e] = -1.5 + 3.0 * static_cast<double>(perm[e]) / static_cast<double>(ne - 1);
    } else {
        gt.distress = spec.distress_driver;
    }

    std::vector<std::size_t> by_distress(ne);
    std::iota(by_distress.begin(), by_distress.end(), 0);
    std::stable_sort(by_distress.begin(), by_distress.end(),
                     [&](std::size_t a, std::size_t b) { return gt.distress[a] > gt.distress[b]; });
    gt.mb_decile.resize(ne);
    for (std::size_t rank = 0; rank < ne; ++rank)
        gt.mb_decile[by_distress[rank]] = static_cast<int>(rank * 10 / ne) + 1;

    gt.betas = spec.market_betas.empty() ? std::vector<double>(ne, spec.default_beta) : spec.market_betas;
    gt.rmu_loadings = spec.rmu_loadings.empty()
                          ? detail::decile_profile(gt.mb_decile, spec.rmu_loading_low_mb, spec.rmu_loading_high_mb)
                          : spec.rmu_loadings;
    gt.vmc_loadings = spec.vmc_loadings.empty()
                          ? detail::decile_profile(gt.mb_decile, spec.vmc_loading_low_mb, spec.vmc_loading_high_mb)
                          : spec.vmc_loadings;

    std::vector<double> start_price(ne);
    for (auto& p : start_price)
        p = 20.0 * std::exp(3.0 * attrs.uniform());

    const TradingCalendar cal = business_days(*parse_date(spec.start_date), nt);
    std::vector<double> m(nt - 1), f(nt - 1), v(nt - 1);
    detail::simulate_factor(factor_rng, spec.market, m);
    detail::simulate_factor(factor_rng, spec.rmu, f);
    detail::simulate_factor(factor_rng, spec.vmc, v);
    std::vector<Date> path_dates(cal.begin() + 1, cal.end());
    gt.market_path = {"market", path_dates, m};
    gt.rmu_path = {"rmu", path_dates, f};
    gt.vmc_path = {"vmc", path_dates, v};

    const std::size_t cells = nt * ne;
    std::vector<double> ret(cells, std::nan("")), price(cells), cds(cells), iv(cells, std::nan("")), mb(cells);
    std::vector<std::uint8_t> ret_mask(cells, 0), full(cells, 1), iv_mask(cells, 0);
    for (std::size_t e = 0; e < ne; ++e)
        price[e] = start_price[e];
    for (std::size_t t = 1; t < nt; ++t)
        for (std::size_t e = 0; e < ne; ++e) {
            const std::size_t k = t * ne + e;
            const double r = gt.betas[e] * m[t - 1] + gt.rmu_loadings[e] * f[t - 1] + gt.vmc_loadings[e] * v[t - 1] +
                             spec.idiosyncratic_vol * idio_rng.normal();
            if (!(r > -1.0))
                throw NumericalError("synthetic spec produced a return at or below -100%");
            ret[k] = r;
            ret_mask[k] = 1;
            price[k] = price[k - ne] * (1.0 + r);
        }
    for (std::size_t t = 0; t < nt; ++t)
        for (std::size_t e = 0; e < ne; ++e) {
            const std::size_t k = t * ne + e;
            const double z = gt.distress[e];
            cds[k] = 80.0 * std::exp(1.0 * z + spec.sort_noise * sort_rng.normal());
            const double iv_value = 0.25 * std::exp(0.5 * z + spec.sort_noise * sort_rng.normal());
            if (t >= spec.iv_start_day) {
                iv[k] = iv_value;
                iv_mask[k] = 1;
            }
            mb[k] = 2.0 * std::exp(-0.7 * z + spec.sort_noise * sort_rng.normal());
        }

    gt.returns = Panel(Field::simple_return, cal, gt.entities, ret, ret_mask);
    Panel prices(Field::price, cal, gt.entities, std::move(price), full);
    Panel cds_panel(Field::cds_spread_bp, cal, gt.entities, std::move(cds), full);
    Panel mb_panel(Field::mb_ratio, cal, gt.entities, std::move(mb), full);
    Panel iv_panel(Field::implied_vol, cal, gt.entities, std::move(iv), std::move(iv_mask));

    std::vector<std::string> provenance{"synthetic seed=" + std::to_string(spec.seed) +
                                        " entities=" + std::to_string(ne) + " days=" + std::to_string(nt)};
    auto bundle = assemble_bundle(prices, cds_panel, mb_panel, iv_panel, std::move(provenance));
    return {std::move(bundle), std::move(gt)};
}

} // namespace dfactor
