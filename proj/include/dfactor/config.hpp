#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "adf.hpp"
#include "calendar.hpp"
#include "error.hpp"
#include "factors.hpp"
#include "report.hpp"
#include "synthetic.hpp"

namespace dfactor {

/// Fully validated run configuration. Built from the JSON config document
/// plus command-line overrides; nothing runs until this parses.
struct PipelineConfig {
    std::optional<std::string> prices_path;
    std::optional<std::string> cds_path;
    std::optional<std::string> mb_path;
    std::optional<std::string> iv_path;

    SortSpec rmu = rmu_spec();
    SortSpec vmc = vmc_spec();
    std::size_t quantiles = 5;
    bool decile_variants = true;
    std::optional<std::size_t> hac_lag; // empty = automatic
    int annualization_days = 250;
    std::optional<Date> split_date;
    AdfSpec adf_spec = AdfSpec::constant;
    std::optional<std::size_t> adf_lags; // empty = AIC selection
    bool unit_override = false;

    std::optional<SyntheticSpec> synthetic;
    std::uint64_t seed = 1;

    std::string out_dir = "out";
    report::Format format = report::Format::text;

    bool has_data_files() const { return prices_path || cds_path || mb_path || iv_path; }
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.contains(it.key()))
            throw ConfigError("unknown config key '" + where + it.key() + "'");
}

template <class T>
T get_as(const json& obj, const std::string& key, const std::string& where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + where + key + "' has the wrong type");
    }
}

inline std::optional<std::size_t> auto_or_count(const json& v, const std::string& key) {
    if (v.is_string()) {
        if (v.get<std::string>() == "auto")
            return std::nullopt;
        throw ConfigError("config key '" + key + "' must be \"auto\" or a non-negative integer");
    }
    if (v.is_number_unsigned())
        return v.get<std::size_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0)
        return static_cast<std::size_t>(v.get<long long>());
    throw ConfigError("config key '" + key + "' must be \"auto\" or a non-negative integer");
}

inline SortSpec percentile_pair(const json& v, SortSpec base, const std::string& key) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError("config key '" + key + "' must be a [low, high] percentile pair");
    base.low_percentile = v[0].get<double>();
    base.high_percentile = v[1].get<double>();
    try {
        base.validate();
    } catch (const ConfigError& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
    return base;
}

inline FactorProcess factor_process(const json& v, FactorProcess base, const std::string& key) {
    if (!v.is_object())
        throw ConfigError("config key '" + key + "' must be an object");
    reject_unknown(v, {"mean", "vol", "ar"}, key + ".");
    if (v.contains("mean"))
        base.mean = get_as<double>(v, "mean", key + ".");
    if (v.contains("vol"))
        base.vol = get_as<double>(v, "vol", key + ".");
    if (v.contains("ar"))
        base.ar = get_as<double>(v, "ar", key + ".");
    return base;
}

inline SyntheticSpec synthetic_spec(const json& v) {
    if (!v.is_object())
        throw ConfigError("config key 'synthetic' must be an object");
    const std::string w = "synthetic.";
    reject_unknown(v,
                   {"n_entities", "n_days", "start_date", "market", "rmu", "vmc", "idiosyncratic_vol", "market_betas",
                    "rmu_loadings", "vmc_loadings", "distress_driver", "default_beta", "rmu_loading_low_mb",
                    "rmu_loading_high_mb", "vmc_loading_low_mb", "vmc_loading_high_mb", "sort_noise", "iv_start_day"},
                   w);
    SyntheticSpec s;
    if (v.contains("n_entities"))
        s.n_entities = get_as<std::size_t>(v, "n_entities", w);
    if (v.contains("n_days"))
        s.n_days = get_as<std::size_t>(v, "n_days", w);
    if (v.contains("start_date"))
        s.start_date = get_as<std::string>(v, "start_date", w);
    if (v.contains("market"))
        s.market = factor_process(v["market"], s.market, w + "market");
    if (v.contains("rmu"))
        s.rmu = factor_process(v["rmu"], s.rmu, w + "rmu");
    if (v.contains("vmc"))
        s.vmc = factor_process(v["vmc"], s.vmc, w + "vmc");
    for (auto [key, dst] : {std::pair{"idiosyncratic_vol", &s.idiosyncratic_vol}, {"default_beta", &s.default_beta},
                            {"rmu_loading_low_mb", &s.rmu_loading_low_mb}, {"rmu_loading_high_mb", &s.rmu_loading_high_mb},
                            {"vmc_loading_low_mb", &s.vmc_loading_low_mb}, {"vmc_loading_high_mb", &s.vmc_loading_high_mb},
                            {"sort_noise", &s.sort_noise}})
        if (v.contains(key))
            *dst = get_as<double>(v, key, w);
    for (auto [key, dst] : {std::pair{"market_betas", &s.market_betas}, {"rmu_loadings", &s.rmu_loadings},
                            {"vmc_loadings", &s.vmc_loadings}, {"distress_driver", &s.distress_driver}})
        if (v.contains(key))
            *dst = get_as<std::vector<double>>(v, key, w);
    if (v.contains("iv_start_day"))
        s.iv_start_day = get_as<std::size_t>(v, "iv_start_day", w);
    return s;
}

} // namespace detail

/// Parses and validates a config document. Relative data paths resolve
/// against `base_dir` (the config file's directory).
inline PipelineConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {}) {
    using detail::get_as;
    if (!doc.is_object())
        throw ConfigError("config must be a JSON object");
    detail::reject_unknown(doc,
                           {"data", "factors", "quantiles", "decile_variants", "hac_lag", "annualization_days",
                            "split_date", "adf", "synthetic", "seed", "units", "output"},
                           "");
    PipelineConfig c;
    if (doc.contains("data")) {
        const auto& d = doc["data"];
        if (!d.is_object())
            throw ConfigError("config key 'data' must be an object");
        detail::reject_unknown(d, {"prices", "cds", "mb", "iv"}, "data.");
        auto path = [&](const char* key) -> std::optional<std::string> {
            if (!d.contains(key))
                return std::nullopt;
            std::filesystem::path p = get_as<std::string>(d, key, "data.");
            if (p.is_relative() && !base_dir.empty())
                p = base_dir / p;
            return p.string();
        };
        c.prices_path = path("prices");
        c.cds_path = path("cds");
        c.mb_path = path("mb");
        c.iv_path = path("iv");
    }
    if (doc.contains("factors")) {
        const auto& f = doc["factors"];
        if (!f.is_object())
            throw ConfigError("config key 'factors' must be an object");
        detail::reject_unknown(f, {"rmu", "vmc"}, "factors.");
        if (f.contains("rmu"))
            c.rmu = detail::percentile_pair(f["rmu"], c.rmu, "factors.rmu");
        if (f.contains("vmc"))
            c.vmc = detail::percentile_pair(f["vmc"], c.vmc, "factors.vmc");
    }
    if (doc.contains("quantiles")) {
        c.quantiles = get_as<std::size_t>(doc, "quantiles", "");
        if (c.quantiles < 2)
            throw ConfigError("config key 'quantiles' must be at least 2");
    }
    if (doc.contains("decile_variants"))
        c.decile_variants = get_as<bool>(doc, "decile_variants", "");
    if (doc.contains("hac_lag"))
        c.hac_lag = detail::auto_or_count(doc["hac_lag"], "hac_lag");
    if (doc.contains("annualization_days")) {
        c.annualization_days = get_as<int>(doc, "annualization_days", "");
        if (c.annualization_days <= 0)
            throw ConfigError("config key 'annualization_days' must be positive");
    }
    if (doc.contains("split_date")) {
        auto s = get_as<std::string>(doc, "split_date", "");
        c.split_date = parse_date(s);
        if (!c.split_date)
            throw ConfigError("config key 'split_date' is not an ISO date: " + s);
    }
    if (doc.contains("adf")) {
        const auto& a = doc["adf"];
        if (!a.is_object())
            throw ConfigError("config key 'adf' must be an object");
        detail::reject_unknown(a, {"spec", "lags"}, "adf.");
        if (a.contains("spec")) {
            auto s = get_as<std::string>(a, "spec", "adf.");
            auto spec = adf_spec_from_string(s);
            if (!spec)
                throw ConfigError("config key 'adf.spec' must be none, constant or constant+trend");
            c.adf_spec = *spec;
        }
        if (a.contains("lags"))
            c.adf_lags = detail::auto_or_count(a["lags"], "adf.lags");
    }
    if (doc.contains("synthetic"))
        c.synthetic = detail::synthetic_spec(doc["synthetic"]);
    if (doc.contains("seed"))
        c.seed = get_as<std::uint64_t>(doc, "seed", "");
    if (doc.contains("units")) {
        const auto& u = doc["units"];
        if (!u.is_object())
            throw ConfigError("config key 'units' must be an object");
        detail::reject_unknown(u, {"override"}, "units.");
        if (u.contains("override"))
            c.unit_override = get_as<bool>(u, "override", "units.");
    }
    if (doc.contains("output")) {
        const auto& o = doc["output"];
        if (!o.is_object())
            throw ConfigError("config key 'output' must be an object");
        detail::reject_unknown(o, {"dir", "format"}, "output.");
        if (o.contains("dir"))
            c.out_dir = get_as<std::string>(o, "dir", "output.");
        if (o.contains("format")) {
            auto f = report::format_from_string(get_as<std::string>(o, "format", "output."));
            if (!f)
                throw ConfigError("config key 'output.format' must be text, csv or json");
            c.format = *f;
        }
    }
    if (c.synthetic)
        c.synthetic->seed = c.seed;
    if (c.has_data_files() && !(c.prices_path && c.cds_path && c.mb_path))
        throw ConfigError("config key 'data' needs prices, cds and mb files (iv is optional); remedy: add the missing "
                          "paths or remove 'data' to run on synthetic data");
    if (c.synthetic)
        c.synthetic->validate();
    return c;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(doc, path.parent_path());
}

} // namespace dfactor
