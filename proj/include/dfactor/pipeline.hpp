#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "adf.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "dataset.hpp"
#include "factors.hpp"
#include "regression.hpp"
#include "report.hpp"
#include "stats.hpp"
#include "synthetic.hpp"

namespace dfactor {

/// Output documents keyed by file name. Nothing touches disk until a command
/// has finished, so a failed run leaves no partial output.
using Documents = std::map<std::string, std::string>;

struct LoadedData {
    DatasetBundle bundle;
    std::optional<GroundTruth> truth;
};

inline SyntheticSpec effective_synthetic_spec(const PipelineConfig& cfg) {
    SyntheticSpec s = cfg.synthetic.value_or(SyntheticSpec{});
    s.seed = cfg.seed;
    return s;
}

/// Loads the CSV bundle named in the config, or synthesizes one when the
/// config has no data block.
inline LoadedData load_data(const PipelineConfig& cfg) {
    if (!cfg.has_data_files()) {
        auto m = generate_synthetic_market(effective_synthetic_spec(cfg));
        return {std::move(m.bundle), std::move(m.truth)};
    }
    auto prices = load_panel_csv(*cfg.prices_path, Field::price);
    auto cds = load_panel_csv(*cfg.cds_path, Field::cds_spread_bp);
    auto mb = load_panel_csv(*cfg.mb_path, Field::mb_ratio);
    std::optional<Panel> iv;
    if (cfg.iv_path)
        iv = load_panel_csv(*cfg.iv_path, Field::implied_vol);

    std::vector<std::string> unit_notes;
    std::vector<std::pair<const Panel*, std::string>> checked{{&cds, *cfg.cds_path}};
    if (iv)
        checked.emplace_back(&*iv, *cfg.iv_path);
    for (const auto& [panel, path] : checked) {
        auto problem = unit_check(*panel);
        if (problem.empty())
            continue;
        if (!cfg.unit_override)
            throw DataError(path + ": " + problem + "; remedy: rescale the file or set units.override");
        unit_notes.push_back("unit check overridden for " + path + ": " + problem);
    }

    std::vector<std::string> provenance{"prices " + *cfg.prices_path, "cds " + *cfg.cds_path, "mb " + *cfg.mb_path};
    if (cfg.iv_path)
        provenance.push_back("iv " + *cfg.iv_path);
    auto bundle = assemble_bundle(prices, cds, mb, iv, std::move(provenance));
    bundle.warnings.insert(bundle.warnings.begin(), unit_notes.begin(), unit_notes.end());
    return {std::move(bundle), std::nullopt};
}

/// Factor series built from one bundle, plus every warning raised on the way.
struct FactorSet {
    Panel returns;
    FactorSeries rmu;
    std::optional<FactorSeries> vmc;
    FactorSeries rm;
    std::vector<std::string> warnings;
};

namespace detail {

inline void log_factor_events(const FactorSeries& f, std::vector<std::string>& log) {
    for (const auto& s : f.skipped)
        log.push_back(f.name() + ": skipped " + format_date(s.date) + " (" + s.reason + ")");
    for (const auto& d : f.tie_flagged)
        log.push_back(f.name() + ": tied entities removed from both legs on " + format_date(d));
}

inline std::string series_csv(const DatedSeries& s) {
    std::string out = "date,value\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        out += format_date(s.dates[i]) + "," + format_double(s.values[i]) + "\n";
    return out;
}

inline DatedSeries renamed(DatedSeries s, std::string name) {
    s.name = std::move(name);
    return s;
}

inline bool any_present(const Panel& p) {
    for (std::size_t t = 0; t < p.n_dates(); ++t)
        for (std::size_t e = 0; e < p.n_entities(); ++e)
            if (p.present(t, e))
                return true;
    return false;
}

} // namespace detail

inline FactorSet build_factor_set(const DatasetBundle& bundle, const PipelineConfig& cfg) {
    FactorSet fs;
    fs.warnings = bundle.warnings;
    fs.returns = compute_returns(bundle.prices);
    fs.rmu = build_rmu(bundle.cds, fs.returns, cfg.rmu);
    fs.rm = market_return(fs.returns);
    if (bundle.iv && detail::any_present(*bundle.iv))
        fs.vmc = build_vmc(*bundle.iv, fs.returns, cfg.vmc);
    else
        fs.warnings.push_back(bundle.iv ? "implied-vol panel has no observations; VMC skipped"
                                        : "no implied-vol panel; VMC skipped");
    detail::log_factor_events(fs.rmu, fs.warnings);
    if (fs.vmc)
        detail::log_factor_events(*fs.vmc, fs.warnings);
    detail::log_factor_events(fs.rm, fs.warnings);
    if (fs.rmu.size() < 2)
        throw DataError("RMU has fewer than two usable dates");
    return fs;
}

namespace detail {

inline std::string document_name(const std::string& stem, report::Format f) {
    return stem + "." + std::string(report::extension(f));
}

inline std::string split_table(const SplitReport& s, const std::string& factor, report::Format format) {
    const std::string day = format_date(s.split_date);
    const std::vector<std::pair<std::string, const SplitBucket*>> cols{{"until " + day, &s.before},
                                                                        {"after " + day, &s.after}};
    switch (format) {
    case report::Format::text: {
        auto cell = [](std::string c) { return std::string(c.size() < 18 ? 18 - c.size() : 1, ' ') + c; };
        auto row = [&](std::string label, auto value) {
            label.resize(16, ' ');
            for (const auto& [name, b] : cols)
                label += cell(value(*b));
            return label + "\n";
        };
        auto num = [](const SplitBucket& b, double SummaryStats::*m) {
            return b.stats ? report::printf_string("%.*f", (*b.stats).*m, 7) : std::string(".");
        };
        std::string out = factor + " split at " + day + "\n\n";
        out += std::string(16, ' ') + cell(cols[0].first) + cell(cols[1].first) + "\n";
        out += row("Mean Return", [&](const SplitBucket& b) { return num(b, &SummaryStats::mean); });
        out += row("Standard Error", [&](const SplitBucket& b) { return num(b, &SummaryStats::std_error); });
        out += row("N", [](const SplitBucket& b) { return std::to_string(b.n_obs); });
        return out;
    }
    case report::Format::csv: {
        std::string out = "factor,bucket,mean,std_error,n_obs\n";
        for (const auto& [name, b] : cols)
            out += factor + "," + name + "," + (b->stats ? format_double(b->stats->mean) : "") + "," +
                   (b->stats ? format_double(b->stats->std_error) : "") + "," + std::to_string(b->n_obs) + "\n";
        return out;
    }
    case report::Format::json: {
        nlohmann::ordered_json doc;
        doc["factor"] = factor;
        doc["split_date"] = day;
        doc["buckets"] = nlohmann::ordered_json::array();
        for (const auto& [name, b] : cols) {
            nlohmann::ordered_json j;
            j["label"] = name;
            j["mean"] = b->stats ? nlohmann::ordered_json(b->stats->mean) : nlohmann::ordered_json(nullptr);
            j["std_error"] = b->stats ? nlohmann::ordered_json(b->stats->std_error) : nlohmann::ordered_json(nullptr);
            j["n_obs"] = b->n_obs;
            doc["buckets"].push_back(std::move(j));
        }
        return doc.dump(2) + "\n";
    }
    }
    return {};
}

inline std::string warnings_log(const std::vector<std::string>& warnings) {
    std::string out;
    std::set<std::string> seen;
    for (const auto& w : warnings)
        if (seen.insert(w).second)
            out += w + "\n";
    return out;
}

} // namespace detail

/// Writes the bundle CSVs and the planted ground truth.
inline Documents cmd_simulate(const PipelineConfig& cfg) {
    const auto spec = effective_synthetic_spec(cfg);
    auto m = generate_synthetic_market(spec);
    Documents docs;
    docs["prices.csv"] = panel_to_csv(m.bundle.prices);
    docs["cds.csv"] = panel_to_csv(m.bundle.cds);
    docs["mb.csv"] = panel_to_csv(m.bundle.mb);
    if (m.bundle.iv)
        docs["iv.csv"] = panel_to_csv(*m.bundle.iv);

    const auto& gt = m.truth;
    nlohmann::ordered_json j;
    j["seed"] = spec.seed;
    j["n_entities"] = spec.n_entities;
    j["n_days"] = spec.n_days;
    j["entities"] = nlohmann::ordered_json::array();
    for (std::size_t e = 0; e < gt.entities.size(); ++e) {
        nlohmann::ordered_json row;
        row["id"] = gt.entities[e];
        row["distress"] = gt.distress[e];
        row["mb_decile"] = gt.mb_decile[e];
        row["beta"] = gt.betas[e];
        row["rmu_loading"] = gt.rmu_loadings[e];
        row["vmc_loading"] = gt.vmc_loadings[e];
        j["entities"].push_back(std::move(row));
    }
    auto path = [](const DatedSeries& s) {
        nlohmann::ordered_json p;
        p["dates"] = nlohmann::ordered_json::array();
        for (auto d : s.dates)
            p["dates"].push_back(format_date(d));
        p["values"] = s.values;
        return p;
    };
    j["factors"]["market"] = path(gt.market_path);
    j["factors"]["rmu"] = path(gt.rmu_path);
    j["factors"]["vmc"] = path(gt.vmc_path);
    docs["ground_truth.json"] = j.dump(2) + "\n";
    return docs;
}

inline Documents factor_documents(const FactorSet& fs, const PipelineConfig& cfg) {
    Documents docs;
    docs["rmu.csv"] = detail::series_csv(fs.rmu.series);
    docs["rm.csv"] = detail::series_csv(fs.rm.series);
    if (fs.vmc)
        docs["vmc.csv"] = detail::series_csv(fs.vmc->series);

    auto [risky, unrisky] = leg_returns(fs.rmu, fs.returns, "R", "U");
    std::vector<std::string> labels{"RMU", "Risky (R)", "Unrisky (U)", "RM"};
    std::vector<SummaryStats> daily{summary_stats(fs.rmu.series.values), summary_stats(risky.values),
                                    summary_stats(unrisky.values), summary_stats(fs.rm.series.values)};
    if (fs.vmc && fs.vmc->size() >= 2) {
        auto [vol, cons] = leg_returns(*fs.vmc, fs.returns, "V", "C");
        labels.insert(labels.end(), {"VMC", "Volatile (V)", "Consistent (C)"});
        daily.push_back(summary_stats(fs.vmc->series.values));
        daily.push_back(summary_stats(vol.values));
        daily.push_back(summary_stats(cons.values));
    }
    std::vector<SummaryStats> annual;
    for (const auto& d : daily)
        annual.push_back(annualize(d, cfg.annualization_days));
    docs[detail::document_name("summary_daily", cfg.format)] =
        report::emit_summary_table(daily, labels, cfg.format, "Daily factor returns");
    docs[detail::document_name("summary_annual", cfg.format)] = report::emit_summary_table(
        annual, labels, cfg.format, "Annualized factor returns (" + std::to_string(cfg.annualization_days) + " days)");

    if (cfg.split_date) {
        const FactorSeries& target = fs.vmc ? *fs.vmc : fs.rmu;
        const std::string label = fs.vmc ? "VMC" : "RMU";
        docs[detail::document_name("split_" + target.name(), cfg.format)] =
            detail::split_table(split_series(target, *cfg.split_date), label, cfg.format);
    }
    docs["warnings.log"] = detail::warnings_log(fs.warnings);
    return docs;
}

/// Factor series, summary tables, optional split report and the warning log.
inline Documents cmd_factors(const PipelineConfig& cfg) {
    auto data = load_data(cfg);
    return factor_documents(build_factor_set(data.bundle, cfg), cfg);
}

namespace detail {

inline std::vector<RegressionResult> regress_all(const QuantilePortfolioReturns& qp,
                                                 const std::vector<const DatedSeries*>& regressors,
                                                 const PipelineConfig& cfg) {
    std::vector<RegressionResult> out;
    for (const auto& s : qp.series)
        out.push_back(ols(s, regressors, OlsOptions{true, cfg.hac_lag}));
    return out;
}

inline std::string diagnostics(const std::vector<const DatedSeries*>& factors, const PipelineConfig& cfg) {
    auto aligned = align_series(factors);
    std::vector<ADFResult> adf;
    for (const auto* f : factors)
        adf.push_back(adf_test(f->values, cfg.adf_lags, cfg.adf_spec));
    const std::size_t k = factors.size();
    std::vector<std::vector<double>> corr(k, std::vector<double>(k, 1.0));
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b)
            corr[a][b] = corr[b][a] = correlation(aligned.columns[a], aligned.columns[b]);

    switch (cfg.format) {
    case report::Format::text: {
        auto pad = [](std::string s, std::size_t w) {
            return std::string(s.size() < w ? w - s.size() : 1, ' ') + s;
        };
        std::string out = "Factor correlations (" + std::to_string(aligned.dates.size()) + " common dates)\n\n";
        out += std::string(8, ' ');
        for (const auto* f : factors)
            out += pad(f->name, 10);
        out += "\n";
        for (std::size_t a = 0; a < k; ++a) {
            std::string name = factors[a]->name;
            name.resize(8, ' ');
            out += name;
            for (std::size_t b = 0; b < k; ++b)
                out += pad(report::printf_string("%.*f", corr[a][b], 4), 10);
            out += "\n";
        }
        out += "\nAugmented Dickey-Fuller tests (" + std::string(to_string(cfg.adf_spec)) + ")\n\n";
        out += "        " + pad("Test Stat", 12) + pad("1% CV", 10) + pad("5% CV", 10) + pad("10% CV", 10) +
               pad("lags", 6) + pad("N", 7) + "\n";
        for (std::size_t a = 0; a < k; ++a) {
            const auto& r = adf[a];
            std::string name = factors[a]->name;
            name.resize(8, ' ');
            out += name + pad(report::printf_string("%.*f", r.test_statistic, 3), 12) +
                   pad(report::printf_string("%.*f", r.critical_values.at("1%"), 3), 10) +
                   pad(report::printf_string("%.*f", r.critical_values.at("5%"), 3), 10) +
                   pad(report::printf_string("%.*f", r.critical_values.at("10%"), 3), 10) +
                   pad(std::to_string(r.lag_order), 6) + pad(std::to_string(r.n_obs), 7) + "\n";
        }
        return out;
    }
    case report::Format::csv: {
        std::string out = "kind,factor,other,value,lag_order,n_obs,cv_1,cv_5,cv_10,rejected_5pct\n";
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b)
                out += "correlation," + factors[a]->name + "," + factors[b]->name + "," + format_double(corr[a][b]) +
                       ",,,,,,\n";
        for (std::size_t a = 0; a < k; ++a) {
            const auto& r = adf[a];
            out += "adf," + factors[a]->name + ",," + format_double(r.test_statistic) + "," +
                   std::to_string(r.lag_order) + "," + std::to_string(r.n_obs) + "," +
                   format_double(r.critical_values.at("1%")) + "," + format_double(r.critical_values.at("5%")) + "," +
                   format_double(r.critical_values.at("10%")) + "," + (r.rejected_at_5pct ? "1" : "0") + "\n";
        }
        return out;
    }
    case report::Format::json: {
        nlohmann::ordered_json doc;
        doc["correlation"]["factors"] = nlohmann::ordered_json::array();
        for (const auto* f : factors)
            doc["correlation"]["factors"].push_back(f->name);
        doc["correlation"]["matrix"] = corr;
        doc["correlation"]["n_obs"] = aligned.dates.size();
        doc["adf"] = nlohmann::ordered_json::array();
        for (std::size_t a = 0; a < k; ++a) {
            const auto& r = adf[a];
            nlohmann::ordered_json j;
            j["factor"] = factors[a]->name;
            j["spec"] = std::string(to_string(r.spec));
            j["test_statistic"] = r.test_statistic;
            j["lag_order"] = r.lag_order;
            j["n_obs"] = r.n_obs;
            j["critical_values"] = r.critical_values;
            j["rejected_at_5pct"] = r.rejected_at_5pct;
            doc["adf"].push_back(std::move(j));
        }
        return doc.dump(2) + "\n";
    }
    }
    return {};
}

} // namespace detail

inline Documents regression_documents(const DatasetBundle& bundle, const FactorSet& fs, const PipelineConfig& cfg,
                                      std::vector<std::string>& warnings) {
    const DatedSeries rmu = detail::renamed(fs.rmu.series, "RMU");
    const DatedSeries rm = detail::renamed(fs.rm.series, "RM");
    std::optional<DatedSeries> vmc;
    if (fs.vmc && fs.vmc->size() > 0)
        vmc = detail::renamed(fs.vmc->series, "VMC");

    Documents docs;
    auto run = [&](std::size_t q, bool main_set) {
        auto qp = form_quantile_portfolios(bundle.mb, fs.returns, q, "mb_q");
        for (const auto& sk : qp.skipped)
            warnings.push_back(std::to_string(q) + " MB portfolios: skipped " + format_date(sk.date) + " (" + sk.reason +
                               ")");
        const auto labels = report::quantile_labels(q);
        const std::string qs = "q" + std::to_string(q);
        const std::string kind = q == 5 ? "quintiles" : q == 10 ? "deciles" : std::to_string(q) + "-quantiles";
        auto emit = [&](const std::string& stem, const std::string& title, std::vector<const DatedSeries*> regs) {
            docs[detail::document_name(qs + "_" + stem, cfg.format)] =
                report::emit_regression_table(detail::regress_all(qp, regs, cfg), cfg.format,
                                              "MB " + kind + " regressed against " + title, labels);
        };
        if (main_set)
            emit("rmu", "RMU", {&rmu});
        emit("rmu_rm", "RMU and RM", {&rmu, &rm});
        if (vmc) {
            if (main_set)
                emit("vmc", "VMC", {&*vmc});
            emit("vmc_rm", "VMC and RM", {&*vmc, &rm});
            emit("rmu_vmc_rm", "RMU, VMC, and RM", {&rmu, &*vmc, &rm});
        }
    };
    run(cfg.quantiles, true);
    if (cfg.decile_variants && cfg.quantiles != 10)
        run(10, false);

    std::vector<const DatedSeries*> factors{&rmu};
    if (vmc)
        factors.push_back(&*vmc);
    factors.push_back(&rm);
    docs[detail::document_name("diagnostics", cfg.format)] = detail::diagnostics(factors, cfg);
    return docs;
}

/// Quantile regressions against the factor sets, plus factor diagnostics.
inline Documents cmd_regress(const PipelineConfig& cfg) {
    auto data = load_data(cfg);
    auto fs = build_factor_set(data.bundle, cfg);
    auto warnings = fs.warnings;
    auto docs = regression_documents(data.bundle, fs, cfg, warnings);
    docs["warnings.log"] = detail::warnings_log(warnings);
    return docs;
}

/// Everything: factor files, summaries, regressions and diagnostics.
inline Documents cmd_report(const PipelineConfig& cfg) {
    auto data = load_data(cfg);
    auto fs = build_factor_set(data.bundle, cfg);
    auto docs = factor_documents(fs, cfg);
    auto warnings = fs.warnings;
    docs.merge(regression_documents(data.bundle, fs, cfg, warnings));
    docs["warnings.log"] = detail::warnings_log(warnings);
    return docs;
}

inline void write_documents(const Documents& docs, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    for (const auto& [name, content] : docs) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out)
            throw ConfigError("cannot write " + (dir / name).string());
        out << content;
    }
}

} // namespace dfactor
