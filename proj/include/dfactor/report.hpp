#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "csv.hpp"
#include "error.hpp"
#include "regression.hpp"
#include "stats.hpp"

namespace dfactor::report {

enum class Format { text, csv, json };

inline std::optional<Format> format_from_string(std::string_view s) {
    if (s == "text" || s == "txt")
        return Format::text;
    if (s == "csv")
        return Format::csv;
    if (s == "json")
        return Format::json;
    return std::nullopt;
}

inline std::string_view extension(Format f) {
    switch (f) {
    case Format::text:
        return "txt";
    case Format::csv:
        return "csv";
    case Format::json:
        return "json";
    }
    return "txt";
}

inline constexpr const char* t_legend = "t statistics in parentheses";
inline constexpr const char* star_legend = "* p<0.05, ** p<0.01, *** p<0.001";

inline std::string printf_string(const char* fmt, double v, int prec) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, prec, v);
    return buf;
}

/// Coefficient text in regression-table style: three decimals at or above
/// one, otherwise three significant digits (0.816, -0.0153, 0.000273).
inline std::string format_coefficient(double x) {
    if (x == 0.0)
        return "0";
    const int mag = static_cast<int>(std::floor(std::log10(std::abs(x))));
    const int decimals = std::max(3, 2 - mag);
    return printf_string("%.*f", x, decimals);
}

inline std::string format_t(const std::optional<double>& t) {
    if (!t)
        return "(.)";
    return "(" + printf_string("%.*f", *t, 2) + ")";
}

/// One regression table: a column per portfolio, a coefficient row and a
/// parenthesised t row per regressor, then N and R-sq.
struct ReportTable {
    struct Row {
        std::string label;
        std::vector<std::string> coefficients; // with stars
        std::vector<std::string> t_stats;      // "(29.64)"
    };
    std::string title;
    std::vector<std::string> column_labels;
    std::vector<Row> rows;
    std::vector<std::string> n_row;
    std::vector<std::string> r_sq_row;
    std::vector<std::string> footer{t_legend, star_legend};
};

/// Stata-style truncated portfolio labels: "MB Quin~1", "2", ..., "MB Quin~5".
inline std::vector<std::string> quantile_labels(std::size_t q) {
    std::vector<std::string> out;
    const std::string stem = q == 5 ? "MB Quin" : q == 10 ? "MB Deci" : "MB Q" + std::to_string(q) + "-";
    for (std::size_t j = 1; j <= q; ++j) {
        if (j == 1 || j == q) {
            std::string tail = std::to_string(j);
            std::string head = stem.substr(0, std::min<std::size_t>(stem.size(), 8 - tail.size()));
            out.push_back(head + "~" + tail);
        } else {
            out.push_back(std::to_string(j));
        }
    }
    return out;
}

inline void require_same_regressors(const std::vector<RegressionResult>& results) {
    if (results.empty())
        throw DataError("regression table needs at least one result");
    for (const auto& r : results)
        if (r.regressor_names != results.front().regressor_names)
            throw DataError("mismatched regressor sets across table columns");
}

inline ReportTable build_regression_table(const std::vector<RegressionResult>& results,
                                          std::vector<std::string> column_labels, std::string title) {
    require_same_regressors(results);
    if (column_labels.size() != results.size())
        throw DataError("column label count does not match results");
    ReportTable t;
    t.title = std::move(title);
    t.column_labels = std::move(column_labels);
    const auto& names = results.front().regressor_names;
    for (std::size_t j = 0; j < names.size(); ++j) {
        ReportTable::Row row;
        row.label = names[j];
        for (const auto& r : results) {
            const auto& p = r.p_values[j];
            row.coefficients.push_back(format_coefficient(r.coefficients[static_cast<Eigen::Index>(j)]) +
                                       (p ? significance_stars(*p) : ""));
            row.t_stats.push_back(format_t(r.t_stats[j]));
        }
        t.rows.push_back(std::move(row));
    }
    for (const auto& r : results) {
        t.n_row.push_back(std::to_string(r.n_obs));
        t.r_sq_row.push_back(printf_string("%.*f", r.r_squared, 3));
    }
    return t;
}

inline std::string render_text(const ReportTable& t) {
    std::size_t label_w = 12;
    for (const auto& r : t.rows)
        label_w = std::max(label_w, r.label.size() + 2);
    std::size_t cell_w = 12;
    auto widen = [&](const std::vector<std::string>& cells) {
        for (const auto& c : cells)
            cell_w = std::max(cell_w, c.size() + 3);
    };
    widen(t.column_labels);
    for (const auto& r : t.rows) {
        widen(r.coefficients);
        widen(r.t_stats);
    }
    const std::size_t total = label_w + cell_w * t.column_labels.size();
    const std::string rule(total, '-');
    auto line = [&](const std::string& label, const std::vector<std::string>& cells) {
        std::string s = label;
        s.resize(label_w, ' ');
        for (const auto& c : cells)
            s += std::string(cell_w - c.size(), ' ') + c;
        while (!s.empty() && s.back() == ' ')
            s.pop_back();
        return s + "\n";
    };
    std::string out;
    if (!t.title.empty())
        out += t.title + "\n\n";
    out += rule + "\n";
    std::vector<std::string> numbers;
    for (std::size_t j = 1; j <= t.column_labels.size(); ++j)
        numbers.push_back("(" + std::to_string(j) + ")");
    out += line("", numbers);
    out += line("", t.column_labels);
    out += rule + "\n";
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (i > 0)
            out += "\n";
        out += line(t.rows[i].label, t.rows[i].coefficients);
        out += line("", t.rows[i].t_stats);
    }
    out += rule + "\n";
    out += line("N", t.n_row);
    out += line("R-sq", t.r_sq_row);
    out += rule + "\n";
    for (const auto& f : t.footer)
        out += f + "\n";
    return out;
}

inline nlohmann::ordered_json regression_json(const RegressionResult& r, const std::string& label) {
    nlohmann::ordered_json j;
    j["portfolio"] = label;
    j["dependent"] = r.dependent;
    j["n_obs"] = r.n_obs;
    j["r_squared"] = r.r_squared;
    j["lag_used"] = r.lag_used;
    auto& coefs = j["coefficients"];
    coefs = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < r.k(); ++k) {
        const auto ki = static_cast<Eigen::Index>(k);
        nlohmann::ordered_json c;
        c["name"] = r.regressor_names[k];
        c["coef"] = r.coefficients[ki];
        c["std_error"] = r.std_errors[ki];
        c["t_stat"] = r.t_stats[k] ? nlohmann::ordered_json(*r.t_stats[k]) : nlohmann::ordered_json(nullptr);
        c["p_value"] = r.p_values[k] ? nlohmann::ordered_json(*r.p_values[k]) : nlohmann::ordered_json(nullptr);
        c["stars"] = r.p_values[k] ? significance_stars(*r.p_values[k]) : "";
        coefs.push_back(std::move(c));
    }
    auto& cov = j["hac_covariance"];
    cov = nlohmann::ordered_json::array();
    for (Eigen::Index a = 0; a < r.hac_covariance.rows(); ++a) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index b = 0; b < r.hac_covariance.cols(); ++b)
            row.push_back(r.hac_covariance(a, b));
        cov.push_back(std::move(row));
    }
    return j;
}

inline std::string emit_regression_table(const std::vector<RegressionResult>& results, Format format,
                                         const std::string& title, std::vector<std::string> labels = {}) {
    require_same_regressors(results);
    if (labels.empty())
        labels = quantile_labels(results.size());
    if (labels.size() != results.size())
        throw DataError("column label count does not match results");
    switch (format) {
    case Format::text:
        return render_text(build_regression_table(results, labels, title));
    case Format::csv: {
        std::string out = "table,portfolio,regressor,coef,std_error,t_stat,p_value,stars,n_obs,r_squared,lag_used\n";
        for (std::size_t c = 0; c < results.size(); ++c) {
            const auto& r = results[c];
            for (std::size_t k = 0; k < r.k(); ++k) {
                const auto ki = static_cast<Eigen::Index>(k);
                out += title + "," + labels[c] + "," + r.regressor_names[k] + "," + format_double(r.coefficients[ki]) +
                       "," + format_double(r.std_errors[ki]) + "," + (r.t_stats[k] ? format_double(*r.t_stats[k]) : "") +
                       "," + (r.p_values[k] ? format_double(*r.p_values[k]) : "") + "," +
                       (r.p_values[k] ? significance_stars(*r.p_values[k]) : "") + "," + std::to_string(r.n_obs) + "," +
                       format_double(r.r_squared) + "," + std::to_string(r.lag_used) + "\n";
            }
        }
        return out;
    }
    case Format::json: {
        nlohmann::ordered_json doc;
        doc["title"] = title;
        doc["columns"] = nlohmann::ordered_json::array();
        for (std::size_t c = 0; c < results.size(); ++c)
            doc["columns"].push_back(regression_json(results[c], labels[c]));
        doc["footer"] = {t_legend, star_legend};
        return doc.dump(2) + "\n";
    }
    }
    return {};
}

/// Mean / standard error / t / N rows across labelled columns. Annual
/// columns carry significance stars (Student t, n-1 degrees of freedom).
inline std::string emit_summary_table(const std::vector<SummaryStats>& stats, const std::vector<std::string>& labels,
                                      Format format, const std::string& title = {}) {
    if (stats.empty())
        throw DataError("summary table needs at least one column");
    if (labels.size() != stats.size())
        throw DataError("summary label count does not match statistics");
    auto horizon = [](const SummaryStats& s) { return s.horizon == Horizon::daily ? "daily" : "annual"; };
    auto stars = [](const SummaryStats& s) -> std::string {
        if (s.horizon != Horizon::annual || !s.t_stat || s.n_obs < 2)
            return "";
        return significance_stars(t_p_value(*s.t_stat, static_cast<double>(s.n_obs - 1)));
    };
    switch (format) {
    case Format::text: {
        const std::size_t label_w = 16;
        std::size_t cell_w = 14;
        for (const auto& l : labels)
            cell_w = std::max(cell_w, l.size() + 3);
        auto line = [&](const std::string& label, const std::vector<std::string>& cells) {
            std::string s = label;
            s.resize(label_w, ' ');
            for (const auto& c : cells)
                s += std::string(cell_w > c.size() ? cell_w - c.size() : 1, ' ') + c;
            return s + "\n";
        };
        std::vector<std::string> mean, se, t, n;
        bool any_annual = false;
        for (const auto& s : stats) {
            const bool daily = s.horizon == Horizon::daily;
            any_annual |= !daily;
            mean.push_back(printf_string("%.*f", s.mean, 7));
            se.push_back(printf_string("%.*f", s.std_error, 7));
            t.push_back(s.t_stat ? printf_string("%.*f", *s.t_stat, daily ? 3 : 1) + stars(s) : ".");
            n.push_back(std::to_string(s.n_obs));
        }
        std::vector<std::string> hz;
        for (const auto& s : stats)
            hz.push_back(horizon(s));
        std::string out;
        if (!title.empty())
            out += title + "\n\n";
        out += line("", hz);
        out += line("", labels);
        out += line("Mean Return", mean);
        out += line("Standard Error", se);
        out += line("t-statistic", t);
        out += line("N", n);
        if (any_annual)
            out += std::string("\n") + star_legend + "\n";
        return out;
    }
    case Format::csv: {
        std::string out = "label,horizon,mean,std_error,t_stat,n_obs\n";
        for (std::size_t i = 0; i < stats.size(); ++i) {
            const auto& s = stats[i];
            out += labels[i] + "," + horizon(s) + "," + format_double(s.mean) + "," + format_double(s.std_error) + "," +
                   (s.t_stat ? format_double(*s.t_stat) : "") + "," + std::to_string(s.n_obs) + "\n";
        }
        return out;
    }
    case Format::json: {
        nlohmann::ordered_json doc;
        doc["title"] = title;
        doc["columns"] = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < stats.size(); ++i) {
            const auto& s = stats[i];
            nlohmann::ordered_json c;
            c["label"] = labels[i];
            c["horizon"] = horizon(s);
            c["mean"] = s.mean;
            c["std_error"] = s.std_error;
            c["t_stat"] = s.t_stat ? nlohmann::ordered_json(*s.t_stat) : nlohmann::ordered_json(nullptr);
            c["n_obs"] = s.n_obs;
            c["stars"] = stars(s);
            doc["columns"].push_back(std::move(c));
        }
        return doc.dump(2) + "\n";
    }
    }
    return {};
}

} // namespace dfactor::report
