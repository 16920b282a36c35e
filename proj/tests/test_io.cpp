#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include <dfactor/config.hpp>
#include <dfactor/report.hpp>
#include <dfactor/synthetic.hpp>

#include "support.hpp"

using namespace dfactor;
using nlohmann::json;

namespace {

RegressionResult fake_result(std::vector<double> coefs, std::vector<double> t, std::vector<double> p,
                             std::vector<std::string> names = {"RMU", "_cons"}) {
    RegressionResult r;
    r.regressor_names = std::move(names);
    r.coefficients = Eigen::Map<Eigen::VectorXd>(coefs.data(), static_cast<Eigen::Index>(coefs.size()));
    r.std_errors = Eigen::VectorXd(r.coefficients.size());
    for (std::size_t j = 0; j < coefs.size(); ++j) {
        r.std_errors[static_cast<Eigen::Index>(j)] = coefs[j] / t[j];
        r.t_stats.emplace_back(t[j]);
        r.p_values.emplace_back(p[j]);
    }
    r.hac_covariance = r.std_errors.array().square().matrix().asDiagonal();
    r.n_obs = 1304;
    r.r_squared = 0.5012;
    r.lag_used = 7;
    return r;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);)
        out.push_back(l);
    return out;
}

std::vector<std::string> tokens(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    for (std::string w; in >> w;)
        out.push_back(w);
    return out;
}

} // namespace

TEST(Formatting, CoefficientStyle) {
    EXPECT_EQ(report::format_coefficient(1.4541), "1.454");
    EXPECT_EQ(report::format_coefficient(0.8163), "0.816");
    EXPECT_EQ(report::format_coefficient(-0.015312), "-0.0153");
    EXPECT_EQ(report::format_coefficient(0.00027312), "0.000273");
    EXPECT_EQ(report::format_coefficient(0.0021), "0.00210");
    EXPECT_EQ(report::format_t(29.6412), "(29.64)");
    EXPECT_EQ(report::format_t(std::nullopt), "(.)");
}

TEST(RegressionTable, StarredCellOverTStat) {
    auto r = fake_result({1.454, 0.0002}, {29.64, 0.31}, {1e-9, 0.76});
    auto text = report::emit_regression_table({r}, report::Format::text, "MB quintiles regressed against RMU", {"MB Quin~1"});
    auto ls = lines(text);
    bool found = false;
    for (std::size_t i = 0; i + 1 < ls.size(); ++i) {
        auto a = tokens(ls[i]), b = tokens(ls[i + 1]);
        if (a.size() == 2 && a[0] == "RMU") {
            EXPECT_EQ(a[1], "1.454***");
            ASSERT_EQ(b.size(), 1u);
            EXPECT_EQ(b[0], "(29.64)");
            found = true;
        }
    }
    EXPECT_TRUE(found) << text;
    EXPECT_NE(text.find("_cons"), std::string::npos);
    EXPECT_NE(text.find("R-sq"), std::string::npos);
    EXPECT_NE(text.find("0.501"), std::string::npos);
    EXPECT_NE(text.find("\nN "), std::string::npos);
    EXPECT_NE(text.find("t statistics in parentheses\n* p<0.05, ** p<0.01, *** p<0.001"), std::string::npos);
}

TEST(RegressionTable, NoStarsForInsignificant) {
    auto r = fake_result({0.0, 0.1}, {0.0, 5.0}, {0.9, 1e-5});
    auto t = report::build_regression_table({r}, {"c"}, "x");
    EXPECT_EQ(t.rows[0].coefficients[0], "0");
    EXPECT_EQ(t.rows[1].coefficients[0], "0.100***");
}

TEST(RegressionTable, MismatchedRegressors) {
    auto a = fake_result({1.0, 0.1}, {2.0, 2.0}, {0.04, 0.04});
    auto b = fake_result({1.0, 0.1}, {2.0, 2.0}, {0.04, 0.04}, {"VMC", "_cons"});
    EXPECT_THROW(report::emit_regression_table({a, b}, report::Format::text, "x"), DataError);
}

TEST(RegressionTable, QuantileLabels) {
    EXPECT_EQ(report::quantile_labels(5), (std::vector<std::string>{"MB Quin~1", "2", "3", "4", "MB Quin~5"}));
    auto dec = report::quantile_labels(10);
    EXPECT_EQ(dec.front(), "MB Deci~1");
    EXPECT_EQ(dec.back(), "MB Dec~10");
}

TEST(RegressionTable, JsonRoundTripIsBitExact) {
    SplitMix64 rng(3);
    std::vector<RegressionResult> rs;
    for (int c = 0; c < 5; ++c)
        rs.push_back(fake_result({rng.normal() / 7.0, rng.normal() * 1e-4}, {rng.normal() * 10, rng.normal()},
                                 {rng.uniform(), rng.uniform()}));
    auto doc = json::parse(report::emit_regression_table(rs, report::Format::json, "t"));
    for (std::size_t c = 0; c < rs.size(); ++c)
        for (std::size_t k = 0; k < 2; ++k) {
            const double back = doc["columns"][c]["coefficients"][k]["coef"].get<double>();
            EXPECT_EQ(back, rs[c].coefficients[static_cast<Eigen::Index>(k)]);
            EXPECT_EQ(doc["columns"][c]["coefficients"][k]["std_error"].get<double>(),
                      rs[c].std_errors[static_cast<Eigen::Index>(k)]);
        }
}

TEST(RegressionTable, CsvCarriesFullPrecision) {
    auto r = fake_result({0.1234567890123456, 1.0 / 3.0}, {3.0, 1.0}, {0.01, 0.3});
    auto csv = report::emit_regression_table({r}, report::Format::csv, "t", {"p1"});
    auto ls = lines(csv);
    ASSERT_EQ(ls.size(), 3u);
    auto cells = [](const std::string& l) {
        std::vector<std::string> out;
        std::stringstream ss(l);
        for (std::string c; std::getline(ss, c, ',');)
            out.push_back(c);
        return out;
    };
    EXPECT_EQ(std::stod(cells(ls[1])[3]), 0.1234567890123456);
    EXPECT_EQ(std::stod(cells(ls[2])[3]), 1.0 / 3.0);
}

TEST(SummaryTable, TableOneLayout) {
    SummaryStats rmu{0.0002358, 0.0004055, 0.0002358 / 0.0004055, 1304, Horizon::daily};
    auto text = report::emit_summary_table({rmu}, {"RMU"}, report::Format::text);
    auto ls = lines(text);
    auto row = [&](const std::string& label) {
        for (const auto& l : ls)
            if (l.rfind(label, 0) == 0)
                return tokens(l.substr(label.size()));
        return std::vector<std::string>{};
    };
    EXPECT_EQ(row("Mean Return"), std::vector<std::string>{"0.0002358"});
    EXPECT_EQ(row("Standard Error"), std::vector<std::string>{"0.0004055"});
    EXPECT_EQ(row("t-statistic"), std::vector<std::string>{"0.582"});
    EXPECT_EQ(row("N"), std::vector<std::string>{"1304"});
}

TEST(SummaryTable, AnnualCarriesStarsAndLegend) {
    SummaryStats rmu{0.0002358, 0.0004055, 0.0002358 / 0.0004055, 1304, Horizon::daily};
    SummaryStats rm{0.0003024, 0.0004217, 0.0003024 / 0.0004217, 1304, Horizon::daily};
    auto text = report::emit_summary_table({annualize(rmu), annualize(rm)}, {"RMU", "RM"}, report::Format::text);
    EXPECT_NE(text.find("9.2***"), std::string::npos) << text;
    EXPECT_NE(text.find("11.3***"), std::string::npos) << text;
    EXPECT_NE(text.find("0.0589500"), std::string::npos) << text;
    EXPECT_NE(text.find(report::star_legend), std::string::npos);
}

TEST(SummaryTable, CsvRoundTrip) {
    SplitMix64 rng(9);
    std::vector<SummaryStats> stats;
    std::vector<std::string> labels;
    for (int i = 0; i < 4; ++i) {
        double m = rng.normal() * 1e-3, se = rng.uniform() * 1e-3;
        stats.push_back({m, se, m / se, 100u + static_cast<std::size_t>(i), Horizon::daily});
        labels.push_back("c" + std::to_string(i));
    }
    auto ls = lines(report::emit_summary_table(stats, labels, report::Format::csv));
    ASSERT_EQ(ls.size(), 5u);
    for (std::size_t i = 0; i < 4; ++i) {
        std::stringstream ss(ls[i + 1]);
        std::vector<std::string> c;
        for (std::string x; std::getline(ss, x, ',');)
            c.push_back(x);
        EXPECT_EQ(c[0], labels[i]);
        EXPECT_EQ(std::stod(c[2]), stats[i].mean);
        EXPECT_EQ(std::stod(c[3]), stats[i].std_error);
        EXPECT_EQ(std::stod(c[4]), *stats[i].t_stat);
        EXPECT_EQ(std::stoul(c[5]), stats[i].n_obs);
    }
}

TEST(SummaryTable, SingleColumn) {
    SummaryStats s{0.001, 0.0005, 2.0, 10, Horizon::daily};
    auto doc = json::parse(report::emit_summary_table({s}, {"X"}, report::Format::json));
    EXPECT_EQ(doc["columns"].size(), 1u);
    EXPECT_EQ(doc["columns"][0]["mean"].get<double>(), 0.001);
}

TEST(Synthetic, ZeroNoiseReturnsAreBetaTimesMarket) {
    SyntheticSpec s;
    s.n_entities = 25;
    s.n_days = 120;
    s.idiosyncratic_vol = 0.0;
    s.rmu_loadings.assign(25, 0.0);
    s.vmc_loadings.assign(25, 0.0);
    s.market_betas.resize(25);
    for (std::size_t e = 0; e < 25; ++e)
        s.market_betas[e] = 0.5 + 0.05 * static_cast<double>(e);
    auto m = generate_synthetic_market(s);
    const auto& r = m.truth.returns;
    for (std::size_t t = 1; t < r.n_dates(); ++t)
        for (std::size_t e = 0; e < 25; ++e)
            EXPECT_EQ(r.value(t, e), s.market_betas[e] * m.truth.market_path.values[t - 1]);
}

TEST(Synthetic, DeterministicPerSeed) {
    SyntheticSpec s;
    s.n_entities = 30;
    s.n_days = 200;
    auto a = generate_synthetic_market(s), b = generate_synthetic_market(s);
    EXPECT_EQ(panel_to_csv(a.bundle.prices), panel_to_csv(b.bundle.prices));
    EXPECT_EQ(panel_to_csv(a.bundle.cds), panel_to_csv(b.bundle.cds));
    EXPECT_EQ(panel_to_csv(*a.bundle.iv), panel_to_csv(*b.bundle.iv));
    s.seed = 2;
    auto c = generate_synthetic_market(s);
    EXPECT_NE(panel_to_csv(a.bundle.prices), panel_to_csv(c.bundle.prices));
}

TEST(Synthetic, PortableGeneratorStream) {
    // SplitMix64 reference outputs for seed 0.
    SplitMix64 g(0);
    EXPECT_EQ(g.next(), 0xe220a8397b1dcdafULL);
    EXPECT_EQ(g.next(), 0x6e789e6aa1b965f4ULL);
    EXPECT_EQ(g.next(), 0x06c45d188009454fULL);
}

TEST(Synthetic, DistressOrdering) {
    SyntheticSpec s;
    s.sort_noise = 0.0;
    auto m = generate_synthetic_market(s);
    const auto& gt = m.truth;
    for (std::size_t a = 0; a < gt.entities.size(); ++a)
        for (std::size_t b = 0; b < gt.entities.size(); ++b) {
            if (!(gt.distress[a] > gt.distress[b]))
                continue;
            EXPECT_GT(m.bundle.cds.value(0, a), m.bundle.cds.value(0, b));
            EXPECT_GT(m.bundle.iv->value(0, a), m.bundle.iv->value(0, b));
            EXPECT_LT(m.bundle.mb.value(0, a), m.bundle.mb.value(0, b));
            EXPECT_LE(gt.mb_decile[a], gt.mb_decile[b]);
        }
    for (std::size_t e = 0; e < gt.entities.size(); ++e)
        if (gt.mb_decile[e] == 1)
            EXPECT_EQ(gt.rmu_loadings[e], 1.0);
        else if (gt.mb_decile[e] == 10)
            EXPECT_DOUBLE_EQ(gt.rmu_loadings[e], -0.3);
}

TEST(Synthetic, DegenerateSpecs) {
    SyntheticSpec s;
    s.n_entities = 10;
    EXPECT_THROW(generate_synthetic_market(s), ConfigError);
    s = {};
    s.n_days = 50;
    EXPECT_THROW(generate_synthetic_market(s), ConfigError);
    s = {};
    s.market_betas = {1.0, 2.0};
    EXPECT_THROW(generate_synthetic_market(s), ConfigError);
}

TEST(Config, DefaultsAndOverrides) {
    auto c = parse_config(json::parse(R"({"quantiles": 10, "hac_lag": "auto", "seed": 9,
        "factors": {"rmu": [20, 80]}, "adf": {"spec": "ct", "lags": 2}, "split_date": "2009-06-22",
        "output": {"format": "json"}})"));
    EXPECT_EQ(c.quantiles, 10u);
    EXPECT_FALSE(c.hac_lag);
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.rmu.low_percentile, 20.0);
    EXPECT_EQ(c.vmc.low_percentile, 5.0);
    EXPECT_EQ(c.adf_spec, AdfSpec::constant_trend);
    EXPECT_EQ(c.adf_lags, 2u);
    EXPECT_EQ(format_date(*c.split_date), "2009-06-22");
    EXPECT_EQ(c.format, report::Format::json);
    EXPECT_EQ(c.annualization_days, 250);
    EXPECT_EQ(parse_config(json::parse(R"({"hac_lag": 5})")).hac_lag, 5u);
}

TEST(Config, ErrorsNameTheKey) {
    auto message = [](const char* text) {
        try {
            parse_config(json::parse(text));
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message(R"({"quantile": 5})").find("quantile"), std::string::npos);
    EXPECT_NE(message(R"({"data": {"prices": "p.csv", "cbs": "c.csv"}})").find("data.cbs"), std::string::npos);
    EXPECT_NE(message(R"({"hac_lag": "sometimes"})").find("hac_lag"), std::string::npos);
    EXPECT_NE(message(R"({"hac_lag": -1})").find("hac_lag"), std::string::npos);
    EXPECT_NE(message(R"({"factors": {"vmc": [95, 5]}})").find("factors.vmc"), std::string::npos);
    EXPECT_NE(message(R"({"annualization_days": 0})").find("annualization_days"), std::string::npos);
    EXPECT_NE(message(R"({"split_date": "22/06/2009"})").find("split_date"), std::string::npos);
    EXPECT_NE(message(R"({"synthetic": {"n_entities": 5}})").find("n_entities"), std::string::npos);
    EXPECT_NE(message(R"({"synthetic": {"market": {"drift": 1}}})").find("synthetic.market.drift"), std::string::npos);
    auto missing = message(R"({"data": {"prices": "p.csv"}})");
    EXPECT_NE(missing.find("remedy"), std::string::npos);
    EXPECT_NE(message(R"({"quantiles": "five"})").find("quantiles"), std::string::npos);
}

TEST(Config, RelativePathsResolveAgainstConfigDirectory) {
    auto dir = std::filesystem::temp_directory_path() / "dfactor_cfg_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "run.json");
        out << R"({"data": {"prices": "p.csv", "cds": "/abs/c.csv", "mb": "sub/m.csv"}})";
    }
    auto c = load_config(dir / "run.json");
    EXPECT_EQ(*c.prices_path, (dir / "p.csv").string());
    EXPECT_EQ(*c.cds_path, "/abs/c.csv");
    EXPECT_EQ(*c.mb_path, (dir / "sub/m.csv").string());
    EXPECT_FALSE(c.iv_path);
    std::filesystem::remove_all(dir);
    EXPECT_THROW(load_config(dir / "run.json"), ConfigError);
}
