#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include <dfactor/dfactor.hpp>

namespace {

dfactor::PipelineConfig resolve(const std::string& config_path, const std::string& out, const std::string& format,
                                const std::optional<std::uint64_t>& seed) {
    dfactor::PipelineConfig cfg = config_path.empty() ? dfactor::parse_config(nlohmann::json::object())
                                                      : dfactor::load_config(config_path);
    if (!out.empty())
        cfg.out_dir = out;
    if (!format.empty()) {
        auto f = dfactor::report::format_from_string(format);
        if (!f)
            throw dfactor::ConfigError("--format must be text, csv or json, got '" + format + "'");
        cfg.format = *f;
    }
    if (seed) {
        cfg.seed = *seed;
        if (cfg.synthetic)
            cfg.synthetic->seed = *seed;
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dfactor: distress factor construction and quantile regressions"};
    app.require_subcommand(1);

    std::string config_path, out, format;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--out", out, "output directory (overrides output.dir)");
    app.add_option("--format", format, "table format: text, csv or json");
    app.add_option("--seed", seed, "seed override for synthetic data");

    auto* simulate = app.add_subcommand("simulate", "write a synthetic bundle and its ground truth");
    auto* factors = app.add_subcommand("factors", "build RMU, VMC and RM with summary tables");
    auto* regress = app.add_subcommand("regress", "MB quantile regressions and factor diagnostics");
    auto* report = app.add_subcommand("report", "factors and regressions together");
    for (auto* sub : {simulate, factors, regress, report})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        const auto cfg = resolve(config_path, out, format, seed);
        dfactor::Documents docs;
        if (simulate->parsed())
            docs = dfactor::cmd_simulate(cfg);
        else if (factors->parsed())
            docs = dfactor::cmd_factors(cfg);
        else if (regress->parsed())
            docs = dfactor::cmd_regress(cfg);
        else
            docs = dfactor::cmd_report(cfg);
        dfactor::write_documents(docs, cfg.out_dir);
        for (const auto& [name, content] : docs)
            std::printf("wrote %s/%s\n", cfg.out_dir.c_str(), name.c_str());
        return 0;
    } catch (const dfactor::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return dfactor::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
