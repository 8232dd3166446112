// polymodel: PolyModel hedge-fund analytics pipeline.
//
// Subcommands: synth, ingest, fit, score, features, predict, backtest, run,
// report. Flag precedence: command-line > config file > defaults. All
// randomness flows from one master seed via named substreams, so a (config,
// seed) pair fixes every output byte apart from the manifest timestamp.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "polymodel/errors.hpp"
#include "polymodel/io.hpp"
#include "polymodel/panel_io.hpp"
#include "polymodel/pipeline.hpp"
#include "polymodel/synthetic.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace polymodel;

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out_dir;
    std::optional<int> shuffles;
    std::optional<double> lambda;
    std::optional<double> score_threshold;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required = true) {
    auto* opt = cmd->add_option("--config", flags.config_path, "Run config JSON");
    if (config_required) opt->required();
    cmd->add_option("--seed", flags.seed, "Master seed (overrides config)");
    cmd->add_option("--workers", flags.workers, "Worker thread cap (overrides config)");
    cmd->add_option("--out", flags.out_dir, "Output directory (overrides config)");
    cmd->add_option("--shuffles", flags.shuffles, "Shuffle count N (overrides config)");
    cmd->add_option("--lambda", flags.lambda, "Ridge weight (overrides config)");
    cmd->add_option("--score-threshold", flags.score_threshold,
                    "Relevance threshold on the P-Value Score (overrides config)");
}

std::string apply_output_root(const std::string& dir) {
    const char* root = std::getenv("POLYMODEL_OUTPUT_ROOT");
    if (!root || fs::path(dir).is_absolute()) return dir;
    return (fs::path(root) / dir).string();
}

RunConfig load_config(const CommonFlags& flags) {
    RunConfig cfg = RunConfig::from_json_file(flags.config_path);
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.workers) cfg.workers = *flags.workers;
    if (flags.out_dir) cfg.output_dir = *flags.out_dir;
    if (flags.shuffles) cfg.n_shuffles = *flags.shuffles;
    if (flags.lambda) cfg.ridge_lambda = *flags.lambda;
    if (flags.score_threshold) {
        cfg.score_threshold = *flags.score_threshold;
        cfg.risk.score_threshold = *flags.score_threshold;
    }
    cfg.output_dir = apply_output_root(cfg.output_dir);
    return cfg;
}

void set_workers(const RunConfig& cfg) {
#ifdef _OPENMP
    if (cfg.workers > 0) omp_set_num_threads(cfg.workers);
#endif
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed_override) {
    SyntheticSpec spec = SyntheticSpec::from_json_file(spec_path);
    const std::uint64_t seed = seed_override.value_or(spec.seed);
    MonthlyPanel panel = generate_synthetic(spec, seed);
    fs::create_directories(out_dir);
    write_fund_csv(panel, (fs::path(out_dir) / "funds.csv").string());
    write_factor_csv(panel, (fs::path(out_dir) / "factors.csv").string());
    std::cout << "wrote " << panel.funds.size() << " funds x " << panel.factors.size()
              << " factors x "
              << panel.span_end.serial() - panel.span_start.serial() + 1 << " months to "
              << out_dir << "\n";
    return 0;
}

int cmd_ingest(const RunConfig& cfg) {
    MonthlyPanel panel = load_panel(cfg.fund_csv, cfg.factor_csv);
    fs::create_directories(cfg.output_dir);
    write_fund_csv(panel, (fs::path(cfg.output_dir) / "funds.csv").string());
    write_factor_csv(panel, (fs::path(cfg.output_dir) / "factors.csv").string());
    std::cout << "panel " << format_month(panel.span_start) << ".."
              << format_month(panel.span_end) << ": " << panel.funds.size() << " funds, "
              << panel.factors.size() << " factors\n";
    return 0;
}

int cmd_fit(const RunConfig& cfg, const std::string& as_of_text) {
    MonthlyPanel panel = load_panel(cfg.fund_csv, cfg.factor_csv);
    const MonthIndex as_of =
        as_of_text.empty() ? panel.span_end : parse_month(as_of_text);
    const FeatureParams params = cfg.feature_params();
    fs::create_directories(cfg.output_dir);
    std::ostringstream out;
    for (const auto& fund : panel.funds) {
        for (const auto& factor : panel.factors) {
            AlignedPair pair;
            if (!try_align(fund.returns, factor.returns,
                           {as_of.plus(1 - params.regression_window), as_of}, pair))
                continue;
            PolyFit fit = ridge_fit(pair, cfg.ridge_lambda);
            out << fit_to_json(fit, fund.id, factor.id, as_of) << '\n';
        }
    }
    const std::string path = (fs::path(cfg.output_dir) / "fits.jsonl").string();
    write_text_file(path, out.str());
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_score(const RunConfig& cfg) {
    set_workers(cfg);
    MonthlyPanel panel = load_panel(cfg.fund_csv, cfg.factor_csv);
    ScoreTable scores = score_all(panel, cfg.feature_params());
    fs::create_directories(cfg.output_dir);
    const std::string path = (fs::path(cfg.output_dir) / "scores.csv").string();
    write_text_file(path, scores_to_csv(scores));
    std::cout << "wrote " << scores.rows.size() << " scores to " << path << "\n";
    return 0;
}

int cmd_features(const RunConfig& cfg) {
    set_workers(cfg);
    MonthlyPanel panel = load_panel(cfg.fund_csv, cfg.factor_csv);
    const fs::path score_path = fs::path(cfg.output_dir) / "scores.csv";
    ScoreTable scores;
    if (fs::exists(score_path)) {
        scores = scores_from_csv(read_text_file(score_path.string()));
    } else {
        scores = score_all(panel, cfg.feature_params());
        fs::create_directories(cfg.output_dir);
        write_text_file(score_path.string(), scores_to_csv(scores));
    }
    FeatureTable features = compute_features(panel, scores, cfg.feature_params());
    const std::string path = (fs::path(cfg.output_dir) / "features.csv").string();
    write_text_file(path, features_to_csv(features));
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_predict(const RunConfig& cfg) {
    set_workers(cfg);
    MonthlyPanel panel = load_panel(cfg.fund_csv, cfg.factor_csv);
    const fs::path feature_path = fs::path(cfg.output_dir) / "features.csv";
    if (!fs::exists(feature_path))
        throw ConfigError("run `features` first: missing " + feature_path.string());
    FeatureTable features = features_from_csv(read_text_file(feature_path.string()));
    if (features.empty()) throw InsufficientDataError("feature table is empty");
    const MonthIndex start =
        MonthIndex::from_serial(features.begin()->first).plus(cfg.training_window);
    PredictionTable preds = moving_window_predict(panel, features, start, panel.span_end,
                                                  cfg.predictor_config());
    const std::string path = (fs::path(cfg.output_dir) / "predictions.csv").string();
    write_text_file(path, predictions_to_csv(preds));
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_backtest(const RunConfig& cfg) {
    set_workers(cfg);
    PipelineResult result = run_pipeline(cfg);
    std::cout << "grid of " << result.cells.size() << " cells over "
              << format_month(result.backtest_start) << ".."
              << format_month(result.backtest_end) << " written to " << cfg.output_dir << "\n";
    return 0;
}

int cmd_run(const RunConfig& cfg) {
    PipelineResult result = run_pipeline(cfg);
    std::cout << "run complete: " << result.cells.size() << " cells, reports in "
              << cfg.output_dir << "\n";
    return 0;
}

int cmd_report(const std::string& report_path) {
    auto j = nlohmann::json::parse(read_text_file(report_path));
    auto print_table = [&](const std::string& title, const nlohmann::json& groups) {
        std::cout << "== " << title << "\n";
        for (const auto& [group, metrics] : groups.items()) {
            std::cout << group << "\n";
            for (const auto& [k, v] : metrics.items())
                std::cout << "  " << k << ": " << v.dump() << "\n";
        }
        std::cout << "\n";
    };
    print_table("By machine learning", j.at("by_machine_learning"));
    print_table("By filters", j.at("by_filters"));
    print_table("By weighting", j.at("by_weighted"));

    const nlohmann::json* best = nullptr;
    for (const auto& cell : j.at("cells")) {
        if (!best || cell.at("metrics").at("Cumulative returns").get<double>() >
                         best->at("metrics").at("Cumulative returns").get<double>())
            best = &cell;
    }
    if (best) {
        std::cout << "== Best performer\n";
        std::cout << "Filters: " << best->at("Filters").get<std::string>() << "\n";
        std::cout << "Using Machine Learning: " << best->at("Using Machine Learning").dump()
                  << "\n";
        std::cout << "Weighted: " << best->at("Weighted").dump() << "\n";
        for (const auto& [k, v] : best->at("metrics").items())
            std::cout << "  " << k << ": " << v.dump() << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"PolyModel hedge-fund analytics"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic panel from a spec JSON");
    std::string spec_path, synth_out = "data";
    std::optional<std::uint64_t> synth_seed;
    synth->add_option("--spec", spec_path, "Synthetic spec JSON")->required();
    synth->add_option("--out", synth_out, "Output directory");
    synth->add_option("--seed", synth_seed, "Seed override");

    CommonFlags flags;
    auto* ingest = app.add_subcommand("ingest", "Load, validate and canonicalize the panel CSVs");
    add_common(ingest, flags);
    auto* fit = app.add_subcommand("fit", "Export ridge fits for one as-of month");
    add_common(fit, flags);
    std::string as_of;
    fit->add_option("--as-of", as_of, "Window end month YYYY-MM (default: panel end)");
    auto* score = app.add_subcommand("score", "Target-shuffling P-Value Scores for all pairs");
    add_common(score, flags);
    auto* features = app.add_subcommand("features", "Feature stack (uses cached scores if present)");
    add_common(features, flags);
    auto* predict = app.add_subcommand("predict", "Moving-window trend probabilities");
    add_common(predict, flags);
    auto* backtest = app.add_subcommand("backtest", "Experiment grid backtests");
    add_common(backtest, flags);
    auto* run = app.add_subcommand("run", "Full pipeline with stage caching");
    add_common(run, flags);
    auto* report = app.add_subcommand("report", "Pretty-print a grid report JSON");
    std::string report_path;
    report->add_option("--report", report_path, "grid_report.json path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            std::string out = apply_output_root(synth_out);
            return cmd_synth(spec_path, out, synth_seed);
        }
        if (report->parsed()) return cmd_report(report_path);
        RunConfig cfg = load_config(flags);
        if (ingest->parsed()) return cmd_ingest(cfg);
        if (fit->parsed()) return cmd_fit(cfg, as_of);
        if (score->parsed()) return cmd_score(cfg);
        if (features->parsed()) return cmd_features(cfg);
        if (predict->parsed()) return cmd_predict(cfg);
        if (backtest->parsed()) return cmd_backtest(cfg);
        if (run->parsed()) return cmd_run(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
