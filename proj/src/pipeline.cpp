#include "polymodel/pipeline.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "polymodel/errors.hpp"
#include "polymodel/io.hpp"
#include "polymodel/panel_io.hpp"
#include "polymodel/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace polymodel {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

ReturnSeries load_return_csv(const std::string& path) {
    auto lines = read_lines(path);
    if (lines.empty() || lines[0] != "date,return")
        throw ParseError(path + ": expected header 'date,return'");
    std::map<int, double> cells;
    for (std::size_t row = 1; row < lines.size(); ++row) {
        if (lines[row].empty()) continue;
        const std::string ctx = path + " row " + std::to_string(row + 1);
        auto f = split_csv_line(lines[row]);
        if (f.size() != 2) throw ParseError(ctx + ": expected 2 columns");
        auto [it, inserted] = cells.emplace(parse_month(f[0]).serial(), parse_double(f[1], ctx));
        if (!inserted) throw ParseError(ctx + ": duplicate month");
    }
    if (cells.empty()) throw ParseError(path + ": no rows");
    ReturnSeries series;
    series.start = MonthIndex::from_serial(cells.begin()->first);
    series.values.assign(static_cast<std::size_t>(cells.rbegin()->first - cells.begin()->first + 1),
                         std::nullopt);
    for (const auto& [s, v] : cells)
        series.values[static_cast<std::size_t>(s - cells.begin()->first)] = v;
    return series;
}

std::string resolve(const std::string& base_dir, const std::string& path) {
    if (path.empty() || fs::path(path).is_absolute() || base_dir.empty()) return path;
    return (fs::path(base_dir) / path).string();
}

std::string cell_slug(const FilterSpec& spec, WeightScheme scheme) {
    std::string label = spec.filter_label();
    std::string slug;
    for (char c : label) {
        if (c == ',') continue;
        slug += c == ' ' ? '_' : c;
    }
    slug += spec.use_ml ? "_ml" : "_noml";
    slug += scheme == WeightScheme::Even ? "_even" : "_aum";
    return slug;
}

} // namespace

RunConfig RunConfig::from_json_text(const std::string& text, const std::string& base_dir) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    try {
        if (j.contains("data")) {
            const auto& d = j.at("data");
            if (d.contains("funds")) cfg.fund_csv = resolve(base_dir, d.at("funds").get<std::string>());
            if (d.contains("factors"))
                cfg.factor_csv = resolve(base_dir, d.at("factors").get<std::string>());
            if (d.contains("benchmarks"))
                for (const auto& [name, path] : d.at("benchmarks").items())
                    cfg.benchmark_csv[name] = resolve(base_dir, path.get<std::string>());
            if (d.contains("risk_free"))
                cfg.risk_free_csv = resolve(base_dir, d.at("risk_free").get<std::string>());
        }
        if (j.contains("windows")) {
            const auto& w = j.at("windows");
            if (w.contains("regression_months"))
                cfg.regression_window = w.at("regression_months").get<int>();
            if (w.contains("training_months"))
                cfg.training_window = w.at("training_months").get<int>();
        }
        if (j.contains("ridge_lambda")) cfg.ridge_lambda = j.at("ridge_lambda").get<double>();
        if (j.contains("shuffle")) {
            const auto& s = j.at("shuffle");
            if (s.contains("n")) cfg.n_shuffles = s.at("n").get<int>();
            if (s.contains("seed")) cfg.seed = s.at("seed").get<std::uint64_t>();
        }
        if (j.contains("score_threshold"))
            cfg.score_threshold = j.at("score_threshold").get<double>();
        if (j.contains("risk")) {
            const auto& r = j.at("risk");
            if (r.contains("alpha")) cfg.risk.alpha = r.at("alpha").get<double>();
            if (r.contains("xi")) cfg.risk.xi = r.at("xi").get<double>();
            if (r.contains("kappa")) cfg.risk.kappa = r.at("kappa").get<double>();
            if (r.contains("gamma")) cfg.risk.gamma = r.at("gamma").get<double>();
        }
        if (j.contains("filters")) {
            const auto& f = j.at("filters");
            if (f.contains("thresholds")) {
                const auto& t = f.at("thresholds");
                if (t.contains("LTS")) cfg.lts_threshold = t.at("LTS").get<double>();
                if (t.contains("Sharpe")) cfg.sharpe_threshold = t.at("Sharpe").get<double>();
                if (t.contains("MRaR")) cfg.mrar_threshold = t.at("MRaR").get<double>();
            }
            if (f.contains("p_threshold")) cfg.p_threshold = f.at("p_threshold").get<double>();
        }
        if (j.contains("predictor")) {
            const auto& p = j.at("predictor");
            if (p.contains("rounds")) cfg.predictor_rounds = p.at("rounds").get<int>();
            if (p.contains("depth")) cfg.predictor_depth = p.at("depth").get<int>();
            if (p.contains("rate")) cfg.predictor_rate = p.at("rate").get<double>();
        }
        if (j.contains("output_dir"))
            cfg.output_dir = resolve(base_dir, j.at("output_dir").get<std::string>());
        if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config has a mistyped key: ") + e.what());
    }
    if (cfg.risk.alpha <= 0.0 || cfg.risk.alpha >= 1.0)
        throw ConfigError("risk.alpha must be in (0, 1)");
    if (cfg.risk.kappa < 0.0) throw ConfigError("risk.kappa must be >= 0");
    if (cfg.n_shuffles < 50) throw ConfigError("shuffle.n must be >= 50");
    cfg.risk.score_threshold = cfg.score_threshold;
    return cfg;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
    return from_json_text(read_text_file(path), fs::path(path).parent_path().string());
}

std::string RunConfig::canonical_json() const {
    nlohmann::json j; // sorted keys make the dump canonical
    j["data"]["funds"] = fund_csv;
    j["data"]["factors"] = factor_csv;
    for (const auto& [name, path] : benchmark_csv) j["data"]["benchmarks"][name] = path;
    if (risk_free_csv) j["data"]["risk_free"] = *risk_free_csv;
    j["windows"]["regression_months"] = regression_window;
    j["windows"]["training_months"] = training_window;
    j["ridge_lambda"] = ridge_lambda;
    j["shuffle"]["n"] = n_shuffles;
    j["shuffle"]["seed"] = seed;
    j["score_threshold"] = score_threshold;
    j["risk"]["alpha"] = risk.alpha;
    j["risk"]["xi"] = risk.xi;
    j["risk"]["kappa"] = risk.kappa;
    j["risk"]["gamma"] = risk.gamma;
    j["filters"]["thresholds"]["LTS"] = lts_threshold;
    j["filters"]["thresholds"]["Sharpe"] = sharpe_threshold;
    j["filters"]["thresholds"]["MRaR"] = mrar_threshold;
    j["filters"]["p_threshold"] = p_threshold;
    j["predictor"]["rounds"] = predictor_rounds;
    j["predictor"]["depth"] = predictor_depth;
    j["predictor"]["rate"] = predictor_rate;
    return j.dump();
}

std::uint64_t RunConfig::config_hash() const { return hash64(canonical_json()); }

FeatureParams RunConfig::feature_params() const {
    FeatureParams params;
    params.regression_window = regression_window;
    params.shuffle.n_shuffles = n_shuffles;
    params.shuffle.seed = seed;
    params.shuffle.window_months = regression_window;
    params.shuffle.lambda = ridge_lambda;
    params.risk = risk;
    params.risk.score_threshold = score_threshold;
    return params;
}

PredictorConfig RunConfig::predictor_config() const {
    PredictorConfig cfg;
    cfg.training_window = training_window;
    cfg.rounds = predictor_rounds;
    cfg.depth = predictor_depth;
    cfg.rate = predictor_rate;
    cfg.seed = seed;
    return cfg;
}

void RunConfig::validate_paths() const {
    auto check = [](const std::string& what, const std::string& path) {
        if (path.empty()) throw ConfigError("config is missing the " + what + " path");
        if (!fs::exists(path)) throw ConfigError(what + " file does not exist: " + path);
    };
    check("fund CSV", fund_csv);
    check("factor CSV", factor_csv);
    for (const auto& [name, path] : benchmark_csv) check("benchmark '" + name + "'", path);
    if (risk_free_csv) check("risk-free CSV", *risk_free_csv);
}

MonthIndex first_score_month(const MonthlyPanel& panel, int regression_window) {
    return panel.span_start.plus(regression_window - 1);
}

PipelineResult run_pipeline(const RunConfig& config) {
    config.validate_paths();
#ifdef _OPENMP
    if (config.workers > 0) omp_set_num_threads(config.workers);
#endif

    const fs::path out_dir(config.output_dir);
    fs::create_directories(out_dir / "paths");
    const std::string hash_hex = [&] {
        std::ostringstream ss;
        ss << std::hex << config.config_hash();
        return ss.str();
    }();

    // A stage file is reusable only when it was produced by this exact config.
    bool cache_valid = false;
    const fs::path manifest_path = out_dir / "manifest.json";
    if (fs::exists(manifest_path)) {
        try {
            auto m = nlohmann::json::parse(read_text_file(manifest_path.string()));
            cache_valid = m.value("config_hash", "") == hash_hex;
        } catch (...) {
            cache_valid = false;
        }
    }
    auto stage_cached = [&](const char* name) {
        return cache_valid && fs::exists(out_dir / name);
    };

    PipelineResult result;
    result.panel = load_panel(config.fund_csv, config.factor_csv);
    const FeatureParams params = config.feature_params();

    if (stage_cached("scores.csv")) {
        result.scores = scores_from_csv(read_text_file((out_dir / "scores.csv").string()));
    } else {
        result.scores = score_all(result.panel, params);
        write_text_file((out_dir / "scores.csv").string(), scores_to_csv(result.scores));
    }

    if (stage_cached("features.csv")) {
        result.features = features_from_csv(read_text_file((out_dir / "features.csv").string()));
    } else {
        result.features = compute_features(result.panel, result.scores, params);
        write_text_file((out_dir / "features.csv").string(), features_to_csv(result.features));
    }
    if (result.features.empty()) throw InsufficientDataError("no feature rows: panel too short");

    const MonthIndex feature_start = MonthIndex::from_serial(result.features.begin()->first);
    const MonthIndex panel_end = result.panel.span_end;
    MonthIndex predict_start = feature_start.plus(config.training_window);
    if (predict_start > panel_end)
        throw InsufficientDataError("panel too short for the training window");

    if (stage_cached("predictions.csv")) {
        result.predictions =
            predictions_from_csv(read_text_file((out_dir / "predictions.csv").string()));
    } else {
        result.predictions = moving_window_predict(result.panel, result.features, predict_start,
                                                   panel_end, config.predictor_config());
        write_text_file((out_dir / "predictions.csv").string(),
                        predictions_to_csv(result.predictions));
    }

    std::map<std::string, ReturnSeries> benchmarks;
    for (const auto& [name, path] : config.benchmark_csv)
        benchmarks.emplace(name, load_return_csv(path));

    result.backtest_start = predict_start;
    result.backtest_end = panel_end;
    auto grid = default_grid(config.lts_threshold, config.sharpe_threshold, config.mrar_threshold,
                             config.p_threshold);
    result.cells = run_grid(result.panel, result.features, result.predictions, grid,
                            {result.backtest_start, result.backtest_end}, benchmarks);

    std::map<std::string, std::string> run_info;
    run_info["config_hash"] = hash_hex;
    run_info["seed"] = std::to_string(config.seed);
    run_info["version"] = kVersion;
    run_info["span"] =
        format_month(result.backtest_start) + ".." + format_month(result.backtest_end);
    write_text_file((out_dir / "grid_report.json").string(),
                    grid_report_json(result.cells, run_info));

    for (const auto& cell : result.cells)
        write_text_file((out_dir / "paths" / (cell_slug(cell.filters, cell.scheme) + ".csv")).string(),
                        value_path_csv(cell.backtest));

    nlohmann::ordered_json manifest;
    manifest["config_hash"] = hash_hex;
    manifest["seed"] = config.seed;
    manifest["version"] = kVersion;
    manifest["created_utc"] = [] {
        const auto now = std::chrono::system_clock::now();
        const std::time_t tt = std::chrono::system_clock::to_time_t(now);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
        return std::string(buf);
    }();
    manifest["stages"] = {{"scores", "scores.csv"},
                          {"features", "features.csv"},
                          {"predictions", "predictions.csv"},
                          {"report", "grid_report.json"}};
    write_text_file(manifest_path.string(), manifest.dump(2) + "\n");
    return result;
}

} // namespace polymodel
