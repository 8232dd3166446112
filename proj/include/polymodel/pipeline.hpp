#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "polymodel/backtest.hpp"
#include "polymodel/features.hpp"
#include "polymodel/trend.hpp"

namespace polymodel {

/// Validated run configuration. Precedence: CLI flags > config file > defaults.
struct RunConfig {
    std::string fund_csv;
    std::string factor_csv;
    std::map<std::string, std::string> benchmark_csv; // name -> path
    std::optional<std::string> risk_free_csv;

    int regression_window = 36;
    int training_window = 24;
    double ridge_lambda = 1e-4;
    int n_shuffles = 1000;
    std::uint64_t seed = 42;
    double score_threshold = 3.0;
    RiskParams risk;

    double lts_threshold = 0.0;
    double sharpe_threshold = 0.0;
    double mrar_threshold = 0.0;
    double p_threshold = 0.5;

    int predictor_rounds = 100;
    int predictor_depth = 3;
    double predictor_rate = 0.1;

    std::string output_dir = "out";
    int workers = 0; // 0 = library default thread count

    static RunConfig from_json_file(const std::string& path);
    static RunConfig from_json_text(const std::string& text, const std::string& base_dir);
    /// Canonical JSON (sorted keys); hashing it yields the cache key.
    std::string canonical_json() const;
    std::uint64_t config_hash() const;

    FeatureParams feature_params() const;
    PredictorConfig predictor_config() const;

    /// Throws ConfigError when a referenced path does not exist.
    void validate_paths() const;
};

struct PipelineResult {
    MonthlyPanel panel;
    ScoreTable scores;
    FeatureTable features;
    PredictionTable predictions;
    std::vector<ExperimentCell> cells;
    MonthIndex backtest_start;
    MonthIndex backtest_end;
};

/// Runs load -> scores -> features -> predictions -> grid, reusing any stage
/// file in output_dir whose manifest config hash matches, and writes
/// scores.csv, features.csv, predictions.csv, grid_report.json, paths/*.csv
/// and manifest.json. Reports are byte-identical across reruns of the same
/// config; only the manifest timestamp differs.
PipelineResult run_pipeline(const RunConfig& config);

/// First month with a full regression window in the panel.
MonthIndex first_score_month(const MonthlyPanel& panel, int regression_window);

} // namespace polymodel
