#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "polymodel/features.hpp"
#include "polymodel/series.hpp"

namespace polymodel {

/// Fund filter: a threshold per enabled feature (strict >), plus the
/// machine-learning gate p > p_threshold.
struct FilterSpec {
    std::optional<double> lts_threshold;
    std::optional<double> sharpe_threshold;
    std::optional<double> mrar_threshold;
    bool use_ml = false;
    double p_threshold = 0.5;

    /// "No use" or the enabled subset, e.g. "LTS, Sharpe, MRaR".
    std::string filter_label() const;
};

enum class WeightScheme { Even, AumWeighted };

std::string weight_scheme_name(WeightScheme s);

struct PortfolioState {
    MonthIndex month;
    std::map<std::string, double> holdings; // weights >= 0 summing to 1, or empty = cash
    double value = 1.0;
};

struct MetricsReport {
    double cumulative_return = 0.0;
    // annualized, zero benchmark unless risk-free provided; absent when the
    // return series has zero volatility
    std::optional<double> sharpe;
    double max_drawdown = 0.0;
    int n_months_up = 0;
    int n_months_down = 0;
    double max_monthly_increase = 0.0;
    double max_monthly_decrease = 0.0;
    double avg_monthly_increase = 0.0;
    double annual_return = 0.0;
    double annual_volatility = 0.0;
    std::map<std::string, double> benchmark_correlations; // by benchmark name
};

struct BacktestResult {
    std::vector<MonthIndex> months;   // realized months
    std::vector<double> returns;      // portfolio return per realized month
    std::vector<double> values;       // value path, values[0] = 1.0 at span start
    std::vector<PortfolioState> holdings; // state after each rebalance
    std::vector<std::string> events;  // force-sells, weighting fallbacks
};

struct ExperimentCell {
    FilterSpec filters;
    WeightScheme scheme = WeightScheme::Even;
    MetricsReport result;
    BacktestResult backtest;
};

/// Funds passing every enabled threshold (strict >, on sentinel-imputed
/// values) and, when use_ml, p > p_threshold. Sorted ids. Throws ConfigError
/// if use_ml and a universe fund has no prediction.
std::vector<std::string> select_funds(const std::map<std::string, FeatureRow>& features,
                                      const std::map<std::string, double>& predictions,
                                      const FilterSpec& spec);

/// Even weights or AUM-proportional weights over the selection (missing/zero
/// AUM weighs 0 and the rest renormalize; all-zero falls back to even with a
/// warning event). Empty selection holds cash.
PortfolioState rebalance(const PortfolioState& state, const std::vector<std::string>& selected,
                         WeightScheme scheme, const std::map<std::string, double>& aum,
                         std::vector<std::string>* events = nullptr);

/// Monthly loop over [span.first, span.second]: select at t with data
/// through t, rebalance, realize month t+1 as sum w_i r_i(t+1); a missing
/// realized return contributes 0 and the fund is force-sold with the event
/// logged. No transaction costs.
BacktestResult run_backtest(const MonthlyPanel& panel, const FeatureTable& features,
                            const PredictionTable& predictions, const FilterSpec& spec,
                            WeightScheme scheme, std::pair<MonthIndex, MonthIndex> span);

/// Metric suite over the realized monthly returns; needs >= 2 of them.
/// Benchmarks (name -> monthly series) feed Pearson correlations.
MetricsReport compute_metrics(const BacktestResult& result,
                              const std::map<std::string, ReturnSeries>& benchmarks = {},
                              const ReturnSeries* risk_free = nullptr);

/// The 8 filter combinations of {LTS, Sharpe, MRaR} crossed with the ML
/// gate and both weighting schemes: 32 cells.
std::vector<std::pair<FilterSpec, WeightScheme>> default_grid(double lts_t, double sharpe_t,
                                                              double mrar_t, double p_t);

/// One backtest per cell (OpenMP-parallel; cells are independent).
std::vector<ExperimentCell> run_grid(const MonthlyPanel& panel, const FeatureTable& features,
                                     const PredictionTable& predictions,
                                     const std::vector<std::pair<FilterSpec, WeightScheme>>& grid,
                                     std::pair<MonthIndex, MonthIndex> span,
                                     const std::map<std::string, ReturnSeries>& benchmarks = {});

/// Report JSON: per-cell metrics keyed by the published row names
/// ("Cumulative returns", "Max Drawdown", ...) plus group means by ML use,
/// filter combination, and weighting.
std::string grid_report_json(const std::vector<ExperimentCell>& cells,
                             const std::map<std::string, std::string>& run_info = {});

/// `date,value,return` path export for one cell.
std::string value_path_csv(const BacktestResult& result);

} // namespace polymodel
