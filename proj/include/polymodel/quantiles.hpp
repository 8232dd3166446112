#pragma once

#include <array>
#include <string>
#include <vector>

namespace polymodel {

/// Generalized-Pareto tail fitted by probability-weighted moments to the
/// exceedances beyond the empirical 5%/95% thresholds. Falls back to the
/// empirical extreme when fewer than 10 exceedances are available.
struct TailModel {
    enum class Side { Lower, Upper };
    Side side = Side::Upper;
    double threshold_quantile = 0.95;
    double threshold = 0.0; // raw threshold value u
    double shape = 0.0;     // GPD xi
    double scale = 0.0;
    int n_exceedances = 0;
    bool empirical_fallback = false;
};

/// Long-history quantile summary of one factor: named quantiles at
/// 1/16/50/84/99%, the full integer percentile grid, Pareto tail models and
/// raw moments m0..m4 of the empirical distribution.
struct QuantileSet {
    std::string factor;
    std::array<double, 5> named_quantiles{}; // at 1, 16, 50, 84, 99 percent
    std::array<double, 99> percentile_grid{}; // index p-1 holds percentile p
    std::array<double, 5> moments{};          // m0 = 1
    TailModel lower_tail;
    TailModel upper_tail;
    int n_obs = 0;

    double at_percentile(int p) const { return percentile_grid[static_cast<std::size_t>(p - 1)]; }
};

inline constexpr std::array<int, 5> kNamedPercentiles{1, 16, 50, 84, 99};

/// Empirical quantile with linear interpolation between order statistics
/// (the "type 7" convention). `sorted` ascending, prob in [0, 1].
double quantile_type7(const std::vector<double>& sorted, double prob);

/// Builds the quantile set from a factor's raw return history (>= 60 values,
/// else InsufficientDataError). Percentiles 2..98 are empirical; 1 and 99 come
/// from the fitted Pareto tails, clamped so the grid stays non-decreasing.
QuantileSet quantile_set(const std::vector<double>& history, const std::string& factor_id = {});

} // namespace polymodel
