#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polymodel/hermite.hpp"
#include "polymodel/series.hpp"

namespace polymodel {

struct ShuffleConfig {
    int n_shuffles = 1000; // >= 50
    std::uint64_t seed = 0;
    int window_months = 36;
    double lambda = 1e-4;
};

/// Target-shuffling significance of one (fund, factor) pair at one date.
/// p = (1 + #{shuffled R^2 >= observed R^2}) / (N + 1), score = -ln p.
struct PValueScore {
    std::string fund;
    std::string factor;
    MonthIndex as_of;
    double r2_observed = 0.0;
    double p_value = 1.0;
    double score = 0.0;
    bool degenerate = false; // zero-SST target: p pinned to 1
};

struct FactorSelection {
    std::string fund;
    MonthIndex as_of;
    std::vector<std::string> gamma; // sorted factor ids with score >= threshold
    double threshold = 0.0;
};

/// Scores one pair with shuffles drawn directly from config.seed.
PValueScore pvalue_score(const AlignedPair& pair, const ShuffleConfig& config);

/// Core with an explicit substream seed; rolling scans derive one stream per
/// (fund, factor, month) so the result is independent of evaluation order.
PValueScore pvalue_score_seeded(const AlignedPair& pair, double lambda, int n_shuffles,
                                std::uint64_t stream_seed);

/// Dynamic score series for one fund: every factor, every month t whose full
/// regression window fits in the panel and has >= 8 overlapping observations.
/// Months below the floor are skipped. Throws ConfigError for an unknown fund.
std::vector<PValueScore> rolling_scores(const MonthlyPanel& panel, const std::string& fund,
                                        const ShuffleConfig& config);

/// Filters one (fund, as_of) score set: gamma = factors with score >= threshold.
/// Throws ConfigError when the scores mix funds or dates.
FactorSelection select_factors(const std::vector<PValueScore>& scores, double threshold);

} // namespace polymodel
