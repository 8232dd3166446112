#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "polymodel/risk.hpp"
#include "polymodel/series.hpp"
#include "polymodel/shuffle.hpp"

namespace polymodel {

struct FeatureParams {
    int regression_window = 36;
    ShuffleConfig shuffle;
    RiskParams risk;
};

/// month serial -> fund id -> row. Months ordered, funds ordered by id.
using FeatureTable = std::map<int, std::map<std::string, FeatureRow>>;
/// month serial -> fund id -> probability of a positive next month.
using PredictionTable = std::map<int, std::map<std::string, double>>;

struct ScoreTable {
    std::vector<PValueScore> rows; // sorted by (fund, factor, month)

    /// Scores of one fund at one month, across factors.
    std::vector<PValueScore> at(const std::string& fund, MonthIndex as_of) const;
};

/// Scores every (fund, factor, month) with a full regression window and
/// >= 8 overlapping observations. OpenMP-parallel over pairs; one RNG
/// substream per (fund, factor, month) keeps the output schedule-independent.
ScoreTable score_all(const MonthlyPanel& panel, const FeatureParams& params);

/// Feature stack per (fund, month): a row exists wherever the fund reports a
/// return. SVaR/LTA/LTR/LTS need a non-empty relevant-factor set and >= 60
/// months of factor history; MRaR/Sharpe use the fund's window history.
/// OpenMP-parallel over funds.
FeatureTable compute_features(const MonthlyPanel& panel, const ScoreTable& scores,
                              const FeatureParams& params);

/// The five-model feature vector with selection-layer imputation applied:
/// (LTS -1, MRaR -3, Sharpe -3, Return -30, AUM 0) for missing components.
std::array<double, 5> imputed_vector(const FeatureRow& row);

namespace serial {

/// Plain single-threaded reference for the scoring kernel: refits every
/// shuffle from scratch through ridge_fit instead of the factored fast path.
/// Kept for testing and benchmarking against score_all.
ScoreTable score_all_reference(const MonthlyPanel& panel, const FeatureParams& params);

} // namespace serial

// CSV round-trip for stage caching: `fund,factor,date,r2,p_value,score`
// and `fund,date,lta,svar,ltr,lts,mrar,sharpe,return,aum`.
std::string scores_to_csv(const ScoreTable& scores);
ScoreTable scores_from_csv(const std::string& text);
std::string features_to_csv(const FeatureTable& features);
FeatureTable features_from_csv(const std::string& text);
std::string predictions_to_csv(const PredictionTable& preds);
PredictionTable predictions_from_csv(const std::string& text);

} // namespace polymodel
