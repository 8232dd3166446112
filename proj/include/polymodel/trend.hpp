#pragma once

#include <cstdint>
#include <vector>

#include "polymodel/features.hpp"
#include "polymodel/gbt.hpp"

namespace polymodel {

struct TrendPrediction {
    std::string fund;
    MonthIndex as_of;
    double p = 0.5;
};

struct PredictorConfig {
    int training_window = 24; // months
    int rounds = 100;
    int depth = 3;
    double rate = 0.1;
    std::uint64_t seed = 0;
    // The no-machine-learning arm: skip training and emit constant_p.
    bool constant = false;
    double constant_p = 0.5;
};

/// Examples from months [t - window, t - 1]: one per (fund, month) where the
/// fund has a feature row and an observed next-month return. Features are
/// sentinel-imputed; labels come from month + 1. Throws
/// InsufficientDataError when the window yields no examples.
std::vector<TrainingExample> build_dataset(const MonthlyPanel& panel,
                                           const FeatureTable& features, MonthIndex t,
                                           int window);

/// Retrains monthly over [start, end] and predicts p for every fund with a
/// feature row at t. Training at t sees only months < t, so truncating the
/// panel after t leaves all predictions at <= t unchanged. OpenMP-parallel
/// over months (per-month substream seeds keep it schedule-independent).
PredictionTable moving_window_predict(const MonthlyPanel& panel, const FeatureTable& features,
                                      MonthIndex start, MonthIndex end,
                                      const PredictorConfig& config);

} // namespace polymodel
