#include "polymodel/trend.hpp"

#include "polymodel/errors.hpp"
#include "polymodel/rng.hpp"

namespace polymodel {

std::vector<TrainingExample> build_dataset(const MonthlyPanel& panel,
                                           const FeatureTable& features, MonthIndex t,
                                           int window) {
    if (window < 3) throw ConfigError("training window must be >= 3 months");
    std::vector<TrainingExample> data;
    for (int s = t.serial() - window; s <= t.serial() - 1; ++s) {
        auto month_rows = features.find(s);
        if (month_rows == features.end()) continue;
        for (const auto& [fund_id, row] : month_rows->second) {
            const FundRecord* fund = panel.find_fund(fund_id);
            if (!fund) continue;
            auto next = fund->returns.at(MonthIndex::from_serial(s + 1));
            if (!next) continue; // no observed label at the window edge
            TrainingExample ex;
            ex.features = imputed_vector(row);
            ex.label = *next > 0.0 ? 1 : 0;
            data.push_back(ex);
        }
    }
    if (data.empty())
        throw InsufficientDataError("no training examples in the window ending " +
                                    format_month(t.plus(-1)));
    return data;
}

PredictionTable moving_window_predict(const MonthlyPanel& panel, const FeatureTable& features,
                                      MonthIndex start, MonthIndex end,
                                      const PredictorConfig& config) {
    const int first = start.serial();
    const int last = end.serial();
    if (first > last) throw ConfigError("prediction span is empty");

    std::vector<std::map<std::string, double>> slots(static_cast<std::size_t>(last - first + 1));
    std::vector<std::string> errors(slots.size());

#pragma omp parallel for schedule(dynamic)
    for (int s = first; s <= last; ++s) {
        auto& slot = slots[static_cast<std::size_t>(s - first)];
        auto month_rows = features.find(s);
        if (month_rows == features.end()) continue;
        try {
            if (config.constant) {
                for (const auto& [fund_id, row] : month_rows->second)
                    slot.emplace(fund_id, config.constant_p);
                continue;
            }
            auto data = build_dataset(panel, features, MonthIndex::from_serial(s),
                                      config.training_window);
            BoostedModel model =
                train_boosted(data, config.rounds, config.depth, config.rate,
                              substream(config.seed, hash64("train"),
                                        static_cast<std::uint64_t>(s)));
            for (const auto& [fund_id, row] : month_rows->second)
                slot.emplace(fund_id, predict_proba(model, imputed_vector(row)));
        } catch (const Error& e) {
            errors[static_cast<std::size_t>(s - first)] = e.what();
        }
    }
    for (const auto& err : errors)
        if (!err.empty()) throw InsufficientDataError(err);

    PredictionTable table;
    for (int s = first; s <= last; ++s) {
        auto& slot = slots[static_cast<std::size_t>(s - first)];
        if (!slot.empty()) table.emplace(s, std::move(slot));
    }
    return table;
}

} // namespace polymodel
