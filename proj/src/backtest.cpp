#include "polymodel/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "polymodel/errors.hpp"
#include "polymodel/imputation.hpp"
#include "polymodel/io.hpp"

namespace polymodel {

std::string FilterSpec::filter_label() const {
    std::string label;
    auto add = [&](const char* name) {
        if (!label.empty()) label += ", ";
        label += name;
    };
    if (lts_threshold) add("LTS");
    if (sharpe_threshold) add("Sharpe");
    if (mrar_threshold) add("MRaR");
    return label.empty() ? "No use" : label;
}

std::string weight_scheme_name(WeightScheme s) {
    return s == WeightScheme::Even ? "even" : "aum_weighted";
}

std::vector<std::string> select_funds(const std::map<std::string, FeatureRow>& features,
                                      const std::map<std::string, double>& predictions,
                                      const FilterSpec& spec) {
    std::vector<std::string> selected;
    for (const auto& [fund, row] : features) {
        if (spec.lts_threshold && !(impute_feature("LTS", row.lts) > *spec.lts_threshold))
            continue;
        if (spec.sharpe_threshold &&
            !(impute_feature("Sharpe", row.sharpe) > *spec.sharpe_threshold))
            continue;
        if (spec.mrar_threshold && !(impute_feature("MRaR", row.mrar) > *spec.mrar_threshold))
            continue;
        if (spec.use_ml) {
            auto p = predictions.find(fund);
            if (p == predictions.end())
                throw ConfigError("no trend prediction for fund '" + fund + "'");
            if (!(p->second > spec.p_threshold)) continue;
        }
        selected.push_back(fund);
    }
    return selected; // map iteration keeps ids sorted
}

PortfolioState rebalance(const PortfolioState& state, const std::vector<std::string>& selected,
                         WeightScheme scheme, const std::map<std::string, double>& aum,
                         std::vector<std::string>* events) {
    PortfolioState next;
    next.month = state.month;
    next.value = state.value;
    if (selected.empty()) return next; // hold cash

    if (scheme == WeightScheme::AumWeighted) {
        double total = 0.0;
        for (const auto& fund : selected) {
            auto it = aum.find(fund);
            if (it != aum.end() && it->second > 0.0) total += it->second;
        }
        if (total > 0.0) {
            for (const auto& fund : selected) {
                auto it = aum.find(fund);
                const double w = it != aum.end() && it->second > 0.0 ? it->second / total : 0.0;
                if (w > 0.0) next.holdings.emplace(fund, w);
            }
            return next;
        }
        if (events)
            events->push_back("aum weighting fell back to even at " + format_month(state.month) +
                              ": zero total AUM among selected funds");
    }
    const double w = 1.0 / static_cast<double>(selected.size());
    for (const auto& fund : selected) next.holdings.emplace(fund, w);
    return next;
}

BacktestResult run_backtest(const MonthlyPanel& panel, const FeatureTable& features,
                            const PredictionTable& predictions, const FilterSpec& spec,
                            WeightScheme scheme, std::pair<MonthIndex, MonthIndex> span) {
    if (span.first > span.second) throw ConfigError("empty backtest span");

    BacktestResult result;
    result.values.push_back(1.0);

    PortfolioState state;
    state.month = span.first;
    state.value = 1.0;

    static const std::map<std::string, double> no_predictions;
    for (int s = span.first.serial(); s < span.second.serial(); ++s) {
        const MonthIndex t = MonthIndex::from_serial(s);
        const MonthIndex realized = MonthIndex::from_serial(s + 1);
        state.month = t;

        auto month_rows = features.find(s);
        std::vector<std::string> selected;
        if (month_rows != features.end() && !month_rows->second.empty()) {
            const std::map<std::string, double>* preds = &no_predictions;
            if (spec.use_ml) {
                auto p = predictions.find(s);
                if (p == predictions.end())
                    throw ConfigError("no trend predictions at " + format_month(t));
                preds = &p->second;
            }
            std::map<std::string, double> aum;
            for (const auto& [fund, row] : month_rows->second)
                if (row.aum) aum.emplace(fund, *row.aum);
            selected = select_funds(month_rows->second, *preds, spec);
            state = rebalance(state, selected, scheme, aum, &result.events);
        } else {
            state.holdings.clear(); // empty universe: cash
        }
        result.holdings.push_back(state);

        double ret = 0.0;
        for (const auto& [fund, weight] : state.holdings) {
            const FundRecord* rec = panel.find_fund(fund);
            auto r = rec ? rec->returns.at(realized) : std::nullopt;
            if (r) {
                ret += weight * *r;
            } else {
                result.events.push_back("force-sold " + fund + " at " + format_month(realized) +
                                        ": no reported return");
            }
        }
        state.value *= 1.0 + ret;
        result.months.push_back(realized);
        result.returns.push_back(ret);
        result.values.push_back(state.value);
    }
    return result;
}

MetricsReport compute_metrics(const BacktestResult& result,
                              const std::map<std::string, ReturnSeries>& benchmarks,
                              const ReturnSeries* risk_free) {
    const std::vector<double>& r = result.returns;
    const std::size_t n = r.size();
    if (n < 2) throw InsufficientDataError("metrics need at least 2 monthly returns");

    MetricsReport rep;
    double cumulative = 1.0;
    for (double v : r) cumulative *= 1.0 + v;
    rep.cumulative_return = cumulative - 1.0;
    rep.annual_return = std::pow(cumulative, 12.0 / static_cast<double>(n)) - 1.0;

    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : r) ss += (v - mean) * (v - mean);
    const double monthly_std = std::sqrt(ss / static_cast<double>(n - 1));
    rep.annual_volatility = monthly_std * std::sqrt(12.0);

    if (rep.annual_volatility > 0.0) {
        double mean_excess = mean;
        if (risk_free) {
            mean_excess = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                mean_excess += r[i] - risk_free->at(result.months[i]).value_or(0.0);
            mean_excess /= static_cast<double>(n);
        }
        rep.sharpe = mean_excess * 12.0 / rep.annual_volatility;
    }

    double peak = result.values.empty() ? 1.0 : result.values[0];
    double max_dd = 0.0;
    for (double v : result.values) {
        peak = std::max(peak, v);
        max_dd = std::max(max_dd, 1.0 - v / peak);
    }
    rep.max_drawdown = max_dd;

    rep.max_monthly_increase = *std::max_element(r.begin(), r.end());
    rep.max_monthly_decrease = *std::min_element(r.begin(), r.end());
    double pos_sum = 0.0;
    int pos_count = 0;
    for (double v : r) {
        if (v > 0.0) {
            ++rep.n_months_up;
            pos_sum += v;
            ++pos_count;
        } else if (v < 0.0) {
            ++rep.n_months_down;
        }
    }
    rep.avg_monthly_increase = pos_count > 0 ? pos_sum / pos_count : 0.0;

    for (const auto& [name, series] : benchmarks) {
        std::vector<double> a, b;
        for (std::size_t i = 0; i < n; ++i) {
            auto bv = series.at(result.months[i]);
            if (!bv) continue;
            a.push_back(r[i]);
            b.push_back(*bv);
        }
        if (a.size() < 2) continue;
        double ma = 0.0, mb = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            ma += a[i];
            mb += b[i];
        }
        ma /= static_cast<double>(a.size());
        mb /= static_cast<double>(a.size());
        double sab = 0.0, saa = 0.0, sbb = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            sab += (a[i] - ma) * (b[i] - mb);
            saa += (a[i] - ma) * (a[i] - ma);
            sbb += (b[i] - mb) * (b[i] - mb);
        }
        if (saa > 0.0 && sbb > 0.0)
            rep.benchmark_correlations.emplace(name, sab / std::sqrt(saa * sbb));
    }
    return rep;
}

std::vector<std::pair<FilterSpec, WeightScheme>> default_grid(double lts_t, double sharpe_t,
                                                              double mrar_t, double p_t) {
    std::vector<std::pair<FilterSpec, WeightScheme>> grid;
    for (int mask = 0; mask < 8; ++mask) {
        for (bool ml : {false, true}) {
            for (WeightScheme scheme : {WeightScheme::Even, WeightScheme::AumWeighted}) {
                FilterSpec spec;
                if (mask & 1) spec.lts_threshold = lts_t;
                if (mask & 2) spec.sharpe_threshold = sharpe_t;
                if (mask & 4) spec.mrar_threshold = mrar_t;
                spec.use_ml = ml;
                spec.p_threshold = p_t;
                grid.emplace_back(spec, scheme);
            }
        }
    }
    return grid;
}

std::vector<ExperimentCell> run_grid(const MonthlyPanel& panel, const FeatureTable& features,
                                     const PredictionTable& predictions,
                                     const std::vector<std::pair<FilterSpec, WeightScheme>>& grid,
                                     std::pair<MonthIndex, MonthIndex> span,
                                     const std::map<std::string, ReturnSeries>& benchmarks) {
    if (grid.empty()) throw ConfigError("empty experiment grid");
    std::vector<ExperimentCell> cells(grid.size());
    std::vector<std::string> errors(grid.size());

#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < grid.size(); ++i) {
        try {
            ExperimentCell& cell = cells[i];
            cell.filters = grid[i].first;
            cell.scheme = grid[i].second;
            cell.backtest =
                run_backtest(panel, features, predictions, cell.filters, cell.scheme, span);
            cell.result = compute_metrics(cell.backtest, benchmarks);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    }
    for (const auto& err : errors)
        if (!err.empty()) throw Error(err);
    return cells;
}

namespace {

nlohmann::ordered_json metrics_json(const MetricsReport& m) {
    nlohmann::ordered_json j;
    j["Cumulative returns"] = m.cumulative_return;
    if (m.sharpe)
        j["Sharpe Ratio"] = *m.sharpe;
    else
        j["Sharpe Ratio"] = nullptr;
    j["Max Drawdown"] = m.max_drawdown;
    j["Number of Months Increase"] = m.n_months_up;
    j["Number of Months Decrease"] = m.n_months_down;
    j["Max Monthly Increase"] = m.max_monthly_increase;
    j["Max Monthly Decrease"] = m.max_monthly_decrease;
    j["Average Monthly Increase"] = m.avg_monthly_increase;
    j["Annual Return"] = m.annual_return;
    j["Annual Volatility"] = m.annual_volatility;
    for (const auto& [name, corr] : m.benchmark_correlations)
        j["Correlation with " + name] = corr;
    return j;
}

nlohmann::ordered_json
group_mean(const std::vector<const MetricsReport*>& group) {
    nlohmann::ordered_json sum;
    if (group.empty()) return sum;
    std::vector<nlohmann::ordered_json> items;
    for (const MetricsReport* m : group) items.push_back(metrics_json(*m));
    nlohmann::ordered_json out;
    for (auto& [key, first_value] : items.front().items()) {
        (void)first_value;
        double acc = 0.0;
        bool all = true;
        for (const auto& item : items) {
            if (!item.contains(key) || !item.at(key).is_number()) {
                all = false;
                break;
            }
            acc += item.at(key).get<double>();
        }
        if (all) out[key] = acc / static_cast<double>(items.size());
    }
    return out;
}

} // namespace

std::string grid_report_json(const std::vector<ExperimentCell>& cells,
                             const std::map<std::string, std::string>& run_info) {
    nlohmann::ordered_json report;
    if (!run_info.empty()) {
        nlohmann::ordered_json info;
        for (const auto& [k, v] : run_info) info[k] = v;
        report["run"] = info;
    }

    nlohmann::ordered_json cell_array = nlohmann::ordered_json::array();
    for (const auto& cell : cells) {
        nlohmann::ordered_json c;
        c["Filters"] = cell.filters.filter_label();
        c["Using Machine Learning"] = cell.filters.use_ml;
        c["Weighted"] = cell.scheme == WeightScheme::AumWeighted;
        c["metrics"] = metrics_json(cell.result);
        cell_array.push_back(std::move(c));
    }
    report["cells"] = cell_array;

    auto collect = [&](auto&& pred) {
        std::vector<const MetricsReport*> group;
        for (const auto& cell : cells)
            if (pred(cell)) group.push_back(&cell.result);
        return group;
    };

    nlohmann::ordered_json by_ml;
    by_ml["False"] = group_mean(collect([](const ExperimentCell& c) { return !c.filters.use_ml; }));
    by_ml["True"] = group_mean(collect([](const ExperimentCell& c) { return c.filters.use_ml; }));
    report["by_machine_learning"] = by_ml;

    nlohmann::ordered_json by_filters;
    std::vector<std::string> labels;
    for (const auto& cell : cells) {
        std::string label = cell.filters.filter_label();
        if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
    }
    for (const auto& label : labels)
        by_filters[label] = group_mean(
            collect([&](const ExperimentCell& c) { return c.filters.filter_label() == label; }));
    report["by_filters"] = by_filters;

    nlohmann::ordered_json by_weighted;
    by_weighted["False"] = group_mean(
        collect([](const ExperimentCell& c) { return c.scheme == WeightScheme::Even; }));
    by_weighted["True"] = group_mean(
        collect([](const ExperimentCell& c) { return c.scheme == WeightScheme::AumWeighted; }));
    report["by_weighted"] = by_weighted;

    return report.dump(2) + "\n";
}

std::string value_path_csv(const BacktestResult& result) {
    std::ostringstream out;
    out << "date,value,return\n";
    for (std::size_t i = 0; i < result.months.size(); ++i)
        out << format_month(result.months[i]) << ',' << fmt_double(result.values[i + 1]) << ','
            << fmt_double(result.returns[i]) << '\n';
    return out.str();
}

} // namespace polymodel
