#include "polymodel/features.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polymodel/errors.hpp"
#include "polymodel/imputation.hpp"
#include "polymodel/io.hpp"
#include "polymodel/quantiles.hpp"
#include "polymodel/rng.hpp"

namespace polymodel {

std::vector<PValueScore> ScoreTable::at(const std::string& fund, MonthIndex as_of) const {
    std::vector<PValueScore> out;
    for (const auto& row : rows)
        if (row.fund == fund && row.as_of == as_of) out.push_back(row);
    return out;
}

namespace {

int first_window_end(const MonthlyPanel& panel, int window) {
    return panel.span_start.serial() + window - 1;
}

} // namespace

ScoreTable score_all(const MonthlyPanel& panel, const FeatureParams& params) {
    const int first_t = first_window_end(panel, params.regression_window);
    const int last_t = panel.span_end.serial();

    struct Task {
        const FundRecord* fund;
        const FactorRecord* factor;
    };
    std::vector<Task> tasks;
    tasks.reserve(panel.funds.size() * panel.factors.size());
    for (const auto& fund : panel.funds)
        for (const auto& factor : panel.factors) tasks.push_back({&fund, &factor});

    std::vector<std::vector<PValueScore>> slots(tasks.size());

#pragma omp parallel for schedule(dynamic)
    for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
        const Task& task = tasks[ti];
        const std::uint64_t fund_key = hash64(task.fund->id);
        const std::uint64_t factor_key = hash64(task.factor->id);
        auto& out = slots[ti];
        for (int s = first_t; s <= last_t; ++s) {
            const MonthIndex t = MonthIndex::from_serial(s);
            AlignedPair pair;
            if (!try_align(task.fund->returns, task.factor->returns,
                           {t.plus(1 - params.regression_window), t}, pair))
                continue;
            const std::uint64_t stream = substream(params.shuffle.seed, fund_key, factor_key,
                                                   static_cast<std::uint64_t>(s));
            PValueScore score = pvalue_score_seeded(pair, params.shuffle.lambda,
                                                    params.shuffle.n_shuffles, stream);
            score.fund = task.fund->id;
            score.factor = task.factor->id;
            score.as_of = t;
            out.push_back(std::move(score));
        }
    }

    ScoreTable table;
    for (auto& slot : slots)
        for (auto& row : slot) table.rows.push_back(std::move(row));
    return table;
}

namespace serial {

ScoreTable score_all_reference(const MonthlyPanel& panel, const FeatureParams& params) {
    const int first_t = first_window_end(panel, params.regression_window);
    ScoreTable table;
    for (const auto& fund : panel.funds) {
        for (const auto& factor : panel.factors) {
            for (int s = first_t; s <= panel.span_end.serial(); ++s) {
                const MonthIndex t = MonthIndex::from_serial(s);
                AlignedPair pair;
                if (!try_align(fund.returns, factor.returns,
                               {t.plus(1 - params.regression_window), t}, pair))
                    continue;

                PolyFit observed = ridge_fit(pair, params.shuffle.lambda);
                PValueScore row;
                row.fund = fund.id;
                row.factor = factor.id;
                row.as_of = t;
                row.r2_observed = observed.r_squared;

                double mean = 0.0;
                for (double v : pair.y) mean += v;
                mean /= static_cast<double>(pair.y.size());
                double sst = 0.0;
                for (double v : pair.y) sst += (v - mean) * (v - mean);
                if (!(sst > 0.0)) {
                    row.p_value = 1.0;
                    row.score = 0.0;
                    row.degenerate = true;
                    table.rows.push_back(std::move(row));
                    continue;
                }

                Rng rng(substream(params.shuffle.seed, hash64(fund.id), hash64(factor.id),
                                  static_cast<std::uint64_t>(s)));
                AlignedPair shuffled = pair;
                int count_ge = 0;
                for (int k = 0; k < params.shuffle.n_shuffles; ++k) {
                    rng.shuffle(shuffled.y);
                    const PolyFit refit = ridge_fit(shuffled, params.shuffle.lambda);
                    if (refit.r_squared >= row.r2_observed) ++count_ge;
                }
                row.p_value =
                    (1.0 + count_ge) / static_cast<double>(params.shuffle.n_shuffles + 1);
                row.score = -std::log(row.p_value);
                table.rows.push_back(std::move(row));
            }
        }
    }
    return table;
}

} // namespace serial

FeatureTable compute_features(const MonthlyPanel& panel, const ScoreTable& scores,
                              const FeatureParams& params) {
    const int first_t = first_window_end(panel, params.regression_window);
    const int last_t = panel.span_end.serial();
    if (first_t > last_t) return {};

    // Quantile sets per (factor, month) over the expanding history up to the
    // month, so nothing after the as-of date leaks in. Factors with fewer
    // than 60 observed months at t simply have no set yet.
    std::vector<std::map<int, QuantileSet>> qsets_by_factor(panel.factors.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t j = 0; j < panel.factors.size(); ++j) {
        const auto& factor = panel.factors[j];
        for (int s = first_t; s <= last_t; ++s) {
            std::vector<double> history;
            for (int m = panel.span_start.serial(); m <= s; ++m) {
                auto v = factor.returns.at(MonthIndex::from_serial(m));
                if (v) history.push_back(*v);
            }
            if (history.size() < 60) continue;
            qsets_by_factor[j].emplace(s, quantile_set(history, factor.id));
        }
    }

    // score lookup: fund -> month -> rows
    std::map<std::string, std::map<int, std::vector<const PValueScore*>>> score_index;
    for (const auto& row : scores.rows)
        score_index[row.fund][row.as_of.serial()].push_back(&row);

    std::vector<std::map<int, FeatureRow>> per_fund(panel.funds.size());

#pragma omp parallel for schedule(dynamic)
    for (std::size_t fi = 0; fi < panel.funds.size(); ++fi) {
        const FundRecord& fund = panel.funds[fi];
        auto fund_scores = score_index.find(fund.id);
        for (int s = first_t; s <= last_t; ++s) {
            const MonthIndex t = MonthIndex::from_serial(s);
            auto ret = fund.returns.at(t);
            if (!ret) continue; // fund not reporting: no row this month

            FeatureRow row;
            row.fund = fund.id;
            row.as_of = t;
            row.ret = ret;
            row.aum = fund.aum_at(t);

            // relevant-factor block: needs scores, fits and quantile sets
            if (fund_scores != score_index.end()) {
                auto at_month = fund_scores->second.find(s);
                if (at_month != fund_scores->second.end()) {
                    FactorSelection sel;
                    sel.fund = fund.id;
                    sel.as_of = t;
                    sel.threshold = params.risk.score_threshold;
                    std::map<std::string, PolyFit> fits;
                    std::map<std::string, QuantileSet> qsets;
                    for (const PValueScore* sc : at_month->second) {
                        if (sc->score < params.risk.score_threshold) continue;
                        std::size_t j = 0;
                        for (; j < panel.factors.size(); ++j)
                            if (panel.factors[j].id == sc->factor) break;
                        auto qs = qsets_by_factor[j].find(s);
                        if (qs == qsets_by_factor[j].end()) continue; // short factor history
                        AlignedPair pair;
                        if (!try_align(fund.returns, panel.factors[j].returns,
                                       {t.plus(1 - params.regression_window), t}, pair))
                            continue;
                        sel.gamma.push_back(sc->factor);
                        fits.emplace(sc->factor, ridge_fit(pair, params.shuffle.lambda));
                        qsets.emplace(sc->factor, qs->second);
                    }
                    std::sort(sel.gamma.begin(), sel.gamma.end());
                    if (!sel.gamma.empty()) {
                        const double svar_value = svar(sel, fits, qsets, params.risk);
                        const double lta_value = lta(sel, fits, qsets);
                        row.svar = svar_value;
                        row.lta = lta_value;
                        if (svar_value > 0.0) row.ltr = lta_value / svar_value;
                        row.lts = lts(lta_value, svar_value, params.risk.kappa);
                    }
                }
            }

            // window history for MRaR and Sharpe
            std::vector<double> window_returns;
            for (int m = s - params.regression_window + 1; m <= s; ++m) {
                auto v = fund.returns.at(MonthIndex::from_serial(m));
                if (v) window_returns.push_back(*v);
            }
            if (!window_returns.empty()) {
                std::vector<double> zeros(window_returns.size(), 0.0);
                row.mrar = mrar(window_returns, zeros, params.risk.gamma);
                if (window_returns.size() >= 2) {
                    try {
                        row.sharpe = sharpe(window_returns, zeros);
                    } catch (const DegenerateInputError&) {
                        // zero-variance window: Sharpe stays missing
                    }
                }
            }
            per_fund[fi].emplace(s, std::move(row));
        }
    }

    FeatureTable table;
    for (std::size_t fi = 0; fi < panel.funds.size(); ++fi)
        for (auto& [s, row] : per_fund[fi]) table[s].emplace(panel.funds[fi].id, std::move(row));
    return table;
}

std::array<double, 5> imputed_vector(const FeatureRow& row) {
    return {impute_feature("LTS", row.lts), impute_feature("MRaR", row.mrar),
            impute_feature("Sharpe", row.sharpe), impute_feature("Return", row.ret),
            row.aum.value_or(0.0)};
}

// ---------------------------------------------------------------------------
// stage-cache CSV round-trips

namespace {

std::string opt_field(const std::optional<double>& v) { return v ? fmt_double(*v) : ""; }

std::optional<double> parse_opt(const std::string& field, const std::string& ctx) {
    if (field.empty()) return std::nullopt;
    return parse_double(field, ctx);
}

} // namespace

std::string scores_to_csv(const ScoreTable& scores) {
    std::ostringstream out;
    out << "fund,factor,date,r2,p_value,score\n";
    for (const auto& row : scores.rows)
        out << row.fund << ',' << row.factor << ',' << format_month(row.as_of) << ','
            << fmt_double(row.r2_observed) << ',' << fmt_double(row.p_value) << ','
            << fmt_double(row.score) << '\n';
    return out.str();
}

ScoreTable scores_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "fund,factor,date,r2,p_value,score")
        throw ParseError("bad score CSV header");
    ScoreTable table;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        const std::string ctx = "score CSV row " + std::to_string(row_no);
        if (f.size() != 6) throw ParseError(ctx + ": expected 6 columns");
        PValueScore s;
        s.fund = f[0];
        s.factor = f[1];
        s.as_of = parse_month(f[2]);
        s.r2_observed = parse_double(f[3], ctx);
        s.p_value = parse_double(f[4], ctx);
        s.score = parse_double(f[5], ctx);
        s.degenerate = s.p_value >= 1.0 && s.r2_observed == 0.0;
        table.rows.push_back(std::move(s));
    }
    return table;
}

std::string features_to_csv(const FeatureTable& features) {
    std::ostringstream out;
    out << "fund,date,lta,svar,ltr,lts,mrar,sharpe,return,aum\n";
    // fund-major ordering to match the score export convention
    std::map<std::string, std::vector<const FeatureRow*>> by_fund;
    for (const auto& [s, by_fund_at] : features)
        for (const auto& [fund, row] : by_fund_at) by_fund[fund].push_back(&row);
    for (const auto& [fund, rows] : by_fund)
        for (const FeatureRow* row : rows)
            out << fund << ',' << format_month(row->as_of) << ',' << opt_field(row->lta) << ','
                << opt_field(row->svar) << ',' << opt_field(row->ltr) << ','
                << opt_field(row->lts) << ',' << opt_field(row->mrar) << ','
                << opt_field(row->sharpe) << ',' << opt_field(row->ret) << ','
                << opt_field(row->aum) << '\n';
    return out.str();
}

FeatureTable features_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "fund,date,lta,svar,ltr,lts,mrar,sharpe,return,aum")
        throw ParseError("bad feature CSV header");
    FeatureTable table;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        const std::string ctx = "feature CSV row " + std::to_string(row_no);
        if (f.size() != 10) throw ParseError(ctx + ": expected 10 columns");
        FeatureRow row;
        row.fund = f[0];
        row.as_of = parse_month(f[1]);
        row.lta = parse_opt(f[2], ctx);
        row.svar = parse_opt(f[3], ctx);
        row.ltr = parse_opt(f[4], ctx);
        row.lts = parse_opt(f[5], ctx);
        row.mrar = parse_opt(f[6], ctx);
        row.sharpe = parse_opt(f[7], ctx);
        row.ret = parse_opt(f[8], ctx);
        row.aum = parse_opt(f[9], ctx);
        table[row.as_of.serial()].emplace(row.fund, std::move(row));
    }
    return table;
}

std::string predictions_to_csv(const PredictionTable& preds) {
    std::ostringstream out;
    out << "fund,date,p\n";
    std::map<std::string, std::vector<std::pair<int, double>>> by_fund;
    for (const auto& [s, by_fund_at] : preds)
        for (const auto& [fund, p] : by_fund_at) by_fund[fund].emplace_back(s, p);
    for (const auto& [fund, rows] : by_fund)
        for (const auto& [s, p] : rows)
            out << fund << ',' << format_month(MonthIndex::from_serial(s)) << ',' << fmt_double(p)
                << '\n';
    return out.str();
}

PredictionTable predictions_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "fund,date,p")
        throw ParseError("bad prediction CSV header");
    PredictionTable table;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        const std::string ctx = "prediction CSV row " + std::to_string(row_no);
        if (f.size() != 3) throw ParseError(ctx + ": expected 3 columns");
        table[parse_month(f[1]).serial()].emplace(f[0], parse_double(f[2], ctx));
    }
    return table;
}

} // namespace polymodel
