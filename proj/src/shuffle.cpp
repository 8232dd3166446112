#include "polymodel/shuffle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "polymodel/errors.hpp"
#include "polymodel/rng.hpp"

namespace polymodel {

PValueScore pvalue_score_seeded(const AlignedPair& pair, double lambda, int n_shuffles,
                                std::uint64_t stream_seed) {
    if (n_shuffles < 50) throw ConfigError("n_shuffles must be >= 50");

    RidgeSolver solver(pair.x, lambda);
    PolyFit observed = solver.fit(pair.y);

    PValueScore out;
    out.r2_observed = observed.r_squared;

    // Zero-SST target: every permutation of a constant is the same series,
    // all shuffled R^2 equal the observed 0, so p is pinned to 1.
    double y_mean = 0.0;
    for (double v : pair.y) y_mean += v;
    y_mean /= static_cast<double>(pair.y.size());
    double sst = 0.0, yty = 0.0;
    for (double v : pair.y) {
        sst += (v - y_mean) * (v - y_mean);
        yty += v * v;
    }
    if (!(sst > 0.0)) {
        out.p_value = 1.0;
        out.score = 0.0;
        out.degenerate = true;
        return out;
    }

    Rng rng(stream_seed);
    std::vector<double> shuffled = pair.y;
    int count_ge = 0;
    for (int k = 0; k < n_shuffles; ++k) {
        rng.shuffle(shuffled);
        const double r2 = solver.fit_r2_quad(shuffled, yty, sst);
        if (r2 >= out.r2_observed) ++count_ge;
    }
    out.p_value = (1.0 + count_ge) / static_cast<double>(n_shuffles + 1);
    out.score = -std::log(out.p_value);
    return out;
}

PValueScore pvalue_score(const AlignedPair& pair, const ShuffleConfig& config) {
    return pvalue_score_seeded(pair, config.lambda, config.n_shuffles, config.seed);
}

std::vector<PValueScore> rolling_scores(const MonthlyPanel& panel, const std::string& fund,
                                        const ShuffleConfig& config) {
    const FundRecord* f = panel.find_fund(fund);
    if (!f) throw ConfigError("unknown fund id '" + fund + "'");

    std::vector<PValueScore> out;
    const int first_t = panel.span_start.serial() + config.window_months - 1;
    for (const auto& factor : panel.factors) {
        for (int s = first_t; s <= panel.span_end.serial(); ++s) {
            const MonthIndex t = MonthIndex::from_serial(s);
            AlignedPair pair;
            if (!try_align(f->returns, factor.returns,
                           {t.plus(1 - config.window_months), t}, pair))
                continue; // below the overlap floor, skipped
            const std::uint64_t stream =
                substream(config.seed, hash64(fund), hash64(factor.id),
                          static_cast<std::uint64_t>(s));
            PValueScore score =
                pvalue_score_seeded(pair, config.lambda, config.n_shuffles, stream);
            score.fund = fund;
            score.factor = factor.id;
            score.as_of = t;
            out.push_back(std::move(score));
        }
    }
    return out;
}

FactorSelection select_factors(const std::vector<PValueScore>& scores, double threshold) {
    FactorSelection sel;
    sel.threshold = threshold;
    if (scores.empty()) return sel;
    sel.fund = scores.front().fund;
    sel.as_of = scores.front().as_of;
    for (const auto& s : scores) {
        if (s.fund != sel.fund || !(s.as_of == sel.as_of))
            throw ConfigError("select_factors input mixes funds or dates");
        if (s.score >= threshold) sel.gamma.push_back(s.factor);
    }
    std::sort(sel.gamma.begin(), sel.gamma.end());
    return sel;
}

} // namespace polymodel
