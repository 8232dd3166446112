#include "polymodel/quantiles.hpp"

#include <algorithm>
#include <cmath>

#include "polymodel/errors.hpp"

namespace polymodel {

double quantile_type7(const std::vector<double>& sorted, double prob) {
    const std::size_t n = sorted.size();
    if (n == 0) throw InsufficientDataError("quantile of an empty sample");
    if (n == 1) return sorted[0];
    const double h = prob * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= n) return sorted[n - 1];
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

namespace {

struct GpdFit {
    double shape = 0.0; // xi
    double scale = 0.0;
    bool ok = false;
};

// Probability-weighted moments (Hosking & Wallis). `exceed` ascending,
// already shifted to start at zero.
GpdFit fit_gpd_pwm(const std::vector<double>& exceed) {
    const std::size_t n = exceed.size();
    GpdFit fit;
    if (n < 2) return fit;
    double a0 = 0.0, a1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        a0 += exceed[i];
        a1 += exceed[i] * static_cast<double>(n - 1 - i) / static_cast<double>(n - 1);
    }
    a0 /= static_cast<double>(n);
    a1 /= static_cast<double>(n);
    const double denom = a0 - 2.0 * a1;
    if (!(std::abs(denom) > 1e-300)) return fit;
    const double k = a0 / denom - 2.0; // Hosking's k = -xi
    const double scale = 2.0 * a0 * a1 / denom;
    if (!(scale > 0.0) || !std::isfinite(k)) return fit;
    fit.shape = -k;
    fit.scale = scale;
    fit.ok = true;
    return fit;
}

// Quantile of the exceedance distribution at probability p.
double gpd_quantile(const GpdFit& fit, double p) {
    const double xi = fit.shape;
    if (std::abs(xi) < 1e-9) return -fit.scale * std::log1p(-p);
    return fit.scale / xi * (std::pow(1.0 - p, -xi) - 1.0);
}

} // namespace

QuantileSet quantile_set(const std::vector<double>& history, const std::string& factor_id) {
    if (history.size() < 60)
        throw InsufficientDataError("quantile set needs >= 60 observations, got " +
                                    std::to_string(history.size()));
    std::vector<double> sorted = history;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    QuantileSet qs;
    qs.factor = factor_id;
    qs.n_obs = static_cast<int>(n);
    for (int p = 2; p <= 98; ++p)
        qs.percentile_grid[static_cast<std::size_t>(p - 1)] =
            quantile_type7(sorted, static_cast<double>(p) / 100.0);

    // Upper tail beyond the empirical 95% threshold.
    {
        TailModel& tail = qs.upper_tail;
        tail.side = TailModel::Side::Upper;
        tail.threshold = quantile_type7(sorted, 0.95);
        std::vector<double> exceed;
        for (double v : sorted)
            if (v > tail.threshold) exceed.push_back(v - tail.threshold);
        tail.n_exceedances = static_cast<int>(exceed.size());
        GpdFit fit;
        if (tail.n_exceedances >= 10) fit = fit_gpd_pwm(exceed);
        double theta99;
        const double mass = static_cast<double>(exceed.size()) / static_cast<double>(n);
        if (fit.ok && mass > 0.01) {
            tail.shape = fit.shape;
            tail.scale = fit.scale;
            theta99 = tail.threshold + gpd_quantile(fit, 1.0 - 0.01 / mass);
        } else {
            tail.empirical_fallback = true;
            theta99 = quantile_type7(sorted, 0.99);
        }
        qs.percentile_grid[98] = std::max(theta99, qs.percentile_grid[97]);
    }
    // Lower tail mirrored below the empirical 5% threshold.
    {
        TailModel& tail = qs.lower_tail;
        tail.side = TailModel::Side::Lower;
        tail.threshold_quantile = 0.05;
        tail.threshold = quantile_type7(sorted, 0.05);
        std::vector<double> exceed;
        for (auto it = sorted.rbegin(); it != sorted.rend(); ++it)
            if (*it < tail.threshold) exceed.push_back(tail.threshold - *it);
        std::sort(exceed.begin(), exceed.end());
        tail.n_exceedances = static_cast<int>(exceed.size());
        GpdFit fit;
        if (tail.n_exceedances >= 10) fit = fit_gpd_pwm(exceed);
        double theta1;
        const double mass = static_cast<double>(exceed.size()) / static_cast<double>(n);
        if (fit.ok && mass > 0.01) {
            tail.shape = fit.shape;
            tail.scale = fit.scale;
            theta1 = tail.threshold - gpd_quantile(fit, 1.0 - 0.01 / mass);
        } else {
            tail.empirical_fallback = true;
            theta1 = quantile_type7(sorted, 0.01);
        }
        qs.percentile_grid[0] = std::min(theta1, qs.percentile_grid[1]);
    }

    for (std::size_t i = 0; i < kNamedPercentiles.size(); ++i)
        qs.named_quantiles[i] = qs.at_percentile(kNamedPercentiles[i]);

    qs.moments[0] = 1.0;
    for (int k = 1; k <= 4; ++k) {
        double m = 0.0;
        for (double v : history) m += std::pow(v, k);
        qs.moments[static_cast<std::size_t>(k)] = m / static_cast<double>(n);
    }
    return qs;
}

} // namespace polymodel
