#include "polymodel/risk.hpp"

#include <algorithm>
#include <cmath>

#include "polymodel/errors.hpp"

namespace polymodel {

std::array<double, 5> lagrange_weights(const std::array<double, 5>& nodes,
                                       const std::array<double, 5>& moments) {
    for (std::size_t a = 0; a < 5; ++a)
        for (std::size_t b = a + 1; b < 5; ++b)
            if (nodes[a] == nodes[b])
                throw DegenerateInputError("coincident quantile nodes in Lagrange weights");

    std::array<double, 5> weights{};
    for (std::size_t q = 0; q < 5; ++q) {
        // expand prod_{r != q} (z - nodes[r]) into power-basis coefficients
        std::array<double, 5> coeff{};
        coeff[0] = 1.0;
        std::size_t degree = 0;
        double denom = 1.0;
        for (std::size_t r = 0; r < 5; ++r) {
            if (r == q) continue;
            for (std::size_t k = degree + 1; k > 0; --k)
                coeff[k] = coeff[k - 1] - nodes[r] * coeff[k];
            coeff[0] = -nodes[r] * coeff[0];
            ++degree;
            denom *= nodes[q] - nodes[r];
        }
        double w = 0.0;
        for (std::size_t k = 0; k < 5; ++k) w += coeff[k] * moments[k];
        weights[q] = w / denom;
    }
    return weights;
}

double svar_pair(const PolyFit& fit, const QuantileSet& qs, const RiskParams& params) {
    double worst = 0.0; // magnitude of the worst predicted loss, floored at 0
    for (int p = 1; p <= 99; ++p) {
        const double predicted = predict(fit, qs.at_percentile(p));
        worst = std::max(worst, -predicted);
    }
    return std::sqrt(worst * worst + fit.residual_variance * params.xi * params.xi);
}

double svar(const FactorSelection& selection, const std::map<std::string, PolyFit>& fits,
            const std::map<std::string, QuantileSet>& qsets, const RiskParams& params) {
    if (selection.gamma.empty())
        throw DegenerateInputError("no relevant factors for fund '" + selection.fund + "'");
    double worst = 0.0;
    for (const auto& factor : selection.gamma) {
        auto fit = fits.find(factor);
        auto qs = qsets.find(factor);
        if (fit == fits.end() || qs == qsets.end())
            throw ConfigError("selected factor '" + factor + "' has no fit or quantile set");
        worst = std::max(worst, svar_pair(fit->second, qs->second, params));
    }
    return worst;
}

double lta_pair(const PolyFit& fit, const QuantileSet& qs) {
    // Move the named quantiles and the raw moments into the fit's
    // standardized coordinates, so nodes and quadrature share the
    // coordinate system the polynomial lives in.
    const double mu = fit.x_mean;
    const double sigma = fit.x_std;
    std::array<double, 5> nodes{};
    for (std::size_t i = 0; i < 5; ++i) nodes[i] = (qs.named_quantiles[i] - mu) / sigma;

    std::array<double, 5> std_moments{};
    static constexpr double binom[5][5] = {{1, 0, 0, 0, 0},
                                           {1, 1, 0, 0, 0},
                                           {1, 2, 1, 0, 0},
                                           {1, 3, 3, 1, 0},
                                           {1, 4, 6, 4, 1}};
    for (std::size_t k = 0; k < 5; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i <= k; ++i)
            acc += binom[k][i] * qs.moments[i] * std::pow(-mu, static_cast<double>(k - i));
        std_moments[k] = acc / std::pow(sigma, static_cast<double>(k));
    }

    const auto weights = lagrange_weights(nodes, std_moments);
    double lta_value = 0.0;
    for (std::size_t q = 0; q < 5; ++q)
        lta_value += weights[q] * predict(fit, qs.named_quantiles[q]);
    return lta_value;
}

double lta(const FactorSelection& selection, const std::map<std::string, PolyFit>& fits,
           const std::map<std::string, QuantileSet>& qsets) {
    if (selection.gamma.empty())
        throw DegenerateInputError("no relevant factors for fund '" + selection.fund + "'");
    std::vector<double> values;
    values.reserve(selection.gamma.size());
    for (const auto& factor : selection.gamma) {
        auto fit = fits.find(factor);
        auto qs = qsets.find(factor);
        if (fit == fits.end() || qs == qsets.end())
            throw ConfigError("selected factor '" + factor + "' has no fit or quantile set");
        values.push_back(lta_pair(fit->second, qs->second));
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double ltr(double lta_value, double svar_value) {
    if (!(svar_value > 0.0)) throw DegenerateInputError("LTR is undefined for SVaR = 0");
    return lta_value / svar_value;
}

double lts(double lta_value, double svar_value, double kappa) {
    return lta_value - kappa * svar_value;
}

double mrar(const std::vector<double>& returns, const std::vector<double>& risk_free,
            double gamma) {
    if (returns.empty() || returns.size() != risk_free.size())
        throw ConfigError("MRaR needs equal-length non-empty return and risk-free series");
    if (gamma == 0.0) throw ConfigError("MRaR risk aversion gamma must be nonzero");
    const double t_count = static_cast<double>(returns.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < returns.size(); ++i) {
        const double gross = (1.0 + returns[i]) / (1.0 + risk_free[i]);
        if (!(gross > 0.0))
            throw DegenerateInputError("MRaR needs 1 + r > 0 for every month");
        acc += std::pow(gross, -gamma);
    }
    return std::pow(acc / t_count, -t_count / gamma) - 1.0;
}

double sharpe(const std::vector<double>& returns, const std::vector<double>& benchmark) {
    if (returns.size() < 2 || returns.size() != benchmark.size())
        throw ConfigError("Sharpe needs equal-length series with >= 2 observations");
    const std::size_t n = returns.size();
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += returns[i] - benchmark[i];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = returns[i] - benchmark[i] - mean;
        ss += d * d;
    }
    const double var = ss / static_cast<double>(n - 1);
    if (!(var > 1e-30))
        throw DegenerateInputError("Sharpe is undefined for zero-variance excess returns");
    return mean / std::sqrt(var);
}

} // namespace polymodel
