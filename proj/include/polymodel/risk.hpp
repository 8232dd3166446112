#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "polymodel/hermite.hpp"
#include "polymodel/quantiles.hpp"
#include "polymodel/shuffle.hpp"

namespace polymodel {

struct RiskParams {
    double alpha = 0.98;
    double xi = 2.33;   // unexplained-variance multiplier
    double kappa = 0.05; // LTS stress weight
    double gamma = 2.0;  // MRaR risk aversion
    double score_threshold = 3.0;
};

/// Per-fund per-date feature vector. Components that cannot be computed at a
/// date (no relevant factors, short history) stay missing here; sentinel
/// imputation happens at the selection/training layer only.
struct FeatureRow {
    std::string fund;
    MonthIndex as_of;
    std::optional<double> lta;
    std::optional<double> svar;
    std::optional<double> ltr;
    std::optional<double> lts;
    std::optional<double> mrar;
    std::optional<double> sharpe;
    std::optional<double> ret;
    std::optional<double> aum;
};

/// Exact-quadrature weights: w_q integrates the Lagrange basis over the
/// distribution with the given power moments, so sum_q w_q f(node_q) equals
/// E[f] exactly for every polynomial f of degree <= 4. Nodes must be
/// distinct (DegenerateInputError otherwise).
std::array<double, 5> lagrange_weights(const std::array<double, 5>& nodes,
                                       const std::array<double, 5>& moments);

/// Stress loss of one pair: sqrt(Ymax^2 + resid_var * xi^2) with Ymax the
/// magnitude of the worst predicted loss over the 1..99 percentile grid,
/// floored at zero.
double svar_pair(const PolyFit& fit, const QuantileSet& qs, const RiskParams& params);

/// SVaR_i = max over the selected factors. Throws DegenerateInputError when
/// the selection is empty.
double svar(const FactorSelection& selection, const std::map<std::string, PolyFit>& fits,
            const std::map<std::string, QuantileSet>& qsets, const RiskParams& params);

/// Long-term alpha of one pair: exact quadrature of the fitted polynomial
/// against the factor's long-history distribution, in the fit's standardized
/// coordinates (raw moments are re-centered with the fit's mean/std).
double lta_pair(const PolyFit& fit, const QuantileSet& qs);

/// Median of lta_pair over the selected factors (even count: mean of the
/// central two). Throws DegenerateInputError when the selection is empty.
double lta(const FactorSelection& selection, const std::map<std::string, PolyFit>& fits,
           const std::map<std::string, QuantileSet>& qsets);

double ltr(double lta_value, double svar_value);
double lts(double lta_value, double svar_value, double kappa);

/// Morningstar risk-adjusted return over monthly returns and risk-free
/// series of equal length: ((1/T) sum (1+r_G)^-gamma)^(-T/gamma) - 1.
double mrar(const std::vector<double>& returns, const std::vector<double>& risk_free,
            double gamma);

/// Unannualized Sharpe: mean(r - b) / sample std(r - b). Throws
/// DegenerateInputError when the excess returns have zero variance.
double sharpe(const std::vector<double>& returns, const std::vector<double>& benchmark);

} // namespace polymodel
