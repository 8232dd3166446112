#pragma once

#include <array>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "polymodel/month.hpp"
#include "polymodel/series.hpp"

namespace polymodel {

/// Probabilists' Hermite polynomial He_k(x), k in 0..4:
/// 1, x, x^2-1, x^3-3x, x^4-6x^2+3. Throws ConfigError for k out of range.
double hermite(int k, double x);

/// Fitted degree-4 Hermite-basis polynomial of one (fund, factor) pair.
/// The factor is z-scored over the fitting window; the standardization
/// constants live in the fit so evaluation is self-contained.
struct PolyFit {
    std::array<double, 5> beta{};
    double lambda = 0.0;
    double r_squared = 0.0;
    double residual_variance = 0.0; // SSE / (n - 5)
    int n_obs = 0;
    double x_mean = 0.0;
    double x_std = 1.0;
};

/// Evaluates the fitted polynomial at a raw factor value.
double predict(const PolyFit& fit, double x_raw);

/// Ridge closed form on the standardized Hermite design:
/// beta = (A^T A + lambda I)^-1 A^T y. Requires n >= 8 and nonzero x
/// variance. lambda = 0 with a singular system throws SingularSystemError
/// directing the caller to lambda > 0.
PolyFit ridge_fit(const AlignedPair& pair, double lambda);

/// Exact least squares via SVD, the lambda = 0 reference. Requires n >= 5
/// and condition(A^T A) below 1e12.
PolyFit ols_fit(const AlignedPair& pair);

/// Precomputed design for one window, shared by the shuffle refits: the
/// factorization and SST do not depend on the permutation of y.
class RidgeSolver {
  public:
    RidgeSolver(const std::vector<double>& x_raw, double lambda);

    /// Full fit with residual-based SSE (matches ridge_fit exactly).
    PolyFit fit(const std::vector<double>& y) const;

    /// R^2 of a permuted target via the quadratic form
    /// SSE = y'y - 2 b'(A'y) + b'Gb; y'y and SST are permutation-invariant,
    /// so fit_r2_quad(y_perm, yty, sst) is the per-shuffle fast path.
    double fit_r2_quad(const std::vector<double>& y, double yty, double sst) const;

    int n() const { return static_cast<int>(design_.rows()); }
    double x_mean() const { return x_mean_; }
    double x_std() const { return x_std_; }

  private:
    Eigen::Matrix<double, Eigen::Dynamic, 5> design_;
    Eigen::Matrix<double, 5, 5> gram_;  // A^T A
    Eigen::LLT<Eigen::Matrix<double, 5, 5>> llt_; // of A^T A + lambda I
    double lambda_;
    double x_mean_;
    double x_std_;
};

/// JSON line for the fit export: {fund, factor, window_end, beta, lambda,
/// r2, resid_var, n, x_mean, x_std}.
std::string fit_to_json(const PolyFit& fit, const std::string& fund,
                        const std::string& factor, MonthIndex window_end);

} // namespace polymodel
