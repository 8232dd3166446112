#include "polymodel/hermite.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "polymodel/errors.hpp"
#include "polymodel/io.hpp"

namespace polymodel {

double hermite(int k, double x) {
    switch (k) {
        case 0: return 1.0;
        case 1: return x;
        case 2: return x * x - 1.0;
        case 3: return x * (x * x - 3.0);
        case 4: return x * x * (x * x - 6.0) + 3.0;
        default: throw ConfigError("hermite degree " + std::to_string(k) + " out of range 0..4");
    }
}

double predict(const PolyFit& fit, double x_raw) {
    const double z = (x_raw - fit.x_mean) / fit.x_std;
    double v = 0.0;
    for (int k = 0; k < 5; ++k) v += fit.beta[static_cast<std::size_t>(k)] * hermite(k, z);
    return v;
}

namespace {

struct Standardized {
    double mean;
    double std;
};

Standardized standardize_stats(const std::vector<double>& x) {
    const std::size_t n = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(n - 1);
    if (!(var > 0.0))
        throw DegenerateInputError("factor series has zero variance over the window");
    return {mean, std::sqrt(var)};
}

Eigen::Matrix<double, Eigen::Dynamic, 5> build_design(const std::vector<double>& x, double mean,
                                                      double std) {
    Eigen::Matrix<double, Eigen::Dynamic, 5> design(static_cast<Eigen::Index>(x.size()), 5);
    for (std::size_t t = 0; t < x.size(); ++t) {
        const double z = (x[t] - mean) / std;
        const double z2 = z * z;
        design(static_cast<Eigen::Index>(t), 0) = 1.0;
        design(static_cast<Eigen::Index>(t), 1) = z;
        design(static_cast<Eigen::Index>(t), 2) = z2 - 1.0;
        design(static_cast<Eigen::Index>(t), 3) = z * (z2 - 3.0);
        design(static_cast<Eigen::Index>(t), 4) = z2 * (z2 - 6.0) + 3.0;
    }
    return design;
}

PolyFit finish_fit(const Eigen::Matrix<double, Eigen::Dynamic, 5>& design,
                   const Eigen::Matrix<double, 5, 1>& beta, const std::vector<double>& y,
                   double lambda, double x_mean, double x_std) {
    const Eigen::Index n = design.rows();
    Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
    Eigen::VectorXd resid = yv - design * beta;
    const double sse = resid.squaredNorm();
    const double y_mean = yv.mean();
    const double sst = (yv.array() - y_mean).matrix().squaredNorm();

    PolyFit fit;
    for (int k = 0; k < 5; ++k) fit.beta[static_cast<std::size_t>(k)] = beta(k);
    fit.lambda = lambda;
    fit.r_squared = sst > 0.0 ? 1.0 - sse / sst : 0.0;
    fit.residual_variance = n > 5 ? sse / static_cast<double>(n - 5) : 0.0;
    fit.n_obs = static_cast<int>(n);
    fit.x_mean = x_mean;
    fit.x_std = x_std;
    return fit;
}

} // namespace

RidgeSolver::RidgeSolver(const std::vector<double>& x_raw, double lambda) : lambda_(lambda) {
    if (x_raw.size() < 8)
        throw InsufficientDataError("ridge fit needs at least 8 observations, got " +
                                    std::to_string(x_raw.size()));
    auto stats = standardize_stats(x_raw);
    x_mean_ = stats.mean;
    x_std_ = stats.std;
    design_ = build_design(x_raw, x_mean_, x_std_);
    gram_ = design_.transpose() * design_;
    Eigen::Matrix<double, 5, 5> m = gram_;
    m.diagonal().array() += lambda;
    llt_.compute(m);
    bool singular = llt_.info() != Eigen::Success;
    if (!singular && lambda == 0.0) {
        // exact singularity (e.g. too few distinct x values) can slip through
        // Cholesky as a denormal pivot
        const auto diag = llt_.matrixLLT().diagonal();
        singular = diag.minCoeff() <= 1e-12 * diag.maxCoeff();
    }
    if (singular)
        throw SingularSystemError(
            "normal equations are singular; use a ridge weight lambda > 0");
}

PolyFit RidgeSolver::fit(const std::vector<double>& y) const {
    Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), design_.rows());
    Eigen::Matrix<double, 5, 1> c = design_.transpose() * yv;
    Eigen::Matrix<double, 5, 1> beta = llt_.solve(c);
    return finish_fit(design_, beta, y, lambda_, x_mean_, x_std_);
}

double RidgeSolver::fit_r2_quad(const std::vector<double>& y, double yty, double sst) const {
    if (!(sst > 0.0)) return 0.0;
    Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), design_.rows());
    Eigen::Matrix<double, 5, 1> c = design_.transpose() * yv;
    Eigen::Matrix<double, 5, 1> beta = llt_.solve(c);
    const double sse = yty - 2.0 * beta.dot(c) + beta.dot(gram_ * beta);
    return 1.0 - sse / sst;
}

PolyFit ridge_fit(const AlignedPair& pair, double lambda) {
    if (lambda < 0.0) throw ConfigError("ridge lambda must be >= 0");
    RidgeSolver solver(pair.x, lambda);
    return solver.fit(pair.y);
}

PolyFit ols_fit(const AlignedPair& pair) {
    if (pair.size() < 5)
        throw InsufficientDataError("least squares needs at least 5 observations");
    auto stats = standardize_stats(pair.x);
    auto design = build_design(pair.x, stats.mean, stats.std);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    // condition of the normal-equations matrix is the square of cond(design)
    if (!(smin > 0.0) || (smax / smin) * (smax / smin) >= 1e12)
        throw SingularSystemError("design is ill-conditioned (normal-equations condition >= 1e12)");

    Eigen::VectorXd yv =
        Eigen::Map<const Eigen::VectorXd>(pair.y.data(), static_cast<Eigen::Index>(pair.size()));
    Eigen::Matrix<double, 5, 1> beta = svd.solve(yv);
    return finish_fit(design, beta, pair.y, 0.0, stats.mean, stats.std);
}

std::string fit_to_json(const PolyFit& fit, const std::string& fund, const std::string& factor,
                        MonthIndex window_end) {
    nlohmann::ordered_json j;
    j["fund"] = fund;
    j["factor"] = factor;
    j["window_end"] = format_month(window_end);
    j["beta"] = fit.beta;
    j["lambda"] = fit.lambda;
    j["r2"] = fit.r_squared;
    j["resid_var"] = fit.residual_variance;
    j["n"] = fit.n_obs;
    j["x_mean"] = fit.x_mean;
    j["x_std"] = fit.x_std;
    return j.dump();
}

} // namespace polymodel
