#pragma once

#include <optional>
#include <string>

namespace polymodel {

/// Sentinel fills for features missing at the portfolio-selection layer:
/// Return -30, Sharpe -3, LTS -1, MRaR -3. Present values pass through.
/// Throws ConfigError for an unknown feature name.
double impute_feature(const std::string& name, std::optional<double> value);

inline constexpr double kImputeReturn = -30.0;
inline constexpr double kImputeSharpe = -3.0;
inline constexpr double kImputeLts = -1.0;
inline constexpr double kImputeMrar = -3.0;

} // namespace polymodel
