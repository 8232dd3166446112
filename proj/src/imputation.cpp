#include "polymodel/imputation.hpp"

#include "polymodel/errors.hpp"

namespace polymodel {

double impute_feature(const std::string& name, std::optional<double> value) {
    if (value) return *value;
    if (name == "Return") return kImputeReturn;
    if (name == "Sharpe") return kImputeSharpe;
    if (name == "LTS") return kImputeLts;
    if (name == "MRaR") return kImputeMrar;
    throw ConfigError("no imputation rule for feature '" + name + "'");
}

} // namespace polymodel
