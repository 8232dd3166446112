#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "polymodel/series.hpp"

namespace polymodel {

/// One planted (fund, factor) exposure: Hermite-basis coefficients applied to
/// the factor's standard-normal driver.
struct PlantedExposure {
    std::string fund;
    std::string factor;
    std::array<double, 5> beta{};
};

struct SyntheticSpec {
    int n_funds = 0;
    int n_factors = 0;
    int n_months = 0;
    std::vector<PlantedExposure> exposures;
    double noise_vol = 0.0;
    double missing_rate = 0.0;
    double factor_vol = 1.0; // scale of factor returns around the N(0,1) driver
    std::uint64_t seed = 0;
    MonthIndex start{2000, 1};

    static SyntheticSpec from_json_file(const std::string& path);
    static SyntheticSpec from_json_text(const std::string& text);
};

/// Deterministic synthetic panel: factor j at month t is factor_vol * z with
/// z an i.i.d. standard-normal driver; each fund is the sum of its planted
/// Hermite polynomials of the drivers plus Gaussian noise. Fund cells go
/// missing (return and AUM) independently at missing_rate. All randomness is
/// keyed by (seed, role, index, month), so panels are reproducible bit for
/// bit regardless of call order.
MonthlyPanel generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

std::string fund_id(int i, int n_funds);
std::string factor_id(int j, int n_factors);

} // namespace polymodel
