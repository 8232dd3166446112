#pragma once

#include <string>

#include "polymodel/series.hpp"

namespace polymodel {

/// Loads the fund CSV (`id,date,return,aum`) and factor CSV (`id,date,return`).
/// Dates are YYYY-MM, empty cells are missing. Every parse problem is reported
/// with its row number. Factor series with internal gaps are rejected.
MonthlyPanel load_panel(const std::string& fund_path, const std::string& factor_path);

/// Canonical write-back emitters: rows sorted by id then month, values in
/// shortest round-trip form, months with no data omitted. load_panel of the
/// emitted files reproduces the panel exactly.
void write_fund_csv(const MonthlyPanel& panel, const std::string& path);
void write_factor_csv(const MonthlyPanel& panel, const std::string& path);

} // namespace polymodel
