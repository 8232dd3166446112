#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polymodel/month.hpp"

namespace polymodel {

/// Monthly simple-return series. values[i] belongs to month start + i;
/// absent months are nullopt. Present values must be > -1.
struct ReturnSeries {
    MonthIndex start;
    std::vector<std::optional<double>> values;

    MonthIndex end() const { return start.plus(static_cast<int>(values.size()) - 1); }

    std::optional<double> at(MonthIndex m) const {
        int i = m.serial() - start.serial();
        if (i < 0 || i >= static_cast<int>(values.size())) return std::nullopt;
        return values[static_cast<std::size_t>(i)];
    }
};

struct FundRecord {
    std::string id;
    ReturnSeries returns;
    // AUM in currency units, aligned to the same month range as returns.
    std::vector<std::optional<double>> aum;

    std::optional<double> aum_at(MonthIndex m) const {
        int i = m.serial() - returns.start.serial();
        if (i < 0 || i >= static_cast<int>(aum.size())) return std::nullopt;
        return aum[static_cast<std::size_t>(i)];
    }
};

struct FactorRecord {
    std::string id;
    ReturnSeries returns; // contiguous: no internal gaps between first and last present month
};

struct MonthlyPanel {
    std::vector<FundRecord> funds;     // sorted by id, ids unique
    std::vector<FactorRecord> factors; // sorted by id, ids unique
    MonthIndex span_start;
    MonthIndex span_end;

    const FundRecord* find_fund(const std::string& id) const;
    const FactorRecord* find_factor(const std::string& id) const;

    /// Copy of the panel with every month after `t` dropped.
    MonthlyPanel truncated_after(MonthIndex t) const;
};

/// Jointly observed (y, x) months within a window, in month order.
struct AlignedPair {
    std::vector<double> y;
    std::vector<double> x;
    std::vector<MonthIndex> months;
    int dropped = 0; // window months where at least one side was missing

    std::size_t size() const { return y.size(); }
};

/// Intersects the two series over [window.first, window.second]. Throws
/// InsufficientDataError when fewer than 8 months are jointly observed.
AlignedPair align(const ReturnSeries& y, const ReturnSeries& x,
                  std::pair<MonthIndex, MonthIndex> window);

/// Non-throwing variant for rolling scans that skip short windows.
bool try_align(const ReturnSeries& y, const ReturnSeries& x,
               std::pair<MonthIndex, MonthIndex> window, AlignedPair& out);

inline constexpr int kMinOverlap = 8;

} // namespace polymodel
