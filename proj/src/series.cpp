#include "polymodel/series.hpp"

#include <algorithm>

#include "polymodel/errors.hpp"
#include "polymodel/io.hpp"

namespace polymodel {

const FundRecord* MonthlyPanel::find_fund(const std::string& id) const {
    auto it = std::lower_bound(funds.begin(), funds.end(), id,
                               [](const FundRecord& f, const std::string& s) { return f.id < s; });
    if (it == funds.end() || it->id != id) return nullptr;
    return &*it;
}

const FactorRecord* MonthlyPanel::find_factor(const std::string& id) const {
    auto it =
        std::lower_bound(factors.begin(), factors.end(), id,
                         [](const FactorRecord& f, const std::string& s) { return f.id < s; });
    if (it == factors.end() || it->id != id) return nullptr;
    return &*it;
}

namespace {

void truncate_series(ReturnSeries& s, int keep) {
    if (static_cast<int>(s.values.size()) > keep)
        s.values.resize(static_cast<std::size_t>(std::max(keep, 0)));
}

} // namespace

MonthlyPanel MonthlyPanel::truncated_after(MonthIndex t) const {
    MonthlyPanel out = *this;
    out.span_end = std::min(span_end, t);
    for (auto& f : out.funds) {
        int keep = t.serial() - f.returns.start.serial() + 1;
        truncate_series(f.returns, keep);
        if (static_cast<int>(f.aum.size()) > keep)
            f.aum.resize(static_cast<std::size_t>(std::max(keep, 0)));
    }
    for (auto& f : out.factors) {
        int keep = t.serial() - f.returns.start.serial() + 1;
        truncate_series(f.returns, keep);
    }
    return out;
}

bool try_align(const ReturnSeries& y, const ReturnSeries& x,
               std::pair<MonthIndex, MonthIndex> window, AlignedPair& out) {
    out = AlignedPair{};
    for (int s = window.first.serial(); s <= window.second.serial(); ++s) {
        MonthIndex m = MonthIndex::from_serial(s);
        auto yv = y.at(m);
        auto xv = x.at(m);
        if (yv && xv) {
            out.y.push_back(*yv);
            out.x.push_back(*xv);
            out.months.push_back(m);
        } else {
            ++out.dropped;
        }
    }
    return static_cast<int>(out.size()) >= kMinOverlap;
}

AlignedPair align(const ReturnSeries& y, const ReturnSeries& x,
                  std::pair<MonthIndex, MonthIndex> window) {
    AlignedPair out;
    if (!try_align(y, x, window, out))
        throw InsufficientDataError("only " + std::to_string(out.size()) +
                                    " overlapping observations in window " +
                                    format_month(window.first) + ".." +
                                    format_month(window.second) + ", need 8");
    return out;
}

} // namespace polymodel
