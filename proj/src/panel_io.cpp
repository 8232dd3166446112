#include "polymodel/panel_io.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "polymodel/errors.hpp"
#include "polymodel/io.hpp"

namespace polymodel {

namespace {

struct RawCell {
    std::optional<double> ret;
    std::optional<double> aum;
};

// id -> month serial -> cell
using RawTable = std::map<std::string, std::map<int, RawCell>>;

std::optional<double> parse_optional(const std::string& field, const std::string& context) {
    if (field.empty()) return std::nullopt;
    return parse_double(field, context);
}

RawTable parse_table(const std::string& path, bool with_aum, int& min_s, int& max_s) {
    auto lines = read_lines(path);
    const std::string expected_header = with_aum ? "id,date,return,aum" : "id,date,return";
    if (lines.empty()) throw ParseError("empty file: " + path);
    if (lines[0] != expected_header)
        throw ParseError(path + " row 1: expected header '" + expected_header + "', got '" +
                         lines[0] + "'");
    if (lines.size() < 2) throw ParseError("empty file (header only): " + path);

    RawTable table;
    const std::size_t n_cols = with_aum ? 4 : 3;
    for (std::size_t row = 1; row < lines.size(); ++row) {
        if (lines[row].empty()) continue;
        const std::string context = path + " row " + std::to_string(row + 1);
        auto fields = split_csv_line(lines[row]);
        if (fields.size() != n_cols)
            throw ParseError(context + ": expected " + std::to_string(n_cols) + " columns, got " +
                             std::to_string(fields.size()));
        if (fields[0].empty()) throw ParseError(context + ": empty id");
        MonthIndex m;
        try {
            m = parse_month(fields[1]);
        } catch (const ParseError& e) {
            throw ParseError(context + ": " + e.what());
        }
        RawCell cell;
        try {
            cell.ret = parse_optional(fields[2], "return column");
            if (with_aum) cell.aum = parse_optional(fields[3], "aum column");
        } catch (const ParseError& e) {
            throw ParseError(context + ": " + e.what());
        }
        if (cell.ret && *cell.ret <= -1.0)
            throw ParseError(context + ": return " + fmt_double(*cell.ret) + " must be > -1");
        if (cell.aum && *cell.aum < 0.0)
            throw ParseError(context + ": aum must be non-negative");
        auto [it, inserted] = table[fields[0]].emplace(m.serial(), cell);
        if (!inserted)
            throw ParseError(context + ": duplicate (" + fields[0] + ", " + fields[1] + ") row");
        min_s = std::min(min_s, m.serial());
        max_s = std::max(max_s, m.serial());
    }
    return table;
}

} // namespace

MonthlyPanel load_panel(const std::string& fund_path, const std::string& factor_path) {
    int min_s = INT32_MAX, max_s = INT32_MIN;
    RawTable fund_rows = parse_table(fund_path, true, min_s, max_s);
    RawTable factor_rows = parse_table(factor_path, false, min_s, max_s);

    MonthlyPanel panel;
    panel.span_start = MonthIndex::from_serial(min_s);
    panel.span_end = MonthIndex::from_serial(max_s);
    const int span_len = max_s - min_s + 1;

    for (auto& [id, cells] : fund_rows) {
        FundRecord fund;
        fund.id = id;
        fund.returns.start = panel.span_start;
        fund.returns.values.assign(static_cast<std::size_t>(span_len), std::nullopt);
        fund.aum.assign(static_cast<std::size_t>(span_len), std::nullopt);
        for (auto& [s, cell] : cells) {
            fund.returns.values[static_cast<std::size_t>(s - min_s)] = cell.ret;
            fund.aum[static_cast<std::size_t>(s - min_s)] = cell.aum;
        }
        panel.funds.push_back(std::move(fund));
    }
    for (auto& [id, cells] : factor_rows) {
        FactorRecord factor;
        factor.id = id;
        factor.returns.start = panel.span_start;
        factor.returns.values.assign(static_cast<std::size_t>(span_len), std::nullopt);
        int first = INT32_MAX, last = INT32_MIN;
        for (auto& [s, cell] : cells) {
            if (!cell.ret)
                throw ParseError(factor_path + ": factor " + id + " has an empty return at " +
                                 format_month(MonthIndex::from_serial(s)));
            factor.returns.values[static_cast<std::size_t>(s - min_s)] = cell.ret;
            first = std::min(first, s);
            last = std::max(last, s);
        }
        for (int s = first; s <= last; ++s)
            if (!factor.returns.values[static_cast<std::size_t>(s - min_s)])
                throw ParseError(factor_path + ": factor " + id + " has an internal gap at " +
                                 format_month(MonthIndex::from_serial(s)));
        panel.factors.push_back(std::move(factor));
    }
    // std::map iteration already sorted by id; keep the invariant explicit.
    std::sort(panel.funds.begin(), panel.funds.end(),
              [](const FundRecord& a, const FundRecord& b) { return a.id < b.id; });
    std::sort(panel.factors.begin(), panel.factors.end(),
              [](const FactorRecord& a, const FactorRecord& b) { return a.id < b.id; });
    return panel;
}

void write_fund_csv(const MonthlyPanel& panel, const std::string& path) {
    std::ostringstream out;
    out << "id,date,return,aum\n";
    for (const auto& fund : panel.funds) {
        for (std::size_t i = 0; i < fund.returns.values.size(); ++i) {
            const auto& r = fund.returns.values[i];
            const auto& a = fund.aum[i];
            if (!r && !a) continue;
            out << fund.id << ',' << format_month(fund.returns.start.plus(static_cast<int>(i)))
                << ',' << (r ? fmt_double(*r) : "") << ',' << (a ? fmt_double(*a) : "") << '\n';
        }
    }
    write_text_file(path, out.str());
}

void write_factor_csv(const MonthlyPanel& panel, const std::string& path) {
    std::ostringstream out;
    out << "id,date,return\n";
    for (const auto& factor : panel.factors) {
        for (std::size_t i = 0; i < factor.returns.values.size(); ++i) {
            const auto& r = factor.returns.values[i];
            if (!r) continue;
            out << factor.id << ','
                << format_month(factor.returns.start.plus(static_cast<int>(i))) << ','
                << fmt_double(*r) << '\n';
        }
    }
    write_text_file(path, out.str());
}

} // namespace polymodel
