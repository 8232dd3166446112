#include "polymodel/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "polymodel/errors.hpp"
#include "polymodel/hermite.hpp"
#include "polymodel/io.hpp"
#include "polymodel/rng.hpp"

namespace polymodel {

namespace {

std::string padded_id(char prefix, int i, int n) {
    int width = n > 100 ? 3 : 2;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%c%0*d", prefix, width, i);
    return buf;
}

} // namespace

std::string fund_id(int i, int n_funds) { return padded_id('F', i, n_funds); }
std::string factor_id(int j, int n_factors) { return padded_id('X', j, n_factors); }

SyntheticSpec SyntheticSpec::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("synthetic spec is not valid JSON: ") + e.what());
    }
    SyntheticSpec spec;
    auto require = [&](const char* key) {
        if (!j.contains(key)) throw ParseError(std::string("synthetic spec missing key '") + key + "'");
        return j.at(key);
    };
    try {
        spec.n_funds = require("funds").get<int>();
        spec.n_factors = require("factors").get<int>();
        spec.n_months = require("months").get<int>();
        spec.noise_vol = require("noise_vol").get<double>();
        spec.missing_rate = require("missing_rate").get<double>();
        spec.seed = require("seed").get<std::uint64_t>();
        if (j.contains("factor_vol")) spec.factor_vol = j.at("factor_vol").get<double>();
        if (j.contains("start")) spec.start = parse_month(j.at("start").get<std::string>());
        for (const auto& e : require("exposures")) {
            PlantedExposure exp;
            if (!e.contains("fund")) throw ParseError("synthetic spec exposure missing key 'fund'");
            if (!e.contains("factor"))
                throw ParseError("synthetic spec exposure missing key 'factor'");
            if (!e.contains("beta")) throw ParseError("synthetic spec exposure missing key 'beta'");
            exp.fund = e.at("fund").get<std::string>();
            exp.factor = e.at("factor").get<std::string>();
            auto beta = e.at("beta");
            if (!beta.is_array() || beta.size() != 5)
                throw ParseError("synthetic spec key 'beta' must be a 5-element array");
            for (std::size_t k = 0; k < 5; ++k) exp.beta[k] = beta[k].get<double>();
            spec.exposures.push_back(std::move(exp));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("synthetic spec has a mistyped key: ") + e.what());
    }
    return spec;
}

SyntheticSpec SyntheticSpec::from_json_file(const std::string& path) {
    return from_json_text(read_text_file(path));
}

MonthlyPanel generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.n_funds <= 0 || spec.n_factors <= 0 || spec.n_months <= 0)
        throw ConfigError("synthetic spec counts must be positive");
    if (spec.noise_vol < 0.0) throw ConfigError("synthetic noise_vol must be >= 0");
    if (spec.missing_rate < 0.0 || spec.missing_rate >= 1.0)
        throw ConfigError("synthetic missing_rate must be in [0, 1)");
    if (spec.factor_vol <= 0.0) throw ConfigError("synthetic factor_vol must be > 0");

    const std::uint64_t tag_factor = hash64("factor");
    const std::uint64_t tag_noise = hash64("noise");
    const std::uint64_t tag_miss = hash64("missing");
    const std::uint64_t tag_aum_base = hash64("aum_base");
    const std::uint64_t tag_aum_walk = hash64("aum_walk");

    MonthlyPanel panel;
    panel.span_start = spec.start;
    panel.span_end = spec.start.plus(spec.n_months - 1);
    const std::size_t T = static_cast<std::size_t>(spec.n_months);

    // Standard-normal drivers; the factor return is the driver scaled to the
    // configured volatility, the planted polynomials act on the driver itself.
    std::vector<std::vector<double>> drivers(static_cast<std::size_t>(spec.n_factors));
    for (int j = 0; j < spec.n_factors; ++j) {
        auto& z = drivers[static_cast<std::size_t>(j)];
        z.resize(T);
        for (int t = 0; t < spec.n_months; ++t) {
            Rng rng(substream(seed, tag_factor, static_cast<std::uint64_t>(j),
                              static_cast<std::uint64_t>(t)));
            z[static_cast<std::size_t>(t)] = rng.normal();
        }
        FactorRecord rec;
        rec.id = factor_id(j, spec.n_factors);
        rec.returns.start = spec.start;
        rec.returns.values.resize(T);
        for (std::size_t t = 0; t < T; ++t) rec.returns.values[t] = spec.factor_vol * z[t];
        panel.factors.push_back(std::move(rec));
    }

    // exposures grouped per fund, with id validation
    std::vector<std::vector<const PlantedExposure*>> per_fund(
        static_cast<std::size_t>(spec.n_funds));
    for (const auto& e : spec.exposures) {
        int fi = -1, xj = -1;
        for (int i = 0; i < spec.n_funds; ++i)
            if (e.fund == fund_id(i, spec.n_funds)) fi = i;
        for (int j = 0; j < spec.n_factors; ++j)
            if (e.factor == factor_id(j, spec.n_factors)) xj = j;
        if (fi < 0) throw ConfigError("synthetic exposure names unknown fund '" + e.fund + "'");
        if (xj < 0) throw ConfigError("synthetic exposure names unknown factor '" + e.factor + "'");
        per_fund[static_cast<std::size_t>(fi)].push_back(&e);
    }

    for (int i = 0; i < spec.n_funds; ++i) {
        FundRecord fund;
        fund.id = fund_id(i, spec.n_funds);
        fund.returns.start = spec.start;
        fund.returns.values.resize(T);
        fund.aum.resize(T);

        Rng base_rng(substream(seed, tag_aum_base, static_cast<std::uint64_t>(i)));
        const double aum_base = std::exp(std::log(1e7) + 2.3 * base_rng.uniform01());
        double walk = 0.0;

        for (int t = 0; t < spec.n_months; ++t) {
            double r = 0.0;
            for (const PlantedExposure* e : per_fund[static_cast<std::size_t>(i)]) {
                int xj = 0;
                for (int j = 0; j < spec.n_factors; ++j)
                    if (e->factor == factor_id(j, spec.n_factors)) xj = j;
                const double z = drivers[static_cast<std::size_t>(xj)][static_cast<std::size_t>(t)];
                for (int k = 0; k < 5; ++k) r += e->beta[static_cast<std::size_t>(k)] * hermite(k, z);
            }
            if (spec.noise_vol > 0.0) {
                Rng noise(substream(seed, tag_noise, static_cast<std::uint64_t>(i),
                                    static_cast<std::uint64_t>(t)));
                r += spec.noise_vol * noise.normal();
            }
            if (r <= -1.0) r = -0.999; // keep the simple-return invariant

            Rng walk_rng(substream(seed, tag_aum_walk, static_cast<std::uint64_t>(i),
                                   static_cast<std::uint64_t>(t)));
            walk += 0.05 * walk_rng.normal();
            const double aum = aum_base * std::exp(walk);

            bool missing = false;
            if (spec.missing_rate > 0.0) {
                Rng miss(substream(seed, tag_miss, static_cast<std::uint64_t>(i),
                                   static_cast<std::uint64_t>(t)));
                missing = miss.uniform01() < spec.missing_rate;
            }
            if (!missing) {
                fund.returns.values[static_cast<std::size_t>(t)] = r;
                fund.aum[static_cast<std::size_t>(t)] = aum;
            }
        }
        panel.funds.push_back(std::move(fund));
    }
    return panel;
}

} // namespace polymodel
