#pragma once

// Strict JSON run configurations: every key must be known, every value
// well-typed. Mirrors the schemas in docs/schema/.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "mfrac/bench.hpp"
#include "mfrac/error.hpp"
#include "mfrac/estimate.hpp"
#include "mfrac/findata.hpp"
#include "mfrac/sample_path.hpp"

namespace mfrac::config {

/// Reads keys from one JSON object and rejects any it was not asked about.
class Reader {
public:
    Reader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) fail("expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const Json& raw(const std::string& key) {
        used_.insert(key);
        if (!j_.contains(key)) fail("missing required key '" + key + "'");
        return j_.at(key);
    }

    template <class T>
    T get(const std::string& key) {
        return convert<T>(raw(key), key);
    }

    template <class T>
    T get(const std::string& key, T fallback) {
        used_.insert(key);
        if (!j_.contains(key)) return fallback;
        return convert<T>(j_.at(key), key);
    }

    std::string path(const std::string& key) const { return where_ + "." + key; }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!used_.count(k)) fail("unknown key '" + k + "'");
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(where_ + ": " + msg); }

private:
    template <class T>
    T convert(const Json& v, const std::string& key) const {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) fail("'" + key + "' must be a boolean");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) fail("'" + key + "' must be an integer");
            if constexpr (std::is_unsigned_v<T>)
                if (v.is_number_integer() && !v.is_number_unsigned()) fail("'" + key + "' must be non-negative");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) fail("'" + key + "' must be a number");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) fail("'" + key + "' must be a string");
        }
        try {
            return v.get<T>();
        } catch (const Json::exception&) {
            fail("'" + key + "' has the wrong type");
        }
    }

    const Json& j_;
    std::string where_;
    std::set<std::string> used_;
};

inline EstimatorConfig estimator_from_json(const Json& j, const std::string& where) {
    Reader r(j, where);
    EstimatorConfig c;
    try {
        c.method = parse_method(r.get<std::string>("method"));
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidArgument& e) {
        r.fail(e.what());
    }
    if (c.method != Method::oscillation) {
        if (r.has("increments") && r.has("q")) r.fail("give either 'q' or 'increments', not both");
        try {
            if (r.has("increments"))
                c.increments = IncrementSequence(r.get<std::vector<double>>("increments"));
            else
                c.increments = make_difference_sequence(r.get<int>("q", 2));
        } catch (const ConfigError&) {
            throw;
        } catch (const InvalidArgument& e) {
            r.fail(e.what());
        }
    }
    if (c.method == Method::gqv) c.gqv_gamma = r.get<double>("gamma", c.gqv_gamma);
    if (c.method == Method::oscillation) {
        c.osc_alpha = r.get<double>("alpha", c.osc_alpha);
        c.osc_beta = r.get<double>("beta", c.osc_beta);
    }
    if (r.has("clip")) {
        const auto& clip = r.raw("clip");
        if (!clip.is_array() || clip.size() != 2 || !clip[0].is_number() || !clip[1].is_number())
            r.fail("'clip' must be [lo, hi]");
        c.clip_lo = clip[0].get<double>();
        c.clip_hi = clip[1].get<double>();
    }
    r.finish();
    try {
        c.validate();
    } catch (const InvalidArgument& e) {
        r.fail(e.what());
    }
    return c;
}

inline std::vector<EstimatorConfig> methods_from_json(const Json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array");
    std::vector<EstimatorConfig> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(estimator_from_json(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

inline HolderFunction holder_from_json(const Json& j, const std::string& where) {
    try {
        if (j.is_string()) return HolderFunction::parse(j.get<std::string>());
        Reader r(j, where);
        const auto kind = r.get<std::string>("kind");
        if (kind == "constant") {
            const double h = r.get<double>("h");
            r.finish();
            return HolderFunction::constant(h);
        }
        if (kind == "sinusoid") {
            const double h0 = r.get<double>("h0"), a = r.get<double>("amplitude");
            const double f = r.get<double>("frequency", 1.0);
            r.finish();
            return HolderFunction::sinusoid(h0, a, f);
        }
        if (kind == "tabulated") {
            const auto pts = r.get<std::vector<std::pair<double, double>>>("points");
            r.finish();
            return HolderFunction::tabulated(pts);
        }
        r.fail("unknown holder kind '" + kind + "'");
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidArgument& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

inline BenchSpec bench_from_json(const Json& j) {
    Reader r(j, "bench");
    BenchSpec s;
    if (r.has("holder")) s.holder = holder_from_json(r.raw("holder"), r.path("holder"));
    if (r.has("forms")) {
        s.forms.clear();
        for (const auto& name : r.get<std::vector<std::string>>("forms")) {
            try {
                s.forms.push_back(PhiForm::parse_tag(name));
            } catch (const InvalidArgument& e) {
                r.fail(e.what());
            }
        }
    }
    s.sizes = r.get<std::vector<int>>("sizes", s.sizes);
    s.scenarios = r.get<int>("scenarios", s.scenarios);
    if (r.has("methods")) s.methods = methods_from_json(r.raw("methods"), r.path("methods"));
    s.master_seed = r.get<std::uint64_t>("master_seed", s.master_seed);
    s.simulation.hurst_step = r.get<double>("hurst_step", s.simulation.hurst_step);
    s.simulation.embedding_oversample = r.get<int>("embedding_oversample", s.simulation.embedding_oversample);
    s.traces = r.get<bool>("traces", s.traces);
    r.finish();
    try {
        s.validate();
        if (!(s.simulation.hurst_step > 0.0 && s.simulation.hurst_step <= 0.5))
            throw InvalidArgument("hurst_step must lie in (0, 0.5]");
        if (s.simulation.embedding_oversample < 1) throw InvalidArgument("embedding_oversample must be >= 1");
    } catch (const InvalidArgument& e) {
        r.fail(e.what());
    }
    return s;
}

inline fin::Date date_from_json(Reader& r, const std::string& key, fin::Date fallback) {
    if (!r.has(key)) return fallback;
    try {
        return fin::parse_date(r.get<std::string>(key));
    } catch (const ParseError&) {
        r.fail("'" + key + "' must be an ISO date YYYY-MM-DD");
    }
}

/// Data source of an analysis run: either a manifest file or a synthetic
/// fixture specification.
struct AnalysisConfig {
    fin::AnalysisSpec spec;
    std::optional<std::string> manifest; ///< relative to the config file
    std::optional<fin::FixtureSpec> fixture;
};

inline AnalysisConfig analysis_from_json(const Json& j) {
    Reader r(j, "analyze");
    AnalysisConfig c;
    {
        Reader d(r.raw("data"), r.path("data"));
        if (d.has("manifest") == d.has("fixture")) d.fail("give exactly one of 'manifest' or 'fixture'");
        if (d.has("manifest")) c.manifest = d.get<std::string>("manifest");
        if (d.has("fixture")) {
            Reader f(d.raw("fixture"), d.path("fixture"));
            fin::FixtureSpec fx;
            fx.tickers = f.get<std::vector<std::string>>("tickers", fx.tickers);
            fx.markets = f.get<std::vector<std::string>>("markets", fx.markets);
            fx.start = date_from_json(f, "start", fx.start);
            fx.end = date_from_json(f, "end", fx.end);
            fx.hurst = f.get<double>("hurst", fx.hurst);
            fx.volatility = f.get<double>("volatility", fx.volatility);
            fx.holiday_rate = f.get<double>("holiday_rate", fx.holiday_rate);
            fx.seed = f.get<std::uint64_t>("seed", fx.seed);
            f.finish();
            if (fx.tickers.empty() || fx.markets.empty()) f.fail("tickers and markets must be non-empty");
            if (!(fx.hurst > 0.0 && fx.hurst < 1.0)) f.fail("hurst must lie in (0, 1)");
            if (!(fx.volatility > 0.0)) f.fail("volatility must be positive");
            if (!(fx.holiday_rate >= 0.0 && fx.holiday_rate < 0.5)) f.fail("holiday_rate must lie in [0, 0.5)");
            if (!(fx.start < fx.end)) f.fail("start must precede end");
            c.fixture = fx;
        }
        d.finish();
    }
    const auto burnin = r.get<std::int64_t>("burnin", 100);
    if (burnin < 0) r.fail("'burnin' must be >= 0");
    c.spec.burnin = static_cast<std::size_t>(burnin);
    if (r.has("split")) {
        Reader s(r.raw("split"), r.path("split"));
        c.spec.split.within_start = date_from_json(s, "within_start", c.spec.split.within_start);
        c.spec.split.within_end = date_from_json(s, "within_end", c.spec.split.within_end);
        s.finish();
        if (c.spec.split.within_start > c.spec.split.within_end) s.fail("within_start after within_end");
    }
    if (r.has("methods")) {
        c.spec.methods = methods_from_json(r.raw("methods"), r.path("methods"));
    } else {
        c.spec.methods = {EstimatorConfig{}};
    }
    c.spec.log_prices = r.get<bool>("log_prices", false);
    c.spec.test_level = r.get<double>("test_level", 0.05);
    if (!(c.spec.test_level > 0.0 && c.spec.test_level < 1.0)) r.fail("'test_level' must lie in (0, 1)");
    r.finish();
    return c;
}

inline Json parse_document(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

} // namespace mfrac::config
