#pragma once

// Price-series ingestion and the per-period Hölder exponent workflow:
// calendar alignment across markets, rescaling, burn-in removal, period
// segmentation, summaries and Welch two-sample tests.

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iterator>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mfrac/error.hpp"
#include "mfrac/estimate.hpp"
#include "mfrac/gaussian_sim.hpp"
#include "mfrac/io.hpp"
#include "mfrac/rng.hpp"
#include "mfrac/sample_path.hpp"

namespace mfrac::fin {

using Date = std::chrono::sys_days;

inline Date parse_date(std::string_view s, std::size_t line = 0) {
    auto digits = [&](std::size_t pos, std::size_t len) {
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (s[i] < '0' || s[i] > '9') throw ParseError("malformed date '" + std::string(s) + "'", line);
            v = v * 10 + (s[i] - '0');
        }
        return v;
    };
    if (s.size() != 10 || s[4] != '-' || s[7] != '-')
        throw ParseError("malformed date '" + std::string(s) + "'", line);
    const std::chrono::year_month_day ymd{std::chrono::year{digits(0, 4)},
                                          std::chrono::month{static_cast<unsigned>(digits(5, 2))},
                                          std::chrono::day{static_cast<unsigned>(digits(8, 2))}};
    if (!ymd.ok()) throw ParseError("invalid calendar date '" + std::string(s) + "'", line);
    return Date{ymd};
}

inline std::string format_date(Date d) {
    const std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

struct PriceSeries {
    std::string ticker;
    std::string market;
    std::vector<Date> dates;
    std::vector<double> prices;

    std::size_t size() const noexcept { return dates.size(); }

    void validate() const {
        if (dates.size() != prices.size()) throw InvalidArgument("PriceSeries: dates/prices length mismatch");
        for (std::size_t i = 0; i < dates.size(); ++i) {
            if (i > 0 && !(dates[i] > dates[i - 1]))
                throw InvalidArgument("PriceSeries: dates must be strictly increasing");
            if (!(prices[i] > 0.0) || !std::isfinite(prices[i]))
                throw InvalidArgument("PriceSeries: prices must be positive");
        }
    }
};

/// Parses a `date,price` CSV.
inline PriceSeries parse_price_csv(std::string_view text, std::string ticker = {}, std::string market = {}) {
    PriceSeries ps{std::move(ticker), std::move(market), {}, {}};
    std::istringstream in{std::string(text)};
    std::string row;
    std::size_t line = 0;
    while (std::getline(in, row)) {
        ++line;
        const auto r = io::strip_cr(row);
        if (line == 1) {
            if (r != "date,price") throw ParseError("expected header 'date,price'", line);
            continue;
        }
        if (r.empty()) continue;
        const auto f = io::split_fields(r);
        if (f.size() != 2) throw ParseError("expected 2 fields", line);
        const Date d = parse_date(f[0], line);
        const double p = io::parse_double(f[1], line);
        if (!ps.dates.empty() && !(d > ps.dates.back()))
            throw ParseError(d == ps.dates.back() ? "duplicate date" : "dates must be increasing", line);
        if (!(p > 0.0) || !std::isfinite(p)) throw ParseError("price must be positive", line);
        ps.dates.push_back(d);
        ps.prices.push_back(p);
    }
    if (line == 0) throw ParseError("empty input", 1);
    return ps;
}

inline PriceSeries load_price_csv(const std::filesystem::path& p, std::string ticker = {},
                                  std::string market = {}) {
    return parse_price_csv(io::read_file(p), std::move(ticker), std::move(market));
}

inline std::string price_csv(const PriceSeries& ps) {
    std::string s = "date,price\n";
    for (std::size_t i = 0; i < ps.size(); ++i) s += format_date(ps.dates[i]) + ',' + io::format_double(ps.prices[i]) + '\n';
    return s;
}

/// Restricts every series to the dates present in all of them.
inline std::vector<PriceSeries> align_common_days(const std::vector<PriceSeries>& series) {
    if (series.size() < 2) throw InvalidArgument("align_common_days: need at least two series");
    std::vector<Date> common = series.front().dates;
    for (std::size_t k = 1; k < series.size(); ++k) {
        std::vector<Date> next;
        std::set_intersection(common.begin(), common.end(), series[k].dates.begin(), series[k].dates.end(),
                              std::back_inserter(next));
        common.swap(next);
    }
    if (common.empty()) throw InvalidArgument("align_common_days: no common trading day");
    std::vector<PriceSeries> out;
    for (const auto& s : series) {
        PriceSeries r{s.ticker, s.market, {}, {}};
        std::size_t j = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            while (j < common.size() && common[j] < s.dates[i]) ++j;
            if (j < common.size() && common[j] == s.dates[i]) {
                r.dates.push_back(s.dates[i]);
                r.prices.push_back(s.prices[i]);
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

/// Price path started at 1 by cumulating daily log-returns, on the uniform
/// trading-time grid.
inline SamplePath rescale_to_unit(const PriceSeries& ps) {
    if (ps.size() < 2) throw InvalidArgument("rescale_to_unit: need at least two observations");
    std::vector<double> v(ps.size());
    v[0] = 1.0;
    for (std::size_t i = 1; i < ps.size(); ++i)
        v[i] = v[i - 1] * std::exp(std::log(ps.prices[i]) - std::log(ps.prices[i - 1]));
    Json meta = {{"ticker", ps.ticker},
                 {"market", ps.market},
                 {"first_date", format_date(ps.dates.front())},
                 {"last_date", format_date(ps.dates.back())}};
    return SamplePath(std::move(v), std::move(meta));
}

inline constexpr std::size_t kMinEstimationLength = 32;

/// Drops the first `count` observations; the remainder is re-gridded on [0, 1].
inline SamplePath drop_burnin(const SamplePath& path, std::size_t count = 100) {
    if (count == 0) return path;
    if (!(path.size() > count + kMinEstimationLength))
        throw InvalidArgument("drop_burnin: " + std::to_string(path.size()) + " observations leave fewer than " +
                              std::to_string(kMinEstimationLength) + " after burn-in");
    std::vector<double> v(path.values().begin() + static_cast<std::ptrdiff_t>(count), path.values().end());
    Json meta = path.meta();
    meta["burnin"] = count;
    return SamplePath(std::move(v), std::move(meta));
}

inline std::vector<Date> drop_burnin(const std::vector<Date>& dates, std::size_t count = 100) {
    if (!(dates.size() > count + kMinEstimationLength) && count > 0)
        throw InvalidArgument("drop_burnin: too few dates");
    return {dates.begin() + static_cast<std::ptrdiff_t>(count), dates.end()};
}

struct PeriodSplit {
    Date within_start = Date{std::chrono::year{2007} / 1 / 1};
    Date within_end = Date{std::chrono::year{2008} / 12 / 31};

    void validate() const {
        if (within_start > within_end) throw InvalidArgument("PeriodSplit: within_start after within_end");
    }
    std::string_view label(Date d) const {
        if (d < within_start) return "prior";
        if (d > within_end) return "post";
        return "within";
    }
    static constexpr std::array<std::string_view, 3> labels() { return {"prior", "within", "post"}; }
};

struct PeriodSummary {
    std::string period;
    std::string method;
    double avg_h = std::numeric_limits<double>::quiet_NaN(); ///< NaN when missing
    std::size_t observations = 0;
    std::vector<double> h_values; ///< non-missing estimates, for tests
    bool missing() const { return std::isnan(avg_h); }
};

struct SummaryOptions {
    bool log_prices = false;
    unsigned threads = 1;
};

/// Per (period, method) time-average of h_hat over each period's own
/// interior grid. Segments are estimated independently.
inline std::vector<PeriodSummary> period_summaries(const SamplePath& path, const std::vector<Date>& dates,
                                                   const PeriodSplit& split,
                                                   const std::vector<EstimatorConfig>& configs,
                                                   const SummaryOptions& opts = {}) {
    split.validate();
    if (dates.size() != path.size()) throw InvalidArgument("period_summaries: dates/path length mismatch");
    std::vector<PeriodSummary> out;
    for (auto label : PeriodSplit::labels()) {
        std::vector<double> seg;
        for (std::size_t i = 0; i < dates.size(); ++i)
            if (split.label(dates[i]) == label) seg.push_back(opts.log_prices ? std::log(path[i]) : path[i]);
        for (const auto& cfg : configs) {
            PeriodSummary s;
            s.period = label;
            s.method = cfg.label();
            s.observations = seg.size();
            try {
                std::vector<double> v = seg;
                // the localized estimator needs an even grid
                if (cfg.method == Method::lgqv && v.size() % 2 == 0 && !v.empty()) v.pop_back();
                if (v.size() < 2) throw InvalidArgument("period_summaries: empty segment");
                const SamplePath p(std::move(v));
                EstimateOptions eo;
                eo.threads = opts.threads;
                const auto est = estimate(p, cfg, std::nullopt, eo);
                for (std::size_t i = 0; i < est.size(); ++i)
                    if (!est.missing(i)) s.h_values.push_back(est.h_hat[i]);
                if (!s.h_values.empty()) {
                    double sum = 0.0;
                    for (double h : s.h_values) sum += h;
                    s.avg_h = sum / static_cast<double>(s.h_values.size());
                }
            } catch (const InvalidArgument&) {
                // too short for this estimator
            }
            out.push_back(std::move(s));
        }
    }
    return out;
}

struct WelchResult {
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
    bool reject = false;
};

inline WelchResult welch_t_test(std::span<const double> a, std::span<const double> b, double level = 0.05) {
    if (a.size() < 2 || b.size() < 2) throw InvalidArgument("welch_t_test: each sample needs >= 2 values");
    if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("welch_t_test: level must lie in (0, 1)");
    auto moments = [](std::span<const double> x) {
        double m = 0.0;
        for (double v : x) m += v;
        m /= static_cast<double>(x.size());
        double ss = 0.0;
        for (double v : x) ss += (v - m) * (v - m);
        return std::pair{m, ss / static_cast<double>(x.size() - 1)};
    };
    const auto [ma, va] = moments(a);
    const auto [mb, vb] = moments(b);
    if (!(va > 0.0) || !(vb > 0.0)) throw InvalidArgument("welch_t_test: zero-variance sample");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double sa = va / na, sb = vb / nb;
    WelchResult r;
    r.statistic = (ma - mb) / std::sqrt(sa + sb);
    r.dof = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    const boost::math::students_t dist(r.dof);
    r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.statistic)));
    r.reject = r.p_value < level;
    return r;
}

// ---------------------------------------------------------------------------
// Data sets

/// ticker -> market -> series
using Universe = std::map<std::string, std::map<std::string, PriceSeries>>;

/// Manifest: {"TICKER": {"MARKET": "relative/path.csv", ...}, ...}; paths are
/// relative to the manifest's directory.
inline Universe load_manifest(const std::filesystem::path& manifest) {
    Json j;
    try {
        j = Json::parse(io::read_file(manifest));
    } catch (const Json::parse_error& e) {
        throw InvalidArgument("manifest: " + std::string(e.what()));
    }
    if (!j.is_object() || j.empty()) throw InvalidArgument("manifest: expected a non-empty object");
    Universe u;
    const auto base = manifest.parent_path();
    for (const auto& [ticker, markets] : j.items()) {
        if (!markets.is_object()) throw InvalidArgument("manifest: entry for " + ticker + " must be an object");
        for (const auto& [market, file] : markets.items()) {
            if (!file.is_string()) throw InvalidArgument("manifest: file for " + ticker + "/" + market);
            try {
                u[ticker][market] = load_price_csv(base / file.get<std::string>(), ticker, market);
            } catch (const ParseError& e) {
                throw ParseError(file.get<std::string>() + ": " + e.what(), e.line());
            }
        }
    }
    return u;
}

struct FixtureSpec {
    std::vector<std::string> tickers{"AAA", "BBB"};
    std::vector<std::string> markets{"US", "HK", "CN"};
    Date start = Date{std::chrono::year{2001} / 1 / 2};
    Date end = Date{std::chrono::year{2012} / 12 / 31};
    double hurst = 0.5;
    double volatility = 0.3; ///< std of log price over the whole span
    double holiday_rate = 0.03;
    std::uint64_t seed = 0;
};

/// Weekday calendars with market-specific random holidays, and prices
/// exp(volatility * B_H) for a fresh fBm per (ticker, market).
inline Universe make_fixture(const FixtureSpec& spec) {
    if (!(spec.start < spec.end)) throw InvalidArgument("make_fixture: start must precede end");
    Universe u;
    std::map<std::string, std::vector<Date>> calendars;
    for (const auto& m : spec.markets) {
        auto eng = rng::make_engine(rng::split(spec.seed, {rng::label_key("calendar"), rng::label_key(m)}), "holidays");
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<Date> days;
        for (Date d = spec.start; d <= spec.end; d += std::chrono::days{1}) {
            const std::chrono::weekday wd{d};
            if (wd == std::chrono::Saturday || wd == std::chrono::Sunday) continue;
            if (unif(eng) < spec.holiday_rate) continue;
            days.push_back(d);
        }
        calendars[m] = std::move(days);
    }
    for (const auto& t : spec.tickers)
        for (const auto& m : spec.markets) {
            const auto& days = calendars[m];
            const std::uint64_t seed = rng::split(spec.seed, {rng::label_key(t), rng::label_key(m)});
            const auto x = simulate_fbm(spec.hurst, static_cast<int>(days.size()) - 1, seed);
            PriceSeries ps{t, m, days, {}};
            for (double v : x.values()) ps.prices.push_back(10.0 * std::exp(spec.volatility * v));
            u[t][m] = std::move(ps);
        }
    return u;
}

// ---------------------------------------------------------------------------
// Full pipeline

struct AnalysisSpec {
    std::size_t burnin = 100;
    PeriodSplit split{};
    std::vector<EstimatorConfig> methods;
    bool log_prices = false;
    double test_level = 0.05;
};

struct AnalysisRow {
    std::string ticker;
    std::string market;
    PeriodSummary summary;
};

struct AnalysisResult {
    std::vector<AnalysisRow> rows;
    Json tests = Json::array();
};

/// Aligns each ticker's markets, rescales, drops burn-in and summarizes per
/// period; Welch tests compare prior vs within and within vs post.
inline AnalysisResult analyze(const Universe& data, const AnalysisSpec& spec, unsigned threads = 1) {
    if (spec.methods.empty()) throw InvalidArgument("analyze: no methods");
    AnalysisResult res;
    for (const auto& [ticker, markets] : data) {
        std::vector<PriceSeries> list;
        for (const auto& [m, s] : markets) list.push_back(s);
        if (list.size() >= 2) list = align_common_days(list);
        for (const auto& s : list) {
            s.validate();
            const auto path = drop_burnin(rescale_to_unit(s), spec.burnin);
            const auto dates = drop_burnin(s.dates, spec.burnin);
            SummaryOptions so;
            so.log_prices = spec.log_prices;
            so.threads = threads;
            const auto sums = period_summaries(path, dates, spec.split, spec.methods, so);
            for (const auto& cfg : spec.methods) {
                auto find = [&](std::string_view period) -> const PeriodSummary& {
                    for (const auto& x : sums)
                        if (x.period == period && x.method == cfg.label()) return x;
                    throw Error("analyze: missing summary");
                };
                for (auto [p1, p2] : {std::pair{"prior", "within"}, std::pair{"within", "post"}}) {
                    Json t = {{"ticker", ticker}, {"market", s.market}, {"method", cfg.label()},
                              {"a", p1}, {"b", p2}};
                    try {
                        const auto w = welch_t_test(find(p1).h_values, find(p2).h_values, spec.test_level);
                        t["statistic"] = w.statistic;
                        t["dof"] = w.dof;
                        t["p_value"] = w.p_value;
                        t["reject"] = w.reject;
                    } catch (const InvalidArgument& e) {
                        t["error"] = e.what();
                    }
                    res.tests.push_back(t);
                }
            }
            for (const auto& x : sums) res.rows.push_back({ticker, s.market, x});
        }
    }
    return res;
}

/// Table-3-shaped CSV: ticker, market, period, method, avg_H.
inline std::string summary_csv(const AnalysisResult& r) {
    std::string s = "ticker,market,period,method,avg_H\n";
    for (const auto& row : r.rows)
        s += row.ticker + ',' + row.market + ',' + row.summary.period + ',' + row.summary.method + ',' +
             io::format_double(row.summary.avg_h) + '\n';
    return s;
}

} // namespace mfrac::fin
