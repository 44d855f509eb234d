#pragma once

// Pointwise Hölder exponent estimators: localized generalized quadratic
// variation (LGQV), classic generalized quadratic variation (GQV) and the
// oscillation method.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mfrac/error.hpp"
#include "mfrac/increments.hpp"
#include "mfrac/parallel.hpp"
#include "mfrac/sample_path.hpp"

namespace mfrac {

enum class Method { lgqv, gqv, oscillation };

inline std::string_view method_name(Method m) noexcept {
    switch (m) {
    case Method::lgqv: return "lgqv";
    case Method::gqv: return "gqv";
    case Method::oscillation: return "osc";
    }
    return "?";
}

inline Method parse_method(std::string_view s) {
    if (s == "lgqv") return Method::lgqv;
    if (s == "gqv") return Method::gqv;
    if (s == "osc" || s == "oscillation") return Method::oscillation;
    throw InvalidArgument("unknown method '" + std::string(s) + "'");
}

struct EstimatorConfig {
    Method method = Method::lgqv;
    IncrementSequence increments = make_difference_sequence(2);
    double gqv_gamma = 0.7;
    double osc_alpha = 0.1;
    double osc_beta = 0.3;
    double clip_lo = 0.001;
    double clip_hi = 0.999;

    void validate() const {
        if (!(osc_alpha > 0.0 && osc_alpha < osc_beta && osc_beta < 1.0))
            throw InvalidArgument("EstimatorConfig: need 0 < osc_alpha < osc_beta < 1");
        if (!(gqv_gamma > 0.0 && gqv_gamma < 1.0))
            throw InvalidArgument("EstimatorConfig: gqv_gamma must lie in (0, 1)");
        if (!(clip_lo > 0.0 && clip_lo < clip_hi && clip_hi < 1.0))
            throw InvalidArgument("EstimatorConfig: clip range must satisfy 0 < lo < hi < 1");
    }

    /// Short label such as "lgqv(2)", "gqv" or "osc".
    std::string label() const {
        if (method == Method::lgqv) return "lgqv(" + std::to_string(increments.moments()) + ")";
        if (method == Method::gqv && increments != make_difference_sequence(2))
            return "gqv(" + std::to_string(increments.moments()) + ")";
        return std::string(method_name(method));
    }

    Json to_json() const {
        Json j = {{"method", method_name(method)}};
        if (method != Method::oscillation) {
            Json a = Json::array();
            for (double c : increments.coefficients()) a.push_back(c);
            j["increments"] = a;
            j["q"] = increments.moments();
        }
        if (method == Method::gqv) j["gamma"] = gqv_gamma;
        if (method == Method::oscillation) {
            j["alpha"] = osc_alpha;
            j["beta"] = osc_beta;
        }
        j["clip"] = {clip_lo, clip_hi};
        return j;
    }
};

/// Per-point status bits.
enum EstimateFlag : std::uint32_t {
    kFlagNone = 0,
    kFlagClippedLow = 1u << 0,
    kFlagClippedHigh = 1u << 1,
    kFlagBoundary = 1u << 2,   ///< neighborhood truncated by the grid edge
    kFlagMissing = 1u << 3,    ///< degenerate variation / oscillation
};

inline std::string flags_to_string(std::uint32_t f) {
    std::string s;
    auto add = [&s](const char* name) {
        if (!s.empty()) s += '|';
        s += name;
    };
    if (f & kFlagClippedLow) add("clip_lo");
    if (f & kFlagClippedHigh) add("clip_hi");
    if (f & kFlagBoundary) add("boundary");
    if (f & kFlagMissing) add("missing");
    return s;
}

struct EstimateSeries {
    std::vector<double> t_grid;
    std::vector<double> h_hat;         ///< NaN marks a missing point
    std::vector<int> n_points_used;
    std::vector<std::uint32_t> flags;
    EstimatorConfig config;
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return t_grid.size(); }
    bool missing(std::size_t i) const { return (flags[i] & kFlagMissing) != 0; }

    std::size_t count_missing() const {
        return static_cast<std::size_t>(std::count_if(flags.begin(), flags.end(),
                                                      [](auto f) { return (f & kFlagMissing) != 0; }));
    }

    /// Mean of the non-missing estimates, or NaN if none.
    double mean() const {
        double s = 0.0;
        std::size_t k = 0;
        for (std::size_t i = 0; i < size(); ++i)
            if (!missing(i)) {
                s += h_hat[i];
                ++k;
            }
        return k ? s / static_cast<double>(k) : std::numeric_limits<double>::quiet_NaN();
    }
};

// ---------------------------------------------------------------------------
// Neighborhoods and radii

/// v(n) = n^{-gamma(n)}, gamma(n) = 1/2 + (2/3) ln ln n / ln n.
inline double lgqv_gamma(int n) {
    if (n < 16) throw InvalidArgument("lgqv_radius: n must be >= 16");
    const double ln = std::log(static_cast<double>(n));
    return 0.5 + (2.0 / 3.0) * std::log(ln) / ln;
}

inline double lgqv_radius(int n) { return std::pow(static_cast<double>(n), -lgqv_gamma(n)); }

enum class Rounding {
    none,    ///< every i with |i/n - t0| <= radius
    nearest, ///< count adjusted to round(2 n radius)
};

struct IndexRange {
    long first = 0;
    long last = -1; // inclusive
    long target = 0; // count before edge clipping
    long size() const noexcept { return last >= first ? last - first + 1 : 0; }
};

namespace detail {
inline IndexRange neighborhood_range(double t0, int n, double radius, int p, Rounding rounding) {
    if (!(t0 > 0.0 && t0 < 1.0)) throw InvalidArgument("neighborhood: t0 must lie in (0, 1)");
    if (n < p + 1) throw InvalidArgument("neighborhood: n must exceed the filter order");
    if (!(radius * n >= 1.0 - 1e-12)) throw InvalidArgument("neighborhood: radius must be >= 1/n");

    const double center = t0 * n;
    const double reach = radius * n;
    // Small slack so grid-aligned boundaries survive rounding of t0 * n.
    constexpr double eps = 1e-9;
    long lo = static_cast<long>(std::ceil(center - reach - eps));
    long hi = static_cast<long>(std::floor(center + reach + eps));

    if (rounding == Rounding::nearest) {
        const long want = std::max(1L, std::lround(2.0 * reach));
        const long have = hi - lo + 1;
        if (have > want) {
            // drop the endpoint farther from the center (right one on ties)
            if (center - static_cast<double>(lo) > static_cast<double>(hi) - center + eps)
                ++lo;
            else
                --hi;
        } else if (have < want) {
            // add the outside neighbor closer to the center (left one on ties)
            if (center - static_cast<double>(lo - 1) <= static_cast<double>(hi + 1) - center + eps)
                --lo;
            else
                ++hi;
        }
    }
    IndexRange r;
    r.target = hi - lo + 1;
    r.first = std::max(lo, 0L);
    r.last = std::min(hi, static_cast<long>(n - p - 1));
    if (r.size() == 0) throw DegenerateNeighborhood("neighborhood: no admissible index near t0");
    return r;
}
} // namespace detail

/// Indices i in {0, ..., n-p-1} with |i/n - t0| <= radius.
inline std::vector<int> neighborhood(double t0, int n, double radius, int p,
                                     Rounding rounding = Rounding::nearest) {
    const auto r = detail::neighborhood_range(t0, n, radius, p, rounding);
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(r.size()));
    for (long i = r.first; i <= r.last; ++i) out.push_back(static_cast<int>(i));
    return out;
}

struct QuadraticVariation {
    double value = 0.0;
    IndexRange range;
};

namespace detail {
inline QuadraticVariation quadratic_variation_impl(std::span<const double> x, const IncrementSequence& a,
                                                   double t0, double radius, int stride, Rounding rounding) {
    if (stride < 1) throw InvalidArgument("quadratic_variation: stride must be >= 1");
    const int n = static_cast<int>(x.size() - 1) / stride;
    const int p = a.order();
    if (n < p + 1) throw InvalidArgument("quadratic_variation: path too short for filter and stride");
    QuadraticVariation qv;
    qv.range = neighborhood_range(t0, n, radius, p, rounding);
    const auto c = a.coefficients();
    const auto st = static_cast<std::size_t>(stride);
    for (long i = qv.range.first; i <= qv.range.last; ++i) {
        double d = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) d += c[k] * x[st * (static_cast<std::size_t>(i) + k)];
        qv.value += d * d;
    }
    return qv;
}
} // namespace detail

/// V_n(t0): sum of squared generalized increments over the neighborhood of
/// t0, at resolution n = grid_n / stride.
inline double quadratic_variation(const SamplePath& path, const IncrementSequence& a, double t0,
                                  double radius, int stride = 1, Rounding rounding = Rounding::nearest) {
    return detail::quadratic_variation_impl(path.values(), a, t0, radius, stride, rounding).value;
}

// ---------------------------------------------------------------------------
// Estimators

struct EstimateOptions {
    unsigned threads = 1;
    Rounding rounding = Rounding::nearest;
};

/// Interior grid points i / n, i = 1..n-1.
inline std::vector<double> interior_grid(int n) {
    std::vector<double> t;
    for (int i = 1; i < n; ++i) t.push_back(static_cast<double>(i) / n);
    return t;
}

/// LGQV estimate from log ratio of V_n / V_{2n}:
///   H = 1/2 (1 + log2(v(2n) / v(n)) + log2(V_n / V_{2n})).
inline double lgqv_from_variations(double v_n, double v_2n, double radius_n, double radius_2n) {
    return 0.5 * (1.0 + std::log2(radius_2n / radius_n) + std::log2(v_n / v_2n));
}

/// GQV estimate H = 1/2 (1 - gamma - ln V_n / ln n).
inline double gqv_from_variation(double v_n, int n, double gamma) {
    return 0.5 * (1.0 - gamma - std::log(v_n) / std::log(static_cast<double>(n)));
}

namespace detail {

struct PointEstimate {
    double h = std::numeric_limits<double>::quiet_NaN();
    int n_points = 0;
    std::uint32_t flags = kFlagNone;
};

template <class PointFn>
EstimateSeries run_estimator(const EstimatorConfig& config, std::span<const double> t_grid,
                             const EstimateOptions& opts, PointFn&& point) {
    EstimateSeries out;
    out.config = config;
    out.t_grid.assign(t_grid.begin(), t_grid.end());
    std::vector<PointEstimate> pts(t_grid.size());
    parallel_for(t_grid.size(), opts.threads, [&](std::size_t i) {
        PointEstimate pe;
        try {
            pe = point(t_grid[i]);
        } catch (const DegenerateVariation&) {
            pe.flags |= kFlagMissing;
        } catch (const DegenerateOscillation&) {
            pe.flags |= kFlagMissing;
        } catch (const DegenerateNeighborhood&) {
            pe.flags |= kFlagMissing;
        }
        if (!(pe.flags & kFlagMissing)) {
            if (!std::isfinite(pe.h)) {
                pe.flags |= kFlagMissing;
            } else if (pe.h < config.clip_lo) {
                pe.h = config.clip_lo;
                pe.flags |= kFlagClippedLow;
            } else if (pe.h > config.clip_hi) {
                pe.h = config.clip_hi;
                pe.flags |= kFlagClippedHigh;
            }
        }
        if (pe.flags & kFlagMissing) pe.h = std::numeric_limits<double>::quiet_NaN();
        pts[i] = pe;
    });
    std::size_t clipped = 0, missing = 0;
    for (const auto& pe : pts) {
        out.h_hat.push_back(pe.h);
        out.n_points_used.push_back(pe.n_points);
        out.flags.push_back(pe.flags);
        clipped += (pe.flags & (kFlagClippedLow | kFlagClippedHigh)) != 0;
        missing += (pe.flags & kFlagMissing) != 0;
    }
    if (clipped) out.warnings.push_back(std::to_string(clipped) + " estimate(s) clipped to the clip range");
    if (missing) out.warnings.push_back(std::to_string(missing) + " point(s) missing (degenerate)");
    return out;
}

inline std::vector<double> default_grid(std::optional<std::vector<double>> t_grid, int n) {
    return t_grid ? std::move(*t_grid) : interior_grid(n);
}

} // namespace detail

/// LGQV on a path observed at u / (2n), u = 0..2n.
inline EstimateSeries estimate_lgqv(const SamplePath& path, EstimatorConfig config,
                                    std::optional<std::vector<double>> t_grid = std::nullopt,
                                    const EstimateOptions& opts = {}) {
    config.method = Method::lgqv;
    config.validate();
    if (path.grid_n() % 2 != 0) throw InvalidArgument("estimate_lgqv: grid_n must be even");
    const int n = path.grid_n() / 2;
    if (n < 16) throw InvalidArgument("estimate_lgqv: grid_n / 2 must be >= 16");
    const double r_n = lgqv_radius(n);
    const double r_2n = lgqv_radius(2 * n);
    const auto grid = detail::default_grid(std::move(t_grid), path.grid_n());
    const auto x = path.values();
    return detail::run_estimator(config, grid, opts, [&](double t0) {
        const auto fine = detail::quadratic_variation_impl(x, config.increments, t0, r_2n, 1, opts.rounding);
        const auto coarse = detail::quadratic_variation_impl(x, config.increments, t0, r_n, 2, opts.rounding);
        if (!(fine.value > 0.0) || !(coarse.value > 0.0))
            throw DegenerateVariation("estimate_lgqv: vanishing quadratic variation");
        detail::PointEstimate pe;
        pe.h = lgqv_from_variations(coarse.value, fine.value, r_n, r_2n);
        pe.n_points = static_cast<int>(fine.range.size());
        if (fine.range.size() < fine.range.target || coarse.range.size() < coarse.range.target)
            pe.flags |= kFlagBoundary;
        return pe;
    });
}

/// Classic GQV with radius n^{-gamma}.
inline EstimateSeries estimate_gqv(const SamplePath& path, EstimatorConfig config,
                                   std::optional<std::vector<double>> t_grid = std::nullopt,
                                   const EstimateOptions& opts = {}) {
    config.method = Method::gqv;
    config.validate();
    const int n = path.grid_n();
    if (n < 16) throw InvalidArgument("estimate_gqv: grid_n must be >= 16");
    const double radius = std::pow(static_cast<double>(n), -config.gqv_gamma);
    const auto grid = detail::default_grid(std::move(t_grid), n);
    const auto x = path.values();
    return detail::run_estimator(config, grid, opts, [&](double t0) {
        const auto qv = detail::quadratic_variation_impl(x, config.increments, t0, radius, 1, opts.rounding);
        if (!(qv.value > 0.0)) throw DegenerateVariation("estimate_gqv: vanishing quadratic variation");
        detail::PointEstimate pe;
        pe.h = gqv_from_variation(qv.value, n, config.gqv_gamma);
        pe.n_points = static_cast<int>(qv.range.size());
        if (qv.range.size() < qv.range.target) pe.flags |= kFlagBoundary;
        return pe;
    });
}

/// Window radii (in samples) used by the oscillation method:
/// ceil(n^alpha) .. floor(n^beta).
inline std::pair<int, int> oscillation_radii(int n, double alpha, double beta) {
    const double dn = n;
    // 1e-9 guards exact powers such as 1000^0.3 computed slightly off
    const int lo = static_cast<int>(std::ceil(std::pow(dn, alpha) - 1e-9));
    const int hi = static_cast<int>(std::floor(std::pow(dn, beta) + 1e-9));
    return {lo, hi};
}

/// Log-log slope of the local oscillation max - min against window size.
inline EstimateSeries estimate_oscillation(const SamplePath& path, EstimatorConfig config,
                                           std::optional<std::vector<double>> t_grid = std::nullopt,
                                           const EstimateOptions& opts = {}) {
    config.method = Method::oscillation;
    config.validate();
    const int n = path.grid_n();
    const auto [r_lo, r_hi] = oscillation_radii(n, config.osc_alpha, config.osc_beta);
    if (!(r_lo < r_hi))
        throw InvalidArgument("estimate_oscillation: path too short, need ceil(n^alpha) < floor(n^beta)");
    const auto grid = detail::default_grid(std::move(t_grid), n);
    const auto x = path.values();
    return detail::run_estimator(config, grid, opts, [&, r_lo = r_lo, r_hi = r_hi](double t0) {
        if (!(t0 >= 0.0 && t0 <= 1.0)) throw InvalidArgument("estimate_oscillation: t0 must lie in [0, 1]");
        const long c = std::lround(t0 * n);
        std::vector<double> lx, ly;
        detail::PointEstimate pe;
        for (int r = r_lo; r <= r_hi; ++r) {
            // windows keep their width 2r near the edges by sliding inward
            long a = c - r, b = c + r;
            if (a < 0) {
                b = std::min(static_cast<long>(n), b - a);
                a = 0;
            } else if (b > n) {
                a = std::max(0L, a - (b - n));
                b = n;
            }
            const auto [mn, mx] = std::minmax_element(x.begin() + a, x.begin() + b + 1);
            const double osc = *mx - *mn;
            if (r == r_hi) {
                pe.n_points = static_cast<int>(b - a + 1);
                if (c - r < 0 || c + r > n) pe.flags |= kFlagBoundary;
            }
            if (!(osc > 0.0)) continue;
            lx.push_back(std::log(static_cast<double>(r) / n));
            ly.push_back(std::log(osc));
        }
        if (lx.size() < 2) throw DegenerateOscillation("estimate_oscillation: fewer than two usable radii");
        const double k = static_cast<double>(lx.size());
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            mx += lx[i];
            my += ly[i];
        }
        mx /= k;
        my /= k;
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxy += (lx[i] - mx) * (ly[i] - my);
            sxx += (lx[i] - mx) * (lx[i] - mx);
        }
        pe.h = sxy / sxx;
        return pe;
    });
}

/// Dispatch on config.method.
inline EstimateSeries estimate(const SamplePath& path, const EstimatorConfig& config,
                               std::optional<std::vector<double>> t_grid = std::nullopt,
                               const EstimateOptions& opts = {}) {
    switch (config.method) {
    case Method::lgqv: return estimate_lgqv(path, config, std::move(t_grid), opts);
    case Method::gqv: return estimate_gqv(path, config, std::move(t_grid), opts);
    case Method::oscillation: return estimate_oscillation(path, config, std::move(t_grid), opts);
    }
    throw InvalidArgument("estimate: unknown method");
}

// ---------------------------------------------------------------------------
// Convergence monitoring

struct RadiusDiagnostics {
    std::array<double, 5> condition_i_terms{}; ///< v^l n^{(l-2)h} |ln n|^{2-l/2}, l = 0..4
    double condition_i = 0.0;                  ///< sum of the terms above
    double condition_ii = 0.0;                 ///< 1 / (n v)^2
    double rate_sqrt_condition_i = 0.0;
    double rate_holder_bias = 0.0;             ///< v^h sqrt|ln v|
    double rate_radius_log = 0.0;              ///< v ln n
    double rate_inverse_count = 0.0;           ///< 1 / (n v)
};

inline RadiusDiagnostics radius_diagnostics(int n, double h, double radius) {
    if (n < 16) throw InvalidArgument("radius_diagnostics: n must be >= 16");
    if (!(h > 0.0 && h < 1.0)) throw InvalidArgument("radius_diagnostics: h must lie in (0, 1)");
    if (!(radius > 0.0 && radius <= 1.0)) throw InvalidArgument("radius_diagnostics: radius must lie in (0, 1]");
    const double dn = n;
    const double ln = std::log(dn);
    RadiusDiagnostics d;
    for (int l = 0; l <= 4; ++l) {
        d.condition_i_terms[static_cast<std::size_t>(l)] =
            std::pow(radius, l) * std::pow(dn, (l - 2) * h) * std::pow(ln, 2.0 - l / 2.0);
        d.condition_i += d.condition_i_terms[static_cast<std::size_t>(l)];
    }
    d.condition_ii = 1.0 / ((dn * radius) * (dn * radius));
    d.rate_sqrt_condition_i = std::sqrt(d.condition_i);
    d.rate_holder_bias = std::pow(radius, h) * std::sqrt(std::abs(std::log(radius)));
    d.rate_radius_log = radius * ln;
    d.rate_inverse_count = 1.0 / (dn * radius);
    return d;
}

} // namespace mfrac
