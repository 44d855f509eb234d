#pragma once

// Sample paths of Brownian, fractional and multifractional Brownian motion.
//
// fBm is produced by exact circulant embedding of the fractional Gaussian
// noise covariance (Wood-Chan / Dietrich-Newsam) followed by a cumulative
// sum. mBm is produced with an H-field: fBm levels on a Hurst grid share one
// vector of standard normals, and each time point interpolates linearly
// between its two bracketing levels. Both return paths with
// Var X(t) = t^{2H(t)}.
//
// mbm_covariance_exact evaluates the covariance of the harmonizable
// representation
//     X(t) = \int (e^{it xi} - 1) / |xi|^{H(t) + 1/2} dW(xi)
// without any normalization, by quadrature; simulate_mbm_exact samples this
// process. mbm_covariance_normalized divides X(t) by its standard deviation
// at t = 1, which is the process the H-field sampler produces.

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mfrac/error.hpp"
#include "mfrac/parallel.hpp"
#include "mfrac/quadrature.hpp"
#include "mfrac/rng.hpp"
#include "mfrac/sample_path.hpp"

namespace mfrac {

/// Unit-spacing fGn autocovariance 1/2 (|k+1|^{2h} - 2|k|^{2h} + |k-1|^{2h}).
inline double fgn_covariance(double h, long lag) {
    if (!(h > 0.0 && h < 1.0)) throw InvalidArgument("fgn_covariance: h must lie in (0, 1)");
    const double k = std::abs(static_cast<double>(lag));
    const double e = 2.0 * h;
    return 0.5 * (std::pow(k + 1.0, e) - 2.0 * std::pow(k, e) + std::pow(std::abs(k - 1.0), e));
}

struct SimulationOptions {
    double hurst_step = 0.05;              ///< H-field grid spacing for mBm
    unsigned embedding_oversample = 16;    ///< multi-level embedding size, in units of 2 grid_n
    unsigned threads = 1;     ///< workers for the dense exact sampler
};

namespace detail {

inline std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

struct FftwPlan {
    fftw_plan plan = nullptr;
    explicit FftwPlan(fftw_plan p) : plan(p) {}
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;
    ~FftwPlan() {
        std::lock_guard lock(fftw_plan_mutex());
        fftw_destroy_plan(plan);
    }
};

inline constexpr std::size_t kMaxEmbeddingFactor = std::size_t{1} << 16;
inline constexpr double kNegativeEigenTolerance = 1e-10;

/// Eigenvalues of the circulant embedding of c_0..c_m, c_{m-1}..c_1 (size 2m).
inline std::vector<double> circulant_eigenvalues(double h, std::size_t m) {
    const std::size_t size = 2 * m;
    RealBuffer row(fftw_alloc_real(size));
    ComplexBuffer spec(fftw_alloc_complex(m + 1));
    std::unique_ptr<FftwPlan> plan;
    {
        std::lock_guard lock(fftw_plan_mutex());
        plan = std::make_unique<FftwPlan>(
            fftw_plan_dft_r2c_1d(static_cast<int>(size), row.get(), spec.get(), FFTW_ESTIMATE));
    }
    for (std::size_t k = 0; k <= m; ++k) row[k] = fgn_covariance(h, static_cast<long>(k));
    for (std::size_t k = m + 1; k < size; ++k) row[k] = row[size - k];
    fftw_execute(plan->plan);
    std::vector<double> lambda(m + 1);
    for (std::size_t j = 0; j <= m; ++j) lambda[j] = spec[j][0];
    return lambda;
}

struct Embedding {
    std::size_t m = 0;             // half size; embedding size is 2m
    std::vector<double> lambda;    // eigenvalues 0..m, clipped at 0
    std::size_t clipped = 0;
};

enum class EigenCheck { ok, clip, fail };

inline EigenCheck check_eigenvalues(const std::vector<double>& lambda) {
    const double top = *std::max_element(lambda.begin(), lambda.end());
    const double low = *std::min_element(lambda.begin(), lambda.end());
    if (low >= 0.0) return EigenCheck::ok;
    if (low >= -kNegativeEigenTolerance * top) return EigenCheck::clip;
    return EigenCheck::fail;
}

/// Finds one embedding half-size that is usable for every level.
inline std::vector<Embedding> embed_levels(std::span<const double> levels, std::size_t n_incr) {
    std::size_t m = std::max<std::size_t>(n_incr, 1);
    const std::size_t m_max = kMaxEmbeddingFactor * n_incr;
    for (;;) {
        std::vector<Embedding> out;
        bool all_usable = true;
        for (double h : levels) {
            Embedding e;
            e.m = m;
            e.lambda = circulant_eigenvalues(h, m);
            if (check_eigenvalues(e.lambda) == EigenCheck::fail) {
                all_usable = false;
                break;
            }
            for (double& l : e.lambda)
                if (l < 0.0) {
                    l = 0.0;
                    ++e.clipped;
                }
            out.push_back(std::move(e));
        }
        if (all_usable) return out;
        if (2 * m > m_max)
            throw SimulationFailure("circulant embedding has significantly negative eigenvalues up to size 2^16 N");
        m *= 2;
    }
}

/// One stationary sample of length n_incr from the embedding, driven by
/// `normals` (size 2m).
inline std::vector<double> circulant_sample(const Embedding& e, std::span<const double> normals,
                                            std::size_t n_incr) {
    const std::size_t m = e.m;
    const std::size_t size = 2 * m;
    ComplexBuffer w(fftw_alloc_complex(m + 1));
    RealBuffer y(fftw_alloc_real(size));
    std::unique_ptr<FftwPlan> plan;
    {
        std::lock_guard lock(fftw_plan_mutex());
        plan = std::make_unique<FftwPlan>(
            fftw_plan_dft_c2r_1d(static_cast<int>(size), w.get(), y.get(), FFTW_ESTIMATE));
    }
    const double inv = 1.0 / static_cast<double>(size);
    w[0][0] = std::sqrt(e.lambda[0] * inv) * normals[0];
    w[0][1] = 0.0;
    for (std::size_t j = 1; j < m; ++j) {
        const double s = std::sqrt(0.5 * e.lambda[j] * inv);
        w[j][0] = s * normals[2 * j - 1];
        w[j][1] = s * normals[2 * j];
    }
    w[m][0] = std::sqrt(e.lambda[m] * inv) * normals[size - 1];
    w[m][1] = 0.0;
    fftw_execute(plan->plan);
    return std::vector<double>(y.get(), y.get() + n_incr);
}

inline std::vector<double> cumulate(std::span<const double> noise, double scale) {
    std::vector<double> path(noise.size() + 1, 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < noise.size(); ++i) {
        acc += noise[i];
        path[i + 1] = scale * acc;
    }
    return path;
}

inline std::vector<double> draw_normals(std::uint64_t seed, std::string_view stream, std::size_t count) {
    auto engine = rng::make_engine(seed, stream);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> z(count);
    for (double& v : z) v = normal(engine);
    return z;
}

inline constexpr std::string_view kGaussianStream = "gaussian-field";

} // namespace detail

/// Hurst levels {lo, lo + step, ..., hi} covering the range of H on the grid.
inline std::vector<double> hurst_levels(double lo, double hi, double step) {
    if (!(step > 0.0)) throw InvalidArgument("hurst_levels: step must be positive");
    std::vector<double> levels{lo};
    if (hi - lo <= 1e-12) return levels;
    const auto k = static_cast<int>(std::ceil((hi - lo) / step - 1e-9));
    for (int i = 1; i < k; ++i) levels.push_back(lo + i * step);
    levels.push_back(hi);
    return levels;
}

/// Precomputed H-field sampler for one (H, grid_n). Building it costs one
/// FFT per Hurst level; each sample() then costs one inverse FFT per level.
/// A single-level field is plain fBm.
class MbmSampler {
public:
    MbmSampler(const HolderFunction& h, int grid_n, const SimulationOptions& opts = {})
        : holder_(h.to_json()), grid_n_(grid_n), step_(opts.hurst_step) {
        if (grid_n < 2) throw InvalidArgument("simulate_mbm: grid_n must be >= 2");
        if (!(opts.embedding_oversample >= 1))
            throw InvalidArgument("simulate_mbm: embedding_oversample must be >= 1");
        hs_.resize(static_cast<std::size_t>(grid_n) + 1);
        for (int u = 0; u <= grid_n; ++u) hs_[static_cast<std::size_t>(u)] = h(static_cast<double>(u) / grid_n);
        const auto [lo_it, hi_it] = std::minmax_element(hs_.begin(), hs_.end());
        levels_ = h.is_constant() ? std::vector<double>{*lo_it} : hurst_levels(*lo_it, *hi_it, step_);
        for (double l : levels_)
            if (!(l > 0.0 && l < 1.0)) throw InvalidArgument("simulate_mbm: H must lie in (0, 1)");
        constant_ = h.is_constant();
        // Cross-level correlations converge only as the embedding's
        // frequency grid refines, so multi-level fields oversample.
        const std::size_t base = static_cast<std::size_t>(grid_n) *
                                 (levels_.size() > 1 ? opts.embedding_oversample : 1u);
        embeddings_ = detail::embed_levels(levels_, base);
        for (const auto& e : embeddings_) clipped_ += e.clipped;
    }

    std::span<const double> levels() const noexcept { return levels_; }
    int grid_n() const noexcept { return grid_n_; }

    /// fBm path on every Hurst level, all driven by the same normals.
    std::vector<std::vector<double>> level_paths(std::uint64_t seed) const {
        const auto n_incr = static_cast<std::size_t>(grid_n_);
        const auto normals = detail::draw_normals(seed, detail::kGaussianStream, 2 * embeddings_.front().m);
        std::vector<std::vector<double>> paths;
        paths.reserve(levels_.size());
        for (std::size_t l = 0; l < levels_.size(); ++l) {
            const auto noise = detail::circulant_sample(embeddings_[l], normals, n_incr);
            paths.push_back(detail::cumulate(noise, std::pow(static_cast<double>(grid_n_), -levels_[l])));
        }
        return paths;
    }

    SamplePath sample(std::uint64_t seed) const {
        auto paths = level_paths(seed);
        Json meta = {{"generator", levels_.size() == 1 ? "fbm-circulant" : "mbm-hfield"},
                     {"seed", seed},
                     {"holder", holder_},
                     {"grid_n", grid_n_}};
        if (levels_.size() > 1) meta["hurst_step"] = step_;
        if (clipped_ > 0) meta["clipped_eigenvalues"] = clipped_;
        if (levels_.size() == 1) {
            if (constant_) meta["h"] = levels_.front();
            return SamplePath(std::move(paths.front()), std::move(meta));
        }

        std::vector<double> values(hs_.size(), 0.0);
        for (std::size_t u = 1; u < hs_.size(); ++u) {
            const double hu = hs_[u];
            const auto it = std::upper_bound(levels_.begin(), levels_.end(), hu);
            auto hi_idx = static_cast<std::size_t>(it - levels_.begin());
            hi_idx = std::clamp<std::size_t>(hi_idx, 1, levels_.size() - 1);
            const std::size_t lo_idx = hi_idx - 1;
            const double w = (hu - levels_[lo_idx]) / (levels_[hi_idx] - levels_[lo_idx]);
            if (w <= 0.0)
                values[u] = paths[lo_idx][u];
            else if (w >= 1.0)
                values[u] = paths[hi_idx][u];
            else
                values[u] = (1.0 - w) * paths[lo_idx][u] + w * paths[hi_idx][u];
        }
        return SamplePath(std::move(values), std::move(meta));
    }

private:
    Json holder_;
    int grid_n_;
    double step_;
    bool constant_ = false;
    std::vector<double> hs_;
    std::vector<double> levels_;
    std::vector<detail::Embedding> embeddings_;
    std::size_t clipped_ = 0;
};

/// One fBm realization on t = u / grid_n with B(0) = 0 and E B(t)^2 = t^{2h}.
inline SamplePath simulate_fbm(double h, int grid_n, std::uint64_t seed) {
    if (!(h > 0.0 && h < 1.0)) throw InvalidArgument("simulate_fbm: h must lie in (0, 1)");
    if (grid_n < 2) throw InvalidArgument("simulate_fbm: grid_n must be >= 2");
    return MbmSampler(HolderFunction::constant(h), grid_n).sample(seed);
}

/// One mBm realization by the H-field method.
inline SamplePath simulate_mbm(const HolderFunction& h, int grid_n, std::uint64_t seed,
                               const SimulationOptions& opts = {}) {
    return MbmSampler(h, grid_n, opts).sample(seed);
}

/// Covariance of the harmonizable mBm (un-normalized) at times s, t.
///
/// Real part of \int (e^{is xi} - 1)(e^{-it xi} - 1) |xi|^{-H(s)-H(t)-1} d xi.
/// Numerator written as (1 - cos s xi)(1 - cos t xi) + sin s xi sin t xi on
/// the inner panel; on the tail it is 1 - cos s xi - cos t xi + cos (t-s) xi.
inline double mbm_covariance_exact(const HolderFunction& h, double s, double t, double epsabs = 1e-9) {
    if (s < 0.0 || s > 1.0 || t < 0.0 || t > 1.0)
        throw InvalidArgument("mbm_covariance_exact: times must lie in [0, 1]");
    if (s == 0.0 || t == 0.0) return 0.0;
    if (s > t) std::swap(s, t);
    const double beta = 1.0 + h(s) + h(t);
    auto inner = [s, t, beta](double xi) {
        if (xi == 0.0) return 0.0;
        const double a = std::sin(0.5 * s * xi);
        const double b = std::sin(0.5 * t * xi);
        const double num = 4.0 * a * a * b * b + std::sin(s * xi) * std::sin(t * xi);
        return num * std::pow(xi, -beta);
    };
    const quad::CosTerm terms[] = {{1.0, 0.0}, {-1.0, s}, {-1.0, t}, {1.0, t - s}};
    const auto r = quad::power_law_cosine_integral(inner, terms, beta, 0.5 * epsabs);
    if (!(r.abserr <= 1e-6))
        throw NumericalFailure("mbm_covariance_exact: tolerance not reached", 2.0 * r.abserr);
    return 2.0 * r.value;
}

/// Covariance of X(t) / sqrt(2 c(H(t))), c(h) = pi / (Gamma(1 + 2h) sin(pi h)),
/// so that the variance is t^{2H(t)}.
inline double mbm_covariance_normalized(const HolderFunction& h, double s, double t, double epsabs = 1e-9) {
    auto c = [](double x) { return std::numbers::pi / (std::tgamma(1.0 + 2.0 * x) * std::sin(std::numbers::pi * x)); };
    return mbm_covariance_exact(h, s, t, epsabs) / (2.0 * std::sqrt(c(h(s)) * c(h(t))));
}

/// Dense exact sampler for the un-normalized harmonizable covariance
/// (grid_n <= 512). The factorization is computed once; sample() is cheap.
class ExactMbmSampler {
public:
    ExactMbmSampler(const HolderFunction& h, int grid_n, const SimulationOptions& opts = {})
        : holder_(h.to_json()), grid_n_(grid_n) {
        if (grid_n < 2 || grid_n > 512) throw InvalidArgument("simulate_mbm_exact: grid_n must lie in [2, 512]");
        const auto n = static_cast<Eigen::Index>(grid_n);
        Eigen::MatrixXd cov(n, n);
        const std::size_t cells = static_cast<std::size_t>(n * (n + 1) / 2);
        std::vector<std::pair<Eigen::Index, Eigen::Index>> index;
        index.reserve(cells);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j <= i; ++j) index.emplace_back(i, j);
        parallel_for(cells, opts.threads, [&](std::size_t c) {
            const auto [i, j] = index[c];
            const double v = mbm_covariance_exact(h, static_cast<double>(i + 1) / grid_n,
                                                  static_cast<double>(j + 1) / grid_n);
            cov(i, j) = v;
            cov(j, i) = v;
        });
        llt_.compute(cov);
        if (llt_.info() != Eigen::Success) {
            cov.diagonal().array() += 1e-10;
            llt_.compute(cov);
            jittered_ = true;
            if (llt_.info() != Eigen::Success)
                throw NumericalFailure("simulate_mbm_exact: covariance not positive semidefinite", 1e-10);
        }
    }

    int grid_n() const noexcept { return grid_n_; }

    SamplePath sample(std::uint64_t seed) const {
        const auto n = static_cast<Eigen::Index>(grid_n_);
        const auto z = detail::draw_normals(seed, "mbm-exact", static_cast<std::size_t>(n));
        const Eigen::VectorXd x = llt_.matrixL() * Eigen::Map<const Eigen::VectorXd>(z.data(), n);
        std::vector<double> values(static_cast<std::size_t>(n) + 1, 0.0);
        for (Eigen::Index i = 0; i < n; ++i) values[static_cast<std::size_t>(i) + 1] = x(i);
        Json meta = {{"generator", "mbm-exact"}, {"seed", seed}, {"holder", holder_}, {"grid_n", grid_n_}};
        if (jittered_) meta["jitter"] = 1e-10;
        return SamplePath(std::move(values), std::move(meta));
    }

private:
    Json holder_;
    int grid_n_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    bool jittered_ = false;
};

inline SamplePath simulate_mbm_exact(const HolderFunction& h, int grid_n, std::uint64_t seed,
                                     const SimulationOptions& opts = {}) {
    return ExactMbmSampler(h, grid_n, opts).sample(seed);
}

/// Elementwise Z(t) = Phi(t, X(t)) on the grid of x.
inline SamplePath apply_phi(const SamplePath& x, const PhiForm& form) {
    using Tag = PhiForm::Tag;
    const auto xs = x.values();
    std::vector<double> out(xs.size());
    std::vector<double> w;
    if (PhiForm::needs_aux(form.tag())) {
        const std::uint64_t aux = *form.aux_seed();
        const auto seed = x.meta().find("seed");
        if (seed != x.meta().end() && seed->is_number_integer() &&
            (seed->is_number_unsigned() || seed->get<std::int64_t>() >= 0) && seed->get<std::uint64_t>() == aux)
            throw InvalidArgument("apply_phi: aux seed equals the path seed");
        const auto wp = simulate_fbm(0.5, x.grid_n(), aux);
        w.assign(wp.values().begin(), wp.values().end());
    }
    for (std::size_t u = 0; u < xs.size(); ++u) {
        const double t = x.time(u);
        const double v = xs[u];
        switch (form.tag()) {
        case Tag::identity: out[u] = v; break;
        case Tag::square: out[u] = v * v; break;
        case Tag::exp: out[u] = std::exp(v); break;
        case Tag::sin_t_times_x: out[u] = std::sin(t) * v; break;
        case Tag::sin2_plus_x2: {
            const double st = std::sin(t);
            out[u] = st * st + v * v;
            break;
        }
        case Tag::w_times_x: out[u] = w[u] * v; break;
        case Tag::w2_plus_x2: out[u] = w[u] * w[u] + v * v; break;
        }
    }
    Json meta = x.meta();
    meta["phi"] = form.name();
    if (form.aux_seed()) meta["aux_seed"] = *form.aux_seed();
    return SamplePath(std::move(out), std::move(meta));
}

} // namespace mfrac
