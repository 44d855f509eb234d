#pragma once

// Exact second-order structure of generalized increments of fBm.
//
// For a filter a with Q >= 1 vanishing moments and fBm B_h normalized so
// that Var B_h(1) = 1,
//
//     Var(sum_k a_k B_h((j + k) / n)) = C_a(h) n^{-2h},
//     C_a(h) = -1/2 sum_{j,k} a_j a_k |j - k|^{2h}.
//
// The same constant is the harmonizable integral
// \int |sum_k a_k e^{ik eta}|^2 |eta|^{-2h-1} d eta divided by its value
// for the first difference; both routes are provided so each can check the
// other.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "mfrac/error.hpp"
#include "mfrac/increments.hpp"
#include "mfrac/quadrature.hpp"

namespace mfrac::theory {

namespace detail {
inline void require_alpha(double alpha, const char* who) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw InvalidArgument(std::string(who) + ": alpha must lie in (0, 1)");
}

// \int_0^\infty |sum_k a_k e^{ik eta}|^2 eta^{-2 alpha - 1} d eta
inline quad::Result harmonizable_filter_integral(std::span<const double> a, double alpha, double epsabs) {
    const double beta = 2.0 * alpha + 1.0;
    const int p = static_cast<int>(a.size()) - 1;

    auto inner = [a, beta](double eta) {
        if (eta == 0.0) return 0.0;
        std::complex<double> s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k)
            s += a[k] * std::polar(1.0, static_cast<double>(k) * eta);
        return std::norm(s) * std::pow(eta, -beta);
    };

    // |A(eta)|^2 = r_0 + 2 sum_{m >= 1} r_m cos(m eta), r_m = sum_j a_j a_{j+m}
    std::vector<quad::CosTerm> terms;
    for (int m = 0; m <= p; ++m) {
        double r = 0.0;
        for (int j = 0; j + m <= p; ++j) r += a[static_cast<std::size_t>(j)] * a[static_cast<std::size_t>(j + m)];
        terms.push_back({m == 0 ? r : 2.0 * r, static_cast<double>(m)});
    }
    return quad::power_law_cosine_integral(inner, terms, beta, epsabs);
}
} // namespace detail

/// -1/2 sum_{j,k} a_j a_k |j - k|^{2 alpha}.
inline double c_tilde_closed(const IncrementSequence& a, double alpha) {
    detail::require_alpha(alpha, "c_tilde_closed");
    const auto c = a.coefficients();
    double s = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j)
        for (std::size_t k = 0; k < c.size(); ++k) {
            if (j == k) continue;
            const double d = std::abs(static_cast<double>(j) - static_cast<double>(k));
            s += c[j] * c[k] * std::pow(d, 2.0 * alpha);
        }
    return -0.5 * s;
}

/// Harmonizable-integral evaluation of the variance constant, normalized by
/// the first-difference integral so both routes share the Var B(1) = 1
/// convention.
inline double c_tilde_integral(const IncrementSequence& a, double alpha, double epsabs = 1e-10) {
    detail::require_alpha(alpha, "c_tilde_integral");
    static const double kFirstDiff[] = {1.0, -1.0};
    const auto num = detail::harmonizable_filter_integral(a.coefficients(), alpha, epsabs);
    const auto den = detail::harmonizable_filter_integral(kFirstDiff, alpha, epsabs);
    const double value = num.value / den.value;
    const double err = std::abs(value) * (num.abserr / std::abs(num.value) + den.abserr / std::abs(den.value));
    if (!(err <= 1e-6))
        throw NumericalFailure("c_tilde_integral: tolerance not reached", err);
    return value;
}

/// \int_R (1 - cos xi) |xi|^{-1-2h} d xi = pi / (Gamma(1 + 2h) sin(pi h)).
/// Un-normalized harmonizable fBm has Var X(t) = 2 * this * t^{2h}.
inline double harmonizable_constant(double h) {
    detail::require_alpha(h, "harmonizable_constant");
    return std::numbers::pi / (std::tgamma(1.0 + 2.0 * h) * std::sin(std::numbers::pi * h));
}

/// Cov(Delta_a B_{k,n}, Delta_a B_{k2,n}) for normalized fBm with Hurst h.
inline double fbm_increment_covariance(const IncrementSequence& a, double h, int grid_n, int k, int k2) {
    detail::require_alpha(h, "fbm_increment_covariance");
    const int p = a.order();
    if (grid_n < p + 1) throw InvalidArgument("fbm_increment_covariance: grid too small for filter");
    const int hi = grid_n - p - 1;
    if (k < 0 || k2 < 0 || k > hi || k2 > hi)
        throw InvalidArgument("fbm_increment_covariance: index out of range");

    // Double sum of 1/2 (s^{2h} + t^{2h} - |s - t|^{2h}) over the filter
    // taps. The s^{2h} and t^{2h} parts factor as (sum a_j s_j^{2h}) (sum a_l)
    // and vanish exactly when the filter sums to zero; they are kept for
    // filters that don't.
    const auto c = a.coefficients();
    const double n = grid_n;
    double sum_a = 0.0, row = 0.0, col = 0.0, cross = 0.0;
    for (int j = 0; j <= p; ++j) {
        const double aj = c[static_cast<std::size_t>(j)];
        sum_a += aj;
        row += aj * std::pow((k + j) / n, 2.0 * h);
        col += aj * std::pow((k2 + j) / n, 2.0 * h);
        for (int l = 0; l <= p; ++l) {
            const int lag = std::abs(k + j - k2 - l);
            if (lag == 0) continue;
            cross += aj * c[static_cast<std::size_t>(l)] * std::pow(lag / n, 2.0 * h);
        }
    }
    return 0.5 * (row * sum_a + sum_a * col - cross);
}

} // namespace mfrac::theory
