#pragma once

// Vanishing-moment filters and generalized increments.

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mfrac/error.hpp"

namespace mfrac {

namespace detail {
inline constexpr double kMomentTolerance = 1e-9;

// sum_k k^l a_k, with 0^0 = 1
inline double moment_sum(std::span<const double> a, int l) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double w = (l == 0) ? 1.0 : std::pow(static_cast<double>(k), l);
        s += w * a[k];
    }
    return s;
}
} // namespace detail

/// Largest Q with sum_k k^l a_k = 0 for every l < Q (0 if sum a_k != 0).
inline int vanishing_moments(std::span<const double> coefficients) {
    if (coefficients.size() < 2)
        throw InvalidArgument("vanishing_moments: need at least two coefficients");
    bool any_nonzero = false;
    for (double c : coefficients) any_nonzero = any_nonzero || c != 0.0;
    if (!any_nonzero)
        throw InvalidArgument("vanishing_moments: all coefficients are zero");

    // A nonzero length-(p+1) filter cannot annihilate every polynomial of
    // degree p; the cap only matters for sub-tolerance inputs.
    const int cap = static_cast<int>(coefficients.size());
    int q = 0;
    while (q < cap && std::abs(detail::moment_sum(coefficients, q)) <= detail::kMomentTolerance)
        ++q;
    return q;
}

/// Finite filter a_0..a_p with a known number of vanishing moments.
class IncrementSequence {
public:
    /// Validates the filter; throws if it has no vanishing moment.
    explicit IncrementSequence(std::vector<double> coefficients)
        : coefficients_(std::move(coefficients)),
          moments_(vanishing_moments(coefficients_)) {
        if (moments_ < 1)
            throw InvalidArgument("IncrementSequence: coefficients must sum to zero");
    }

    std::span<const double> coefficients() const noexcept { return coefficients_; }
    int order() const noexcept { return static_cast<int>(coefficients_.size()) - 1; }
    int moments() const noexcept { return moments_; }

    double operator[](std::size_t k) const { return coefficients_[k]; }

    friend bool operator==(const IncrementSequence&, const IncrementSequence&) = default;

private:
    std::vector<double> coefficients_;
    int moments_;
};

/// Binomial difference filter (-1)^k C(q, k), which has exactly q vanishing moments.
inline IncrementSequence make_difference_sequence(int q) {
    if (q < 1 || q > 12)
        throw InvalidArgument("make_difference_sequence: q must lie in [1, 12]");
    std::vector<double> a(static_cast<std::size_t>(q) + 1);
    double binom = 1.0;
    for (int k = 0; k <= q; ++k) {
        a[static_cast<std::size_t>(k)] = (k % 2 == 0) ? binom : -binom;
        binom = binom * (q - k) / (k + 1);
    }
    return IncrementSequence(std::move(a));
}

/// Delta_i = sum_k a_k x[i + stride*k] for i = 0 .. len - stride*p - 1.
inline std::vector<double> generalized_increments(std::span<const double> values,
                                                  const IncrementSequence& a,
                                                  int stride = 1) {
    if (stride < 1)
        throw InvalidArgument("generalized_increments: stride must be >= 1");
    const std::size_t span = static_cast<std::size_t>(stride) * static_cast<std::size_t>(a.order());
    if (values.size() < span + 1)
        throw InvalidArgument("generalized_increments: path too short for filter and stride");

    const auto coeffs = a.coefficients();
    std::vector<double> out(values.size() - span);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < coeffs.size(); ++k)
            s += coeffs[k] * values[i + static_cast<std::size_t>(stride) * k];
        out[i] = s;
    }
    return out;
}

} // namespace mfrac
