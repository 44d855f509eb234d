#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "mfrac/theory.hpp"
#include "oracle_values.hpp"

using namespace mfrac;

TEST(CTilde, ClosedFormMatchesOracle) {
    for (const auto& o : oracle::kCTilde)
        EXPECT_NEAR(theory::c_tilde_closed(make_difference_sequence(o.q), o.alpha), o.value, 1e-12 * o.value)
            << "q=" << o.q << " alpha=" << o.alpha;
}

TEST(CTilde, FirstDifferenceIsOne) {
    for (double al = 0.05; al < 1.0; al += 0.05)
        EXPECT_NEAR(theory::c_tilde_closed(make_difference_sequence(1), al), 1.0, 1e-14);
}

TEST(CTilde, FilterIntegralMatchesOracle) {
    for (const auto& o : oracle::kFilterIntegral) {
        const auto r = theory::detail::harmonizable_filter_integral(make_difference_sequence(o.q).coefficients(),
                                                                    o.alpha, 1e-11);
        EXPECT_NEAR(r.value, o.value, 1e-8 * o.value) << "q=" << o.q << " alpha=" << o.alpha;
    }
}

TEST(CTilde, IntegralRouteAgrees) {
    for (int q : {1, 2, 4})
        for (double al : {0.15, 0.5, 0.85}) {
            const auto a = make_difference_sequence(q);
            EXPECT_NEAR(theory::c_tilde_integral(a, al) / theory::c_tilde_closed(a, al), 1.0, 1e-6);
        }
}

TEST(CTilde, CustomFilter) {
    const IncrementSequence a(std::vector<double>{1, 0, -1});
    // a = (1,0,-1) is the lag-2 difference: Var = (2/n)^{2h}, so C = 2^{2 alpha}
    for (double al : {0.2, 0.5, 0.8}) {
        EXPECT_NEAR(theory::c_tilde_closed(a, al), std::pow(2.0, 2 * al), 1e-12);
        EXPECT_NEAR(theory::c_tilde_integral(a, al), std::pow(2.0, 2 * al), 1e-6);
    }
}

TEST(CTilde, AlphaRangeChecked) {
    EXPECT_THROW(theory::c_tilde_closed(make_difference_sequence(2), 0.0), InvalidArgument);
    EXPECT_THROW(theory::c_tilde_integral(make_difference_sequence(2), 1.0), InvalidArgument);
}

TEST(HarmonizableConstant, BrownianCase) {
    EXPECT_NEAR(theory::harmonizable_constant(0.5), std::numbers::pi, 1e-14);
}

TEST(FbmIncrementCovariance, MatchesOracle) {
    for (const auto& o : oracle::kFbmIncrementCov)
        EXPECT_NEAR(theory::fbm_increment_covariance(make_difference_sequence(o.q), o.h, o.n, o.k, o.k2), o.value,
                    1e-12 * std::max(1.0, std::abs(o.value)))
            << "q=" << o.q << " h=" << o.h << " k=" << o.k << " k2=" << o.k2;
}

TEST(FbmIncrementCovariance, VarianceIdentity) {
    for (int q = 1; q <= 5; ++q)
        for (double h : {0.2, 0.5, 0.8}) {
            const auto a = make_difference_sequence(q);
            const int n = 300;
            const double v = theory::fbm_increment_covariance(a, h, n, 17, 17);
            EXPECT_NEAR(v, theory::c_tilde_closed(a, h) * std::pow(n, -2 * h), 1e-10 * v);
        }
}

TEST(FbmIncrementCovariance, LeadingOrderDecay) {
    // |Cov(k, k+d)| n^{2h} d^{2Q-2h} stays bounded and settles as d grows;
    // the direct sum loses ~d^{-2Q} relative precision, so Q=3 stops early
    for (int q : {1, 2, 3})
        for (double h : {0.3, 0.7}) {
            const auto a = make_difference_sequence(q);
            const int n = 5000;
            double prev = 0.0;
            const std::vector<int> lags = q < 3 ? std::vector<int>{50, 100, 200, 400, 800} : std::vector<int>{50, 100, 200};
            for (int d : lags) {
                const double c = theory::fbm_increment_covariance(a, h, n, 0, d);
                const double scaled = std::abs(c) * std::pow(n, 2 * h) * std::pow(d, 2.0 * q - 2 * h);
                EXPECT_LT(scaled, 10.0) << "q=" << q << " h=" << h << " d=" << d;
                if (prev > 0.0) {
                    EXPECT_NEAR(scaled / prev, 1.0, 0.05) << "q=" << q << " h=" << h << " d=" << d;
                }
                prev = scaled;
            }
        }
}

TEST(FbmIncrementCovariance, IndexRange) {
    const auto a = make_difference_sequence(2);
    EXPECT_THROW(theory::fbm_increment_covariance(a, 0.5, 10, 8, 0), InvalidArgument);
    EXPECT_THROW(theory::fbm_increment_covariance(a, 0.5, 10, -1, 0), InvalidArgument);
    EXPECT_NO_THROW(theory::fbm_increment_covariance(a, 0.5, 10, 7, 0));
}
