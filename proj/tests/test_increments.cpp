#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mfrac/increments.hpp"

using namespace mfrac;

TEST(VanishingMoments, Examples) {
    EXPECT_EQ(vanishing_moments(std::vector<double>{1, -2, 1}), 2);
    EXPECT_EQ(vanishing_moments(std::vector<double>{1, 0, -1}), 1);
    EXPECT_EQ(vanishing_moments(std::vector<double>{1, 1}), 0);
    EXPECT_EQ(vanishing_moments(std::vector<double>{1, -1}), 1);
}

TEST(VanishingMoments, RejectsDegenerateInput) {
    EXPECT_THROW(vanishing_moments(std::vector<double>{0, 0, 0}), InvalidArgument);
    EXPECT_THROW(vanishing_moments(std::vector<double>{1}), InvalidArgument);
}

TEST(VanishingMoments, ToleratesFloatNoise) {
    EXPECT_EQ(vanishing_moments(std::vector<double>{1 + 1e-12, -2, 1}), 2);
}

TEST(DifferenceSequence, Coefficients) {
    EXPECT_EQ(make_difference_sequence(1).coefficients()[1], -1.0);
    const std::vector<double> q2{1, -2, 1}, q3{1, -3, 3, -1};
    const auto s2 = make_difference_sequence(2), s3 = make_difference_sequence(3);
    const auto a2 = s2.coefficients(), a3 = s3.coefficients();
    EXPECT_EQ(std::vector<double>(a2.begin(), a2.end()), q2);
    EXPECT_EQ(std::vector<double>(a3.begin(), a3.end()), q3);
}

TEST(DifferenceSequence, MomentsMatchOrder) {
    for (int q = 1; q <= 12; ++q) {
        const auto a = make_difference_sequence(q);
        EXPECT_EQ(a.order(), q);
        EXPECT_EQ(a.moments(), q);
        EXPECT_EQ(vanishing_moments(a.coefficients()), q);
    }
}

TEST(DifferenceSequence, RangeChecked) {
    EXPECT_THROW(make_difference_sequence(0), InvalidArgument);
    EXPECT_THROW(make_difference_sequence(13), InvalidArgument);
}

TEST(IncrementSequence, RejectsNonzeroSum) {
    EXPECT_THROW(IncrementSequence(std::vector<double>{1, 1}), InvalidArgument);
    EXPECT_NO_THROW(IncrementSequence(std::vector<double>{1, 0, -1}));
    EXPECT_EQ(IncrementSequence(std::vector<double>{1, 0, -1}).moments(), 1);
}

TEST(GeneralizedIncrements, Examples) {
    const auto a = make_difference_sequence(2);
    EXPECT_EQ(generalized_increments(std::vector<double>{0, 1, 2, 3}, a), (std::vector<double>{0, 0}));
    EXPECT_EQ(generalized_increments(std::vector<double>{0, 1, 4, 9}, a), (std::vector<double>{2, 2}));
    EXPECT_EQ(generalized_increments(std::vector<double>{0, 1, 4, 9, 16}, a, 2), (std::vector<double>{8}));
}

TEST(GeneralizedIncrements, LengthAndShortPath) {
    const auto a = make_difference_sequence(3);
    EXPECT_EQ(generalized_increments(std::vector<double>(20, 1.0), a, 2).size(), 20u - 6u);
    EXPECT_THROW(generalized_increments(std::vector<double>(6, 1.0), a, 2), InvalidArgument);
    EXPECT_THROW(generalized_increments(std::vector<double>(6, 1.0), a, 0), InvalidArgument);
}

TEST(GeneralizedIncrements, AnnihilatesLowDegreePolynomials) {
    std::mt19937_64 eng(11);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::uniform_int_distribution<int> qdist(1, 6), ndist(10, 200), sdist(1, 3);
    for (int trial = 0; trial < 100; ++trial) {
        const int q = qdist(eng), n = ndist(eng), stride = sdist(eng);
        std::vector<double> c(static_cast<std::size_t>(q));
        for (auto& v : c) v = coef(eng);
        std::vector<double> path(static_cast<std::size_t>(n) + 1);
        for (int u = 0; u <= n; ++u) {
            const double t = static_cast<double>(u) / n;
            double y = 0.0;
            for (int d = q - 1; d >= 0; --d) y = y * t + c[static_cast<std::size_t>(d)];
            path[static_cast<std::size_t>(u)] = y;
        }
        if (n < stride * q + 1) continue;
        for (double d : generalized_increments(path, make_difference_sequence(q), stride))
            ASSERT_NEAR(d, 0.0, 1e-9) << "q=" << q << " n=" << n << " stride=" << stride;
    }
}

TEST(GeneralizedIncrements, Linear) {
    std::mt19937_64 eng(5);
    std::normal_distribution<double> z;
    const auto a = make_difference_sequence(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(40), y(40), mix(40);
        const double al = z(eng), be = z(eng);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = z(eng);
            y[i] = z(eng);
            mix[i] = al * x[i] + be * y[i];
        }
        const auto dx = generalized_increments(x, a), dy = generalized_increments(y, a);
        const auto dm = generalized_increments(mix, a);
        for (std::size_t i = 0; i < dm.size(); ++i) ASSERT_NEAR(dm[i], al * dx[i] + be * dy[i], 1e-12);
    }
}
