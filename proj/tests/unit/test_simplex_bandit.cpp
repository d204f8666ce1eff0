#include "evograph/bandit.hpp"
#include "evograph/error.hpp"
#include "evograph/metrics.hpp"
#include "evograph/scenarios.hpp"
#include "evograph/simplex.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace evograph;

namespace {

// Bisection on the threshold theta solving sum(max(v - theta, 0)) = 1.
Eigen::VectorXd bisection_projection(const Eigen::VectorXd& v) {
    double lo = v.minCoeff() - 1.0, hi = v.maxCoeff();
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((v.array() - mid).cwiseMax(0.0).sum() > 1.0) lo = mid;
        else hi = mid;
    }
    return (v.array() - 0.5 * (lo + hi)).cwiseMax(0.0).matrix();
}

}  // namespace

TEST(ProjectSimplex, FixedPointOnSimplex) {
    Eigen::VectorXd w(6);
    w << 0.1, 0.2, 0.3, 0.15, 0.05, 0.2;
    EXPECT_TRUE(project_simplex(w).isApprox(w, 1e-15));
}

TEST(ProjectSimplex, SymmetricThreeVector) {
    const auto p = project_simplex(Eigen::Vector3d(0.5, 0.5, 0.5));
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(p[i], 1.0 / 3.0, 1e-15);
}

TEST(ProjectSimplex, MatchesBisectionOracle) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal(0.0, 2.0);
    for (int trial = 0; trial < 1000; ++trial) {
        Eigen::VectorXd v(6);
        for (Eigen::Index i = 0; i < 6; ++i) v[i] = normal(rng);
        const Eigen::VectorXd p = project_simplex(v);
        EXPECT_TRUE(on_simplex(p, 1e-12));
        EXPECT_LE((p - bisection_projection(v)).cwiseAbs().maxCoeff(), 1e-9) << v.transpose();
    }
}

TEST(ProjectSimplex, NonFiniteRejected) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(6);
    v[2] = std::numeric_limits<double>::infinity();
    try {
        (void)project_simplex(v);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::NonFiniteInput);
    }
}

TEST(BanditUpdate, ZeroPredictionErrorLeavesWeights) {
    auto s = BanditState::uniform(6);
    Eigen::VectorXd f(6);
    f << 0.2, 0.9, 0.4, 0.1, 0.5, 0.7;
    const auto next = bandit_update(s, f, s.w.dot(f));
    EXPECT_TRUE(next.w.isApprox(s.w, 1e-15));
}

TEST(BanditUpdate, TwoDimensionalHandStep) {
    BanditState s{Eigen::Vector2d(0.5, 0.5), 0.05, std::nullopt};
    const auto next = bandit_update(s, Eigen::Vector2d(1.0, 0.0), 1.0);
    EXPECT_NEAR(next.w[0], 0.5125, 1e-15);
    EXPECT_NEAR(next.w[1], 0.4875, 1e-15);
}

TEST(BanditUpdate, ZeroFitnessLeavesWeights) {
    auto s = BanditState::uniform(6);
    for (double r : {0.0, 0.3, 1.0}) EXPECT_EQ(bandit_update(s, Eigen::VectorXd::Zero(6), r).w, s.w);
}

TEST(BanditUpdate, StaysOnSimplex) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto s = BanditState::uniform(6, 0.5);
    for (int step = 0; step < 2000; ++step) {
        Eigen::VectorXd f(6);
        for (Eigen::Index i = 0; i < 6; ++i) f[i] = unit(rng) * 3.0;
        s = bandit_update(s, f, unit(rng));
        ASSERT_TRUE(on_simplex(s.w, 1e-9));
    }
}

TEST(BanditUpdate, PinnedComponentsFrozen) {
    BanditState s = BanditState::uniform(6);
    s.w << 0.4, 0.1, 0.1, 0.1, 0.2, 0.1;
    BanditState::Mask mask = BanditState::Mask::Constant(6, false);
    mask[1] = true;
    mask[4] = true;
    s.pinned = mask;
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int step = 0; step < 500; ++step) {
        Eigen::VectorXd f(6);
        for (Eigen::Index i = 0; i < 6; ++i) f[i] = unit(rng);
        s = bandit_update(s, f, unit(rng));
        ASSERT_EQ(s.w[1], 0.1);
        ASSERT_EQ(s.w[4], 0.2);
        ASSERT_TRUE(on_simplex(s.w, 1e-9));
    }
}

TEST(BanditUpdate, LatencyRewardShiftRaisesLatencyWeight) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    WeightVector truth;
    truth << 0.25, 0.25, 0.15, 0.15, 0.1, 0.1;
    auto s = BanditState::uniform(6);
    for (int step = 0; step < 2000; ++step) {
        Eigen::VectorXd f(6);
        for (Eigen::Index i = 0; i < 6; ++i) f[i] = unit(rng);
        s = bandit_update(s, f, truth.dot(f));
    }
    const double before = s.w[kLatency];
    for (int step = 0; step < 50; ++step) {
        Eigen::VectorXd f(6);
        for (Eigen::Index i = 0; i < 6; ++i) f[i] = unit(rng);
        s = bandit_update(s, f, truth.dot(f) + 0.3 * f[kLatency]);
    }
    EXPECT_GT(s.w[kLatency], before);
}

TEST(BanditTrial, ConvergesOnMostSeeds) {
    int passed = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) passed += bandit_trial(seed).passed ? 1 : 0;
    EXPECT_GE(passed, 95);
}
