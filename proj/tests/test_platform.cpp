#include <gtest/gtest.h>

#include "mcpeak/platform.hpp"

using namespace mcpeak;

TEST(PlatformPower, MatchesHandCalculation) {
    auto c = make_cluster(0, CoreKind::Little, {0});
    const auto& p = c.power_params;
    // 15% static, 10% independent, 75% dynamic at the top level.
    EXPECT_NEAR(power(p, 1.0, 1.0), 0.940, 1e-12);
    EXPECT_NEAR(power(p, 0.5, 1.0), 0.141 + 0.705 * 0.5 + 0.094, 1e-12);
    // rho2 = 0.8: static 0.141*0.8, dynamic 0.705*0.64*0.5.
    EXPECT_NEAR(power(p, 0.5, 0.8), 0.1128 + 0.2256 + 0.094, 1e-12);
    EXPECT_NEAR(idle_power(p, 1.0), 0.235, 1e-12);
}

TEST(PlatformPower, RejectsOutOfRangeFactors) {
    auto c = make_cluster(0, CoreKind::Big, {0});
    EXPECT_THROW(power(c.power_params, 0.0, 1.0), DomainError);
    EXPECT_THROW(power(c.power_params, 1.1, 1.0), DomainError);
    EXPECT_THROW(power(c.power_params, 0.5, -0.1), DomainError);
}

TEST(PlatformPower, MonotoneOverTables) {
    for (auto kind : {CoreKind::Little, CoreKind::Big}) {
        auto c = make_cluster(0, kind, {0});
        double prev = 0.0;
        for (int l = 0; l <= c.max_level(); ++l) {
            auto s = scaling_factors(c, l);
            double w = power(c.power_params, s.rho1, s.rho2);
            EXPECT_GT(w, prev);
            prev = w;
        }
        EXPECT_NEAR(prev, kind == CoreKind::Little ? kLittleMaxPower : kBigMaxPower, 1e-9);
    }
}

TEST(PlatformQuantize, RoundsUpToNextLevel) {
    auto c = make_cluster(0, CoreKind::Little, {0});
    EXPECT_DOUBLE_EQ(quantize_up(c, 1.05e9).frequency, 1.1e9);
    EXPECT_DOUBLE_EQ(quantize_up(c, 1.1e9).frequency, 1.1e9);
    EXPECT_DOUBLE_EQ(quantize_up(c, 1.0).frequency, 2e8);
    EXPECT_DOUBLE_EQ(quantize_up(c, 1.4e9).frequency, 1.4e9);
    EXPECT_THROW(quantize_up(c, 1.5e9), DomainError);
}

TEST(PlatformTaskPower, TopLevelEqualsPeakAndLowerLevelsScale) {
    auto c = make_cluster(0, CoreKind::Little, {0});
    Task t;
    t.peak_power = {{CoreKind::Little, 0.6}};
    EXPECT_DOUBLE_EQ(task_power_at_level(t, c, c.max_level()), 0.6);
    auto s = scaling_factors(c, 3);
    double ratio = power(c.power_params, s.rho1, s.rho2) / 0.94;
    EXPECT_NEAR(task_power_at_level(t, c, 3), 0.6 * ratio, 1e-12);
    EXPECT_LT(task_power_at_level(t, c, 3), 0.6);
    EXPECT_THROW(task_power_at_level(t, c, 13), DomainError);
    t.peak_power.clear();
    EXPECT_THROW(task_power_at_level(t, c, 0), DomainError);
}

TEST(PlatformShapes, OdroidHasTwoClusterDomains) {
    auto p = odroid_xu3();
    EXPECT_TRUE(check_platform(p).empty());
    EXPECT_EQ(p.n_cores(), 8);
    EXPECT_EQ(p.dvfs_scope, DvfsScope::Cluster);
    EXPECT_EQ(p.cluster_for_core(2).core_kind, CoreKind::Little);
    EXPECT_EQ(p.cluster_for_core(5).core_kind, CoreKind::Big);
    EXPECT_EQ(p.cluster(0).vf_table.size(), 13u);
    EXPECT_EQ(p.cluster(1).vf_table.size(), 19u);
    EXPECT_DOUBLE_EQ(p.cluster(1).top().frequency, 2.0e9);
    EXPECT_THROW(p.cluster_of(8), DomainError);
}

TEST(PlatformShapes, HomogeneousHasPerCoreScope) {
    auto p = make_platform("homogeneous-little", 16);
    EXPECT_TRUE(check_platform(p).empty());
    EXPECT_EQ(p.n_cores(), 16);
    EXPECT_EQ(p.dvfs_scope, DvfsScope::Core);
    EXPECT_THROW(make_platform("odroid-xu3", 4), DomainError);
    EXPECT_THROW(make_platform("nope"), DomainError);
    EXPECT_THROW(homogeneous(CoreKind::Big, 0), DomainError);
}

TEST(PlatformShapes, CheckFlagsBrokenTables) {
    auto p = odroid_xu3();
    std::swap(p.clusters[0].vf_table[0], p.clusters[0].vf_table[1]);
    EXPECT_FALSE(check_platform(p).empty());
    p = odroid_xu3();
    p.clusters[1].core_ids.push_back(0);
    EXPECT_FALSE(check_platform(p).empty());
}

TEST(PlatformScaling, FactorsAreRatiosToTop) {
    auto c = make_cluster(0, CoreKind::Little, {0});
    auto s = scaling_factors(c, 0);
    EXPECT_DOUBLE_EQ(s.rho1, 2e8 / 1.4e9);
    EXPECT_DOUBLE_EQ(s.rho2, 0.9 / 1.3);
    EXPECT_THROW(scaling_factors(c, VfLevel{3e8, 0.7}), DomainError);
}
