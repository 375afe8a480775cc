#include <gtest/gtest.h>

#include "mcpeak/governor.hpp"

using namespace mcpeak;

namespace {
const Cluster& little() {
    static const Platform p = odroid_xu3();
    return p.cluster(0);
}
} // namespace

TEST(Governor, DomainFollowsHighestRequest) {
    // 0.8 GHz on core 0, 1.1 GHz on core 1, nothing on cores 2 and 3.
    const auto& c = little();
    int l08 = quantize_up_index(c, 0.8e9);
    int l11 = quantize_up_index(c, 1.1e9);
    std::vector<VfRequest> r{{0, 1, l08, 0}, {1, 2, l11, 0}};
    auto next = governor_tick(c, r, c.max_level());
    ASSERT_TRUE(next);
    EXPECT_EQ(*next, l11);
    EXPECT_DOUBLE_EQ(c.vf_table[*next].frequency, 1.1e9);
}

TEST(Governor, NoSwitchWhenLevelUnchanged) {
    const auto& c = little();
    std::vector<VfRequest> r{{0, 1, 4, 0}, {2, 3, 4, 0}};
    EXPECT_FALSE(governor_tick(c, r, 4));
}

TEST(Governor, DroppingLowerRequestKeepsLevel) {
    const auto& c = little();
    std::vector<VfRequest> r{{0, 1, 9, 0}, {1, 2, 4, 0}};
    auto l = governor_tick(c, r, 0);
    ASSERT_TRUE(l);
    r.pop_back();
    EXPECT_FALSE(governor_tick(c, r, *l));
    r.clear();
    EXPECT_EQ(governor_tick(c, r, *l), 0);
}

TEST(Governor, RejectsForeignCoresAndBadLevels) {
    const auto& c = little();
    std::vector<VfRequest> r{{5, 1, 3, 0}};
    EXPECT_THROW(governor_tick(c, r, 0), DomainError);
    r = {{1, 1, 13, 0}};
    EXPECT_THROW(governor_tick(c, r, 0), DomainError);
    r = {{1, 1, -1, 0}};
    EXPECT_THROW(governor_tick(c, r, 0), DomainError);
}

TEST(Governor, PerCoreDomainsIgnoreSiblings) {
    auto p = homogeneous(CoreKind::Little, 4);
    auto d = vf_domains(p);
    ASSERT_EQ(d.size(), 4u);
    std::vector<VfRequest> r{{2, 1, 7, 0}};
    const auto& c = p.cluster(0);
    EXPECT_EQ(governor_tick(c, d[2].cores, r, 0), 7);
    EXPECT_THROW(governor_tick(c, d[1].cores, r, 0), DomainError);
}

TEST(Governor, ClusterDomainsOnOdroid) {
    auto d = vf_domains(odroid_xu3());
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(d[0].cores, (std::vector<CoreId>{0, 1, 2, 3}));
    EXPECT_EQ(d[1].cores, (std::vector<CoreId>{4, 5, 6, 7}));
    EXPECT_EQ(d[1].cluster, 1);
}
