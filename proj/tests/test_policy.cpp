#include <gtest/gtest.h>

#include <deque>

#include "mcpeak/policy.hpp"

using namespace mcpeak;

TEST(DynamicSlack, EarlyFinishLeavesBudgetResidue) {
    auto ev = extract_dynamic_slack(0, 22, FinishedTask{30, 22}, 30.0);
    ASSERT_TRUE(ev);
    EXPECT_DOUBLE_EQ(ev->amount, 8.0);
    EXPECT_EQ(ev->origin, SlackOrigin::EarlyFinish);
}

TEST(DynamicSlack, FullBudgetNoGapMeansNoSlack) {
    EXPECT_FALSE(extract_dynamic_slack(0, 30, FinishedTask{30, 30}, 30.0));
}

TEST(DynamicSlack, TableGapCountsAsIdleSlack) {
    auto ev = extract_dynamic_slack(1, 30, FinishedTask{30, 30}, 45.0);
    ASSERT_TRUE(ev);
    EXPECT_DOUBLE_EQ(ev->amount, 15.0);
    EXPECT_EQ(ev->origin, SlackOrigin::IdleGap);
    EXPECT_EQ(to_string(ev->origin), "idle_gap");
}

TEST(DynamicSlack, EarlyFinishWithoutNextEntry) {
    auto ev = extract_dynamic_slack(0, 22, FinishedTask{30, 22}, std::nullopt);
    ASSERT_TRUE(ev);
    EXPECT_DOUBLE_EQ(ev->amount, 8.0);
}

TEST(UsableSlack, DeductsLookaheadAndSwitch) {
    SlackEvent ev{0, 0, 20.0, SlackOrigin::EarlyFinish};
    EXPECT_NEAR(usable_slack(ev, OverheadModel{}, 0), 7.918583, 1e-9);
}

TEST(UsableSlack, RemapProbesCanExhaustSmallSlack) {
    SlackEvent ev{0, 0, 8.0, SlackOrigin::EarlyFinish};
    EXPECT_LT(usable_slack(ev, OverheadModel{}, 3), 0.0);
}

TEST(UsableSlack, ZeroOverheadsKeepEverything) {
    SlackEvent ev{0, 0, 5.0, SlackOrigin::IdleGap};
    EXPECT_DOUBLE_EQ(usable_slack(ev, OverheadModel::none(), 3), 5.0);
    ev.amount = 0.0;
    EXPECT_THROW(usable_slack(ev, OverheadModel::none(), 0), DomainError);
}

TEST(Cost, BalancedWeightsOnTwoTasks) {
    CostNormalizer n{3.0, 4.0};
    EXPECT_NEAR(cost_score(2.0, 4.0, 0.5, 0.5, n), 0.8333333333, 1e-9);
    EXPECT_NEAR(cost_score(3.0, 2.0, 0.5, 0.5, n), 0.75, 1e-12);
}

TEST(Cost, NormalizerFromTasks) {
    Task a, b;
    a.wcet_lo = a.wcet_hi = 10;
    a.peak_power = {{CoreKind::Little, 0.5}};
    b.wcet_lo = b.wcet_hi = 20;
    b.peak_power = {{CoreKind::Little, 0.9}};
    std::vector<const Task*> v{&a, &b};
    auto n = make_normalizer(v, CoreKind::Little);
    EXPECT_DOUBLE_EQ(n.power_max, 0.9);
    EXPECT_DOUBLE_EQ(n.energy_max, 0.018);
    EXPECT_DOUBLE_EQ(cost_task(b, CoreKind::Little, 0.5, 0.5, n), 1.0);
    EXPECT_THROW(make_normalizer(std::span<const Task* const>{}, CoreKind::Little), DomainError);
}

TEST(Lookahead, PicksHighestCost) {
    std::vector<Candidate> c{{0, 0, 2.0, 4.0, true}, {1, 1, 3.0, 2.0, true}};
    EXPECT_EQ(select_lookahead_task(c, 0.5, 0.5), 0u);
    EXPECT_EQ(select_lookahead_task(c, 1.0, 0.0), 1u);
    EXPECT_EQ(select_lookahead_task(c, 0.0, 1.0), 0u);
}

TEST(Lookahead, TiesGoToEarliestPosition) {
    std::vector<Candidate> c{{7, 2, 1.0, 1.0, true}, {8, 0, 1.0, 1.0, true}, {9, 1, 1.0, 1.0, true}};
    EXPECT_EQ(select_lookahead_task(c, 0.5, 0.5), 1u);
}

TEST(Lookahead, IneligibleCandidatesIgnored) {
    std::vector<Candidate> c{{0, 0, 9.0, 9.0, false}, {1, 1, 1.0, 1.0, true}};
    EXPECT_EQ(select_lookahead_task(c, 0.5, 0.5), 1u);
    c[1].eligible = false;
    EXPECT_FALSE(select_lookahead_task(c, 0.5, 0.5));
    EXPECT_FALSE(select_lookahead_task(std::span<const Candidate>{}, 0.5, 0.5));
}

TEST(Frequency, ScalesWcetIntoUsableWindow) {
    auto c = make_cluster(0, CoreKind::Little, {0});
    Task t;
    t.wcet_lo = t.wcet_hi = 30;
    EXPECT_DOUBLE_EQ(required_frequency(30, 10, c), 1.05e9);
    EXPECT_DOUBLE_EQ(compute_frequency(t, Mode::LO, 10, c).frequency, 1.1e9);
    EXPECT_EQ(compute_frequency_index(t, Mode::LO, 10, c), 9);
    EXPECT_DOUBLE_EQ(compute_frequency(t, Mode::LO, 1e6, c).frequency, 2e8);
    EXPECT_DOUBLE_EQ(compute_frequency(t, Mode::LO, 1e-6, c).frequency, 1.4e9);
    EXPECT_THROW(required_frequency(30, 0, c), DomainError);
}

TEST(Frequency, ScaledTaskStillFitsWindow) {
    auto c = make_cluster(0, CoreKind::Big, {0});
    for (double w : {5.0, 17.0, 40.0}) {
        for (double u : {0.5, 3.0, 12.0, 80.0}) {
            Task t;
            t.wcet_lo = t.wcet_hi = w;
            double f = compute_frequency(t, Mode::LO, u, c).frequency;
            EXPECT_LE(w * c.top().frequency / f, w + u + 1e-9);
        }
    }
}

TEST(ApplySelection, ShiftListAndSelectedEntryMoveEarlier) {
    // Queue T2, T3, T4 with slack 10; T4 is selected.
    std::deque<QueuedEntry> q{{2, 30, 50, -1, 0}, {3, 50, 70, -1, 0}, {4, 70, 100, -1, 0}};
    apply_selection(q, 2, 10.0, 5, 12.08);
    EXPECT_DOUBLE_EQ(q[0].start, 20);
    EXPECT_DOUBLE_EQ(q[0].deadline, 40);
    EXPECT_DOUBLE_EQ(q[1].start, 40);
    EXPECT_DOUBLE_EQ(q[1].deadline, 60);
    EXPECT_DOUBLE_EQ(q[2].start, 60);
    EXPECT_DOUBLE_EQ(q[2].deadline, 100);
    EXPECT_EQ(q[2].level, 5);
    EXPECT_DOUBLE_EQ(q[2].stall, 12.08);
    EXPECT_EQ(q[0].level, -1);
    EXPECT_THROW(apply_selection(q, 3, 1.0, 0, 0.0), DomainError);
}

TEST(ApplySelection, ImmediateNextOnlyMovesItself) {
    std::vector<QueuedEntry> q{{0, 30, 50, -1, 0}, {1, 50, 70, -1, 0}};
    apply_selection(q, 0, 8.0, 2, 0.0);
    EXPECT_DOUBLE_EQ(q[0].start, 22);
    EXPECT_DOUBLE_EQ(q[0].deadline, 50);
    EXPECT_DOUBLE_EQ(q[1].start, 50);
}

TEST(EarlyStart, ReleaseMustPrecedeShiftedStart) {
    EXPECT_TRUE(can_start_early(20, 30, 10));
    EXPECT_FALSE(can_start_early(21, 30, 10));
}

TEST(Remap, MovesOnlyWhenClearlyCheaper) {
    auto p = odroid_xu3();
    std::vector<RemapOption> o{{1, 8.0, true}};
    EXPECT_EQ(select_remap_core(p, 0, 10.0, o, 0.9), CoreId{1});
    o[0].energy = 9.5;
    EXPECT_FALSE(select_remap_core(p, 0, 10.0, o, 0.9));
}

TEST(Remap, StaysInClusterAndNeedsFreeSlot) {
    auto p = odroid_xu3();
    std::vector<RemapOption> o{{4, 0.0, true}, {2, 1.0, false}};
    EXPECT_FALSE(select_remap_core(p, 0, 10.0, o, 0.9));
    o.push_back({3, 2.0, true});
    o.push_back({1, 2.0, true});
    EXPECT_EQ(select_remap_core(p, 0, 10.0, o, 0.9), CoreId{1});
}

TEST(Remap, ZeroBaseEnergyNeverRemaps) {
    auto p = odroid_xu3();
    std::vector<RemapOption> o{{1, 0.0, true}};
    EXPECT_FALSE(select_remap_core(p, 0, 0.0, o, 0.9));
}

TEST(Lookahead, MatchesBruteForceOnRandomSets) {
    Rng rng(mix_seed(21));
    for (int trial = 0; trial < 5000; ++trial) {
        int n = 1 + static_cast<int>(uniform_index(rng, 8));
        std::vector<Candidate> c;
        for (int i = 0; i < n; ++i) {
            c.push_back({i, static_cast<std::size_t>(i), uniform(rng, 0.0, 5.0), uniform(rng, 0.1, 8.0),
                         bernoulli(rng, 0.8)});
        }
        double a = uniform01(rng);
        auto sel = select_lookahead_task(c, a, 1.0 - a);
        double emax = 0, pmax = 0;
        bool any = false;
        for (auto& x : c) {
            if (!x.eligible) continue;
            any = true;
            emax = std::max(emax, x.energy);
            pmax = std::max(pmax, x.power);
        }
        ASSERT_EQ(sel.has_value(), any);
        if (!any) continue;
        double best = -1;
        for (auto& x : c) {
            if (x.eligible) best = std::max(best, a * x.energy / emax + (1 - a) * x.power / pmax);
        }
        const auto& s = c[*sel];
        EXPECT_NEAR(a * s.energy / emax + (1 - a) * s.power / pmax, best, 1e-12);
    }
}
