#include <gtest/gtest.h>

#include "mcpeak/static_scheduler.hpp"

using namespace mcpeak;

namespace {

Task make_task(TaskId id, Criticality c, Millis lo, Millis hi, Millis d) {
    Task t;
    t.id = id;
    t.criticality = c;
    t.wcet_lo = lo;
    t.wcet_hi = hi;
    t.deadline = d;
    t.peak_power = {{CoreKind::Little, 0.7}, {CoreKind::Big, 5.0}};
    return t;
}

void link(TaskGraph& g, TaskId a, TaskId b) {
    g.tasks[a].successors.push_back(b);
    g.tasks[b].predecessors.push_back(a);
}

} // namespace

TEST(StaticScheduler, IndependentTasksSpreadAcrossCores) {
    TaskGraph g;
    g.period = g.deadline = 100;
    g.tasks = {make_task(0, Criticality::HC, 20, 40, 100), make_task(1, Criticality::HC, 20, 40, 100)};
    auto t = build_tables(g, homogeneous(CoreKind::Little, 2));
    for (const auto* table : {&t.lo, &t.hi}) {
        auto* a = table->find(0);
        auto* b = table->find(1);
        ASSERT_TRUE(a && b);
        EXPECT_NE(a->core_id, b->core_id);
        EXPECT_DOUBLE_EQ(a->start, 0.0);
        EXPECT_DOUBLE_EQ(b->start, 0.0);
    }
}

TEST(StaticScheduler, EarlierDeadlineFirstOnOneCore) {
    TaskGraph g;
    g.period = g.deadline = 100;
    g.tasks = {make_task(0, Criticality::LC, 10, 10, 100), make_task(1, Criticality::LC, 10, 10, 30)};
    auto t = build_tables(g, homogeneous(CoreKind::Little, 1));
    EXPECT_DOUBLE_EQ(t.lo.find(1)->start, 0.0);
    EXPECT_DOUBLE_EQ(t.lo.find(0)->start, 10.0);
    // Entry bound of the first task is the next start on the core.
    EXPECT_DOUBLE_EQ(t.lo.find(1)->deadline, 10.0);
    EXPECT_DOUBLE_EQ(t.lo.find(0)->deadline, 100.0);
}

TEST(StaticScheduler, PrecedenceRespected) {
    TaskGraph g;
    g.period = g.deadline = 100;
    g.tasks = {make_task(0, Criticality::HC, 10, 20, 60), make_task(1, Criticality::HC, 10, 20, 100)};
    link(g, 0, 1);
    auto t = build_tables(g, homogeneous(CoreKind::Little, 4));
    EXPECT_GE(t.lo.find(1)->start, t.lo.find(0)->start + 10 - 1e-9);
    EXPECT_GE(t.hi.find(1)->start, t.hi.find(0)->start + 20 - 1e-9);
    EXPECT_LE(t.lo.find(0)->deadline, t.lo.find(1)->start + 1e-9);
}

TEST(StaticScheduler, LcDroppedFromHiWhenNoRoom) {
    TaskGraph g;
    g.period = g.deadline = 100;
    g.tasks = {make_task(0, Criticality::HC, 40, 90, 100), make_task(1, Criticality::LC, 20, 20, 100)};
    auto p = homogeneous(CoreKind::Little, 1);
    auto t = build_tables(g, p);
    EXPECT_NE(t.lo.find(1), nullptr);
    EXPECT_EQ(t.hi.find(1), nullptr);
    EXPECT_EQ(t.hi.dropped_lc.count(1), 1u);
    EXPECT_TRUE(check_table(g, t.lo, p).ok());
    EXPECT_TRUE(check_table(g, t.hi, p).ok());
    EXPECT_TRUE(check_switch_safety(g, t).empty());
}

TEST(StaticScheduler, UnschedulableChainNamesTask) {
    TaskGraph g;
    g.period = g.deadline = 100;
    g.tasks = {make_task(0, Criticality::HC, 30, 60, 100), make_task(1, Criticality::HC, 30, 60, 100)};
    link(g, 0, 1);
    try {
        build_tables(g, homogeneous(CoreKind::Little, 4));
        FAIL() << "expected UnschedulableError";
    } catch (const UnschedulableError& e) {
        EXPECT_EQ(e.task, 1);
    }
}

TEST(StaticScheduler, GeneratedGraphsYieldValidTables) {
    GenParams gp;
    auto p = homogeneous(CoreKind::Little, 8);
    int built = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        gp.seed = s;
        auto g = generate(gp);
        ScheduleTables t;
        try {
            t = build_tables(g, p);
        } catch (const UnschedulableError&) {
            continue;
        }
        ++built;
        auto lo = check_table(g, t.lo, p);
        auto hi = check_table(g, t.hi, p);
        EXPECT_TRUE(lo.ok()) << "seed " << s << ": " << lo.violations.front().message;
        EXPECT_TRUE(hi.ok()) << "seed " << s << ": " << hi.violations.front().message;
        EXPECT_TRUE(check_switch_safety(g, t).empty()) << "seed " << s;
    }
    EXPECT_GT(built, 80);
}

TEST(StaticScheduler, CheckerCatchesOverlapAndMissingTasks) {
    TaskGraph g;
    g.period = g.deadline = 100;
    g.tasks = {make_task(0, Criticality::LC, 10, 10, 100), make_task(1, Criticality::LC, 10, 10, 100)};
    auto p = homogeneous(CoreKind::Little, 1);
    auto t = build_tables(g, p);
    auto bad = t.lo;
    bad.cores[0][1].start = 5.0;
    EXPECT_FALSE(check_table(g, bad, p).ok());
    bad = t.lo;
    bad.cores[0].pop_back();
    EXPECT_FALSE(check_table(g, bad, p).ok());
}

TEST(StaticScheduler, EmptyGraphGivesEmptyTables) {
    TaskGraph g;
    g.period = g.deadline = 100;
    auto t = build_tables(g, homogeneous(CoreKind::Little, 2));
    EXPECT_EQ(t.lo.entry_count(), 0u);
    EXPECT_EQ(t.hi.entry_count(), 0u);
}

TEST(OverheadModelCheck, MigrationMustHideBehindSwitch) {
    OverheadModel ov;
    EXPECT_NO_THROW(ov.check());
    ov.to_remap_migration = 20.0;
    EXPECT_THROW(ov.check(), DomainError);
    ov = OverheadModel{};
    ov.to_vf = -1.0;
    EXPECT_THROW(ov.check(), DomainError);
}
