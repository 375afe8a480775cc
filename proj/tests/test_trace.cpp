#include <gtest/gtest.h>

#include <limits>

#include "mcpeak/trace.hpp"

using namespace mcpeak;

namespace {
Trace one_task(double watts, Millis len) {
    Trace t;
    t.segments[0] = {{0.0, len, watts, 1.4e9, 0}};
    return t;
}
} // namespace

TEST(Summarize, SingleTaskPeakAndEnergy) {
    auto m = summarize(one_task(1.0, 10.0));
    EXPECT_DOUBLE_EQ(m.peak_system_power, 1.0);
    EXPECT_DOUBLE_EQ(m.total_energy, 0.01);
    EXPECT_DOUBLE_EQ(m.max_core_peak(), 1.0);
}

TEST(Summarize, OverlappingTasksAddUp) {
    Trace t;
    t.segments[0] = {{0.0, 10.0, 1.0, 1.4e9, 0}};
    t.segments[1] = {{5.0, 15.0, 1.0, 1.4e9, 1}};
    EXPECT_DOUBLE_EQ(summarize(t).peak_system_power, 2.0);
    t.segments[1] = {{10.0, 20.0, 1.0, 1.4e9, 1}};
    EXPECT_DOUBLE_EQ(summarize(t).peak_system_power, 1.0);
}

TEST(Summarize, EmptyTraceIsAllZero) {
    auto m = summarize(Trace{});
    EXPECT_DOUBLE_EQ(m.peak_system_power, 0.0);
    EXPECT_DOUBLE_EQ(m.total_energy, 0.0);
    EXPECT_DOUBLE_EQ(m.max_temperature, 0.0);
    EXPECT_EQ(m.deadline_miss_count, 0);
}

TEST(Summarize, CountsEvents) {
    Trace t;
    t.events = {{0, EventKind::Slack, 0, -1, {{"usable", 1.0}}, "idle_gap"},
                {1, EventKind::Slack, 0, 3, {{"usable", 9.0}, {"level", 4}}, "early_finish"},
                {2, EventKind::VfSwitch, 0, -1, {{"from_level", 12}, {"to_level", 4}}, ""},
                {3, EventKind::TaskEnd, 0, 3, {{"missed", 1.0}}, ""},
                {4, EventKind::ModeSwitch, 0, 3, {}, ""}};
    t.dropped_lc = {5, 6};
    auto m = summarize(t);
    EXPECT_EQ(m.slack_event_count, 2);
    EXPECT_EQ(m.dvfs_action_count, 1);
    EXPECT_EQ(m.vf_switch_count, 1);
    EXPECT_EQ(m.deadline_miss_count, 1);
    EXPECT_EQ(m.mode_switch_count, 1);
    EXPECT_EQ(m.lc_dropped_count, 2);
}

TEST(Compare, IdenticalRunsGiveOne) {
    auto m = summarize(one_task(0.5, 20.0));
    auto r = compare(m, m);
    EXPECT_DOUBLE_EQ(r.peak_system_power, 1.0);
    EXPECT_DOUBLE_EQ(r.total_energy, 1.0);
    EXPECT_DOUBLE_EQ(r.max_temperature, 1.0);
}

TEST(Compare, RatioIsSecondOverFirst) {
    auto a = summarize(one_task(1.0, 10.0));
    auto b = summarize(one_task(0.8, 10.0));
    auto r = compare(a, b);
    EXPECT_DOUBLE_EQ(r.peak_system_power, 0.8);
    EXPECT_DOUBLE_EQ(r.total_energy, 0.8);
}

TEST(Compare, MismatchedPairingThrows) {
    Trace a = one_task(1.0, 10.0), b = one_task(1.0, 10.0);
    b.meta.seed = 9;
    EXPECT_THROW(compare(summarize(a), summarize(b)), DomainError);
    b = a;
    b.meta.graph_fingerprint = 1;
    EXPECT_THROW(compare(summarize(a), summarize(b)), DomainError);
}

TEST(MeanCi, MatchesStudentT) {
    auto r = mean_ci({1, 2, 3, 4, 5});
    EXPECT_DOUBLE_EQ(r.mean, 3.0);
    // t(4, 0.975) = 2.7764451, sd = sqrt(2.5)
    EXPECT_NEAR(r.half_width, 2.7764451 * std::sqrt(2.5) / std::sqrt(5.0), 1e-6);
    EXPECT_EQ(r.n, 5u);
    EXPECT_DOUBLE_EQ(mean_ci({4.0}).half_width, 0.0);
    EXPECT_EQ(mean_ci({}).n, 0u);
}

TEST(OptimalK, PicksLowestMeanWithTiesToSmallerK) {
    EXPECT_EQ(optimal_k({{1, 0.9}, {2, 0.85}, {4, 0.8}, {10, 0.7}}), 10);
    EXPECT_EQ(optimal_k({{1, 0.9}, {2, 0.9}, {4, 0.9}}), 1);
    EXPECT_EQ(optimal_k({{1, 0.9}, {3, 0.7}, {6, 0.7}}), 3);
    EXPECT_THROW(optimal_k({}), DomainError);
}

TEST(Fingerprint, SensitiveToContent) {
    TaskGraph g;
    g.period = g.deadline = 100;
    Task t;
    t.wcet_lo = t.wcet_hi = 10;
    t.deadline = 100;
    g.tasks = {t};
    auto h = graph_fingerprint(g);
    EXPECT_EQ(h, graph_fingerprint(g));
    g.tasks[0].wcet_hi = 11;
    EXPECT_NE(h, graph_fingerprint(g));
}

TEST(EventKinds, RoundTripNames) {
    for (auto k : {EventKind::TaskStart, EventKind::TaskEnd, EventKind::Slack, EventKind::VfSwitch, EventKind::Remap,
                   EventKind::ModeSwitch}) {
        EXPECT_EQ(event_kind_from_string(to_string(k)), k);
    }
    EXPECT_THROW(event_kind_from_string("bogus"), DomainError);
}
