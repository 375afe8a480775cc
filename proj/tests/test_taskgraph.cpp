#include <gtest/gtest.h>

#include <algorithm>

#include "mcpeak/taskgraph.hpp"

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

TaskGraph chain3() {
    TaskGraph g;
    g.period = g.deadline = 100;
    g.tasks = {make_task(0, Criticality::HC, 10, 20, 60), make_task(1, Criticality::HC, 10, 20, 80),
               make_task(2, Criticality::LC, 10, 10, 100)};
    link(g, 0, 1);
    link(g, 1, 2);
    return g;
}

bool has_rule(const ValidationReport& r, const std::string& rule) {
    return std::any_of(r.begin(), r.end(), [&](const Violation& v) { return v.rule == rule; });
}

} // namespace

TEST(TaskGraphValidate, WellFormedChainHasNoViolations) {
    EXPECT_TRUE(validate(chain3()).empty());
}

TEST(TaskGraphValidate, ReportsLcPredecessorOfHcTask) {
    auto g = chain3();
    g.tasks[0].criticality = Criticality::LC;
    g.tasks[0].wcet_lo = 20;
    auto r = validate(g);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].rule, "hc-closure");
    EXPECT_EQ(r[0].task, 0);
    EXPECT_EQ(r[0].message, "HC-closure broken at 0");
}

TEST(TaskGraphValidate, ReportsEachBrokenRule) {
    auto g = chain3();
    g.tasks[2].successors.push_back(0);  // cycle, but predecessors not mirrored
    EXPECT_TRUE(has_rule(validate(g), "edge-mirror"));
    g.tasks[0].predecessors.push_back(2);
    EXPECT_TRUE(has_rule(validate(g), "acyclic"));

    g = chain3();
    g.tasks[0].wcet_lo = 30;
    EXPECT_TRUE(has_rule(validate(g), "wcet-order"));

    g = chain3();
    g.tasks[2].wcet_lo = 5;
    EXPECT_TRUE(has_rule(validate(g), "lc-wcet"));

    g = chain3();
    g.tasks[2].deadline = 120;
    EXPECT_TRUE(has_rule(validate(g), "deadline-period"));

    g = chain3();
    g.tasks[1].peak_power[CoreKind::Little] = 2.0;
    EXPECT_TRUE(has_rule(validate(g), "power-envelope"));

    g = chain3();
    g.tasks[1].successors.push_back(42);
    EXPECT_TRUE(has_rule(validate(g), "unknown-id"));
}

TEST(TaskGraphClosure, PromotesAllAncestors) {
    auto g = chain3();
    g.tasks[0].criticality = Criticality::LC;
    g.tasks[1].criticality = Criticality::LC;
    g.tasks[2].criticality = Criticality::HC;
    for (auto& t : g.tasks) t.wcet_lo = t.wcet_hi = 10;
    auto c = hc_closure(g);
    for (const auto& t : c.tasks) EXPECT_TRUE(t.is_hc());
    EXPECT_EQ(hc_closure(c), c);
    EXPECT_TRUE(validate(c).empty());
}

TEST(TaskGraphClosure, LeavesIndependentLcTasksAlone) {
    auto g = chain3();
    auto c = hc_closure(g);
    EXPECT_EQ(c.tasks[2].criticality, Criticality::LC);
}

TEST(TaskGraphDeadlines, BackwardPassUsesHiBudgets) {
    auto d = backward_deadlines(chain3());
    EXPECT_DOUBLE_EQ(d[2], 100);
    EXPECT_DOUBLE_EQ(d[1], 90);
    EXPECT_DOUBLE_EQ(d[0], 70);
}

TEST(TaskGraphGenerate, ProducesValidGraphsInUtilizationBand) {
    GenParams p;
    p.n_cores = 8;
    p.n_tasks = 50;
    for (std::uint64_t s = 0; s < 50; ++s) {
        p.seed = s;
        auto g = generate(p);
        ASSERT_EQ(g.size(), 50u);
        EXPECT_TRUE(validate(g).empty()) << "seed " << s;
        double u = total_utilization(g) / p.n_cores;
        EXPECT_GE(u, 0.5 - 0.02);
        EXPECT_LE(u, 0.75 + 0.02);
        for (const auto& t : g.tasks) {
            if (t.is_hc()) {
                EXPECT_GE(t.wcet_hi / t.wcet_lo, 1.5 - 0.01);
                EXPECT_LE(t.wcet_hi / t.wcet_lo, 2.5 + 0.01);
            }
        }
    }
}

TEST(TaskGraphGenerate, SingleTaskWithoutEdges) {
    GenParams p;
    p.n_tasks = 1;
    p.n_cores = 1;
    p.edge_percent = 0.0;
    p.seed = 3;
    auto g = generate(p);
    ASSERT_EQ(g.size(), 1u);
    EXPECT_TRUE(g.tasks[0].successors.empty());
    EXPECT_TRUE(g.tasks[0].predecessors.empty());
}

TEST(TaskGraphGenerate, SameSeedSameGraph) {
    GenParams p;
    p.seed = 99;
    EXPECT_EQ(generate(p), generate(p));
    GenParams q = p;
    q.seed = 100;
    EXPECT_NE(generate(p), generate(q));
}

TEST(TaskGraphGenerate, EdgeFractionTracksTarget) {
    GenParams p;
    p.edge_percent = 0.10;
    double sum = 0.0;
    const int n = 200;
    for (int s = 0; s < n; ++s) {
        p.seed = static_cast<std::uint64_t>(s);
        sum += edge_fraction(generate(p));
    }
    EXPECT_NEAR(sum / n, 0.10, 0.02);
}

TEST(TaskGraphGenerate, RejectsUnreachableUtilization) {
    GenParams p;
    p.n_tasks = 2;
    p.n_cores = 8;
    p.utilization_range = {0.9, 0.9};
    EXPECT_THROW(generate(p), GenerationError);
    p.n_tasks = 0;
    EXPECT_THROW(generate(p), DomainError);
}

TEST(TaskGraphActualTime, UniformOverLowerThirdRemoved) {
    Task t = make_task(0, Criticality::LC, 30, 30, 100);
    Rng rng(mix_seed(5));
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        double a = draw_actual_execution_time(t, Mode::LO, rng);
        ASSERT_GE(a, 20.0);
        ASSERT_LE(a, 30.0);
        sum += a;
    }
    EXPECT_NEAR(sum / n, 25.0, 0.1);
}

TEST(TaskGraphActualTime, ModeSelectsBudget) {
    Task t = make_task(0, Criticality::HC, 10, 40, 100);
    Rng rng(mix_seed(6));
    for (int i = 0; i < 1000; ++i) {
        double a = draw_actual_execution_time(t, Mode::HI, rng);
        EXPECT_GE(a, 40.0 * 2 / 3);
        EXPECT_LE(a, 40.0);
    }
}

TEST(TaskGraphEnergy, DefaultsToPowerTimesWcet) {
    Task t = make_task(0, Criticality::HC, 10, 20, 100);
    EXPECT_DOUBLE_EQ(t.energy(CoreKind::Little, Mode::LO), 0.007);
    EXPECT_DOUBLE_EQ(t.energy(CoreKind::Little, Mode::HI), 0.014);
    t.energy_max[CoreKind::Big] = 0.2;
    EXPECT_DOUBLE_EQ(t.energy(CoreKind::Big, Mode::LO), 0.2);
}
