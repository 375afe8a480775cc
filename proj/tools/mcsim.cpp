// mcsim: generate task graphs, build static tables, simulate one period, and
// run parameter sweeps.
//
// Exit codes: 0 ok, 1 other error, 2 usage, 3 infeasible input,
// 4 unschedulable table, 5 simulation fault.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <mcpeak/mcpeak.hpp>

using namespace mcpeak;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kOther = 1, kUsage = 2, kInfeasible = 3, kUnschedulable = 4, kFault = 5 };

std::pair<double, double> parse_range(const std::string& s, const char* what) {
    auto colon = s.find(':');
    try {
        if (colon == std::string::npos) {
            double v = std::stod(s);
            return {v, v};
        }
        return {std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
    } catch (const std::exception&) {
        throw CLI::ValidationError(what, "expected LO:HI, got '" + s + "'");
    }
}

/// Fills every option of `app` not given on the command line from the JSON
/// object in `path`; keys are the long option names without dashes.
void apply_config(CLI::App* app, const std::string& path) {
    json cfg = read_json(path);
    if (!cfg.is_object()) throw CLI::ValidationError("--config", "config file must hold an object");
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        CLI::Option* opt = nullptr;
        try {
            opt = app->get_option("--" + it.key());
        } catch (const CLI::OptionNotFound&) {
            throw CLI::ValidationError("--config", "unknown key '" + it.key() + "'");
        }
        if (opt->count() > 0) continue;  // flags win over the file
        const json& v = it.value();
        std::string s;
        if (v.is_string()) {
            s = v.get<std::string>();
        } else if (v.is_boolean()) {
            s = v.get<bool>() ? "true" : "false";
        } else {
            s = v.dump();
        }
        opt->add_result(s);
        opt->run_callback();
    }
}

struct PlatformOpts {
    std::string name = "odroid-xu3";
    int cores = 8;
};

void add_platform_opts(CLI::App* sub, PlatformOpts& p) {
    sub->add_option("--platform", p.name, "odroid-xu3 | homogeneous-little | homogeneous-big")->capture_default_str();
    sub->add_option("--cores", p.cores, "core count for homogeneous platforms")->capture_default_str();
}

struct OverheadOpts {
    double lookahead_us = 56.417;
    double remap_us = 64.54;
    double vf_ms = 12.025;
    double vf_down_ms = -1.0;
    double migration_ms = -1.0;  // unset: min(3.75, vf_ms)

    OverheadModel model() const {
        OverheadModel o;
        o.to_lookahead = lookahead_us / 1000.0;
        o.to_remap_per_core = remap_us / 1000.0;
        o.to_vf = vf_ms;
        o.to_vf_down = vf_down_ms < 0.0 ? vf_ms : vf_down_ms;
        o.to_remap_migration = migration_ms < 0.0 ? std::min(3.75, vf_ms) : migration_ms;
        if (migration_ms > vf_ms) {
            throw CLI::ValidationError("--to-migration", "re-mapping latency must not exceed --to-vf");
        }
        o.check();
        return o;
    }
};

void add_overhead_opts(CLI::App* sub, OverheadOpts& o) {
    sub->add_option("--to-lookahead", o.lookahead_us, "look-ahead decision overhead, microseconds")->capture_default_str();
    sub->add_option("--to-remap", o.remap_us, "re-mapping probe overhead per examined core, microseconds")
        ->capture_default_str();
    sub->add_option("--to-vf", o.vf_ms, "V-f switch latency, ms")->capture_default_str();
    sub->add_option("--to-vf-down", o.vf_down_ms, "scale-down latency, ms (default: same as --to-vf)");
    sub->add_option("--to-migration", o.migration_ms,
                    "task migration latency, ms; must be <= --to-vf (default: min(3.75, --to-vf))");
}

struct PolicyOpts {
    std::string policy = "proposed";
    int k = 4;
    double alpha = 0.5;
    double beta = 0.5;
    double gamma = 0.9;
    bool no_remap = false;
    bool no_deduct = false;

    PolicyConfig config() const {
        PolicyConfig p;
        p.kind = policy_kind_from_string(policy);
        p.k = k;
        p.alpha = alpha;
        p.beta = beta;
        p.gamma = gamma;
        p.remap_enabled = !no_remap;
        p.deduct_overheads = !no_deduct;
        if (p.kind == PolicyKind::ImmediateNext) {
            p.k = 1;
            p.remap_enabled = false;
        }
        p.check();
        return p;
    }
};

void add_policy_opts(CLI::App* sub, PolicyOpts& p) {
    sub->add_option("--policy", p.policy, "proposed | static-max | immediate-next")->capture_default_str();
    sub->add_option("--k", p.k, "look-ahead depth")->capture_default_str();
    sub->add_option("--alpha", p.alpha, "energy weight of the cost function")->capture_default_str();
    sub->add_option("--beta", p.beta, "power weight of the cost function")->capture_default_str();
    sub->add_option("--gamma", p.gamma, "re-mapping threshold coefficient")->capture_default_str();
    sub->add_flag("--no-remap", p.no_remap, "disable intra-cluster re-mapping");
    sub->add_flag("--no-deduct", p.no_deduct, "ablation: act on slack without deducting overheads");
}

struct GenOpts {
    int cores = 8;
    std::string util = "0.5:0.75";
    double edges = 0.10;
    int tasks = 50;
    double hc_fraction = 0.5;
    std::string wcet_ratio = "1.5:2.5";
    double period = 1000.0;
    std::string power_dist = "normal";
    std::uint64_t seed = 0;

    GenParams params() const {
        GenParams g;
        g.n_cores = cores;
        g.utilization_range = parse_range(util, "--util");
        g.edge_percent = edges;
        g.n_tasks = tasks;
        g.hc_fraction = hc_fraction;
        g.wcet_ratio_range = parse_range(wcet_ratio, "--wcet-ratio");
        g.period = period;
        if (power_dist != "normal" && power_dist != "uniform") {
            throw CLI::ValidationError("--power-dist", "expected normal or uniform");
        }
        g.power_distribution = power_dist == "uniform" ? PowerDistribution::Uniform : PowerDistribution::TruncatedNormal;
        g.seed = seed;
        try {
            g.check();
        } catch (const DomainError& e) {
            throw CLI::ValidationError("generate", e.what());
        }
        return g;
    }
};

Platform build_platform(const PlatformOpts& p) {
    try {
        return make_platform(p.name, p.cores);
    } catch (const DomainError& e) {
        throw CLI::ValidationError("--platform", e.what());
    }
}

TaskGraph load_graph(const std::string& path) {
    TaskGraph g = read_json(path).get<TaskGraph>();
    auto report = validate(g);
    if (!report.empty()) {
        for (const auto& v : report) std::cerr << "invalid graph: " << v.rule << ": " << v.message << "\n";
        throw DomainError("graph document failed validation");
    }
    return g;
}

/// Builds an ExperimentSpec from a JSON document. Grid keys expand as a
/// Cartesian product over the base generator / policy settings.
ExperimentSpec load_spec(const std::string& path) {
    json j = read_json(path);
    ExperimentSpec s;
    s.name = j.value("name", s.name);
    s.platform = j.value("platform", s.platform);
    s.repetitions = j.value("repetitions", s.repetitions);
    s.base_seed = j.value("base_seed", s.base_seed);
    s.out_dir = j.value("out_dir", s.out_dir);
    s.overrun_probability = j.value("overrun_probability", s.overrun_probability);
    if (j.contains("overheads")) s.overheads = j.at("overheads").get<OverheadModel>();

    GenParams base_gen = j.value("gen", json::object()).get<GenParams>();
    std::vector<GenParams> gens{base_gen};
    if (j.contains("gen_grid")) {
        for (auto it = j.at("gen_grid").begin(); it != j.at("gen_grid").end(); ++it) {
            std::vector<GenParams> next;
            for (const auto& g : gens) {
                for (const auto& v : it.value()) {
                    json gj = g;
                    gj[it.key()] = v;
                    GenParams n = gj.get<GenParams>();
                    n.seed = g.seed;
                    next.push_back(n);
                }
            }
            gens = std::move(next);
        }
    }
    PolicyConfig base_pol = j.value("policy", json::object()).get<PolicyConfig>();
    std::vector<PolicyConfig> pols{base_pol};
    if (j.contains("policy_grid")) {
        for (auto it = j.at("policy_grid").begin(); it != j.at("policy_grid").end(); ++it) {
            std::vector<PolicyConfig> next;
            for (const auto& p : pols) {
                for (const auto& v : it.value()) {
                    json pj = p;
                    if (it.key() == "alpha_beta") {
                        pj["alpha"] = v.at(0);
                        pj["beta"] = v.at(1);
                    } else {
                        pj[it.key()] = v;
                    }
                    next.push_back(pj.get<PolicyConfig>());
                }
            }
            pols = std::move(next);
        }
    }
    s.gen_grid = gens;
    s.policy_grid = pols;
    return s;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Peak-power-aware run-time scheduling simulator for dual-criticality task graphs"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "mcsim 1.0");

    // generate
    GenOpts gen;
    std::string gen_out = "graph.json";
    std::string gen_cfg;
    auto* g_cmd = app.add_subcommand("generate", "generate a random task graph");
    g_cmd->add_option("--cores", gen.cores, "number of cores c")->capture_default_str();
    g_cmd->add_option("--util", gen.util, "normalized utilization range U/c as LO:HI")->capture_default_str();
    g_cmd->add_option("--edges", gen.edges, "edge fraction d over ordered task pairs")->capture_default_str();
    g_cmd->add_option("--tasks", gen.tasks, "number of tasks n")->capture_default_str();
    g_cmd->add_option("--hc-fraction", gen.hc_fraction, "probability a task is drawn HC before closure")
        ->capture_default_str();
    g_cmd->add_option("--wcet-ratio", gen.wcet_ratio, "C_HI/C_LO range for HC tasks as LO:HI")->capture_default_str();
    g_cmd->add_option("--period", gen.period, "common period, ms")->capture_default_str();
    g_cmd->add_option("--power-dist", gen.power_dist, "normal | uniform")->capture_default_str();
    g_cmd->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
    g_cmd->add_option("--out", gen_out, "output graph document")->capture_default_str();
    g_cmd->add_option("--config", gen_cfg, "JSON file with option values (flags override)");

    // tables
    std::string t_graph, t_out = "tables.json", t_cfg;
    PlatformOpts t_plat;
    auto* t_cmd = app.add_subcommand("tables", "build LO and HI static schedule tables");
    t_cmd->add_option("--graph", t_graph, "graph document")->required();
    add_platform_opts(t_cmd, t_plat);
    t_cmd->add_option("--out", t_out, "output tables document")->capture_default_str();
    t_cmd->add_option("--config", t_cfg, "JSON file with option values (flags override)");

    // run
    std::string r_graph, r_tables, r_out = "run-out", r_cfg;
    PlatformOpts r_plat;
    PolicyOpts r_pol;
    OverheadOpts r_ov;
    std::uint64_t r_seed = 0;
    double r_overrun = 0.0, r_sample = 1.0;
    bool r_lenient = false;
    auto* r_cmd = app.add_subcommand("run", "simulate one period");
    r_cmd->add_option("--graph", r_graph, "graph document")->required();
    r_cmd->add_option("--tables", r_tables, "tables document (built from the graph when omitted)");
    add_platform_opts(r_cmd, r_plat);
    add_policy_opts(r_cmd, r_pol);
    add_overhead_opts(r_cmd, r_ov);
    r_cmd->add_option("--seed", r_seed, "seed of the actual execution times")->capture_default_str();
    r_cmd->add_option("--overrun-prob", r_overrun, "probability an HC task overruns C_LO")->capture_default_str();
    r_cmd->add_option("--sample-period", r_sample, "trace sample period, ms")->capture_default_str();
    r_cmd->add_flag("--lenient", r_lenient, "count deadline misses instead of aborting on the first one");
    r_cmd->add_option("--out-dir", r_out, "directory for trace.csv, events.json, metrics.json")->capture_default_str();
    r_cmd->add_option("--config", r_cfg, "JSON file with option values (flags override)");

    // sweep
    std::string s_spec, s_out;
    int s_workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    int s_reps = 0;
    auto* s_cmd = app.add_subcommand("sweep", "run a parameter sweep from a JSON experiment spec");
    s_cmd->add_option("--spec", s_spec, "experiment spec document")->required();
    s_cmd->add_option("--out-dir", s_out, "override the spec's output directory");
    s_cmd->add_option("--workers", s_workers, "parallel worker threads")->capture_default_str();
    s_cmd->add_option("--reps", s_reps, "override the spec's repetitions");

    try {
        app.parse(argc, argv);
        if (!gen_cfg.empty()) apply_config(g_cmd, gen_cfg);
        if (!t_cfg.empty()) apply_config(t_cmd, t_cfg);
        if (!r_cfg.empty()) apply_config(r_cmd, r_cfg);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (*g_cmd) {
            GenParams p = gen.params();
            TaskGraph g = generate(p);
            write_json(gen_out, g);
            std::printf("wrote %s: %zu tasks, U=%.3f, edges=%.3f\n", gen_out.c_str(), g.size(), total_utilization(g),
                        edge_fraction(g));
        } else if (*t_cmd) {
            Platform p = build_platform(t_plat);
            TaskGraph g = load_graph(t_graph);
            ScheduleTables t = build_tables(g, p);
            write_json(t_out, t);
            std::printf("wrote %s: LO %zu entries, HI %zu entries, %zu LC dropped in HI\n", t_out.c_str(),
                        t.lo.entry_count(), t.hi.entry_count(), t.hi.dropped_lc.size());
        } else if (*r_cmd) {
            Platform p = build_platform(r_plat);
            PolicyConfig pol = r_pol.config();
            OverheadModel ov = r_ov.model();
            TaskGraph g = load_graph(r_graph);
            ScheduleTables t = r_tables.empty() ? build_tables(g, p) : read_json(r_tables).get<ScheduleTables>();
            for (const auto* table : {&t.lo, &t.hi}) {
                auto rep = check_table(g, *table, p);
                if (!rep.ok()) {
                    for (const auto& v : rep.violations) std::cerr << "invalid table: " << v.message << "\n";
                    return kUnschedulable;
                }
            }
            SimConfig cfg;
            cfg.seed = r_seed;
            cfg.overrun_probability = r_overrun;
            cfg.sample_period = r_sample;
            cfg.strict = !r_lenient;
            SimResult res = run_period(g, t, p, pol, ov, cfg);
            fs::create_directories(r_out);
            write_file((fs::path(r_out) / "trace.csv").string(), trace_csv(res.trace));
            write_json((fs::path(r_out) / "events.json").string(), trace_to_json(res.trace, false));
            write_json((fs::path(r_out) / "metrics.json").string(), res.metrics);
            const auto& m = res.metrics;
            std::printf("policy=%s peak_system=%.4f W max_core_peak=%.4f W energy=%.4f J max_temp=%.3f C misses=%d "
                        "mode_switches=%d lc_dropped=%d dvfs=%d remaps=%d\n",
                        std::string(to_string(pol.kind)).c_str(), m.peak_system_power, m.max_core_peak(),
                        m.total_energy, m.max_temperature, m.deadline_miss_count, m.mode_switch_count,
                        m.lc_dropped_count, m.dvfs_action_count, m.remap_count);
        } else if (*s_cmd) {
            ExperimentSpec spec = load_spec(s_spec);
            if (!s_out.empty()) spec.out_dir = s_out;
            if (s_reps > 0) spec.repetitions = s_reps;
            auto cells = run_sweep(spec, s_workers, [](const CellResult& c, bool resumed) {
                std::fprintf(stderr, "%s %s\n", resumed ? "resumed" : "done", c.cell_id.c_str());
            });
            std::printf("%zu cells -> %s/summary.csv\n", cells.size(), spec.out_dir.c_str());
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const GenerationError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kInfeasible;
    } catch (const UnschedulableError& e) {
        std::cerr << "unschedulable: " << e.what() << "\n";
        return kUnschedulable;
    } catch (const SimulationFault& e) {
        std::cerr << "simulation fault: " << e.what() << "\n";
        return kFault;
    } catch (const DomainError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kInfeasible;
    } catch (const json::exception& e) {
        std::cerr << "malformed document: " << e.what() << "\n";
        return kInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOther;
    }
    return kOk;
}
