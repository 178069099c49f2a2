// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--only N[,N...]] [--known-red N[,N...]]
//
// A criterion listed in --known-red still prints FAIL but does not make the
// exit status non-zero; if it passes, that is reported as well.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oracles.h"
#include "rca/catalog.h"
#include "rca/citest.h"
#include "rca/eval.h"
#include "rca/psi_pc.h"
#include "rca/rcd.h"
#include "rca/simulator.h"
#include "rca/tarcd.h"
#include "rca/topology.h"

using namespace rca;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char *name;
    double budget_s;
    std::function<Outcome()> run;
};

std::string fmt(const char *f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

FaultScenario fault(FaultKind kind, const std::string &target, Layer layer, double mag, std::uint64_t seed) {
    FaultScenario s;
    s.kind = kind;
    s.target_node = target;
    s.target_layer = layer;
    s.magnitude = mag;
    s.seed = seed;
    return s;
}

double default_magnitude(FaultKind k) { return k == FaultKind::NetworkDelay ? 100.0 : 0.4; }

// The six-scenario suite on the five-service topology: every fault kind at
// the container and at the VM of svc2.
std::vector<FaultScenario> suite(std::uint64_t seed) {
    std::vector<FaultScenario> out;
    for (FaultKind k : {FaultKind::CpuHog, FaultKind::MemoryLeak, FaultKind::NetworkDelay})
        for (Layer l : {Layer::Container, Layer::VirtualMachine})
            out.push_back(fault(k, l == Layer::Container ? "svc2-ctr" : "vm2", l, default_magnitude(k), seed));
    return out;
}

// ---------------------------------------------------------------------------

Outcome catalog_fidelity() {
    auto c = catalog_counts(MetricCatalog::default_catalog());
    const bool ok = c[Layer::ServiceInstance] == 5 && c[Layer::Container] == 29 && c[Layer::VirtualMachine] == 34 &&
                    c[Layer::PhysicalMachine] == 34;
    return {ok, fmt("service %zu container %zu vm %zu pm %zu", c[Layer::ServiceInstance], c[Layer::Container],
                    c[Layer::VirtualMachine], c[Layer::PhysicalMachine])};
}

Outcome ci_correctness() {
    std::mt19937_64 rng(20240601);
    double worst_stat = 0.0, worst_p = 0.0;
    int tables = 0;
    while (tables < 200) {
        const int r = 2 + static_cast<int>(rng() % 3), c = 2 + static_cast<int>(rng() % 3);
        const std::size_t n = 20 + rng() % 200;
        // Mix of independent and dependent tables.
        const double coupling = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        std::vector<std::uint8_t> x(n), y(n);
        std::vector<std::vector<double>> table(r, std::vector<double>(c, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = static_cast<std::uint8_t>(rng() % r);
            y[i] = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < coupling ? static_cast<std::uint8_t>(x[i] % c)
                                                                                     : static_cast<std::uint8_t>(rng() % c);
            table[x[i]][y[i]] += 1.0;
        }
        DiscreteDataset d(n, {x, y}, {r, c});
        auto got = chi_square_ci(0, 1, {}, d, kDefaultAlpha);
        auto want = oracle::pearson(table);
        if (got.dof != want.dof) return {false, fmt("table %d: dof %d vs oracle %d", tables, got.dof, want.dof)};
        const double rel = std::abs(got.statistic - want.statistic) / std::max(1e-300, std::abs(want.statistic));
        if (want.statistic != 0.0) worst_stat = std::max(worst_stat, rel);
        worst_p = std::max(worst_p, std::abs(got.p_value - oracle::chi2_sf(want.statistic, want.dof)));
        ++tables;
    }
    return {worst_stat <= 1e-9 && worst_p <= 1e-6,
            fmt("200 tables, max relative statistic error %.2e, max absolute p error %.2e", worst_stat, worst_p)};
}

// Small discrete causal models over F: some metrics depend on F directly,
// some copy an earlier metric with noise, the rest are uniform noise.
// Generating labels directly keeps the conditional independences exact,
// which binning a continuous model would not.
DiscreteDataset small_instance(std::mt19937_64 &rng, std::size_t m, std::size_t per_window) {
    const std::size_t n = 2 * per_window;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<int> parent(m, -1); // -1 noise, -2 child of F, >= 0 child of that column
    std::vector<int> card(m + 1, 2);
    for (std::size_t i = 0; i < m; ++i) {
        const auto kind = rng() % 3;
        if (kind == 0) parent[i] = -2;
        else if (kind == 1 && i > 0) parent[i] = static_cast<int>(rng() % i);
        card[i] = 2 + static_cast<int>(rng() % 3);
    }
    std::vector<std::vector<std::uint8_t>> cols(m + 1, std::vector<std::uint8_t>(n));
    for (std::size_t r = 0; r < n; ++r) cols[m][r] = r < per_window ? 0 : 1;
    const double keep = 0.6;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t r = 0; r < n; ++r) {
            const auto k = static_cast<std::uint64_t>(card[i]);
            auto draw = static_cast<std::uint8_t>(rng() % k);
            if (parent[i] == -2 && cols[m][r] == 1 && u(rng) < keep) draw = static_cast<std::uint8_t>(k - 1);
            if (parent[i] >= 0 && u(rng) < keep) draw = static_cast<std::uint8_t>(cols[static_cast<std::size_t>(parent[i])][r] % k);
            cols[i][r] = draw;
        }
    return DiscreteDataset(n, cols, card);
}

Outcome psi_pc_oracle() {
    std::mt19937_64 rng(77);
    int equal = 0, equal_all_subsets = 0;
    std::ostringstream notes;
    for (int inst = 0; inst < 50; ++inst) {
        const std::size_t m = 3 + rng() % 6;
        auto d = small_instance(rng, m, 200);
        const std::size_t f = d.cols() - 1;
        std::vector<std::size_t> cols(f);
        std::iota(cols.begin(), cols.end(), std::size_t{0});
        PsiPcOptions o;
        auto got = psi_pc_columns(d, cols, f, o);
        auto want = oracle::exhaustive_localized_pc(d, cols, f, o.alpha, o.max_cond_size);
        auto every = oracle::brute_force_localized_pc(d, cols, f, o.alpha, o.max_cond_size);
        equal_all_subsets += got.neighbors == every.neighbors;
        if (got.neighbors == want.neighbors) {
            ++equal;
        } else {
            // Only the visiting order differs between the two searches.
            notes << " [instance " << inst << ", order-dependent: psi-pc {";
            for (auto c : got.neighbors) notes << ' ' << c;
            notes << " } exhaustive {";
            for (auto c : want.neighbors) notes << ' ' << c;
            notes << " }]";
        }
    }
    return {equal >= 48, fmt("%d/50 neighbour sets equal to the exhaustive neighbourhood oracle "
                             "(%d/50 also equal when conditioning on any other metric)",
                             equal, equal_all_subsets) +
                             notes.str()};
}

Outcome null_fault() {
    auto g = generate_topology(5, 3, 1);
    int flagged = 0, truth_hits = 0, runs = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        auto sc = fault(FaultKind::CpuHog, "svc2-ctr", Layer::Container, 0.0, 5000 + s);
        auto sim = simulate(g, sc);
        auto prep = prepare(sim.normal, sim.anomalous, kDefaultBins);
        RcdConfig rc;
        rc.seed = s;
        for (const auto &r : {rcd_localize(prep, rc), tarcd_localize(prep, g, TarcdConfig{})}) {
            ++runs;
            if (r.entries.empty() || r.low_confidence) ++flagged;
            for (const auto &e : r.entries)
                if (e.metric == sim.truth.root_cause_metric && e.p_value < kDefaultAlpha) ++truth_hits;
        }
    }
    const double rate = truth_hits / static_cast<double>(runs);
    return {flagged == runs && rate <= 0.10,
            fmt("%d/%d results empty or low-confidence, truth with p < alpha in %.1f%% of runs", flagged, runs, 100 * rate)};
}

Outcome head_to_head() {
    auto g = generate_topology(5, 3, 1);
    EvalConfig cfg;
    cfg.runs = 20;
    cfg.mode = EvalMode::RegeneratedData;
    cfg.ks = {3, 5};
    cfg.algorithms = {Algorithm::Rcd, Algorithm::Tarcd};
    auto rep = run_experiment(g, suite(1000), cfg);
    const double r3 = rep.mean_recall(Algorithm::Rcd, 3), r5 = rep.mean_recall(Algorithm::Rcd, 5);
    const double t3 = rep.mean_recall(Algorithm::Tarcd, 3), t5 = rep.mean_recall(Algorithm::Tarcd, 5);
    const double q3 = r3 > 0 ? t3 / r3 : 0.0, q5 = r5 > 0 ? t5 / r5 : 0.0;
    std::string per;
    for (const auto &r : rep.results)
        per += fmt(" %s %s R@5=%.2f;", std::string(to_string(r.algorithm)).c_str(), scenario_label(r.scenario).c_str(),
                   r.recall_at.at(5));
    return {q5 >= 2.0 && q3 >= 2.0 && t5 >= 0.6,
            fmt("R@5 ta-rcd %.2f rcd %.2f (ratio %.2f), R@3 ta-rcd %.2f rcd %.2f (ratio %.2f);", t5, r5, q5, t3, r3, q3) +
                per};
}

Outcome consistency() {
    auto g = generate_topology(5, 3, 1);
    EvalConfig cfg;
    cfg.runs = 100;
    cfg.mode = EvalMode::FixedData;
    cfg.ks = {5};
    auto rep = run_experiment(g, suite(2000), cfg);
    int ta_stable = 0, rcd_varied = 0, scenarios = 0;
    for (const auto &r : rep.results) {
        if (r.algorithm == Algorithm::Tarcd) {
            ++scenarios;
            bool same = true;
            for (const auto &run : r.per_run) same &= run.top == r.per_run.front().top;
            ta_stable += same;
        } else if (r.distinct_outcomes >= 2) {
            ++rcd_varied;
        }
    }
    return {ta_stable == scenarios && rcd_varied >= 0.8 * scenarios,
            fmt("ta-rcd identical over 100 reruns in %d/%d scenarios; rcd top-5 varies in %d/%d", ta_stable, scenarios,
                rcd_varied, scenarios)};
}

Outcome scaling() {
    ScalingOptions o;
    o.repeats = 5;
    o.seed = 11;
    auto series = scaling_probe({40, 80, 160, 320}, {Algorithm::Rcd, Algorithm::Tarcd}, o);
    bool ok = true;
    std::string d;
    for (const auto &s : series) {
        ok &= s.fit.r2 >= 0.9;
        d += fmt("%s R^2 %.3f (", std::string(to_string(s.algorithm)).c_str(), s.fit.r2);
        for (std::size_t i = 0; i < s.m.size(); ++i) d += fmt("%sm=%zu %.4fs", i ? ", " : "", s.m[i], s.mean_seconds[i]);
        d += "); ";
    }
    return {ok, d};
}

Outcome topology_contracts() {
    std::mt19937_64 rng(8);
    int matched = 0;
    for (int t = 0; t < 100; ++t) {
        auto rt = oracle::random_topology(rng);
        TopologyGraph g(rt.nodes, rt.calls, rt.hosting);
        auto want = oracle::dfs_paths(g);
        auto got = enumerate_paths(g);
        bool same = got.size() == want.size();
        for (const auto &p : got) same &= want.count(p.nodes.front()) && want.at(p.nodes.front()) == p.nodes;
        matched += same;
    }
    // Each broken document must be rejected with the offending element in the message.
    struct Bad {
        const char *doc, *offender;
    };
    const Bad bad[] = {
        {R"({"nodes":[{"id":"c","layer":"container","kind":"x"},{"id":"v1","layer":"vm","kind":"x"},{"id":"v2","layer":"vm","kind":"x"}],"call_edges":[],"hosting_edges":[["c","v1"],["c","v2"]]})", "'c'"},
        {R"({"nodes":[{"id":"c","layer":"container","kind":"x"},{"id":"v","layer":"vm","kind":"x"}],"call_edges":[],"hosting_edges":[["v","c"]]})", "v -> c"},
        {R"({"nodes":[{"id":"c","layer":"container","kind":"x"}],"call_edges":[],"hosting_edges":[["c","ghost"]]})", "'ghost'"},
        {R"({"nodes":[{"id":"a","layer":"service","kind":"x"},{"id":"c","layer":"container","kind":"x"}],"call_edges":[["a","c"]],"hosting_edges":[]})", "a -> c"},
        {R"({"nodes":[{"id":"a","layer":"service","kind":"x"},{"id":"a","layer":"service","kind":"x"}],"call_edges":[],"hosting_edges":[]})", "'a'"},
        {R"({"nodes":[{"id":"a","layer":"rack","kind":"x"}],"call_edges":[],"hosting_edges":[]})", "'rack'"},
        {R"({"nodes":[{"id":"a","layer":"service","kind":"x"}],"call_edges":[],"hosting_edges":[],"endpoint_aliases":{"e":"nobody"}})", "'nobody'"},
        {R"({"nodes":[{"id":"s","layer":"service","kind":"x"},{"id":"c","layer":"container","kind":"x"}],"call_edges":[],"hosting_edges":[["s","c"]]})", "'c'"},
    };
    int rejected = 0;
    std::string missed;
    for (const auto &b : bad) {
        try {
            auto g = load_topology(b.doc);
            enumerate_paths(g);
            missed += fmt(" accepted: %s;", b.offender);
        } catch (const Error &e) {
            if (std::string(e.what()).find(b.offender) != std::string::npos) ++rejected;
            else missed += fmt(" unnamed offender %s in '%s';", b.offender, e.what());
        }
    }
    const int total = static_cast<int>(std::size(bad));
    return {matched == 100 && rejected == total,
            fmt("%d/100 random topologies match the DFS oracle; %d/%d invalid documents rejected naming the offender", matched,
                rejected, total) +
                missed};
}

Outcome partition_purity() {
    std::mt19937_64 rng(9);
    auto g = generate_topology(5, 3, 1);
    FaultScenario sc = fault(FaultKind::CpuHog, "svc2-ctr", Layer::Container, 0.4, 1);
    auto sim = simulate(g, sc);
    auto prep = prepare(sim.normal, sim.anomalous, kDefaultBins);
    const auto &ms = prep.metrics;
    auto paths = enumerate_paths(g);
    std::vector<std::vector<std::size_t>> on_path;
    for (const auto &p : paths) on_path.push_back(metrics_on_path(g, p, ms).on_path);

    int mixed = 0, checked = 0;
    for (int t = 0; t < 1000; ++t) {
        std::vector<std::size_t> items;
        for (std::size_t i = 0; i < ms.size(); ++i)
            if (rng() % 4 == 0) items.push_back(i);
        const int gamma = 2 + static_cast<int>(rng() % 6);
        if (t % 2 == 0) {
            for (const auto &s : layer_resource_partition(ms, items, gamma)) {
                ++checked;
                for (std::size_t i : s)
                    if (ms[i].layer != ms[s[0]].layer || ms[i].resource != ms[s[0]].resource || s.size() > std::size_t(gamma)) {
                        ++mixed;
                        break;
                    }
            }
        } else {
            // phase 2 on a random candidate set
            TarcdConfig cfg;
            cfg.gamma = gamma;
            Candidates p1{items, std::vector<double>(items.size(), 0.0)};
            if (items.empty()) continue;
            Phase2Trace tr;
            phase2_weighted(prep, p1, g, cfg, &tr);
            for (std::size_t s = 0; s < tr.subsets.size(); ++s) {
                ++checked;
                const auto &sub = tr.subsets[s];
                const auto &allowed = on_path[tr.subset_path[s]];
                for (std::size_t i : sub)
                    if (ms[i].resource != ms[sub[0]].resource ||
                        std::find(allowed.begin(), allowed.end(), i) == allowed.end() || sub.size() > std::size_t(gamma)) {
                        ++mixed;
                        break;
                    }
            }
        }
    }
    return {mixed == 0, fmt("%d impure subsets among %d checked over 1000 partitions", mixed, checked)};
}

Outcome metric_visibility() {
    auto g = generate_topology(5, 3, 1);
    int service_only_vm = 0, full_vm_cpu = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto sim = simulate(g, fault(FaultKind::CpuHog, "vm2", Layer::VirtualMachine, 0.4, 3000 + s));
        std::vector<MetricId> service;
        for (const auto &m : sim.normal.metrics())
            if (m.layer == Layer::ServiceInstance) service.push_back(m);
        RcdConfig rc;
        rc.seed = s;
        auto a = rcd_localize(project(sim.normal, service), project(sim.anomalous, service), rc);
        for (const auto &e : a.entries)
            if (e.metric.layer == Layer::VirtualMachine) {
                ++service_only_vm;
                break;
            }
        auto b = rcd_localize(sim.normal, sim.anomalous, rc);
        for (const auto &e : b.entries)
            if (e.metric.layer == Layer::VirtualMachine && e.metric.resource == Resource::Cpu) {
                ++full_vm_cpu;
                break;
            }
    }
    return {service_only_vm == 0 && full_vm_cpu >= 10,
            fmt("service-only runs with a VM metric in top-5: %d/20; full set with a VM cpu metric in top-5: %d/20",
                service_only_vm, full_vm_cpu)};
}

std::set<int> parse_ids(const std::string &s) {
    std::set<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.insert(std::stoi(tok));
    return out;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Acceptance criteria"};
    std::string only_s, red_s;
    app.add_option("--only", only_s, "Run only these criteria (comma separated)");
    app.add_option("--known-red", red_s, "Criteria expected to fail (comma separated)");
    CLI11_PARSE(app, argc, argv);
    const auto only = parse_ids(only_s), red = parse_ids(red_s);

    const std::vector<Criterion> criteria{
        {1, "catalog fidelity", 1, catalog_fidelity},
        {2, "CI-test correctness", 10, ci_correctness},
        {3, "psi-PC oracle equivalence", 60, psi_pc_oracle},
        {4, "null-fault sanity", 60, null_fault},
        {5, "head-to-head recall", 900, head_to_head},
        {6, "consistency", 600, consistency},
        {7, "scaling", 600, scaling},
        {8, "topology contracts", 30, topology_contracts},
        {9, "partition purity", 30, partition_purity},
        {10, "metric-selection visibility", 300, metric_visibility},
    };

    int unexpected = 0;
    for (const auto &c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.budget_s;
        const bool pass = o.pass && in_time;
        std::printf("%s [%d] %s: %s (%.2fs, budget %.0fs%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                    secs, c.budget_s, in_time ? "" : ", over budget");
        if (red.count(c.id)) {
            std::printf("     [%d] listed as known red%s\n", c.id, pass ? " but passed; drop it from --known-red" : "");
        } else if (!pass) {
            ++unexpected;
        }
        std::fflush(stdout);
    }
    return unexpected == 0 ? 0 : 1;
}
