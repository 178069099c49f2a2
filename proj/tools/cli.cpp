#include "cli.h"

#include <filesystem>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rca/catalog.h"
#include "rca/eval.h"
#include "rca/io.h"
#include "rca/rcd.h"
#include "rca/simulator.h"
#include "rca/tarcd.h"
#include "rca/topology.h"

namespace rca::cli {

using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t> &flag, std::ostream &err) {
    if (flag) return *flag;
    std::random_device rd;
    const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    err << "seed: " << seed << "\n";
    return seed;
}

std::vector<int> parse_int_list(const std::string &s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception &) {
            throw UsageError("bad integer list '" + s + "'");
        }
    }
    if (out.empty()) throw UsageError("empty integer list");
    return out;
}

std::vector<std::string> split_list(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

Layer parse_fault_layer(const std::string &s) {
    auto l = parse_layer(s);
    if (!l || (*l != Layer::Container && *l != Layer::VirtualMachine))
        throw UsageError("--layer must be 'container' or 'vm'");
    return *l;
}

FaultKind parse_kind(const std::string &s) {
    auto k = parse_fault_kind(s);
    if (!k) throw UsageError("unknown fault kind '" + s + "'");
    return *k;
}

double default_magnitude(FaultKind k) { return k == FaultKind::NetworkDelay ? 100.0 : 0.4; }

// A service name may stand for the container or VM it runs on.
std::string resolve_target(const TopologyGraph &g, const std::string &target, Layer layer) {
    const TopologyNode *n = g.find(target);
    if (!n || n->layer == layer) return target;
    std::string cur = target;
    while (const TopologyNode *node = g.find(cur)) {
        if (node->layer == layer && node->kind != NodeKind::Pod) return cur;
        auto host = g.host_of(cur);
        if (!host) break;
        cur = *host;
    }
    return target;
}

void write_or_print(const std::string &path, const std::string &content, std::ostream &out) {
    if (path.empty() || path == "-")
        out << content;
    else
        write_text_file_atomic(path, content);
}

struct AlgoFlags {
    int gamma = 4;
    int k = 5;
    double alpha = kDefaultAlpha;
    int bins = kDefaultBins;
    int max_cond = 2;
    int workers = 1;

    void add(CLI::App *app, bool with_k = true) {
        app->add_option("--gamma", gamma, "Subset size for per-subset discovery")->check(CLI::Range(2, 1 << 20));
        if (with_k) app->add_option("--k", k, "Number of root causes to report")->check(CLI::PositiveNumber);
        app->add_option("--alpha", alpha, "Significance level of the CI tests")->check(CLI::Range(0.0, 1.0));
        app->add_option("--bins", bins, "Equal-frequency bins per metric")->check(CLI::Range(2, 255));
        app->add_option("--max-cond", max_cond, "Largest conditioning set size")->check(CLI::NonNegativeNumber);
        app->add_option("--workers", workers, "Worker threads for the kernels")->check(CLI::PositiveNumber);
    }
    AlgorithmParams params() const { return {gamma, k, alpha, bins, max_cond, workers}; }
    json echo() const {
        return {{"gamma", gamma}, {"k", k}, {"alpha", alpha}, {"bins", bins}, {"max_cond_size", max_cond},
                {"workers", workers}};
    }
};

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Topology-aware root cause localization for layered microservice deployments", "rca"};
    app.require_subcommand(1);

    // simulate
    auto *sim = app.add_subcommand("simulate", "Generate a topology and a normal/anomalous dataset pair");
    int services = 5, vms = 3;
    std::string fault_s, layer_s, target, topo_in, out_dir = ".";
    std::optional<double> magnitude;
    std::optional<std::uint64_t> sim_seed;
    SimulationOptions sopt;
    double normal_dur = 300.0, anomalous_dur = 300.0;
    sim->add_option("--services", services, "Number of services")->check(CLI::PositiveNumber);
    sim->add_option("--vms", vms, "Number of virtual machines")->check(CLI::PositiveNumber);
    sim->add_option("--topology", topo_in, "Use this topology file instead of generating one")
        ->check(CLI::ExistingFile);
    sim->add_option("--fault", fault_s, "cpu-hog | memory-leak | net-delay")->required();
    sim->add_option("--layer", layer_s, "container | vm")->required();
    sim->add_option("--target", target, "Faulty node (a service name selects its container or VM)")->required();
    sim->add_option("--magnitude", magnitude, "Capacity fraction, or delay in ms for net-delay");
    sim->add_option("--normal-duration", normal_dur, "Seconds of normal operation");
    sim->add_option("--anomalous-duration", anomalous_dur, "Seconds under the fault");
    sim->add_option("--interval", sopt.interval, "Sampling interval in seconds")->check(CLI::PositiveNumber);
    sim->add_option("--users-mean", sopt.workload_mean_users, "Mean concurrent users");
    sim->add_option("--users-std", sopt.workload_std_users, "Standard deviation of concurrent users");
    sim->add_option("--noise", sopt.noise_fraction, "Measurement noise as a fraction of signal");
    sim->add_option("--seed", sim_seed, "Seed for topology and data");
    sim->add_option("--out", out_dir, "Output directory");

    // localize
    auto *loc = app.add_subcommand("localize", "Rank root-cause metrics for a dataset pair");
    std::string normal_path, anomalous_path, topo_path, algo_s = "tarcd", report_path;
    std::optional<std::uint64_t> loc_seed;
    AlgoFlags loc_flags;
    loc->add_option("--normal", normal_path, "CSV of the normal window")->required()->check(CLI::ExistingFile);
    loc->add_option("--anomalous", anomalous_path, "CSV of the anomalous window")
        ->required()
        ->check(CLI::ExistingFile);
    loc->add_option("--topology", topo_path, "Topology JSON (required for tarcd)")->check(CLI::ExistingFile);
    loc->add_option("--algo", algo_s, "rcd | tarcd | tarcd-density");
    loc->add_option("--seed", loc_seed, "Seed for RCD's random partitions");
    loc->add_option("--out", report_path, "Report path (stdout when omitted)");
    loc_flags.add(loc);

    // evaluate
    auto *ev = app.add_subcommand("evaluate", "Repeated-run recall and timing comparison");
    int ev_services = 5, ev_vms = 3, runs = 100;
    std::string ev_topo, scenarios_s, ks_s = "1,3,5", mode_s = "fixed", algos_s = "rcd,tarcd", ev_out, ev_csv,
                                     scaling_s;
    std::optional<std::uint64_t> ev_seed;
    AlgoFlags ev_flags;
    int repeats = 5;
    ev->add_option("--services", ev_services, "Services in the generated topology")->check(CLI::PositiveNumber);
    ev->add_option("--vms", ev_vms, "VMs in the generated topology")->check(CLI::PositiveNumber);
    ev->add_option("--topology", ev_topo, "Use this topology file")->check(CLI::ExistingFile);
    ev->add_option("--scenarios", scenarios_s,
                   "kind:layer:target[:magnitude], comma separated (default: 3 kinds x 2 layers on svc2)");
    ev->add_option("--runs", runs, "Runs per scenario")->check(CLI::PositiveNumber);
    ev->add_option("--k", ks_s, "Recall cut-offs, comma separated");
    ev->add_option("--mode", mode_s, "fixed | regenerated");
    ev->add_option("--algos", algos_s, "Algorithms, comma separated");
    ev->add_option("--seed", ev_seed, "Base seed");
    ev->add_option("--out", ev_out, "JSON report path (stdout when omitted)");
    ev->add_option("--csv", ev_csv, "Flat CSV report path");
    ev->add_option("--scaling", scaling_s, "Run the runtime-vs-m probe over these metric counts instead");
    ev->add_option("--repeats", repeats, "Timing repeats per point of the scaling probe")->check(CLI::PositiveNumber);
    ev_flags.add(ev, false);

    // catalog
    auto *cat = app.add_subcommand("catalog", "Inspect or export the metric catalog");
    bool counts = false;
    std::string export_path, catalog_file;
    cat->add_flag("--counts", counts, "Print per-layer entry counts");
    cat->add_option("--export", export_path, "Write the catalog as TSV ('-' for stdout)");
    cat->add_option("--file", catalog_file, "Load this catalog instead of the default")->check(CLI::ExistingFile);

    // paths
    auto *paths = app.add_subcommand("paths", "List end-to-end paths of a topology");
    std::string paths_topo;
    paths->add_option("--topology", paths_topo, "Topology JSON")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*sim) {
            const FaultKind kind = parse_kind(fault_s);
            const Layer layer = parse_fault_layer(layer_s);
            const std::uint64_t seed = resolve_seed(sim_seed, err);
            TopologyGraph graph = topo_in.empty() ? generate_topology(services, vms, seed) : load_topology_file(topo_in);
            FaultScenario sc;
            sc.kind = kind;
            sc.target_layer = layer;
            sc.target_node = resolve_target(graph, target, layer);
            sc.magnitude = magnitude.value_or(default_magnitude(kind));
            sc.normal_duration = normal_dur;
            sc.anomalous_duration = anomalous_dur;
            sc.seed = seed;
            SimulationResult r = simulate(graph, sc, sopt);

            std::filesystem::create_directories(out_dir);
            const std::filesystem::path dir(out_dir);
            write_text_file_atomic((dir / "D.csv").string(), dataset_to_csv(r.normal));
            write_text_file_atomic((dir / "Dstar.csv").string(), dataset_to_csv(r.anomalous));
            write_text_file_atomic((dir / "topology.json").string(), topology_to_json(graph));
            json manifest = manifest_json(sc, sopt, r.truth);
            manifest["files"] = {{"normal", "D.csv"}, {"anomalous", "Dstar.csv"}, {"topology", "topology.json"}};
            manifest["topology"] = {{"services", services}, {"vms", vms}, {"generated", topo_in.empty()}};
            write_text_file_atomic((dir / "manifest.json").string(), manifest.dump(2) + "\n");
            out << "wrote " << (dir / "D.csv").string() << ", " << (dir / "Dstar.csv").string() << ", "
                << (dir / "topology.json").string() << ", " << (dir / "manifest.json").string() << "\n"
                << "ground truth: " << r.truth.root_cause_metric.key() << "\n";
            return kExitOk;
        }

        if (*loc) {
            auto algo = parse_algorithm(algo_s);
            if (!algo) throw UsageError("unknown --algo '" + algo_s + "'");
            if (*algo != Algorithm::Rcd && topo_path.empty()) throw UsageError("--topology is required for " + algo_s);
            const std::uint64_t seed = resolve_seed(loc_seed, err);
            // Validate every input before running anything.
            TimeSeriesDataset normal = load_dataset_file(normal_path);
            TimeSeriesDataset anomalous = load_dataset_file(anomalous_path);
            TopologyGraph graph = topo_path.empty() ? TopologyGraph{} : load_topology_file(topo_path);
            RankedRootCauses result = localize(*algo, normal, anomalous, graph, loc_flags.params(), seed);
            json report = ranked_to_json(result);
            report["schema_version"] = kSchemaVersion;
            report["algorithm"] = to_string(*algo);
            json cfg = loc_flags.echo();
            cfg["seed"] = seed;
            cfg["normal"] = normal_path;
            cfg["anomalous"] = anomalous_path;
            if (!topo_path.empty()) cfg["topology"] = topo_path;
            report["config"] = cfg;
            write_or_print(report_path, report.dump(2) + "\n", out);
            return kExitOk;
        }

        if (*ev) {
            const std::uint64_t seed = resolve_seed(ev_seed, err);
            EvalConfig config;
            config.algorithms.clear();
            for (const auto &a : split_list(algos_s, ',')) {
                auto algo = parse_algorithm(a);
                if (!algo) throw UsageError("unknown algorithm '" + a + "'");
                config.algorithms.push_back(*algo);
            }
            if (config.algorithms.empty()) throw UsageError("--algos is empty");
            config.params = ev_flags.params();

            if (!scaling_s.empty()) {
                std::vector<std::size_t> ms;
                for (int m : parse_int_list(scaling_s)) {
                    if (m < 1) throw UsageError("metric counts must be >= 1");
                    ms.push_back(static_cast<std::size_t>(m));
                }
                ScalingOptions so;
                so.repeats = repeats;
                so.seed = seed;
                so.params = config.params;
                json report = scaling_to_json(scaling_probe(ms, config.algorithms, so));
                report["config"] = {{"seed", seed}, {"repeats", repeats}};
                write_or_print(ev_out, report.dump(2) + "\n", out);
                return kExitOk;
            }

            config.runs = runs;
            config.base_seed = seed;
            config.ks = parse_int_list(ks_s);
            for (int k : config.ks)
                if (k < 1) throw UsageError("--k values must be >= 1");
            auto mode = parse_eval_mode(mode_s);
            if (!mode) throw UsageError("--mode must be 'fixed' or 'regenerated'");
            config.mode = *mode;

            TopologyGraph graph = ev_topo.empty() ? generate_topology(ev_services, ev_vms, seed)
                                                  : load_topology_file(ev_topo);
            std::vector<FaultScenario> scenarios;
            if (scenarios_s.empty()) {
                const std::string svc = graph.find("svc2") ? "svc2" : "svc1";
                for (FaultKind kind : {FaultKind::CpuHog, FaultKind::MemoryLeak, FaultKind::NetworkDelay})
                    for (Layer layer : {Layer::Container, Layer::VirtualMachine}) {
                        FaultScenario sc;
                        sc.kind = kind;
                        sc.target_layer = layer;
                        sc.target_node = resolve_target(graph, svc, layer);
                        sc.magnitude = default_magnitude(kind);
                        sc.seed = seed;
                        scenarios.push_back(sc);
                    }
            } else {
                for (const auto &spec : split_list(scenarios_s, ',')) {
                    auto parts = split_list(spec, ':');
                    if (parts.size() < 3 || parts.size() > 4)
                        throw UsageError("scenario '" + spec + "' is not kind:layer:target[:magnitude]");
                    FaultScenario sc;
                    sc.kind = parse_kind(parts[0]);
                    sc.target_layer = parse_fault_layer(parts[1]);
                    sc.target_node = resolve_target(graph, parts[2], sc.target_layer);
                    try {
                        sc.magnitude = parts.size() == 4 ? std::stod(parts[3]) : default_magnitude(sc.kind);
                    } catch (const std::exception &) {
                        throw UsageError("bad magnitude in '" + spec + "'");
                    }
                    sc.seed = seed;
                    scenarios.push_back(sc);
                }
            }
            EvalReport report = run_experiment(graph, scenarios, config);
            json j = report.to_json();
            j["config"]["workers"] = config.params.workers;
            write_or_print(ev_out, j.dump(2) + "\n", out);
            if (!ev_csv.empty()) write_text_file_atomic(ev_csv, report.to_csv());
            return kExitOk;
        }

        if (*cat) {
            const MetricCatalog catalog =
                catalog_file.empty() ? MetricCatalog::default_catalog() : MetricCatalog::load_file(catalog_file);
            if (!counts && export_path.empty()) counts = true;
            if (counts) {
                auto c = catalog_counts(catalog);
                out << "service:" << c[Layer::ServiceInstance] << " container:" << c[Layer::Container]
                    << " vm:" << c[Layer::VirtualMachine] << " pm:" << c[Layer::PhysicalMachine] << "\n";
            }
            if (!export_path.empty()) write_or_print(export_path, catalog.to_tsv(), out);
            return kExitOk;
        }

        if (*paths) {
            TopologyGraph graph = load_topology_file(paths_topo);
            for (const auto &p : enumerate_paths(graph)) {
                for (std::size_t i = 0; i < p.nodes.size(); ++i) out << (i ? " -> " : "") << p.nodes[i];
                out << "\n";
            }
            return kExitOk;
        }
    } catch (const UsageError &e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error &e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::filesystem::filesystem_error &e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}

} // namespace rca::cli
