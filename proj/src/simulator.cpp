#include "rca/simulator.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "rca/catalog.h"

namespace rca {

std::string_view to_string(FaultKind k) {
    switch (k) {
    case FaultKind::CpuHog: return "cpu-hog";
    case FaultKind::MemoryLeak: return "memory-leak";
    case FaultKind::NetworkDelay: return "net-delay";
    }
    return "?";
}

std::optional<FaultKind> parse_fault_kind(std::string_view s) {
    if (s == "cpu-hog") return FaultKind::CpuHog;
    if (s == "memory-leak") return FaultKind::MemoryLeak;
    if (s == "net-delay") return FaultKind::NetworkDelay;
    return std::nullopt;
}

namespace {

std::uint64_t splitmix(std::uint64_t &state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double unit(std::uint64_t &state) { return static_cast<double>(splitmix(state) >> 11) * 0x1.0p-53; }

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Stable per-edge call fan-out in [0.4, 0.9], independent of the data seed.
double call_fraction(const std::string &src, const std::string &dst) {
    std::uint64_t s = fnv1a(src + "->" + dst);
    return 0.4 + 0.5 * unit(s);
}

} // namespace

TopologyGraph generate_topology(int services, int vms, std::uint64_t seed) {
    if (services < 1 || vms < 1) throw Error(ErrorCode::InvalidArgument, "need at least one service and one VM");
    std::vector<TopologyNode> nodes;
    std::vector<TopologyGraph::Edge> calls, hosting;
    auto svc = [](int i) { return "svc" + std::to_string(i); };
    auto vm = [](int i) { return "vm" + std::to_string(i); };

    nodes.push_back({"pm1", Layer::PhysicalMachine, NodeKind::PhysicalMachine, "PhysicalMachine"});
    for (int j = 1; j <= vms; ++j) {
        nodes.push_back({vm(j), Layer::VirtualMachine, NodeKind::VirtualMachine, "VirtualMachine"});
        hosting.emplace_back(vm(j), "pm1");
    }
    std::uint64_t state = seed;
    for (int i = 1; i <= services; ++i) {
        const std::string ctr = svc(i) + "-ctr";
        nodes.push_back({svc(i), Layer::ServiceInstance, NodeKind::Microservice, "Microservice"});
        nodes.push_back({ctr, Layer::Container, NodeKind::Container, "Container"});
        hosting.emplace_back(svc(i), ctr);
        hosting.emplace_back(ctr, vm((i - 1) % vms + 1));
        if (i == 1) continue;
        // A random spanning tree rooted at svc1, plus occasional extra
        // edges from older services; edges always go from lower to higher
        // index, so the call graph stays acyclic.
        const int parent = 1 + static_cast<int>(unit(state) * (i - 1));
        calls.emplace_back(svc(parent), svc(i));
        if (i > 2 && unit(state) < 0.3) {
            int extra = 1 + static_cast<int>(unit(state) * (i - 1));
            if (extra != parent) calls.emplace_back(svc(extra), svc(i));
        }
    }
    return TopologyGraph(std::move(nodes), std::move(calls), std::move(hosting));
}

GroundTruth ground_truth_for(const FaultScenario &scenario) {
    const bool ctr = scenario.target_layer == Layer::Container;
    MetricId m;
    m.endpoint = scenario.target_node;
    m.layer = scenario.target_layer;
    switch (scenario.kind) {
    case FaultKind::CpuHog:
        m.cls = MetricClass::State;
        m.name = ctr ? "container_cpu_utilization" : "node_cpu_utilization";
        m.resource = Resource::Cpu;
        break;
    case FaultKind::MemoryLeak:
        m.cls = MetricClass::State;
        m.name = ctr ? "container_memory_utilization" : "node_memory_utilization";
        m.resource = Resource::Memory;
        break;
    case FaultKind::NetworkDelay:
        m.cls = MetricClass::Activity;
        m.name = ctr ? "container_network_transmit_throughput" : "node_network_transmit_throughput";
        m.resource = Resource::Network;
        break;
    }
    return {m};
}

void validate_scenario(const TopologyGraph &graph, const FaultScenario &scenario,
                       const SimulationOptions &options) {
    auto fail = [](const std::string &msg) { throw Error(ErrorCode::InvalidScenario, msg); };
    if (scenario.target_layer != Layer::Container && scenario.target_layer != Layer::VirtualMachine)
        fail("faults target the container or vm layer");
    const TopologyNode *node = graph.find(scenario.target_node);
    if (!node) fail("target '" + scenario.target_node + "' is not in the topology");
    const NodeKind want =
        scenario.target_layer == Layer::Container ? NodeKind::Container : NodeKind::VirtualMachine;
    if (node->kind != want)
        fail("target '" + scenario.target_node + "' is not a " + std::string(to_string(scenario.target_layer)));
    if (!(scenario.magnitude >= 0.0) || !std::isfinite(scenario.magnitude)) fail("magnitude must be >= 0");
    if (scenario.kind != FaultKind::NetworkDelay && scenario.magnitude > 1.0)
        fail("cpu-hog and memory-leak magnitudes are fractions of capacity (<= 1)");
    if (!(options.interval > 0.0)) fail("interval must be positive");
    for (double d : {scenario.normal_duration, scenario.anomalous_duration}) {
        if (!(d > 0.0)) fail("durations must be positive");
        const double ticks = d / options.interval;
        if (std::abs(ticks - std::round(ticks)) > 1e-9 || std::round(ticks) < 1)
            fail("interval must divide the durations");
    }
    if (!(options.workload_mean_users >= 0.0) || !(options.workload_std_users >= 0.0))
        fail("workload parameters must be non-negative");
    if (!(options.noise_fraction >= 0.0)) fail("noise fraction must be non-negative");
}

namespace {

// Coupling constants of the structural model. Effects that stay inside the
// faulty node's own resource are kept weak relative to their noise; effects
// that cross into the service layer are amplified through queueing.
struct Physics {
    double requests_per_user = 2.0;
    double rate_jitter = 0.03;

    double ctr_cpu_base = 0.05, ctr_cpu_per_req = 0.004, ctr_quota = 1.0;
    double ctr_mem_base = 0.30, ctr_mem_per_req = 0.0008;
    double tx_per_req = 2000.0, rx_per_req = 1500.0, bytes_per_packet = 800.0;
    double io_per_req = 40.0, ops_per_req = 0.6;

    double vm_cores = 4.0, vm_overhead = 0.1;
    double vm_mem_base = 0.2, ctr_mem_share = 0.3;
    double vm_background_tx = 50000.0;
    double vm_background_cpu = 0.2, vm_background_cpu_std = 0.3; ///< cores used by processes outside the containers
    double pm_background_cpu = 2.0, pm_background_cpu_std = 1.0; ///< other tenants' guests on the machine
    double contention_knee = 0.7; ///< VM utilisation where hosted containers start to queue

    double mem_knee = 0.35; ///< occupancy where garbage collection starts to cost latency

    double base_latency_ms = 20.0;
    double net_tau_ms = 200.0; ///< delay at which egress throughput halves
    double vm_delay_passthrough = 0.5;

    double effect_noise = 8.0; ///< noise multiplier for same-node side effects
    double contention_latency_gain = 2.0, memory_latency_gain = 3.0;
};

struct Plan {
    std::vector<std::string> services, containers, vms, pms;
    std::vector<std::size_t> svc_ctr, ctr_vm, vm_pm;
    std::vector<std::vector<std::pair<std::size_t, double>>> callers; ///< per service
    std::vector<std::size_t> topo; ///< services, callers before callees
};

Plan make_plan(const TopologyGraph &graph) {
    Plan p;
    std::map<std::string, std::size_t> ctr_ix, vm_ix, pm_ix, svc_ix;
    auto intern = [](std::map<std::string, std::size_t> &ix, std::vector<std::string> &names, const std::string &id) {
        auto [it, inserted] = ix.emplace(id, names.size());
        if (inserted) names.push_back(id);
        return it->second;
    };
    // enumerate_paths sorts by service id and fails on broken chains
    for (const EndToEndPath &path : enumerate_paths(graph)) {
        if (path.nodes.size() != 4 || graph.find(path.nodes[1])->kind != NodeKind::Container)
            throw Error(ErrorCode::InvalidScenario,
                        "service '" + path.nodes[0] + "' must run in a container on a VM on a machine");
        svc_ix.emplace(path.nodes[0], p.services.size());
        p.services.push_back(path.nodes[0]);
        const std::size_t c = intern(ctr_ix, p.containers, path.nodes[1]);
        const std::size_t v = intern(vm_ix, p.vms, path.nodes[2]);
        const std::size_t m = intern(pm_ix, p.pms, path.nodes[3]);
        p.svc_ctr.push_back(c);
        if (p.ctr_vm.size() <= c) p.ctr_vm.resize(c + 1);
        p.ctr_vm[c] = v;
        if (p.vm_pm.size() <= v) p.vm_pm.resize(v + 1);
        p.vm_pm[v] = m;
    }
    // Idle machines still report metrics.
    for (const auto &n : graph.nodes()) {
        if (n.kind == NodeKind::VirtualMachine && !vm_ix.count(n.id)) {
            auto host = graph.host_of(n.id);
            const TopologyNode *h = host ? graph.find(*host) : nullptr;
            if (!h || h->kind != NodeKind::PhysicalMachine)
                throw Error(ErrorCode::InvalidScenario, "vm '" + n.id + "' has no physical host");
            intern(vm_ix, p.vms, n.id);
            p.vm_pm.push_back(intern(pm_ix, p.pms, h->id));
        } else if (n.kind == NodeKind::PhysicalMachine) {
            intern(pm_ix, p.pms, n.id);
        }
    }

    p.callers.resize(p.services.size());
    std::vector<std::vector<std::size_t>> callees(p.services.size());
    std::vector<int> indeg(p.services.size(), 0);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto &[src, dst] : graph.call_edges()) {
        auto a = svc_ix.at(src), b = svc_ix.at(dst);
        if (a == b || !seen.emplace(a, b).second) continue;
        p.callers[b].emplace_back(a, call_fraction(src, dst));
        callees[a].push_back(b);
        ++indeg[b];
    }
    // Kahn's order; services left on a cycle are appended in id order and
    // their unresolved callers ignored.
    std::vector<char> done(p.services.size(), 0);
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < indeg.size(); ++i)
        if (indeg[i] == 0) ready.push_back(i);
    while (!ready.empty()) {
        std::size_t s = *std::min_element(ready.begin(), ready.end());
        ready.erase(std::find(ready.begin(), ready.end(), s));
        p.topo.push_back(s);
        done[s] = 1;
        for (std::size_t b : callees[s])
            if (--indeg[b] == 0) ready.push_back(b);
    }
    for (std::size_t i = 0; i < done.size(); ++i)
        if (!done[i]) p.topo.push_back(i);
    return p;
}

class Generator {
public:
    Generator(const Plan &plan, const FaultScenario &sc, const SimulationOptions &opt)
        : plan_(plan), sc_(sc), opt_(opt), rng_(sc.seed) {
        const auto &cat = MetricCatalog::default_catalog();
        auto add_node = [&](Layer layer, const std::string &id) {
            for (const CatalogEntry *e : cat.entries_for(layer))
                metrics_.push_back({e->cls, e->name_pattern, id, layer, e->resource});
        };
        for (const auto &id : plan.pms) add_node(Layer::PhysicalMachine, id);
        for (const auto &id : plan.vms) add_node(Layer::VirtualMachine, id);
        for (const auto &id : plan.containers) add_node(Layer::Container, id);
        for (const auto &id : plan.services) add_node(Layer::ServiceInstance, id);

        const std::size_t nv = plan.vms.size(), nc = plan.containers.size();
        hog_ctr_.assign(nc, 0.0);
        leak_ctr_.assign(nc, 0.0);
        delay_ctr_.assign(nc, 0.0);
        hog_vm_.assign(nv, 0.0);
        leak_vm_.assign(nv, 0.0);
        delay_vm_.assign(nv, 0.0);
        if (sc.target_layer == Layer::Container)
            target_ = static_cast<std::size_t>(
                std::find(plan.containers.begin(), plan.containers.end(), sc.target_node) - plan.containers.begin());
        else
            target_ = static_cast<std::size_t>(std::find(plan.vms.begin(), plan.vms.end(), sc.target_node) -
                                               plan.vms.begin());
    }

    const std::vector<MetricId> &metrics() const { return metrics_; }

    /// Appends one tick to `out` (column-major buffers, one per metric).
    void tick(bool anomalous, double progress, std::vector<std::vector<double>> &out);

private:
    double normal() { return gauss_(rng_); }
    double meas(double v, double scale, double mult = 1.0) {
        return std::max(0.0, v + normal() * opt_.noise_fraction * scale * mult);
    }
    double frac(double v, double scale, double mult = 1.0) { return std::clamp(meas(v, scale, mult), 0.0, 1.0); }
    void set_fault(bool anomalous, double progress);

    const Plan &plan_;
    const FaultScenario &sc_;
    const SimulationOptions &opt_;
    Physics ph_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> gauss_{0.0, 1.0};
    std::vector<MetricId> metrics_;
    std::size_t target_ = 0;
    std::vector<double> hog_ctr_, leak_ctr_, delay_ctr_, hog_vm_, leak_vm_, delay_vm_;
};

void Generator::set_fault(bool anomalous, double progress) {
    std::fill(hog_ctr_.begin(), hog_ctr_.end(), 0.0);
    std::fill(leak_ctr_.begin(), leak_ctr_.end(), 0.0);
    std::fill(delay_ctr_.begin(), delay_ctr_.end(), 0.0);
    std::fill(hog_vm_.begin(), hog_vm_.end(), 0.0);
    std::fill(leak_vm_.begin(), leak_vm_.end(), 0.0);
    std::fill(delay_vm_.begin(), delay_vm_.end(), 0.0);
    if (!anomalous) return;
    const bool ctr = sc_.target_layer == Layer::Container;
    const double m = sc_.magnitude;
    switch (sc_.kind) {
    case FaultKind::CpuHog: (ctr ? hog_ctr_ : hog_vm_)[target_] = m; break;
    case FaultKind::MemoryLeak: (ctr ? leak_ctr_ : leak_vm_)[target_] = m * progress; break;
    case FaultKind::NetworkDelay: (ctr ? delay_ctr_ : delay_vm_)[target_] = m; break;
    }
}

void Generator::tick(bool anomalous, double progress, std::vector<std::vector<double>> &out) {
    set_fault(anomalous, progress);
    const Plan &p = plan_;
    const std::size_t ns = p.services.size(), nc = p.containers.size(), nv = p.vms.size(), nm = p.pms.size();
    const double dt = opt_.interval;

    double users = 0.0;
    for (int attempt = 0; attempt < 64; ++attempt) {
        users = opt_.workload_mean_users + opt_.workload_std_users * normal();
        if (users >= 0.0) break;
        users = 0.0;
    }

    // Request rates flow along the call graph.
    std::vector<double> rate(ns, 0.0);
    for (std::size_t s : p.topo) {
        double r = 0.0;
        if (p.callers[s].empty()) r = ph_.requests_per_user * users;
        for (auto [a, f] : p.callers[s]) r += rate[a] * f;
        rate[s] = std::max(0.0, r * (1.0 + ph_.rate_jitter * normal()));
    }

    std::vector<double> req(nc, 0.0), demand(nc), mem(nc), tx_offered(nc), rx(nc), io(nc), ops(nc);
    for (std::size_t s = 0; s < ns; ++s) req[p.svc_ctr[s]] += rate[s];
    for (std::size_t c = 0; c < nc; ++c) {
        demand[c] = (ph_.ctr_cpu_base + ph_.ctr_cpu_per_req * req[c]) * (1.0 + ph_.rate_jitter * normal());
        mem[c] = (ph_.ctr_mem_base + ph_.ctr_mem_per_req * req[c]) * (1.0 + 0.02 * normal()) + leak_ctr_[c];
        tx_offered[c] = ph_.tx_per_req * req[c] * (1.0 + ph_.rate_jitter * normal());
        rx[c] = ph_.rx_per_req * req[c] * (1.0 + ph_.rate_jitter * normal());
        io[c] = ph_.io_per_req * req[c] * (1.0 + ph_.rate_jitter * normal());
        ops[c] = ph_.ops_per_req * req[c] * (1.0 + ph_.rate_jitter * normal());
    }

    // VM-level aggregation and contention.
    std::vector<double> vm_demand(nv, ph_.vm_overhead), vm_mem(nv, ph_.vm_mem_base), vm_tx(nv, ph_.vm_background_tx),
        vm_rx(nv, 0.0), vm_io(nv, 0.0), vm_ops(nv, 0.0), contention(nv, 0.0), vm_mem_press(nv, 0.0);
    std::vector<double> tx(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        const std::size_t v = p.ctr_vm[c];
        const double egress_delay = delay_ctr_[c] + ph_.vm_delay_passthrough * delay_vm_[v];
        tx[c] = tx_offered[c] / (1.0 + egress_delay / ph_.net_tau_ms);
        vm_demand[v] += demand[c] + hog_ctr_[c] * ph_.ctr_quota;
        vm_mem[v] += ph_.ctr_mem_share * mem[c] / 2.0;
        vm_tx[v] += tx[c];
        vm_rx[v] += rx[c];
        vm_io[v] += io[c];
        vm_ops[v] += ops[c];
    }
    std::vector<double> vm_util(nv), vm_tx_out(nv);
    for (std::size_t v = 0; v < nv; ++v) {
        const double background = std::max(0.0, ph_.vm_background_cpu + ph_.vm_background_cpu_std * normal());
        vm_demand[v] = vm_demand[v] * (1.0 + 0.02 * normal()) + background + hog_vm_[v] * ph_.vm_cores;
        vm_util[v] = std::min(1.0, vm_demand[v] / ph_.vm_cores);
        contention[v] = std::max(0.0, vm_demand[v] / ph_.vm_cores - ph_.contention_knee) / (1.0 - ph_.contention_knee);
        vm_mem[v] = vm_mem[v] * (1.0 + 0.02 * normal()) + leak_vm_[v];
        vm_mem_press[v] = std::max(0.0, vm_mem[v] - ph_.mem_knee) / (1.0 - ph_.mem_knee);
        vm_tx_out[v] = vm_tx[v] / (1.0 + (1.0 - ph_.vm_delay_passthrough) * delay_vm_[v] / ph_.net_tau_ms);
    }

    // Service latency: own processing time inflated by cpu queueing, then
    // callee latency (plus any delay on the callee's egress) added upstream.
    std::vector<double> ctr_util(nc), ctr_mem_press(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        ctr_util[c] = std::min(1.0, (demand[c] + hog_ctr_[c] * ph_.ctr_quota) / ph_.ctr_quota);
        ctr_mem_press[c] = std::max(0.0, mem[c] - ph_.mem_knee) / (1.0 - ph_.mem_knee);
    }
    std::vector<double> lat(ns, 0.0);
    for (auto it = p.topo.rbegin(); it != p.topo.rend(); ++it) {
        const std::size_t s = *it, c = p.svc_ctr[s], v = p.ctr_vm[c];
        const double q = 1.0 / (1.0 - std::min(ctr_util[c], 0.95));
        lat[s] += ph_.base_latency_ms * q * (1.0 + ph_.contention_latency_gain * contention[v]) *
                  (1.0 + ph_.memory_latency_gain * (ctr_mem_press[c] + vm_mem_press[v])) * (1.0 + 0.03 * normal());
        const double egress = delay_ctr_[c] + delay_vm_[v];
        for (auto [a, f] : p.callers[s]) lat[a] += f * (lat[s] + egress);
    }

    std::size_t col = 0;
    auto put = [&](double v) { out[col++].push_back(v); };
    const double e = ph_.effect_noise;

    auto node_metrics = [&](double util, double cores, double mem_util, double mem_press, double txv, double rxv,
                            double iov, double opsv, double cont, double disk_util) {
        // cpu
        put(meas(util * cores * dt, 0.5 * cores * dt));
        put(frac(util, 0.5));
        const double load = util * cores + cont * cores;
        put(meas(load, cores, e));
        put(meas(load, cores, 1.5 * e));
        put(meas(load, cores, 2.0 * e));
        put(meas(0.01 + 0.05 * util * util + 0.2 * cont, 0.05, e));
        put(meas(5000.0 * util * cores, 2500.0 * cores, e));
        put(meas(200.0 * util * cores, 100.0 * cores, e));
        // memory
        put(frac(mem_util, 0.4));
        put(meas(0.05 + 0.5 * mem_press, 0.1, e));
        put(meas(10.0 + 200.0 * mem_press, 20.0, e));
        put(frac(0.05 + 0.02 * mem_press, 0.05, e));
        put(meas(1.0 + 20.0 * mem_press, 2.0, e));
        put(meas(opsv * 30.0, opsv * 30.0 + 1.0, e));
        // disk
        put(frac(0.4 + 0.00001 * iov, 0.1, e));
        put(frac(0.3, 0.05, e));
        put(meas(disk_util * dt, 0.2 * dt, e));
        put(meas(0.5 + 2.0 * disk_util, 0.5, e));
        put(meas(2.0 + 3.0 * disk_util, 2.0, e));
        put(meas(3.0 + 4.0 * disk_util, 3.0, e));
        put(meas(0.2, 0.2, e));
        put(meas(iov, iov + 1.0));
        put(meas(opsv, opsv + 1.0));
        put(meas(0.02 + 0.1 * disk_util + 0.05 * cont, 0.05, e));
        // network
        put(meas(txv * dt, txv * dt + 1.0));
        put(meas(rxv * dt, rxv * dt + 1.0));
        put(meas(2.0 + 2.0 * cont, 2.0, e));
        put(meas(1.0, 1.0, e));
        put(meas(0.5, 0.5, e));
        put(meas(0.5, 0.5, e));
        put(meas(txv, txv + 1.0));
        put(meas(rxv, rxv + 1.0));
        put(meas(txv / ph_.bytes_per_packet, txv / ph_.bytes_per_packet + 1.0, e));
        put(meas(rxv / ph_.bytes_per_packet, rxv / ph_.bytes_per_packet + 1.0, e));
    };

    // machines
    for (std::size_t m = 0; m < nm; ++m) {
        double demand_m = std::max(0.0, ph_.pm_background_cpu + ph_.pm_background_cpu_std * normal()), mem_m = 0.15, tx_m = 0.0, rx_m = 0.0, io_m = 0.0, ops_m = 0.0, cores_m = 0.0;
        std::size_t hosted = 0;
        for (std::size_t v = 0; v < nv; ++v) {
            if (p.vm_pm[v] != m) continue;
            ++hosted;
            demand_m += vm_demand[v];
            mem_m += 0.5 * vm_mem[v];
            tx_m += vm_tx_out[v];
            rx_m += vm_rx[v];
            io_m += vm_io[v];
            ops_m += vm_ops[v];
        }
        cores_m = ph_.vm_cores * static_cast<double>(std::max<std::size_t>(hosted, 1)) * 1.5;
        const double mem_frac = mem_m / static_cast<double>(std::max<std::size_t>(hosted, 1));
        const double util = std::min(1.0, demand_m / cores_m);
        node_metrics(util, cores_m, mem_frac, std::max(0.0, mem_frac - 0.7) / 0.3, tx_m, rx_m, io_m, ops_m, 0.0,
                     std::min(1.0, io_m / 1e5));
    }
    for (std::size_t v = 0; v < nv; ++v)
        node_metrics(vm_util[v], ph_.vm_cores, vm_mem[v], vm_mem_press[v], vm_tx_out[v], vm_rx[v], vm_io[v],
                     vm_ops[v], contention[v], std::min(1.0, vm_io[v] / 5e4));

    // containers
    for (std::size_t c = 0; c < nc; ++c) {
        const std::size_t v = p.ctr_vm[c];
        const double util = ctr_util[c];
        const double over = std::max(0.0, demand[c] + hog_ctr_[c] - 0.7 * ph_.ctr_quota);
        const double press = ctr_mem_press[c];
        const double cont = contention[v];
        put(frac(util, 0.5));
        put(meas(0.05 + over * dt * 0.2, 0.05, e));
        put(meas(1.0 + over * 10.0, 1.0, e));
        put(meas(0.01 + 0.03 * util + 0.1 * cont, 0.03, e));
        put(meas(3000.0 * (demand[c] + 0.2 * hog_ctr_[c]), 1500.0, e));
        put(meas(100.0 * (demand[c] + 0.2 * hog_ctr_[c]), 50.0, e));
        put(frac(mem[c], 0.4));
        put(meas(0.02 + 0.2 * press, 0.05, e));
        put(meas(5.0 + 50.0 * press, 10.0, e));
        put(meas(0.1 + 0.5 * press, 0.2, e));
        put(frac(0.04 + 0.01 * press + 0.02 * vm_mem_press[v], 0.04, e));
        put(meas(0.5 + 5.0 * press + 2.0 * vm_mem_press[v], 1.0, e));
        put(meas(ops[c] * 20.0, ops[c] * 20.0 + 1.0, e));
        put(meas(1e6 + 1e4 * req[c], 1e6, e));
        put(meas(0.02 * io[c] / 1000.0 * dt, 0.02 * dt, e));
        put(meas(0.3, 0.3, e));
        put(meas(1.0, 1.0, e));
        put(meas(1.5, 1.5, e));
        put(meas(io[c], io[c] + 1.0));
        put(meas(ops[c], ops[c] + 1.0));
        put(meas(tx[c] * dt, tx[c] * dt + 1.0));
        put(meas(rx[c] * dt, rx[c] * dt + 1.0));
        put(meas(0.5, 0.5, e));
        put(meas(0.2, 0.2, e));
        put(meas(0.2, 0.2, e));
        put(meas(tx[c], tx[c] + 1.0));
        put(meas(rx[c], rx[c] + 1.0));
        put(meas(tx[c] / ph_.bytes_per_packet, tx[c] / ph_.bytes_per_packet + 1.0, e));
        put(meas(rx[c] / ph_.bytes_per_packet, rx[c] / ph_.bytes_per_packet + 1.0, e));
    }

    // services
    for (std::size_t s = 0; s < ns; ++s) {
        const std::size_t c = p.svc_ctr[s];
        put(meas(rate[s], rate[s] + 1.0));
        put(meas(rate[s] * (0.005 + 0.1 * std::max(0.0, ctr_util[c] - 0.8) + 0.05 * ctr_mem_press[c]),
                 0.005 * rate[s] + 0.01, 2.0));
        put(meas(lat[s], lat[s]));
        put(meas(1.9 * lat[s], 1.9 * lat[s], 1.5));
        put(meas(rate[s] / ph_.requests_per_user, rate[s] / ph_.requests_per_user + 1.0));
    }
}

} // namespace

SimulationResult simulate(const TopologyGraph &graph, const FaultScenario &scenario,
                          const SimulationOptions &options) {
    validate_scenario(graph, scenario, options);
    const Plan plan = make_plan(graph);
    Generator gen(plan, scenario, options);
    const std::size_t cols = gen.metrics().size();
    const auto n0 = static_cast<std::size_t>(std::llround(scenario.normal_duration / options.interval));
    const auto n1 = static_cast<std::size_t>(std::llround(scenario.anomalous_duration / options.interval));

    auto window = [&](std::size_t rows, std::size_t offset, bool anomalous) {
        std::vector<std::vector<double>> buf(cols);
        for (auto &b : buf) b.reserve(rows);
        std::vector<double> ts;
        for (std::size_t i = 0; i < rows; ++i) {
            ts.push_back(options.start_time + static_cast<double>(offset + i) * options.interval);
            gen.tick(anomalous, static_cast<double>(i + 1) / static_cast<double>(rows), buf);
        }
        std::vector<double> flat;
        flat.reserve(rows * cols);
        for (const auto &b : buf) {
            if (b.size() != rows) throw Error(ErrorCode::InvariantViolation, "simulator emitted a ragged column");
            flat.insert(flat.end(), b.begin(), b.end());
        }
        return TimeSeriesDataset(gen.metrics(), std::move(ts), options.interval, std::move(flat));
    };

    SimulationResult out;
    out.normal = window(n0, 0, false);
    out.anomalous = window(n1, n0, true);
    out.truth = ground_truth_for(scenario);
    return out;
}

} // namespace rca
