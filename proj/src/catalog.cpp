#include "rca/catalog.h"

#include <fnmatch.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

namespace rca {

bool CatalogEntry::matches(std::string_view name, Layer at) const {
    if (at != layer) return false;
    const std::string n(name);
    return ::fnmatch(name_pattern.c_str(), n.c_str(), 0) == 0;
}

MetricCatalog::MetricCatalog(std::vector<CatalogEntry> entries) : entries_(std::move(entries)) {
    std::set<std::tuple<Layer, Resource, MetricClass, std::string>> seen;
    for (const auto &e : entries_) {
        if (e.name_pattern.empty()) throw Error(ErrorCode::SchemaError, "catalog entry with empty name pattern");
        if (e.layer == Layer::ServiceInstance && e.resource != Resource::Application)
            throw Error(ErrorCode::InvariantViolation,
                        "service-layer entry '" + e.name_pattern + "' must use the application resource");
        if (!seen.emplace(e.layer, e.resource, e.cls, e.name_pattern).second)
            throw Error(ErrorCode::InvariantViolation, "duplicate catalog entry '" + e.name_pattern + "' at " +
                                                           std::string(to_string(e.layer)));
    }
}

namespace {

struct Row {
    Resource resource;
    MetricClass cls;
    const char *name;
    const char *description;
    const char *aggregator;
};

constexpr auto S = MetricClass::State;
constexpr auto A = MetricClass::Activity;

const Row kServiceRows[] = {
    {Resource::Application, S, "service_request_rate", "requests served per second", "rate"},
    {Resource::Application, S, "service_error_rate", "non-2xx responses per second", "rate"},
    {Resource::Application, S, "service_latency_p50", "median request duration", "histogram_quantile"},
    {Resource::Application, S, "service_latency_p95", "95th percentile request duration", "histogram_quantile"},
    {Resource::Application, A, "service_user_requests", "user requests arriving at the instance", "sum"},
};

const Row kContainerRows[] = {
    {Resource::Cpu, S, "container_cpu_utilization", "cpu usage over quota", "rate"},
    {Resource::Cpu, S, "container_cpu_throttled_seconds", "time throttled by the cfs quota", "rate"},
    {Resource::Cpu, S, "container_cpu_throttled_periods", "throttled cfs periods", "rate"},
    {Resource::Cpu, S, "container_cpu_runqueue_wait_seconds", "time runnable but waiting for a cpu", "rate"},
    {Resource::Cpu, A, "container_cpu_context_switches", "context switches", "rate"},
    {Resource::Cpu, A, "container_cpu_migrations", "cpu migrations", "rate"},
    {Resource::Memory, S, "container_memory_utilization", "working set over limit", "avg"},
    {Resource::Memory, S, "container_memory_swap", "swap in use", "avg"},
    {Resource::Memory, S, "container_memory_saturation", "memory pressure stall time", "rate"},
    {Resource::Memory, S, "container_memory_oom_events", "out-of-memory kills", "increase"},
    {Resource::Memory, A, "container_memory_cache_miss_ratio", "cache misses over cache references", "rate"},
    {Resource::Memory, A, "container_memory_major_page_faults", "major page faults", "rate"},
    {Resource::Memory, A, "container_memory_minor_page_faults", "minor page faults", "rate"},
    {Resource::Disk, S, "container_fs_page_cache_bytes", "page cache usage", "avg"},
    {Resource::Disk, S, "container_fs_io_time_seconds", "time spent doing i/o", "rate"},
    {Resource::Disk, S, "container_fs_io_queued", "queued i/o operations", "avg"},
    {Resource::Disk, S, "container_fs_read_time_avg", "average time to serve reads", "rate"},
    {Resource::Disk, S, "container_fs_write_time_avg", "average time to serve writes", "rate"},
    {Resource::Disk, A, "container_fs_io_throughput", "bytes read and written per second", "rate"},
    {Resource::Disk, A, "container_fs_io_rate", "read and write operations per second", "rate"},
    {Resource::Network, S, "container_network_transmit_bytes_total", "bytes transmitted", "increase"},
    {Resource::Network, S, "container_network_receive_bytes_total", "bytes received", "increase"},
    {Resource::Network, S, "container_network_packets_dropped", "packets dropped", "rate"},
    {Resource::Network, S, "container_network_transmit_errors", "transmit errors", "rate"},
    {Resource::Network, S, "container_network_receive_errors", "receive errors", "rate"},
    {Resource::Network, A, "container_network_transmit_throughput", "bytes transmitted per second", "rate"},
    {Resource::Network, A, "container_network_receive_throughput", "bytes received per second", "rate"},
    {Resource::Network, A, "container_network_transmit_packet_rate", "packets transmitted per second", "rate"},
    {Resource::Network, A, "container_network_receive_packet_rate", "packets received per second", "rate"},
};

// Shared by the VM and PM layers; the layer disambiguates identical names.
const Row kNodeRows[] = {
    {Resource::Cpu, S, "node_cpu_usage_seconds", "busy cpu seconds", "rate"},
    {Resource::Cpu, S, "node_cpu_utilization", "non-idle cpu share", "rate"},
    {Resource::Cpu, S, "node_load1", "1 minute load average", "avg"},
    {Resource::Cpu, S, "node_load5", "5 minute load average", "avg"},
    {Resource::Cpu, S, "node_load15", "15 minute load average", "avg"},
    {Resource::Cpu, S, "node_cpu_runqueue_wait_seconds", "time runnable but waiting for a cpu", "rate"},
    {Resource::Cpu, A, "node_context_switches", "context switches", "rate"},
    {Resource::Cpu, A, "node_cpu_migrations", "cpu migrations", "rate"},
    {Resource::Memory, S, "node_memory_utilization", "used over total memory", "avg"},
    {Resource::Memory, S, "node_memory_swap_used", "swap in use", "avg"},
    {Resource::Memory, S, "node_memory_swap_io", "pages swapped in and out", "rate"},
    {Resource::Memory, A, "node_llc_miss_ratio", "last-level cache misses over references", "rate"},
    {Resource::Memory, A, "node_major_page_faults", "major page faults", "rate"},
    {Resource::Memory, A, "node_minor_page_faults", "minor page faults", "rate"},
    {Resource::Disk, S, "node_filesystem_utilization", "used over size of mounted filesystems", "avg"},
    {Resource::Disk, S, "node_filesystem_inode_utilization", "used over total inodes", "avg"},
    {Resource::Disk, S, "node_disk_io_time_seconds", "time spent doing i/o", "rate"},
    {Resource::Disk, S, "node_disk_queue_length", "average i/o queue length", "rate"},
    {Resource::Disk, S, "node_disk_read_wait_avg", "average wait per read", "rate"},
    {Resource::Disk, S, "node_disk_write_wait_avg", "average wait per write", "rate"},
    {Resource::Disk, S, "node_filesystem_device_errors", "filesystem device errors", "max"},
    {Resource::Disk, A, "node_disk_io_throughput", "bytes read and written per second", "rate"},
    {Resource::Disk, A, "node_disk_io_rate", "read and write operations per second", "rate"},
    {Resource::Disk, A, "node_cpu_iowait_seconds", "cpu seconds in iowait", "rate"},
    {Resource::Network, S, "node_network_transmit_bytes_total", "bytes transmitted", "increase"},
    {Resource::Network, S, "node_network_receive_bytes_total", "bytes received", "increase"},
    {Resource::Network, S, "node_network_transmit_queue_length", "transmit queue length", "avg"},
    {Resource::Network, S, "node_network_packets_dropped", "packets dropped", "rate"},
    {Resource::Network, S, "node_network_transmit_errors", "transmit errors", "rate"},
    {Resource::Network, S, "node_network_receive_errors", "receive errors", "rate"},
    {Resource::Network, A, "node_network_transmit_throughput", "bytes transmitted per second", "rate"},
    {Resource::Network, A, "node_network_receive_throughput", "bytes received per second", "rate"},
    {Resource::Network, A, "node_network_transmit_packet_rate", "packets transmitted per second", "rate"},
    {Resource::Network, A, "node_network_receive_packet_rate", "packets received per second", "rate"},
};

void append(std::vector<CatalogEntry> &out, Layer layer, std::span<const Row> rows) {
    for (const Row &r : rows) {
        std::string cell = std::string(to_string(layer)) + "/" + std::string(to_string(r.resource)) + "/" +
                           std::string(to_string(r.cls));
        out.push_back({layer, r.resource, r.cls, r.name, std::move(cell), r.description, r.aggregator});
    }
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) return out;
        start = pos + 1;
    }
}

} // namespace

const MetricCatalog &MetricCatalog::default_catalog() {
    static const MetricCatalog catalog = [] {
        std::vector<CatalogEntry> entries;
        append(entries, Layer::ServiceInstance, kServiceRows);
        append(entries, Layer::Container, kContainerRows);
        append(entries, Layer::VirtualMachine, kNodeRows);
        append(entries, Layer::PhysicalMachine, kNodeRows);
        return MetricCatalog(std::move(entries));
    }();
    return catalog;
}

MetricCatalog MetricCatalog::parse(std::string_view tsv) {
    std::vector<CatalogEntry> entries;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= tsv.size()) {
        std::size_t end = tsv.find('\n', start);
        std::string_view line = tsv.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        start = end == std::string_view::npos ? tsv.size() + 1 : end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        if (line_no == 1 && line.substr(0, 5) == "layer") continue;

        const std::string where = "catalog line " + std::to_string(line_no);
        auto f = split(line, '\t');
        if (f.size() != 6 && f.size() != 7)
            throw Error(ErrorCode::SchemaError, where + ": expected 6 or 7 tab-separated fields");
        auto layer = parse_layer(f[0]);
        auto resource = parse_resource(f[1]);
        auto cls = parse_metric_class(f[2]);
        if (!layer) throw Error(ErrorCode::SchemaError, where + ": unknown layer '" + std::string(f[0]) + "'");
        if (!resource) throw Error(ErrorCode::SchemaError, where + ": unknown resource '" + std::string(f[1]) + "'");
        if (!cls) throw Error(ErrorCode::SchemaError, where + ": unknown class '" + std::string(f[2]) + "'");
        entries.push_back({*layer, *resource, *cls, std::string(f[3]), std::string(f[4]), std::string(f[5]),
                           f.size() == 7 ? std::string(f[6]) : std::string()});
    }
    return MetricCatalog(std::move(entries));
}

MetricCatalog MetricCatalog::load_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open catalog file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string MetricCatalog::to_tsv() const {
    std::string out = "layer\tresource\tclass\tname_pattern\ttable1_cell\tdescription\taggregator\n";
    for (const auto &e : entries_) {
        out += to_string(e.layer);
        out += '\t';
        out += to_string(e.resource);
        out += '\t';
        out += to_string(e.cls);
        out += '\t' + e.name_pattern + '\t' + e.table1_cell + '\t' + e.description + '\t' + e.aggregator + '\n';
    }
    return out;
}

std::vector<const CatalogEntry *> MetricCatalog::entries_for(Layer layer) const {
    std::vector<const CatalogEntry *> out;
    for (const auto &e : entries_)
        if (e.layer == layer) out.push_back(&e);
    return out;
}

const CatalogEntry *MetricCatalog::lookup(std::string_view name, Layer layer) const {
    const CatalogEntry *found = nullptr;
    for (const auto &e : entries_) {
        if (!e.matches(name, layer)) continue;
        if (!found) {
            found = &e;
        } else if (found->cls != e.cls || found->resource != e.resource) {
            throw Error(ErrorCode::AmbiguousMatch, "'" + std::string(name) + "' matches both '" +
                                                       found->name_pattern + "' and '" + e.name_pattern + "'");
        }
    }
    return found;
}

std::map<Layer, std::size_t> catalog_counts(const MetricCatalog &catalog) {
    std::map<Layer, std::size_t> out;
    for (Layer l : kAllLayers) out[l] = 0;
    for (const auto &e : catalog.entries()) ++out[e.layer];
    return out;
}

Selection select_metrics(std::span<const RawMetric> available, const MetricCatalog &catalog) {
    Selection out;
    for (const auto &raw : available) {
        const CatalogEntry *e = catalog.lookup(raw.name, raw.layer);
        if (!e) {
            out.unmatched.push_back(raw);
            continue;
        }
        out.selected.push_back({e->cls, raw.name, raw.endpoint, raw.layer, e->resource});
    }
    return out;
}

Resource infer_resource(std::string_view name, Layer layer, const MetricCatalog &catalog) {
    if (const CatalogEntry *e = catalog.lookup(name, layer)) return e->resource;
    if (layer == Layer::ServiceInstance) return Resource::Application;
    auto has = [&](std::string_view token) { return name.find(token) != std::string_view::npos; };
    if (has("network") || has("_net_")) return Resource::Network;
    if (has("_fs_") || has("filesystem") || has("disk")) return Resource::Disk;
    if (has("memory") || has("_mem_") || has("page_fault")) return Resource::Memory;
    if (has("cpu") || has("load")) return Resource::Cpu;
    return Resource::Application;
}

namespace {

// A handful of real exporter names that the catalog deliberately leaves out.
const char *const kServiceExtras[] = {
    "service_requests_in_flight", "service_response_size_bytes", "service_request_size_bytes",
    "service_latency_p99",        "service_latency_sum",         "service_latency_count",
    "service_up"};

const char *const kContainerExtras[] = {
    "container_last_seen",          "container_start_time_seconds",  "container_spec_cpu_period",
    "container_spec_cpu_quota",     "container_spec_cpu_shares",     "container_spec_memory_limit_bytes",
    "container_memory_rss",         "container_memory_mapped_file",  "container_memory_max_usage_bytes",
    "container_memory_failcnt",     "container_file_descriptors",    "container_processes",
    "container_threads",            "container_threads_max",         "container_sockets",
    "container_tasks_state",        "container_ulimits_soft",        "container_fs_inodes_free",
    "container_fs_inodes_total",    "container_fs_limit_bytes",      "container_fs_usage_bytes",
    "container_fs_sector_reads",    "container_fs_sector_writes",    "container_network_tcp_usage",
    "container_network_udp_usage",  "container_cpu_load_average_10s", "container_cpu_system_seconds",
    "container_cpu_user_seconds"};

const char *const kNodeExtras[] = {
    "node_boot_time_seconds",     "node_time_seconds",           "node_uname_info",
    "node_entropy_available_bits", "node_forks_total",            "node_intr_total",
    "node_procs_blocked",         "node_procs_running",          "node_memory_Active_bytes",
    "node_memory_Buffers_bytes",  "node_memory_Cached_bytes",    "node_memory_Dirty_bytes",
    "node_memory_Slab_bytes",     "node_memory_Mapped_bytes",    "node_filefd_allocated",
    "node_filefd_maximum",        "node_sockstat_TCP_inuse",     "node_sockstat_UDP_inuse",
    "node_netstat_Tcp_RetransSegs", "node_netstat_Udp_InErrors", "node_timex_offset_seconds",
    "node_textfile_scrape_error", "node_scrape_collector_success", "node_nf_conntrack_entries"};

std::vector<std::string> inventory(Layer layer, std::span<const char *const> extras, const char *pad_prefix,
                                   std::size_t total) {
    std::vector<std::string> out;
    for (const auto *e : MetricCatalog::default_catalog().entries_for(layer)) out.push_back(e->name_pattern);
    for (const char *x : extras) out.emplace_back(x);
    for (std::size_t i = 0; out.size() < total; ++i) out.push_back(pad_prefix + std::to_string(i));
    return out;
}

} // namespace

std::vector<std::string> synthetic_inventory(Layer layer) {
    switch (layer) {
    case Layer::ServiceInstance: return inventory(layer, kServiceExtras, "service_custom_metric_", 12);
    case Layer::Container: return inventory(layer, kContainerExtras, "container_blkio_device_stat_", 110);
    case Layer::VirtualMachine: return inventory(layer, kNodeExtras, "node_hwmon_sensor_", 292);
    case Layer::PhysicalMachine: return inventory(layer, kNodeExtras, "node_hwmon_sensor_", 336);
    }
    return {};
}

} // namespace rca
