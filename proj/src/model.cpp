#include "rca/model.h"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <unordered_set>

namespace rca {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MetricMismatch: return "MetricMismatch";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::UnknownMetric: return "UnknownMetric";
    case ErrorCode::Misaligned: return "Misaligned";
    case ErrorCode::InvalidBins: return "InvalidBins";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::DanglingNode: return "DanglingNode";
    case ErrorCode::AmbiguousMatch: return "AmbiguousMatch";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

std::string_view to_string(MetricClass c) {
    return c == MetricClass::State ? "state" : "activity";
}

std::string_view to_string(Layer l) {
    switch (l) {
    case Layer::ServiceInstance: return "service";
    case Layer::Container: return "container";
    case Layer::VirtualMachine: return "vm";
    case Layer::PhysicalMachine: return "pm";
    }
    return "?";
}

std::string_view to_string(Resource r) {
    switch (r) {
    case Resource::Cpu: return "cpu";
    case Resource::Memory: return "memory";
    case Resource::Disk: return "disk";
    case Resource::Network: return "network";
    case Resource::Application: return "application";
    }
    return "?";
}

std::optional<MetricClass> parse_metric_class(std::string_view s) {
    if (s == "state") return MetricClass::State;
    if (s == "activity") return MetricClass::Activity;
    return std::nullopt;
}

std::optional<Layer> parse_layer(std::string_view s) {
    for (Layer l : kAllLayers)
        if (to_string(l) == s) return l;
    return std::nullopt;
}

std::optional<Resource> parse_resource(std::string_view s) {
    for (Resource r : {Resource::Cpu, Resource::Memory, Resource::Disk, Resource::Network,
                       Resource::Application})
        if (to_string(r) == s) return r;
    return std::nullopt;
}

std::string MetricId::key() const {
    std::string out;
    out.reserve(name.size() + endpoint.size() + 24);
    out.append(to_string(cls)).append("|").append(name).append("|").append(endpoint);
    out.append("|").append(to_string(layer));
    return out;
}

std::size_t MetricIdHash::operator()(const MetricId &m) const noexcept {
    std::size_t h = std::hash<std::string>{}(m.name);
    h ^= std::hash<std::string>{}(m.endpoint) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::size_t>(m.layer) * 31 + static_cast<std::size_t>(m.cls);
    return h;
}

bool tiebreak_less(const MetricId &a, const MetricId &b) {
    return std::tie(a.layer, a.endpoint, a.name) < std::tie(b.layer, b.endpoint, b.name);
}

MetricId parse_metric_key(std::string_view key, Resource resource) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        auto bar = key.find('|', start);
        parts.push_back(key.substr(start, bar - start));
        if (bar == std::string_view::npos) break;
        start = bar + 1;
    }
    if (parts.size() != 4)
        throw Error(ErrorCode::ParseError,
                    "metric key '" + std::string(key) + "' is not class|name|endpoint|layer");
    auto cls = parse_metric_class(parts[0]);
    auto layer = parse_layer(parts[3]);
    if (!cls || !layer || parts[1].empty() || parts[2].empty())
        throw Error(ErrorCode::ParseError, "malformed metric key '" + std::string(key) + "'");
    MetricId m;
    m.cls = *cls;
    m.name = std::string(parts[1]);
    m.endpoint = std::string(parts[2]);
    m.layer = *layer;
    m.resource = *layer == Layer::ServiceInstance ? Resource::Application : resource;
    return m;
}

const MetricId &fnode_metric() {
    static const MetricId fnode{MetricClass::State, "F-NODE", "__fnode__", Layer::ServiceInstance,
                                Resource::Application};
    return fnode;
}

bool is_fnode(const MetricId &m) { return m == fnode_metric(); }

TimeSeriesDataset::TimeSeriesDataset(std::vector<MetricId> metrics, std::vector<double> timestamps,
                                     double interval, std::vector<double> column_major)
    : metrics_(std::move(metrics)), timestamps_(std::move(timestamps)), interval_(interval),
      data_(std::move(column_major)) {
    if (data_.size() != metrics_.size() * timestamps_.size())
        throw Error(ErrorCode::InvalidArgument, "observation matrix shape does not match "
                                                "metrics x timestamps");
    if (!(interval_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "interval must be positive");
    const double tol = 1e-6 * std::max(1.0, interval_);
    for (std::size_t i = 1; i < timestamps_.size(); ++i) {
        double step = timestamps_[i] - timestamps_[i - 1];
        if (!(step > 0.0) || std::abs(step - interval_) > tol)
            throw Error(ErrorCode::Misaligned, "timestamps must be strictly increasing with "
                                               "constant spacing equal to the interval");
    }
    for (const auto &m : metrics_) {
        if (m.endpoint.empty())
            throw Error(ErrorCode::InvalidArgument, "metric '" + m.name + "' has no endpoint");
        if (m.layer == Layer::ServiceInstance && m.resource != Resource::Application)
            throw Error(ErrorCode::InvalidArgument,
                        "service-instance metric '" + m.name + "' must have resource application");
    }
    std::unordered_set<MetricId, MetricIdHash> seen;
    for (const auto &m : metrics_)
        if (!seen.insert(m).second)
            throw Error(ErrorCode::InvalidArgument, "duplicate metric " + m.key());
    for (double v : data_)
        if (!std::isfinite(v))
            throw Error(ErrorCode::InvalidArgument, "observations must be finite");
}

std::optional<std::size_t> TimeSeriesDataset::index_of(const MetricId &m) const {
    for (std::size_t i = 0; i < metrics_.size(); ++i)
        if (metrics_[i] == m) return i;
    return std::nullopt;
}

TimeSeriesDataset concat_with_fnode(const TimeSeriesDataset &normal,
                                    const TimeSeriesDataset &anomalous) {
    if (normal.metrics() != anomalous.metrics())
        throw Error(ErrorCode::MetricMismatch,
                    "normal and anomalous windows carry different metric lists");
    if (normal.empty() || anomalous.empty())
        throw Error(ErrorCode::EmptyDataset, "both windows need at least one row");
    if (std::abs(normal.interval() - anomalous.interval()) > 1e-9 * normal.interval())
        throw Error(ErrorCode::Misaligned, "windows use different sampling intervals");

    const std::size_t n0 = normal.rows(), n1 = anomalous.rows(), cols = normal.cols();
    std::vector<double> ts = normal.timestamps();
    ts.insert(ts.end(), anomalous.timestamps().begin(), anomalous.timestamps().end());

    std::vector<double> data;
    data.reserve((cols + 1) * (n0 + n1));
    for (std::size_t c = 0; c < cols; ++c) {
        auto a = normal.column(c);
        auto b = anomalous.column(c);
        data.insert(data.end(), a.begin(), a.end());
        data.insert(data.end(), b.begin(), b.end());
    }
    data.insert(data.end(), n0, 0.0);
    data.insert(data.end(), n1, 1.0);

    std::vector<MetricId> metrics = normal.metrics();
    metrics.push_back(fnode_metric());
    return TimeSeriesDataset(std::move(metrics), std::move(ts), normal.interval(), std::move(data));
}

TimeSeriesDataset project(const TimeSeriesDataset &dataset, std::span<const MetricId> subset) {
    std::vector<double> data;
    data.reserve(subset.size() * dataset.rows());
    for (const auto &m : subset) {
        auto idx = dataset.index_of(m);
        if (!idx) throw Error(ErrorCode::UnknownMetric, m.key());
        auto col = dataset.column(*idx);
        data.insert(data.end(), col.begin(), col.end());
    }
    return TimeSeriesDataset(std::vector<MetricId>(subset.begin(), subset.end()),
                             dataset.timestamps(), dataset.interval(), std::move(data));
}

std::optional<int> RankedRootCauses::rank_of(const MetricId &m) const {
    for (const auto &e : entries)
        if (e.metric == m) return e.rank;
    return std::nullopt;
}

bool RankedRootCauses::contains_in_top(const MetricId &m, int k) const {
    auto r = rank_of(m);
    return r && *r <= k;
}

RankedRootCauses rank_root_causes(std::vector<RankedEntry> candidates, std::size_t k) {
    std::sort(candidates.begin(), candidates.end(), [](const RankedEntry &a, const RankedEntry &b) {
        double ka = a.weighted_p_value.value_or(a.p_value);
        double kb = b.weighted_p_value.value_or(b.p_value);
        if (ka != kb) return ka < kb;
        if (a.p_value != b.p_value) return a.p_value < b.p_value;
        return tiebreak_less(a.metric, b.metric);
    });
    if (candidates.size() > k) candidates.resize(k);
    RankedRootCauses out;
    out.entries = std::move(candidates);
    for (std::size_t i = 0; i < out.entries.size(); ++i)
        out.entries[i].rank = static_cast<int>(i + 1);
    return out;
}

bool weak_evidence(const RankedRootCauses &result, double alpha, std::size_t tested_metrics) {
    const double threshold = alpha / static_cast<double>(std::max<std::size_t>(1, tested_metrics));
    return std::none_of(result.entries.begin(), result.entries.end(),
                        [&](const RankedEntry &e) { return e.p_value <= threshold; });
}

} // namespace rca
