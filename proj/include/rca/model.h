#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rca {

enum class ErrorCode {
    InvalidArgument,
    MetricMismatch,
    EmptyDataset,
    UnknownMetric,
    Misaligned,
    InvalidBins,
    IndexOutOfRange,
    EmptyInput,
    ParseError,
    SchemaError,
    InvariantViolation,
    DanglingNode,
    AmbiguousMatch,
    InvalidScenario,
    Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

enum class MetricClass { State, Activity };
enum class Layer { ServiceInstance, Container, VirtualMachine, PhysicalMachine };
enum class Resource { Cpu, Memory, Disk, Network, Application };

inline constexpr Layer kAllLayers[] = {Layer::ServiceInstance, Layer::Container,
                                       Layer::VirtualMachine, Layer::PhysicalMachine};

// Short tokens used on every wire format: "state"/"activity",
// "service"/"container"/"vm"/"pm", "cpu"/"memory"/"disk"/"network"/"application".
std::string_view to_string(MetricClass c);
std::string_view to_string(Layer l);
std::string_view to_string(Resource r);
std::optional<MetricClass> parse_metric_class(std::string_view s);
std::optional<Layer> parse_layer(std::string_view s);
std::optional<Resource> parse_resource(std::string_view s);

/// Identity of one monitored signal. Equality and hashing use the
/// (class, name, endpoint, layer) tuple only; `resource` is derived from
/// (name, layer) through the metric catalog.
struct MetricId {
    MetricClass cls = MetricClass::State;
    std::string name;
    std::string endpoint;
    Layer layer = Layer::ServiceInstance;
    Resource resource = Resource::Application;

    /// "class|name|endpoint|layer", the dataset column header form.
    std::string key() const;

    friend bool operator==(const MetricId &a, const MetricId &b) {
        return a.cls == b.cls && a.layer == b.layer && a.name == b.name &&
               a.endpoint == b.endpoint;
    }
};

struct MetricIdHash {
    std::size_t operator()(const MetricId &m) const noexcept;
};

/// Deterministic tie-break order: lexicographic on (layer, endpoint, name).
bool tiebreak_less(const MetricId &a, const MetricId &b);

MetricId parse_metric_key(std::string_view key, Resource resource);

/// Reserved identity of the failure-indicator column.
const MetricId &fnode_metric();
bool is_fnode(const MetricId &m);

/// Batch snapshot of aligned metric observations. Column-major storage;
/// immutable after construction.
class TimeSeriesDataset {
public:
    TimeSeriesDataset() = default;

    /// `column_major` holds |metrics| columns of |timestamps| values each.
    TimeSeriesDataset(std::vector<MetricId> metrics, std::vector<double> timestamps,
                      double interval, std::vector<double> column_major);

    std::size_t rows() const noexcept { return timestamps_.size(); }
    std::size_t cols() const noexcept { return metrics_.size(); }
    bool empty() const noexcept { return rows() == 0; }

    const std::vector<MetricId> &metrics() const noexcept { return metrics_; }
    const std::vector<double> &timestamps() const noexcept { return timestamps_; }
    double interval() const noexcept { return interval_; }

    double at(std::size_t row, std::size_t col) const { return data_[col * rows() + row]; }
    std::span<const double> column(std::size_t col) const {
        return {data_.data() + col * rows(), rows()};
    }

    std::optional<std::size_t> index_of(const MetricId &m) const;

private:
    std::vector<MetricId> metrics_;
    std::vector<double> timestamps_;
    double interval_ = 0.0;
    std::vector<double> data_;
};

/// Row-wise concatenation of the normal and anomalous windows plus an
/// appended F-NODE column (0 for normal rows, 1 for anomalous rows).
TimeSeriesDataset concat_with_fnode(const TimeSeriesDataset &normal,
                                    const TimeSeriesDataset &anomalous);

/// Restricts a dataset to `subset`, columns following the subset's order.
TimeSeriesDataset project(const TimeSeriesDataset &dataset, std::span<const MetricId> subset);

struct RankedEntry {
    MetricId metric;
    double p_value = 1.0;
    std::optional<double> weighted_p_value;
    int rank = 0;
};

struct RankedRootCauses {
    std::vector<RankedEntry> entries;
    /// Set when the result came from a fallback path or when no candidate
    /// clears a family-wise (Bonferroni) threshold over the tested metrics.
    bool low_confidence = false;

    std::optional<int> rank_of(const MetricId &m) const;
    bool contains_in_top(const MetricId &m, int k) const;
};

/// Sorts ascending by weighted p-value when present (else raw p-value),
/// then raw p-value, then tiebreak_less; truncates to k and assigns ranks.
RankedRootCauses rank_root_causes(std::vector<RankedEntry> candidates, std::size_t k);

/// True when no entry's raw p-value is at or below alpha / tested_metrics.
bool weak_evidence(const RankedRootCauses &result, double alpha, std::size_t tested_metrics);

} // namespace rca
