#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rca/model.h"

namespace rca {

enum class NodeKind { Microservice, Container, Pod, VirtualMachine, PhysicalMachine };

std::string_view to_string(NodeKind k);

struct TopologyNode {
    std::string id;
    Layer layer = Layer::ServiceInstance;
    NodeKind kind = NodeKind::Microservice;
    std::string kind_label; ///< free-form "kind" string from the document
};

/// Cross-layer service topology. Hosting edges point from the hosted node to
/// its host (service -> container -> [pod ->] vm -> pm); each node has at
/// most one host. Immutable after construction.
class TopologyGraph {
public:
    using Edge = std::pair<std::string, std::string>;

    TopologyGraph() = default;
    /// Validates every structural invariant; throws InvariantViolation naming
    /// the offending element.
    TopologyGraph(std::vector<TopologyNode> nodes, std::vector<Edge> call_edges,
                  std::vector<Edge> hosting_edges, std::map<std::string, std::string> endpoint_aliases = {});

    const std::vector<TopologyNode> &nodes() const noexcept { return nodes_; }
    const std::vector<Edge> &call_edges() const noexcept { return call_edges_; }
    const std::vector<Edge> &hosting_edges() const noexcept { return hosting_edges_; }
    const std::map<std::string, std::string> &endpoint_aliases() const noexcept { return aliases_; }

    const TopologyNode *find(std::string_view id) const;
    std::optional<std::string> host_of(std::string_view id) const;
    std::vector<std::string> hosted_on(std::string_view id) const;
    std::vector<std::string> callers_of(std::string_view service) const;

    /// Maps a metric endpoint to a node id via the alias table, then by
    /// exact id match.
    std::optional<std::string> resolve_endpoint(std::string_view endpoint) const;

private:
    std::vector<TopologyNode> nodes_;
    std::vector<Edge> call_edges_;
    std::vector<Edge> hosting_edges_;
    std::map<std::string, std::string> aliases_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::map<std::string, std::string, std::less<>> host_;
};

/// Parses the topology JSON document (see README for the schema).
TopologyGraph load_topology(std::string_view json_text);
TopologyGraph load_topology_file(const std::string &path);
std::string topology_to_json(const TopologyGraph &graph);

/// Vertical chain from a service instance down to its physical machine.
/// Pods are collapsed out of the node list.
struct EndToEndPath {
    std::vector<std::string> nodes;

    friend bool operator==(const EndToEndPath &, const EndToEndPath &) = default;
};

/// One path per service instance, sorted by service id. Throws DanglingNode
/// when a chain stops before a physical machine.
std::vector<EndToEndPath> enumerate_paths(const TopologyGraph &graph);

struct PathMetrics {
    std::vector<std::size_t> on_path;     ///< indices into the metric list
    std::vector<std::size_t> unresolved;  ///< endpoints that match no node
};

/// Metrics whose endpoint resolves to a node of `path` (or to a pod that a
/// path node is hosted on). F-NODE is always excluded.
PathMetrics metrics_on_path(const TopologyGraph &graph, const EndToEndPath &path,
                            std::span<const MetricId> metrics);

} // namespace rca
