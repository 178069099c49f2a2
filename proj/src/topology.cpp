#include "rca/topology.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rca {

using nlohmann::json;

std::string_view to_string(NodeKind k) {
    switch (k) {
    case NodeKind::Microservice: return "Microservice";
    case NodeKind::Container: return "Container";
    case NodeKind::Pod: return "Pod";
    case NodeKind::VirtualMachine: return "VirtualMachine";
    case NodeKind::PhysicalMachine: return "PhysicalMachine";
    }
    return "?";
}

namespace {

// Vertical position used to validate hosting direction: a host must sit
// strictly lower than the node it hosts.
int depth(NodeKind k) {
    switch (k) {
    case NodeKind::Microservice: return 0;
    case NodeKind::Container: return 1;
    case NodeKind::Pod: return 2;
    case NodeKind::VirtualMachine: return 3;
    case NodeKind::PhysicalMachine: return 4;
    }
    return 0;
}

std::string layer_token(const TopologyNode &n) {
    return n.kind == NodeKind::Pod ? "pod" : std::string(to_string(n.layer));
}

} // namespace

TopologyGraph::TopologyGraph(std::vector<TopologyNode> nodes, std::vector<Edge> call_edges,
                             std::vector<Edge> hosting_edges, std::map<std::string, std::string> endpoint_aliases)
    : nodes_(std::move(nodes)), call_edges_(std::move(call_edges)),
      hosting_edges_(std::move(hosting_edges)), aliases_(std::move(endpoint_aliases)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].id.empty()) throw Error(ErrorCode::InvariantViolation, "node with empty id");
        if (!index_.emplace(nodes_[i].id, i).second)
            throw Error(ErrorCode::InvariantViolation, "duplicate node id '" + nodes_[i].id + "'");
    }
    auto require = [&](const std::string &id, std::string_view what) -> const TopologyNode & {
        auto it = index_.find(id);
        if (it == index_.end())
            throw Error(ErrorCode::InvariantViolation,
                        std::string(what) + " references unknown node '" + id + "'");
        return nodes_[it->second];
    };
    for (const auto &[src, dst] : call_edges_) {
        const auto &a = require(src, "call edge");
        const auto &b = require(dst, "call edge");
        if (a.kind != NodeKind::Microservice || b.kind != NodeKind::Microservice)
            throw Error(ErrorCode::InvariantViolation,
                        "call edge " + src + " -> " + dst + " must join two service instances");
    }
    for (const auto &[upper, lower] : hosting_edges_) {
        const auto &a = require(upper, "hosting edge");
        const auto &b = require(lower, "hosting edge");
        if (depth(b.kind) <= depth(a.kind))
            throw Error(ErrorCode::InvariantViolation,
                        "hosting edge " + upper + " -> " + lower + " does not point to a lower layer");
        auto [it, inserted] = host_.emplace(upper, lower);
        if (!inserted && it->second != lower)
            throw Error(ErrorCode::InvariantViolation, "node '" + upper + "' is hosted on both '" +
                                                           it->second + "' and '" + lower + "'");
    }
    for (const auto &[alias, target] : aliases_) require(target, "endpoint alias '" + alias + "'");
}

const TopologyNode *TopologyGraph::find(std::string_view id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &nodes_[it->second];
}

std::optional<std::string> TopologyGraph::host_of(std::string_view id) const {
    auto it = host_.find(id);
    if (it == host_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> TopologyGraph::hosted_on(std::string_view id) const {
    std::vector<std::string> out;
    for (const auto &[upper, lower] : hosting_edges_)
        if (lower == id) out.push_back(upper);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::string> TopologyGraph::callers_of(std::string_view service) const {
    std::vector<std::string> out;
    for (const auto &[src, dst] : call_edges_)
        if (dst == service) out.push_back(src);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::optional<std::string> TopologyGraph::resolve_endpoint(std::string_view endpoint) const {
    if (auto it = aliases_.find(std::string(endpoint)); it != aliases_.end()) return it->second;
    if (find(endpoint)) return std::string(endpoint);
    return std::nullopt;
}

namespace {

std::optional<std::pair<Layer, NodeKind>> parse_node_layer(std::string_view s) {
    if (s == "service") return std::pair{Layer::ServiceInstance, NodeKind::Microservice};
    if (s == "container") return std::pair{Layer::Container, NodeKind::Container};
    if (s == "pod") return std::pair{Layer::Container, NodeKind::Pod};
    if (s == "vm") return std::pair{Layer::VirtualMachine, NodeKind::VirtualMachine};
    if (s == "pm") return std::pair{Layer::PhysicalMachine, NodeKind::PhysicalMachine};
    return std::nullopt;
}

std::vector<TopologyGraph::Edge> parse_edges(const json &doc, const char *field) {
    if (!doc.contains(field)) throw Error(ErrorCode::SchemaError, std::string("missing field '") + field + "'");
    const json &arr = doc.at(field);
    if (!arr.is_array()) throw Error(ErrorCode::SchemaError, std::string("'") + field + "' must be an array");
    std::vector<TopologyGraph::Edge> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const json &e = arr[i];
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
            throw Error(ErrorCode::SchemaError,
                        std::string(field) + "[" + std::to_string(i) + "] must be a [string, string] pair");
        out.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
    return out;
}

} // namespace

TopologyGraph load_topology(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error &e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    if (!doc.is_object()) throw Error(ErrorCode::SchemaError, "topology document must be an object");
    if (!doc.contains("nodes") || !doc.at("nodes").is_array())
        throw Error(ErrorCode::SchemaError, "missing array field 'nodes'");

    std::vector<TopologyNode> nodes;
    const json &arr = doc.at("nodes");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const json &n = arr[i];
        const std::string where = "nodes[" + std::to_string(i) + "]";
        if (!n.is_object()) throw Error(ErrorCode::SchemaError, where + " must be an object");
        for (const char *field : {"id", "layer", "kind"})
            if (!n.contains(field) || !n.at(field).is_string())
                throw Error(ErrorCode::SchemaError, where + " lacks string field '" + field + "'");
        auto layer = parse_node_layer(n.at("layer").get<std::string>());
        if (!layer)
            throw Error(ErrorCode::SchemaError,
                        where + " has unknown layer '" + n.at("layer").get<std::string>() + "'");
        nodes.push_back({n.at("id").get<std::string>(), layer->first, layer->second, n.at("kind").get<std::string>()});
    }

    std::map<std::string, std::string> aliases;
    if (doc.contains("endpoint_aliases")) {
        const json &a = doc.at("endpoint_aliases");
        if (!a.is_object()) throw Error(ErrorCode::SchemaError, "'endpoint_aliases' must be an object");
        for (auto it = a.begin(); it != a.end(); ++it) {
            if (!it.value().is_string())
                throw Error(ErrorCode::SchemaError, "alias '" + it.key() + "' must map to a string");
            aliases.emplace(it.key(), it.value().get<std::string>());
        }
    }
    return TopologyGraph(std::move(nodes), parse_edges(doc, "call_edges"), parse_edges(doc, "hosting_edges"),
                         std::move(aliases));
}

TopologyGraph load_topology_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open topology file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_topology(ss.str());
}

std::string topology_to_json(const TopologyGraph &graph) {
    json doc;
    doc["nodes"] = json::array();
    for (const auto &n : graph.nodes())
        doc["nodes"].push_back({{"id", n.id}, {"layer", layer_token(n)}, {"kind", n.kind_label}});
    doc["call_edges"] = json::array();
    for (const auto &[a, b] : graph.call_edges()) doc["call_edges"].push_back({a, b});
    doc["hosting_edges"] = json::array();
    for (const auto &[a, b] : graph.hosting_edges()) doc["hosting_edges"].push_back({a, b});
    if (!graph.endpoint_aliases().empty()) doc["endpoint_aliases"] = graph.endpoint_aliases();
    return doc.dump(2) + "\n";
}

std::vector<EndToEndPath> enumerate_paths(const TopologyGraph &graph) {
    std::vector<const TopologyNode *> services;
    for (const auto &n : graph.nodes())
        if (n.kind == NodeKind::Microservice) services.push_back(&n);
    std::sort(services.begin(), services.end(),
              [](const TopologyNode *a, const TopologyNode *b) { return a->id < b->id; });

    std::vector<EndToEndPath> paths;
    for (const TopologyNode *svc : services) {
        EndToEndPath path;
        const TopologyNode *cur = svc;
        path.nodes.push_back(cur->id);
        while (cur->kind != NodeKind::PhysicalMachine) {
            auto host = graph.host_of(cur->id);
            if (!host)
                throw Error(ErrorCode::DanglingNode, "'" + cur->id + "' (on the chain of service '" +
                                                         svc->id + "') has no host");
            cur = graph.find(*host);
            if (cur->kind != NodeKind::Pod) path.nodes.push_back(cur->id);
        }
        paths.push_back(std::move(path));
    }
    return paths;
}

PathMetrics metrics_on_path(const TopologyGraph &graph, const EndToEndPath &path,
                            std::span<const MetricId> metrics) {
    std::set<std::string, std::less<>> members(path.nodes.begin(), path.nodes.end());
    for (const auto &id : path.nodes)
        for (auto host = graph.host_of(id); host; host = graph.host_of(*host)) {
            const TopologyNode *n = graph.find(*host);
            if (n->kind == NodeKind::Pod) members.insert(n->id);
        }

    PathMetrics out;
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        if (is_fnode(metrics[i])) continue;
        auto node = graph.resolve_endpoint(metrics[i].endpoint);
        if (!node) {
            out.unresolved.push_back(i);
            continue;
        }
        if (members.count(*node)) out.on_path.push_back(i);
    }
    return out;
}

} // namespace rca
