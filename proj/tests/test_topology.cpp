#include <doctest.h>

#include "helpers.h"
#include "oracles.h"
#include "rca/topology.h"

using namespace rca;
using testutil::metric;

namespace {

const char *kMinimal = R"({
  "nodes": [
    {"id": "s1", "layer": "service", "kind": "service"},
    {"id": "c1", "layer": "container", "kind": "container"},
    {"id": "v1", "layer": "vm", "kind": "vm"},
    {"id": "p1", "layer": "pm", "kind": "pm"}
  ],
  "call_edges": [],
  "hosting_edges": [["s1", "c1"], ["c1", "v1"], ["v1", "p1"]]
})";

ErrorCode code_of(const std::function<void()> &fn) {
    try {
        fn();
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("expected an rca::Error");
    return ErrorCode::InvalidArgument;
}

} // namespace

TEST_CASE("minimal document yields one path") {
    auto g = load_topology(kMinimal);
    auto paths = enumerate_paths(g);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0].nodes == std::vector<std::string>{"s1", "c1", "v1", "p1"});
    CHECK(g.host_of("c1") == std::optional<std::string>("v1"));
    CHECK(!g.host_of("p1"));
    CHECK(g.hosted_on("v1") == std::vector<std::string>{"c1"});
}

TEST_CASE("serialisation round-trips") {
    auto g = load_topology(kMinimal);
    auto again = load_topology(topology_to_json(g));
    CHECK(enumerate_paths(again) == enumerate_paths(g));
    CHECK(again.nodes().size() == g.nodes().size());
}

TEST_CASE("structural errors") {
    std::vector<TopologyNode> base{{"s", Layer::ServiceInstance, NodeKind::Microservice, "service"},
                                   {"c", Layer::Container, NodeKind::Container, "container"},
                                   {"v1", Layer::VirtualMachine, NodeKind::VirtualMachine, "vm"},
                                   {"v2", Layer::VirtualMachine, NodeKind::VirtualMachine, "vm"},
                                   {"p", Layer::PhysicalMachine, NodeKind::PhysicalMachine, "pm"}};
    CHECK(code_of([&] { TopologyGraph(base, {}, {{"c", "v1"}, {"c", "v2"}}); }) == ErrorCode::InvariantViolation);
    CHECK(code_of([&] { TopologyGraph(base, {}, {{"v1", "c"}}); }) == ErrorCode::InvariantViolation);
    CHECK(code_of([&] { TopologyGraph(base, {}, {{"c", "nowhere"}}); }) == ErrorCode::InvariantViolation);
    CHECK(code_of([&] { TopologyGraph(base, {{"s", "c"}}, {}); }) == ErrorCode::InvariantViolation);
    auto dup = base;
    dup.push_back(base[0]);
    CHECK(code_of([&] { TopologyGraph(dup, {}, {}); }) == ErrorCode::InvariantViolation);

    TopologyGraph dangling(base, {}, {{"s", "c"}, {"c", "v1"}});
    CHECK(code_of([&] { enumerate_paths(dangling); }) == ErrorCode::DanglingNode);
}

TEST_CASE("schema errors") {
    CHECK(code_of([] { load_topology("{not json"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { load_topology("[]"); }) == ErrorCode::SchemaError);
    CHECK(code_of([] { load_topology(R"({"call_edges": [], "hosting_edges": []})"); }) == ErrorCode::SchemaError);
    CHECK(code_of([] { load_topology(R"({"nodes": [{"id": "a", "layer": "rack", "kind": "x"}], "call_edges": [], "hosting_edges": []})"); }) ==
          ErrorCode::SchemaError);
    CHECK(code_of([] { load_topology(R"({"nodes": [], "call_edges": [["a"]], "hosting_edges": []})"); }) ==
          ErrorCode::SchemaError);
    CHECK(code_of([] { load_topology_file("/nonexistent/topology.json"); }) == ErrorCode::Io);
}

TEST_CASE("services sharing a machine share the path suffix") {
    std::vector<TopologyNode> nodes{{"a", Layer::ServiceInstance, NodeKind::Microservice, "service"},
                                    {"b", Layer::ServiceInstance, NodeKind::Microservice, "service"},
                                    {"ca", Layer::Container, NodeKind::Container, "container"},
                                    {"cb", Layer::Container, NodeKind::Container, "container"},
                                    {"pod", Layer::Container, NodeKind::Pod, "pod"},
                                    {"v", Layer::VirtualMachine, NodeKind::VirtualMachine, "vm"},
                                    {"p", Layer::PhysicalMachine, NodeKind::PhysicalMachine, "pm"}};
    TopologyGraph g(nodes, {{"a", "b"}}, {{"a", "ca"}, {"b", "cb"}, {"ca", "v"}, {"cb", "pod"}, {"pod", "v"}, {"v", "p"}});
    auto paths = enumerate_paths(g);
    REQUIRE(paths.size() == 2);
    CHECK(paths[0].nodes == std::vector<std::string>{"a", "ca", "v", "p"});
    CHECK(paths[1].nodes == std::vector<std::string>{"b", "cb", "v", "p"});
    CHECK(g.callers_of("b") == std::vector<std::string>{"a"});

    std::vector<MetricId> ms{metric("lat", "b"), metric("cpu", "ca", Layer::Container, Resource::Cpu),
                             metric("net", "pod", Layer::Container, Resource::Network),
                             metric("cpu", "v", Layer::VirtualMachine, Resource::Cpu),
                             metric("ghost", "unknown-host", Layer::VirtualMachine, Resource::Cpu), fnode_metric()};
    auto on_b = metrics_on_path(g, paths[1], ms);
    CHECK(on_b.on_path == std::vector<std::size_t>{0, 2, 3});
    CHECK(on_b.unresolved == std::vector<std::size_t>{4});
    auto on_a = metrics_on_path(g, paths[0], ms);
    CHECK(on_a.on_path == std::vector<std::size_t>{1, 3});
}

TEST_CASE("endpoint aliases resolve to nodes") {
    std::vector<TopologyNode> nodes{{"s", Layer::ServiceInstance, NodeKind::Microservice, "service"}};
    TopologyGraph g(nodes, {}, {}, {{"10.0.0.1:8080", "s"}});
    CHECK(g.resolve_endpoint("10.0.0.1:8080") == std::optional<std::string>("s"));
    CHECK(g.resolve_endpoint("s") == std::optional<std::string>("s"));
    CHECK(!g.resolve_endpoint("t"));
    CHECK_THROWS_AS(TopologyGraph(nodes, {}, {}, {{"x", "missing"}}), Error);
}

TEST_CASE("paths match a depth-first walk on random deployments") {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 100; ++t) {
        auto rt = oracle::random_topology(rng);
        TopologyGraph g(rt.nodes, rt.calls, rt.hosting);
        auto expected = oracle::dfs_paths(g);
        auto paths = enumerate_paths(g);
        REQUIRE(paths.size() == expected.size());
        for (const auto &p : paths) {
            REQUIRE(expected.count(p.nodes.front()));
            CHECK(p.nodes == expected.at(p.nodes.front()));
            CHECK(g.find(p.nodes.back())->kind == NodeKind::PhysicalMachine);
        }
        for (std::size_t i = 1; i < paths.size(); ++i) CHECK(paths[i - 1].nodes.front() < paths[i].nodes.front());
        auto again = load_topology(topology_to_json(g));
        CHECK(enumerate_paths(again) == paths);
    }
}
