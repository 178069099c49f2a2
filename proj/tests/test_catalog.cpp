#include <doctest.h>

#include <set>

#include "rca/catalog.h"

using namespace rca;

namespace {

Selection select_inventory(Layer layer, const std::string &endpoint) {
    std::vector<RawMetric> raw;
    for (const auto &n : synthetic_inventory(layer)) raw.push_back({n, endpoint, layer});
    return select_metrics(raw, MetricCatalog::default_catalog());
}

} // namespace

TEST_CASE("default catalog counts per layer") {
    auto c = catalog_counts(MetricCatalog::default_catalog());
    CHECK(c.at(Layer::ServiceInstance) == 5);
    CHECK(c.at(Layer::Container) == 29);
    CHECK(c.at(Layer::VirtualMachine) == 34);
    CHECK(c.at(Layer::PhysicalMachine) == 34);
}

TEST_CASE("empty and single-entry catalogs") {
    auto c = catalog_counts(MetricCatalog{});
    for (Layer l : kAllLayers) CHECK(c.at(l) == 0);
    MetricCatalog one({{Layer::Container, Resource::Cpu, MetricClass::State, "container_cpu_utilization", "", "", ""}});
    auto c1 = catalog_counts(one);
    CHECK(c1.at(Layer::Container) == 1);
    CHECK(c1.at(Layer::VirtualMachine) == 0);
}

TEST_CASE("synthetic inventories reduce to the catalog") {
    CHECK(synthetic_inventory(Layer::Container).size() == 110);
    CHECK(synthetic_inventory(Layer::VirtualMachine).size() == 292);
    CHECK(synthetic_inventory(Layer::PhysicalMachine).size() == 336);
    CHECK(select_inventory(Layer::Container, "c").selected.size() == 29);
    CHECK(select_inventory(Layer::VirtualMachine, "v").selected.size() == 34);
    CHECK(select_inventory(Layer::PhysicalMachine, "p").selected.size() == 34);
    auto svc = select_inventory(Layer::ServiceInstance, "s");
    CHECK(svc.selected.size() == 5);
    CHECK(svc.selected.size() + svc.unmatched.size() == synthetic_inventory(Layer::ServiceInstance).size());

    auto vm = select_inventory(Layer::VirtualMachine, "v");
    CHECK(vm.unmatched.size() == 292 - 34);
    std::set<std::string> names;
    for (const auto &m : vm.selected) {
        CHECK(m.endpoint == "v");
        CHECK(m.layer == Layer::VirtualMachine);
        names.insert(m.name);
    }
    CHECK(names.size() == 34);
}

TEST_CASE("selected metrics carry the entry's class and resource") {
    std::vector<RawMetric> raw{{"container_cpu_utilization", "c", Layer::Container},
                               {"node_network_transmit_throughput", "v", Layer::VirtualMachine},
                               {"container_cpu_utilization", "v", Layer::VirtualMachine}};
    auto s = select_metrics(raw, MetricCatalog::default_catalog());
    REQUIRE(s.selected.size() == 2);
    CHECK(s.selected[0].resource == Resource::Cpu);
    CHECK(s.selected[0].cls == MetricClass::State);
    CHECK(s.selected[1].resource == Resource::Network);
    CHECK(s.selected[1].cls == MetricClass::Activity);
    REQUIRE(s.unmatched.size() == 1);
    CHECK(s.unmatched[0].layer == Layer::VirtualMachine);
}

TEST_CASE("every default entry maps to exactly one resource") {
    const auto &cat = MetricCatalog::default_catalog();
    for (const auto &e : cat.entries()) {
        const CatalogEntry *hit = nullptr;
        CHECK_NOTHROW(hit = cat.lookup(e.name_pattern, e.layer));
        REQUIRE(hit);
        CHECK(hit->resource == e.resource);
        if (e.layer == Layer::ServiceInstance) CHECK(e.resource == Resource::Application);
    }
}

TEST_CASE("conflicting patterns are ambiguous") {
    MetricCatalog cat({{Layer::VirtualMachine, Resource::Cpu, MetricClass::State, "node_*", "", "", ""},
                       {Layer::VirtualMachine, Resource::Memory, MetricClass::State, "node_memory_*", "", "", ""}});
    std::vector<RawMetric> raw{{"node_memory_used", "v", Layer::VirtualMachine}};
    try {
        select_metrics(raw, cat);
        FAIL("expected AmbiguousMatch");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::AmbiguousMatch);
    }
    CHECK(cat.lookup("node_load1", Layer::VirtualMachine)->resource == Resource::Cpu);
}

TEST_CASE("duplicate and malformed entries are rejected") {
    CatalogEntry e{Layer::Container, Resource::Cpu, MetricClass::State, "x", "", "", ""};
    CHECK_THROWS_AS(MetricCatalog({e, e}), Error);
    CHECK_THROWS_AS(MetricCatalog({{Layer::ServiceInstance, Resource::Cpu, MetricClass::State, "x", "", "", ""}}), Error);
    CHECK_THROWS_AS(MetricCatalog::parse("container\tcpu\tstate\tx\n"), Error);
    CHECK_THROWS_AS(MetricCatalog::parse("rack\tcpu\tstate\tx\tcell\tdesc\n"), Error);
    CHECK_THROWS_AS(MetricCatalog::load_file("/nonexistent/catalog.tsv"), Error);
}

TEST_CASE("tsv round-trip preserves the catalog") {
    const auto &cat = MetricCatalog::default_catalog();
    auto again = MetricCatalog::parse(cat.to_tsv());
    REQUIRE(again.entries().size() == cat.entries().size());
    for (std::size_t i = 0; i < cat.entries().size(); ++i) {
        const auto &a = cat.entries()[i], &b = again.entries()[i];
        CHECK(a.layer == b.layer);
        CHECK(a.resource == b.resource);
        CHECK(a.cls == b.cls);
        CHECK(a.name_pattern == b.name_pattern);
        CHECK(a.description == b.description);
    }
    auto skipped = MetricCatalog::parse("# comment\n\ncontainer\tcpu\tstate\tx\tcell\tdesc\r\n");
    CHECK(skipped.entries().size() == 1);
}

TEST_CASE("resource inference for file metrics") {
    const auto &cat = MetricCatalog::default_catalog();
    CHECK(infer_resource("container_cpu_utilization", Layer::Container, cat) == Resource::Cpu);
    CHECK(infer_resource("something_network_odd", Layer::VirtualMachine, cat) == Resource::Network);
    CHECK(infer_resource("weird_disk_thing", Layer::PhysicalMachine, cat) == Resource::Disk);
    CHECK(infer_resource("anything", Layer::ServiceInstance, cat) == Resource::Application);
}
