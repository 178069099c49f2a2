#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rca/model.h"

namespace rca {

struct CatalogEntry {
    Layer layer = Layer::ServiceInstance;
    Resource resource = Resource::Application;
    MetricClass cls = MetricClass::State;
    std::string name_pattern; ///< fnmatch-style glob; plain names match exactly
    std::string table1_cell;  ///< "layer/resource/class" cell the entry belongs to
    std::string description;
    std::string aggregator;   ///< scrape-side hint, informational only

    bool matches(std::string_view name, Layer at) const;
};

/// Ordered set of catalog entries. Construction rejects duplicate
/// (layer, resource, class, pattern) tuples.
class MetricCatalog {
public:
    MetricCatalog() = default;
    explicit MetricCatalog(std::vector<CatalogEntry> entries);

    /// The shipped catalog: 5 service, 29 container, 34 VM and 34 PM entries.
    static const MetricCatalog &default_catalog();

    /// Tab-separated: layer, resource, class, name_pattern, table1_cell,
    /// description[, aggregator]. Blank lines and '#' lines are skipped; a
    /// first line starting with "layer" is treated as the header.
    static MetricCatalog parse(std::string_view tsv);
    static MetricCatalog load_file(const std::string &path);
    std::string to_tsv() const;

    const std::vector<CatalogEntry> &entries() const noexcept { return entries_; }
    std::vector<const CatalogEntry *> entries_for(Layer layer) const;

    /// Entry matching (name, layer), or nullptr. Throws AmbiguousMatch when
    /// the name matches entries that disagree on class or resource.
    const CatalogEntry *lookup(std::string_view name, Layer layer) const;

private:
    std::vector<CatalogEntry> entries_;
};

std::map<Layer, std::size_t> catalog_counts(const MetricCatalog &catalog);

struct RawMetric {
    std::string name;
    std::string endpoint;
    Layer layer = Layer::ServiceInstance;
};

struct Selection {
    std::vector<MetricId> selected;
    std::vector<RawMetric> unmatched;
};

/// Keeps the raw metrics that match a catalog entry, tagged with that
/// entry's class and resource, in input order.
Selection select_metrics(std::span<const RawMetric> available, const MetricCatalog &catalog);

/// Resource for a metric read from a file: the catalog entry when one
/// matches, otherwise a keyword guess (cpu/mem/fs|disk/net), Application for
/// the service layer.
Resource infer_resource(std::string_view name, Layer layer, const MetricCatalog &catalog);

/// Raw metric names an exporter at `layer` would publish: every catalog
/// name plus unselected distractors. Sizes: service 12, container 110,
/// vm 292, pm 336.
std::vector<std::string> synthetic_inventory(Layer layer);

} // namespace rca
