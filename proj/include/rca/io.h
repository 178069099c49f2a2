#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "rca/catalog.h"
#include "rca/model.h"
#include "rca/simulator.h"

namespace rca {

inline constexpr int kSchemaVersion = 1;

/// Header "timestamp,class|name|endpoint|layer,...", one row per tick.
/// Values use the shortest round-trip representation.
std::string dataset_to_csv(const TimeSeriesDataset &dataset);

/// Parses a dataset written by dataset_to_csv (or an exporter using the same
/// header form). Empty, "nan" and "NA" cells are imputed by carrying the last
/// observed value forward, and leading gaps take the first observed value.
/// A column with no observation at all is a SchemaError. Timestamps must be
/// strictly increasing with constant spacing (Misaligned otherwise).
/// Resources come from the catalog through infer_resource.
TimeSeriesDataset dataset_from_csv(std::string_view text,
                                   const MetricCatalog &catalog = MetricCatalog::default_catalog());

std::string read_text_file(const std::string &path);
/// Writes through a sibling temporary file and a rename.
void write_text_file_atomic(const std::string &path, std::string_view content);

TimeSeriesDataset load_dataset_file(const std::string &path,
                                    const MetricCatalog &catalog = MetricCatalog::default_catalog());

nlohmann::json metric_to_json(const MetricId &m);
MetricId metric_from_json(const nlohmann::json &j);

nlohmann::json scenario_to_json(const FaultScenario &scenario);
FaultScenario scenario_from_json(const nlohmann::json &j);

/// {"schema_version", "scenario", "options", "ground_truth", files...}
nlohmann::json manifest_json(const FaultScenario &scenario, const SimulationOptions &options,
                             const GroundTruth &truth);

/// Entries with rank, metric, p_value and (when present) weighted_p_value.
nlohmann::json ranked_to_json(const RankedRootCauses &result);

} // namespace rca
