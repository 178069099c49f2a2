#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rca/citest.h"
#include "rca/model.h"
#include "rca/simulator.h"
#include "rca/topology.h"

namespace rca {

enum class Algorithm { Rcd, Tarcd, TarcdPathDensity };

/// "rcd", "tarcd", "tarcd-density".
std::string_view to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view s);

enum class EvalMode {
    FixedData,       ///< one dataset per scenario, only the algorithm seed changes
    RegeneratedData, ///< fresh simulator noise per run as well
};

std::string_view to_string(EvalMode m);
std::optional<EvalMode> parse_eval_mode(std::string_view s);

struct AlgorithmParams {
    int gamma = 4;
    int k = 5;
    double alpha = kDefaultAlpha;
    int bins = kDefaultBins;
    int max_cond_size = 2;
    int workers = 1;
};

/// Prepares the data and runs one algorithm. `seed` only matters for RCD.
RankedRootCauses localize(Algorithm algorithm, const TimeSeriesDataset &normal, const TimeSeriesDataset &anomalous,
                          const TopologyGraph &graph, const AlgorithmParams &params, std::uint64_t seed);

struct EvalConfig {
    std::vector<Algorithm> algorithms{Algorithm::Rcd, Algorithm::Tarcd};
    int runs = 100;
    std::uint64_t base_seed = 0;
    std::vector<int> ks{1, 3, 5};
    EvalMode mode = EvalMode::FixedData;
    AlgorithmParams params;
    SimulationOptions simulation;

    void validate() const;
};

struct RunOutcome {
    std::uint64_t algorithm_seed = 0;
    std::uint64_t data_seed = 0;
    std::vector<MetricId> top; ///< at most max(ks) entries
    std::optional<int> truth_rank;
    bool low_confidence = false;
    double seconds = 0.0;
};

struct ScenarioResult {
    Algorithm algorithm = Algorithm::Rcd;
    FaultScenario scenario;
    MetricId truth;
    int runs = 0;
    std::map<int, double> recall_at;
    double mean_exec_time = 0.0;
    /// Number of distinct Top-k sets (as sets) across the runs.
    std::size_t distinct_outcomes = 0;
    std::vector<RunOutcome> per_run;
};

struct EvalReport {
    EvalMode mode = EvalMode::FixedData;
    EvalConfig config;
    std::vector<ScenarioResult> results;

    /// Mean recall over scenarios for one algorithm and k.
    double mean_recall(Algorithm algorithm, int k) const;

    nlohmann::json to_json() const;
    /// One row per algorithm x scenario x k.
    std::string to_csv() const;
};

/// "cpu-hog@container:svc2-ctr".
std::string scenario_label(const FaultScenario &s);

/// Recall@k = runs with the truth in the Top-k / runs, for every k.
std::map<int, double> recall_from_ranks(const std::vector<std::optional<int>> &ranks, const std::vector<int> &ks);

/// For each scenario and algorithm, `runs` executions with algorithm seeds
/// base_seed .. base_seed + runs - 1. In FixedData mode the data come from
/// scenario.seed; in RegeneratedData mode run i uses scenario.seed + i.
/// Timing covers preparation (F-NODE, discretization) and localization.
EvalReport run_experiment(const TopologyGraph &graph, const std::vector<FaultScenario> &scenarios,
                          const EvalConfig &config);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Ordinary least squares y ~ a + b x.
LinearFit fit_linear(const std::vector<double> &x, const std::vector<double> &y);

struct ScalingSeries {
    Algorithm algorithm = Algorithm::Rcd;
    std::vector<std::size_t> m;
    std::vector<double> mean_seconds;
    LinearFit fit;
};

struct ScalingOptions {
    int repeats = 5;
    std::uint64_t seed = 0;
    AlgorithmParams params;
};

/// Runtime against metric count on one fixed fault. Each m takes an evenly
/// strided subset of a large simulated dataset (so every layer and resource
/// stays represented) that always contains the ground-truth metric.
std::vector<ScalingSeries> scaling_probe(const std::vector<std::size_t> &metric_counts,
                                         const std::vector<Algorithm> &algorithms, const ScalingOptions &options);

nlohmann::json scaling_to_json(const std::vector<ScalingSeries> &series);

} // namespace rca
