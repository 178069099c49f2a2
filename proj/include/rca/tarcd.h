#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rca/model.h"
#include "rca/psi_pc.h"
#include "rca/rcd.h"
#include "rca/topology.h"

namespace rca {

/// How a path's weight is computed from the phase-1 candidates.
enum class PathWeighting {
    CandidateShare, ///< candidates on the path / all phase-1 candidates
    PathDensity,    ///< candidates on the path / all metrics on the path
};

struct TarcdConfig {
    int gamma = 4;
    int k = 5;
    double alpha = kDefaultAlpha;
    int bins = kDefaultBins;
    int max_cond_size = 2;
    std::uint64_t seed = 0; ///< accepted for symmetry with RCD; the search is deterministic
    int workers = 1;
    PathWeighting weighting = PathWeighting::CandidateShare;

    void validate() const;
    PsiPcOptions psi_options() const { return {alpha, bins, max_cond_size}; }
};

/// Groups `items` (column indices into `metrics`) by (layer, resource) and
/// cuts every group, in ascending index order, into chunks of at most gamma.
std::vector<std::vector<std::size_t>> layer_resource_partition(std::span<const MetricId> metrics,
                                                               std::vector<std::size_t> items, int gamma);

/// Same, grouping by resource only.
std::vector<std::vector<std::size_t>> resource_partition(std::span<const MetricId> metrics,
                                                         std::vector<std::size_t> items, int gamma);

struct Candidates {
    std::vector<std::size_t> columns; ///< ascending
    std::vector<double> p;            ///< parallel to columns
};

struct Phase1Trace {
    std::vector<std::vector<std::vector<std::size_t>>> rounds; ///< subsets tested per round
    bool stagnated = false;
};

/// Iterated layer/resource-partitioned search until at most max(k, gamma)
/// candidates remain or the set stops shrinking.
Candidates phase1_candidates(const PreparedData &data, const TarcdConfig &config, Phase1Trace *trace = nullptr);

struct PathWeight {
    EndToEndPath path;
    double w_p = 0.0;
    std::vector<std::size_t> candidates; ///< phase-1 columns on this path
};

struct WeightedCandidates {
    std::vector<std::size_t> columns;
    std::vector<double> p;
    std::vector<double> weighted_p;
};

struct Phase2Trace {
    std::vector<PathWeight> paths;
    std::vector<std::vector<std::size_t>> subsets;
    std::vector<std::size_t> subset_path; ///< index into paths, parallel to subsets
    std::size_t unresolved = 0;           ///< phase-1 candidates on no known node
};

/// Per end-to-end path: resource-partitioned search over the phase-1
/// candidates on that path, weighting each surviving p-value by the path
/// weight. A metric that survives on several paths keeps its minimum.
WeightedCandidates phase2_weighted(const PreparedData &data, const Candidates &phase1,
                                   const TopologyGraph &graph, const TarcdConfig &config,
                                   Phase2Trace *trace = nullptr);

struct TarcdTrace {
    Phase1Trace phase1;
    Phase2Trace phase2;
    Candidates phase1_result;
    bool fallback = false;
};

RankedRootCauses tarcd_localize(const PreparedData &data, const TopologyGraph &graph,
                                const TarcdConfig &config, TarcdTrace *trace = nullptr);
RankedRootCauses tarcd_localize(const TimeSeriesDataset &normal, const TimeSeriesDataset &anomalous,
                                const TopologyGraph &graph, const TarcdConfig &config,
                                TarcdTrace *trace = nullptr);

} // namespace rca
