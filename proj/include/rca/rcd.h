#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rca/citest.h"
#include "rca/model.h"
#include "rca/psi_pc.h"

namespace rca {

struct RcdConfig {
    int gamma = 4;
    int k = 5;
    double alpha = kDefaultAlpha;
    int bins = kDefaultBins;
    int max_cond_size = 2;
    std::uint64_t seed = 0;
    int workers = 1;

    void validate() const;
    PsiPcOptions psi_options() const { return {alpha, bins, max_cond_size}; }
};

/// splitmix64 finalizer; used to derive independent per-level streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Uniform shuffle of `items` cut into consecutive chunks of `gamma`.
std::vector<std::vector<std::size_t>> random_partition_indices(std::vector<std::size_t> items, int gamma,
                                                               std::uint64_t seed);
std::vector<std::vector<MetricId>> random_partition(std::span<const MetricId> metrics, int gamma,
                                                    std::uint64_t seed);

/// Dataset prepared once per localization: F-NODE-augmented, discretized.
struct PreparedData {
    std::vector<MetricId> metrics; ///< candidate metrics; column i of `discrete`
    DiscreteDataset discrete;      ///< metrics columns followed by the F-NODE
    std::size_t fnode_col = 0;
};

PreparedData prepare(const TimeSeriesDataset &normal, const TimeSeriesDataset &anomalous, int bins,
                     int workers = 1);

/// Per-level trace of the hierarchical search (for reports and tests).
struct RcdTrace {
    std::vector<std::size_t> level_sizes; ///< |K| entering each level
    bool stagnated = false;
    bool fallback = false;
};

RankedRootCauses rcd_localize(const TimeSeriesDataset &normal, const TimeSeriesDataset &anomalous,
                              const RcdConfig &config, RcdTrace *trace = nullptr);
RankedRootCauses rcd_localize(const PreparedData &data, const RcdConfig &config,
                              RcdTrace *trace = nullptr);

} // namespace rca
