#pragma once

#include <cstddef>
#include <unordered_map>
#include <vector>

#include "rca/citest.h"
#include "rca/model.h"

namespace rca {

struct PsiPcOptions {
    double alpha = kDefaultAlpha;
    int bins = kDefaultBins;
    int max_cond_size = 2;

    void validate() const;
};

/// Neighbourhood of the F-NODE learned on one metric subset.
struct LocalizedGraphResult {
    std::vector<MetricId> neighbors;
    std::unordered_map<MetricId, double, MetricIdHash> edge_p_value;
    std::size_t tests_performed = 0;
};

/// One recorded CI test, in the column space of the discrete dataset.
struct CiTestRecord {
    std::size_t x = 0;
    std::size_t y = 0;
    std::vector<std::size_t> cond;
    double p_value = 1.0;
};

/// Column-space result of the localized search on one subset.
struct SubsetResult {
    std::vector<std::size_t> neighbors; ///< ascending column order
    std::vector<double> edge_p;         ///< parallel to neighbors
    std::size_t tests = 0;
    std::vector<CiTestRecord> trace;    ///< filled only when requested
};

/// Localized PC restricted to F-NODE edges over `columns` of a discretized
/// F-NODE-augmented dataset. Columns are visited in ascending order; an edge
/// is removed as soon as one conditioning subset (drawn from the other
/// current neighbours) makes it independent.
SubsetResult psi_pc_columns(const DiscreteDataset &data, std::vector<std::size_t> columns,
                            std::size_t fnode_col, const PsiPcOptions &options,
                            bool record_trace = false);

/// The same search over many independent subsets. The serial loop is the
/// reference; the OpenMP variant must produce identical results.
std::vector<SubsetResult> psi_pc_batch_serial(const DiscreteDataset &data,
                                              const std::vector<std::vector<std::size_t>> &subsets,
                                              std::size_t fnode_col, const PsiPcOptions &options);
std::vector<SubsetResult> psi_pc_batch_parallel(const DiscreteDataset &data,
                                                const std::vector<std::vector<std::size_t>> &subsets,
                                                std::size_t fnode_col, const PsiPcOptions &options,
                                                int workers);
std::vector<SubsetResult> psi_pc_batch(const DiscreteDataset &data,
                                       const std::vector<std::vector<std::size_t>> &subsets,
                                       std::size_t fnode_col, const PsiPcOptions &options,
                                       int workers);

/// Dataset-level entry point: appends the F-NODE, discretizes, and runs the
/// localized search over every metric of the (aligned) windows.
LocalizedGraphResult psi_pc(const TimeSeriesDataset &normal, const TimeSeriesDataset &anomalous,
                            const PsiPcOptions &options);

} // namespace rca
