#include "rca/psi_pc.h"

#include <algorithm>
#include <exception>
#include <numeric>

namespace rca {

void PsiPcOptions::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
    if (bins < 2 || bins > kMaxBins) throw Error(ErrorCode::InvalidBins, "bins out of range");
    if (max_cond_size < 0) throw Error(ErrorCode::InvalidArgument, "max_cond_size must be >= 0");
}

namespace {

// Calls `fn(subset)` for every size-`k` subset of `pool` in lexicographic
// order; stops early when fn returns true. Returns whether it stopped.
template <class Fn>
bool for_each_combination(const std::vector<std::size_t> &pool, std::size_t k, Fn &&fn) {
    if (k > pool.size()) return false;
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<std::size_t> subset(k);
    while (true) {
        for (std::size_t i = 0; i < k; ++i) subset[i] = pool[idx[i]];
        if (fn(subset)) return true;
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == pool.size() - k + (i - 1)) --i;
        if (i == 0) return false;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

} // namespace

SubsetResult psi_pc_columns(const DiscreteDataset &data, std::vector<std::size_t> columns,
                            std::size_t fnode_col, const PsiPcOptions &options, bool record_trace) {
    options.validate();
    if (columns.empty()) throw Error(ErrorCode::EmptyInput, "psi-PC needs at least one metric");
    std::sort(columns.begin(), columns.end());
    columns.erase(std::unique(columns.begin(), columns.end()), columns.end());
    if (std::find(columns.begin(), columns.end(), fnode_col) != columns.end())
        throw Error(ErrorCode::InvalidArgument, "F-NODE column listed as a candidate metric");

    SubsetResult out;
    std::vector<std::size_t> adjacent = columns;
    std::vector<double> max_p(data.cols(), 0.0);
    std::vector<std::size_t> others;

    for (int s = 0; s <= options.max_cond_size; ++s) {
        const auto size = static_cast<std::size_t>(s);
        if (adjacent.empty() || adjacent.size() - 1 < size) break;
        const std::vector<std::size_t> visit = adjacent;
        for (std::size_t x : visit) {
            if (std::find(adjacent.begin(), adjacent.end(), x) == adjacent.end()) continue;
            others.clear();
            for (std::size_t c : adjacent)
                if (c != x) others.push_back(c);
            if (others.size() < size) continue;
            bool separated = for_each_combination(others, size, [&](const std::vector<std::size_t> &cond) {
                CiResult r = chi_square_ci(x, fnode_col, cond, data, options.alpha);
                ++out.tests;
                max_p[x] = std::max(max_p[x], r.p_value);
                if (record_trace) out.trace.push_back({x, fnode_col, cond, r.p_value});
                return r.independent;
            });
            if (separated) adjacent.erase(std::find(adjacent.begin(), adjacent.end(), x));
        }
    }

    out.neighbors = adjacent;
    out.edge_p.reserve(adjacent.size());
    for (std::size_t c : adjacent) out.edge_p.push_back(max_p[c]);
    return out;
}

std::vector<SubsetResult> psi_pc_batch_serial(const DiscreteDataset &data,
                                              const std::vector<std::vector<std::size_t>> &subsets,
                                              std::size_t fnode_col, const PsiPcOptions &options) {
    std::vector<SubsetResult> results;
    results.reserve(subsets.size());
    for (const auto &subset : subsets) results.push_back(psi_pc_columns(data, subset, fnode_col, options));
    return results;
}

std::vector<SubsetResult> psi_pc_batch_parallel(const DiscreteDataset &data,
                                                const std::vector<std::vector<std::size_t>> &subsets,
                                                std::size_t fnode_col, const PsiPcOptions &options,
                                                int workers) {
    std::vector<SubsetResult> results(subsets.size());
    std::exception_ptr failure;
    const auto n = static_cast<std::ptrdiff_t>(subsets.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, workers))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            results[static_cast<std::size_t>(i)] =
                psi_pc_columns(data, subsets[static_cast<std::size_t>(i)], fnode_col, options);
        } catch (...) {
#pragma omp critical(rca_psi_pc_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

std::vector<SubsetResult> psi_pc_batch(const DiscreteDataset &data,
                                       const std::vector<std::vector<std::size_t>> &subsets,
                                       std::size_t fnode_col, const PsiPcOptions &options,
                                       int workers) {
    return workers > 1 ? psi_pc_batch_parallel(data, subsets, fnode_col, options, workers)
                       : psi_pc_batch_serial(data, subsets, fnode_col, options);
}

LocalizedGraphResult psi_pc(const TimeSeriesDataset &normal, const TimeSeriesDataset &anomalous,
                            const PsiPcOptions &options) {
    options.validate();
    if (normal.cols() == 0) throw Error(ErrorCode::EmptyInput, "psi-PC needs at least one metric");
    TimeSeriesDataset combined = concat_with_fnode(normal, anomalous);
    DiscreteDataset disc = discretize(combined, options.bins);
    const std::size_t fcol = combined.cols() - 1;

    std::vector<std::size_t> columns(fcol);
    std::iota(columns.begin(), columns.end(), std::size_t{0});
    SubsetResult r = psi_pc_columns(disc, columns, fcol, options);

    LocalizedGraphResult out;
    out.tests_performed = r.tests;
    for (std::size_t i = 0; i < r.neighbors.size(); ++i) {
        const MetricId &m = combined.metrics()[r.neighbors[i]];
        out.neighbors.push_back(m);
        out.edge_p_value.emplace(m, r.edge_p[i]);
    }
    return out;
}

} // namespace rca
