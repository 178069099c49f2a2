#include "rca/rcd.h"

#include <algorithm>
#include <numeric>
#include <random>

namespace rca {

void RcdConfig::validate() const {
    if (gamma < 2) throw Error(ErrorCode::InvalidArgument, "gamma must be >= 2");
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    psi_options().validate();
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::vector<std::vector<std::size_t>> random_partition_indices(std::vector<std::size_t> items, int gamma,
                                                               std::uint64_t seed) {
    if (gamma < 2) throw Error(ErrorCode::InvalidArgument, "gamma must be >= 2");
    std::mt19937_64 rng(seed);
    // Fisher-Yates with a multiply-shift bound keeps the shuffle identical
    // across standard libraries.
    for (std::size_t i = items.size(); i > 1; --i) {
        auto j = static_cast<std::size_t>((static_cast<unsigned __int128>(rng()) * i) >> 64);
        std::swap(items[i - 1], items[j]);
    }
    std::vector<std::vector<std::size_t>> out;
    const auto g = static_cast<std::size_t>(gamma);
    for (std::size_t start = 0; start < items.size(); start += g)
        out.emplace_back(items.begin() + static_cast<std::ptrdiff_t>(start),
                         items.begin() + static_cast<std::ptrdiff_t>(std::min(items.size(), start + g)));
    return out;
}

std::vector<std::vector<MetricId>> random_partition(std::span<const MetricId> metrics, int gamma,
                                                    std::uint64_t seed) {
    std::vector<std::size_t> idx(metrics.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::vector<std::vector<MetricId>> out;
    for (const auto &chunk : random_partition_indices(std::move(idx), gamma, seed)) {
        auto &subset = out.emplace_back();
        for (std::size_t i : chunk) subset.push_back(metrics[i]);
    }
    return out;
}

PreparedData prepare(const TimeSeriesDataset &normal, const TimeSeriesDataset &anomalous, int bins,
                     int workers) {
    if (normal.cols() == 0) throw Error(ErrorCode::EmptyDataset, "no metrics to localize");
    TimeSeriesDataset combined = concat_with_fnode(normal, anomalous);
    PreparedData out;
    out.metrics = normal.metrics();
    out.discrete = discretize(combined, bins, workers);
    out.fnode_col = combined.cols() - 1;
    return out;
}

namespace {

struct Level {
    std::vector<std::size_t> columns;
    std::vector<double> p;
};

Level merge(const std::vector<SubsetResult> &results) {
    std::vector<std::pair<std::size_t, double>> all;
    for (const auto &r : results)
        for (std::size_t i = 0; i < r.neighbors.size(); ++i) all.emplace_back(r.neighbors[i], r.edge_p[i]);
    std::sort(all.begin(), all.end());
    Level out;
    for (auto [c, p] : all) {
        out.columns.push_back(c);
        out.p.push_back(p);
    }
    return out;
}

RankedRootCauses to_ranked(const PreparedData &data, const Level &level, std::size_t k) {
    std::vector<RankedEntry> entries;
    for (std::size_t i = 0; i < level.columns.size(); ++i)
        entries.push_back({data.metrics[level.columns[i]], level.p[i], std::nullopt, 0});
    return rank_root_causes(std::move(entries), k);
}

} // namespace

RankedRootCauses rcd_localize(const PreparedData &data, const RcdConfig &config, RcdTrace *trace) {
    config.validate();
    if (data.metrics.empty()) throw Error(ErrorCode::EmptyDataset, "no metrics to localize");
    const PsiPcOptions opts = config.psi_options();
    const auto gamma = static_cast<std::size_t>(config.gamma);
    const auto k = static_cast<std::size_t>(config.k);

    std::vector<std::size_t> K(data.metrics.size());
    std::iota(K.begin(), K.end(), std::size_t{0});
    Level last_nonempty;
    RcdTrace local;

    for (std::uint64_t level = 0; K.size() > gamma; ++level) {
        local.level_sizes.push_back(K.size());
        auto subsets = random_partition_indices(K, config.gamma, mix_seed(config.seed, level));
        Level next = merge(psi_pc_batch(data.discrete, subsets, data.fnode_col, opts, config.workers));
        if (!next.columns.empty()) last_nonempty = next;
        if (next.columns == K) {
            local.stagnated = true;
            break;
        }
        K = std::move(next.columns);
    }

    RankedRootCauses out;
    if (!K.empty()) {
        local.level_sizes.push_back(K.size());
        Level final_level = merge({psi_pc_columns(data.discrete, K, data.fnode_col, opts)});
        if (!final_level.columns.empty()) out = to_ranked(data, final_level, k);
    }
    if (out.entries.empty()) {
        local.fallback = true;
        out = to_ranked(data, last_nonempty, k);
        out.low_confidence = true;
    } else {
        out.low_confidence = weak_evidence(out, config.alpha, data.metrics.size());
    }
    if (trace) *trace = std::move(local);
    return out;
}

RankedRootCauses rcd_localize(const TimeSeriesDataset &normal, const TimeSeriesDataset &anomalous,
                              const RcdConfig &config, RcdTrace *trace) {
    config.validate();
    return rcd_localize(prepare(normal, anomalous, config.bins, config.workers), config, trace);
}

} // namespace rca
