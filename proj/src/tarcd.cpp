#include "rca/tarcd.h"

#include <algorithm>
#include <map>
#include <numeric>

namespace rca {

void TarcdConfig::validate() const {
    if (gamma < 2) throw Error(ErrorCode::InvalidArgument, "gamma must be >= 2");
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    psi_options().validate();
}

namespace {

template <class Key>
std::vector<std::vector<std::size_t>> grouped_chunks(std::vector<std::size_t> items, int gamma, Key key) {
    if (gamma < 2) throw Error(ErrorCode::InvalidArgument, "gamma must be >= 2");
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    std::map<decltype(key(std::size_t{})), std::vector<std::size_t>> groups;
    for (std::size_t i : items) groups[key(i)].push_back(i);

    std::vector<std::vector<std::size_t>> out;
    const auto g = static_cast<std::size_t>(gamma);
    for (auto &[_, members] : groups)
        for (std::size_t start = 0; start < members.size(); start += g)
            out.emplace_back(members.begin() + static_cast<std::ptrdiff_t>(start),
                             members.begin() + static_cast<std::ptrdiff_t>(std::min(members.size(), start + g)));
    return out;
}

void check_items(std::span<const MetricId> metrics, const std::vector<std::size_t> &items) {
    for (std::size_t i : items)
        if (i >= metrics.size()) throw Error(ErrorCode::IndexOutOfRange, "metric index out of range");
}

Candidates merge(const std::vector<SubsetResult> &results) {
    std::vector<std::pair<std::size_t, double>> all;
    for (const auto &r : results)
        for (std::size_t i = 0; i < r.neighbors.size(); ++i) all.emplace_back(r.neighbors[i], r.edge_p[i]);
    std::sort(all.begin(), all.end());
    Candidates out;
    for (auto [c, p] : all) {
        out.columns.push_back(c);
        out.p.push_back(p);
    }
    return out;
}

} // namespace

std::vector<std::vector<std::size_t>> layer_resource_partition(std::span<const MetricId> metrics,
                                                               std::vector<std::size_t> items, int gamma) {
    check_items(metrics, items);
    return grouped_chunks(std::move(items), gamma,
                          [&](std::size_t i) { return std::pair{metrics[i].layer, metrics[i].resource}; });
}

std::vector<std::vector<std::size_t>> resource_partition(std::span<const MetricId> metrics,
                                                         std::vector<std::size_t> items, int gamma) {
    check_items(metrics, items);
    return grouped_chunks(std::move(items), gamma, [&](std::size_t i) { return metrics[i].resource; });
}

Candidates phase1_candidates(const PreparedData &data, const TarcdConfig &config, Phase1Trace *trace) {
    config.validate();
    if (data.metrics.empty()) throw Error(ErrorCode::EmptyDataset, "no metrics to localize");
    const PsiPcOptions opts = config.psi_options();
    const std::size_t bound = static_cast<std::size_t>(std::max(config.k, config.gamma));

    Candidates K;
    K.columns.resize(data.metrics.size());
    std::iota(K.columns.begin(), K.columns.end(), std::size_t{0});
    K.p.assign(K.columns.size(), 0.0);
    Phase1Trace local;

    do {
        auto subsets = layer_resource_partition(data.metrics, K.columns, config.gamma);
        Candidates next = merge(psi_pc_batch(data.discrete, subsets, data.fnode_col, opts, config.workers));
        if (trace) local.rounds.push_back(std::move(subsets));
        const bool unchanged = next.columns == K.columns;
        K = std::move(next);
        if (unchanged) {
            local.stagnated = true;
            break;
        }
    } while (K.columns.size() > bound);

    if (trace) *trace = std::move(local);
    return K;
}

WeightedCandidates phase2_weighted(const PreparedData &data, const Candidates &phase1,
                                   const TopologyGraph &graph, const TarcdConfig &config, Phase2Trace *trace) {
    config.validate();
    WeightedCandidates out;
    Phase2Trace local;
    if (phase1.columns.empty()) {
        if (trace) *trace = std::move(local);
        return out;
    }

    std::vector<char> is_candidate(data.metrics.size(), 0);
    for (std::size_t c : phase1.columns) is_candidate[c] = 1;
    std::vector<char> resolved(data.metrics.size(), 0);

    std::vector<std::vector<std::size_t>> subsets;
    std::vector<std::size_t> subset_path;
    for (const EndToEndPath &path : enumerate_paths(graph)) {
        PathMetrics on = metrics_on_path(graph, path, data.metrics);
        PathWeight pw{path, 0.0, {}};
        for (std::size_t c : on.on_path) {
            resolved[c] = 1;
            if (is_candidate[c]) pw.candidates.push_back(c);
        }
        if (!pw.candidates.empty()) {
            const double denom = config.weighting == PathWeighting::CandidateShare
                                     ? static_cast<double>(phase1.columns.size())
                                     : static_cast<double>(on.on_path.size());
            pw.w_p = static_cast<double>(pw.candidates.size()) / denom;
            for (auto &chunk : resource_partition(data.metrics, pw.candidates, config.gamma)) {
                subsets.push_back(std::move(chunk));
                subset_path.push_back(local.paths.size());
            }
        }
        local.paths.push_back(std::move(pw));
    }
    for (std::size_t c : phase1.columns)
        if (!resolved[c]) ++local.unresolved;

    auto results = psi_pc_batch(data.discrete, subsets, data.fnode_col, config.psi_options(), config.workers);

    // column -> (weighted, raw), keeping the minimum weighted p-value
    std::map<std::size_t, std::pair<double, double>> best;
    for (std::size_t s = 0; s < results.size(); ++s) {
        const double w = local.paths[subset_path[s]].w_p;
        for (std::size_t i = 0; i < results[s].neighbors.size(); ++i) {
            const double p = results[s].edge_p[i];
            auto [it, inserted] = best.emplace(results[s].neighbors[i], std::pair{p * w, p});
            if (!inserted && std::pair{p * w, p} < it->second) it->second = {p * w, p};
        }
    }
    for (const auto &[c, wp] : best) {
        out.columns.push_back(c);
        out.weighted_p.push_back(wp.first);
        out.p.push_back(wp.second);
    }

    if (trace) {
        local.subsets = std::move(subsets);
        local.subset_path = std::move(subset_path);
        *trace = std::move(local);
    }
    return out;
}

RankedRootCauses tarcd_localize(const PreparedData &data, const TopologyGraph &graph,
                                const TarcdConfig &config, TarcdTrace *trace) {
    config.validate();
    if (data.metrics.empty()) throw Error(ErrorCode::EmptyDataset, "no metrics to localize");
    TarcdTrace local;
    Candidates p1 = phase1_candidates(data, config, trace ? &local.phase1 : nullptr);
    WeightedCandidates p2 = phase2_weighted(data, p1, graph, config, trace ? &local.phase2 : nullptr);

    const auto k = static_cast<std::size_t>(config.k);
    std::vector<RankedEntry> entries;
    RankedRootCauses out;
    if (!p2.columns.empty()) {
        for (std::size_t i = 0; i < p2.columns.size(); ++i)
            entries.push_back({data.metrics[p2.columns[i]], p2.p[i], p2.weighted_p[i], 0});
        out = rank_root_causes(std::move(entries), k);
        out.low_confidence = weak_evidence(out, config.alpha, data.metrics.size());
    } else {
        local.fallback = true;
        for (std::size_t i = 0; i < p1.columns.size(); ++i)
            entries.push_back({data.metrics[p1.columns[i]], p1.p[i], std::nullopt, 0});
        out = rank_root_causes(std::move(entries), k);
        out.low_confidence = true;
    }
    if (trace) {
        local.phase1_result = std::move(p1);
        *trace = std::move(local);
    }
    return out;
}

RankedRootCauses tarcd_localize(const TimeSeriesDataset &normal, const TimeSeriesDataset &anomalous,
                                const TopologyGraph &graph, const TarcdConfig &config, TarcdTrace *trace) {
    config.validate();
    return tarcd_localize(prepare(normal, anomalous, config.bins, config.workers), graph, config, trace);
}

} // namespace rca
