#include "rca/eval.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include "rca/io.h"
#include "rca/rcd.h"
#include "rca/tarcd.h"

namespace rca {

using nlohmann::json;

std::string_view to_string(Algorithm a) {
    switch (a) {
    case Algorithm::Rcd: return "rcd";
    case Algorithm::Tarcd: return "tarcd";
    case Algorithm::TarcdPathDensity: return "tarcd-density";
    }
    return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view s) {
    if (s == "rcd") return Algorithm::Rcd;
    if (s == "tarcd") return Algorithm::Tarcd;
    if (s == "tarcd-density") return Algorithm::TarcdPathDensity;
    return std::nullopt;
}

std::string_view to_string(EvalMode m) { return m == EvalMode::FixedData ? "fixed" : "regenerated"; }

std::optional<EvalMode> parse_eval_mode(std::string_view s) {
    if (s == "fixed") return EvalMode::FixedData;
    if (s == "regenerated") return EvalMode::RegeneratedData;
    return std::nullopt;
}

namespace {

RankedRootCauses localize_prepared(Algorithm algorithm, const PreparedData &data, const TopologyGraph &graph,
                                   const AlgorithmParams &p, std::uint64_t seed) {
    if (algorithm == Algorithm::Rcd) {
        RcdConfig c;
        c.gamma = p.gamma;
        c.k = p.k;
        c.alpha = p.alpha;
        c.bins = p.bins;
        c.max_cond_size = p.max_cond_size;
        c.workers = p.workers;
        c.seed = seed;
        return rcd_localize(data, c);
    }
    TarcdConfig c;
    c.gamma = p.gamma;
    c.k = p.k;
    c.alpha = p.alpha;
    c.bins = p.bins;
    c.max_cond_size = p.max_cond_size;
    c.workers = p.workers;
    c.seed = seed;
    c.weighting = algorithm == Algorithm::Tarcd ? PathWeighting::CandidateShare : PathWeighting::PathDensity;
    return tarcd_localize(data, graph, c);
}

struct Timed {
    RankedRootCauses result;
    double seconds = 0.0;
};

Timed timed_localize(Algorithm algorithm, const TimeSeriesDataset &normal, const TimeSeriesDataset &anomalous,
                     const TopologyGraph &graph, const AlgorithmParams &params, std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    Timed out{localize(algorithm, normal, anomalous, graph, params, seed), 0.0};
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

std::set<std::string> key_set(const std::vector<MetricId> &top) {
    std::set<std::string> s;
    for (const auto &m : top) s.insert(m.key());
    return s;
}

} // namespace

RankedRootCauses localize(Algorithm algorithm, const TimeSeriesDataset &normal, const TimeSeriesDataset &anomalous,
                          const TopologyGraph &graph, const AlgorithmParams &params, std::uint64_t seed) {
    return localize_prepared(algorithm, prepare(normal, anomalous, params.bins, params.workers), graph, params,
                             seed);
}

void EvalConfig::validate() const {
    if (runs < 1) throw Error(ErrorCode::InvalidArgument, "runs must be >= 1");
    if (algorithms.empty()) throw Error(ErrorCode::InvalidArgument, "no algorithm selected");
    if (ks.empty()) throw Error(ErrorCode::InvalidArgument, "no k selected");
    for (int k : ks)
        if (k < 1) throw Error(ErrorCode::InvalidArgument, "k values must be >= 1");
}

std::string scenario_label(const FaultScenario &s) {
    return std::string(to_string(s.kind)) + "@" + std::string(to_string(s.target_layer)) + ":" + s.target_node;
}

std::map<int, double> recall_from_ranks(const std::vector<std::optional<int>> &ranks, const std::vector<int> &ks) {
    std::map<int, double> out;
    for (int k : ks) {
        std::size_t hits = 0;
        for (const auto &r : ranks)
            if (r && *r <= k) ++hits;
        out[k] = ranks.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(ranks.size());
    }
    return out;
}

EvalReport run_experiment(const TopologyGraph &graph, const std::vector<FaultScenario> &scenarios,
                          const EvalConfig &config) {
    config.validate();
    const int kmax = *std::max_element(config.ks.begin(), config.ks.end());
    AlgorithmParams params = config.params;
    params.k = std::max(params.k, kmax);

    EvalReport report;
    report.mode = config.mode;
    report.config = config;
    for (const FaultScenario &scenario : scenarios) {
        validate_scenario(graph, scenario, config.simulation);
        const GroundTruth truth = ground_truth_for(scenario);

        std::optional<SimulationResult> fixed;
        if (config.mode == EvalMode::FixedData) fixed = simulate(graph, scenario, config.simulation);

        std::vector<ScenarioResult> rows(config.algorithms.size());
        for (std::size_t a = 0; a < rows.size(); ++a) {
            rows[a].algorithm = config.algorithms[a];
            rows[a].scenario = scenario;
            rows[a].truth = truth.root_cause_metric;
            rows[a].runs = config.runs;
        }
        for (int run = 0; run < config.runs; ++run) {
            const std::uint64_t algo_seed = config.base_seed + static_cast<std::uint64_t>(run);
            std::uint64_t data_seed = scenario.seed;
            std::optional<SimulationResult> fresh;
            if (!fixed) {
                FaultScenario s = scenario;
                s.seed = data_seed = scenario.seed + static_cast<std::uint64_t>(run);
                fresh = simulate(graph, s, config.simulation);
            }
            const SimulationResult &sim = fixed ? *fixed : *fresh;
            for (auto &row : rows) {
                Timed t = timed_localize(row.algorithm, sim.normal, sim.anomalous, graph, params, algo_seed);
                RunOutcome o;
                o.algorithm_seed = algo_seed;
                o.data_seed = data_seed;
                for (const auto &e : t.result.entries)
                    if (static_cast<int>(o.top.size()) < kmax) o.top.push_back(e.metric);
                o.truth_rank = t.result.rank_of(row.truth);
                if (o.truth_rank && *o.truth_rank > kmax) o.truth_rank.reset();
                o.low_confidence = t.result.low_confidence;
                o.seconds = t.seconds;
                row.per_run.push_back(std::move(o));
            }
        }
        for (auto &row : rows) {
            std::vector<std::optional<int>> ranks;
            std::set<std::set<std::string>> outcomes;
            double total = 0.0;
            for (const auto &o : row.per_run) {
                ranks.push_back(o.truth_rank);
                outcomes.insert(key_set(o.top));
                total += o.seconds;
            }
            row.recall_at = recall_from_ranks(ranks, config.ks);
            row.mean_exec_time = total / static_cast<double>(row.per_run.size());
            row.distinct_outcomes = outcomes.size();
            report.results.push_back(std::move(row));
        }
    }
    return report;
}

double EvalReport::mean_recall(Algorithm algorithm, int k) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto &r : results) {
        if (r.algorithm != algorithm) continue;
        auto it = r.recall_at.find(k);
        if (it == r.recall_at.end()) throw Error(ErrorCode::InvalidArgument, "k was not evaluated");
        sum += it->second;
        ++n;
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

json EvalReport::to_json() const {
    json results_j = json::array();
    for (const auto &r : results) {
        json recall = json::object();
        for (auto [k, v] : r.recall_at) recall[std::to_string(k)] = v;
        json runs_j = json::array();
        for (const auto &o : r.per_run) {
            json top = json::array();
            for (const auto &m : o.top) top.push_back(m.key());
            runs_j.push_back({{"algorithm_seed", o.algorithm_seed},
                              {"data_seed", o.data_seed},
                              {"top", std::move(top)},
                              {"truth_rank", o.truth_rank ? json(*o.truth_rank) : json(nullptr)},
                              {"low_confidence", o.low_confidence},
                              {"seconds", o.seconds}});
        }
        results_j.push_back({{"algorithm", to_string(r.algorithm)},
                             {"scenario", scenario_to_json(r.scenario)},
                             {"label", scenario_label(r.scenario)},
                             {"ground_truth", metric_to_json(r.truth)},
                             {"runs", r.runs},
                             {"recall_at", std::move(recall)},
                             {"mean_exec_time", r.mean_exec_time},
                             {"distinct_outcomes", r.distinct_outcomes},
                             {"per_run", std::move(runs_j)}});
    }
    json summary = json::object();
    for (Algorithm a : config.algorithms) {
        json per_k = json::object();
        for (int k : config.ks) per_k[std::to_string(k)] = mean_recall(a, k);
        summary[std::string(to_string(a))] = std::move(per_k);
    }
    return {{"schema_version", kSchemaVersion},
            {"mode", to_string(mode)},
            {"runs", config.runs},
            {"base_seed", config.base_seed},
            {"config",
             {{"gamma", config.params.gamma},
              {"k", config.params.k},
              {"alpha", config.params.alpha},
              {"bins", config.params.bins},
              {"max_cond_size", config.params.max_cond_size}}},
            {"mean_recall_at", std::move(summary)},
            {"results", std::move(results_j)}};
}

std::string EvalReport::to_csv() const {
    std::ostringstream out;
    out << "algorithm,scenario,kind,layer,target,magnitude,mode,runs,k,recall,mean_exec_time_s\n";
    for (const auto &r : results)
        for (auto [k, v] : r.recall_at)
            out << to_string(r.algorithm) << ',' << scenario_label(r.scenario) << ',' << to_string(r.scenario.kind)
                << ',' << to_string(r.scenario.target_layer) << ',' << r.scenario.target_node << ','
                << r.scenario.magnitude << ',' << to_string(mode) << ',' << r.runs << ',' << k << ',' << v << ','
                << r.mean_exec_time << '\n';
    return out.str();
}

LinearFit fit_linear(const std::vector<double> &x, const std::vector<double> &y) {
    if (x.size() != y.size() || x.size() < 2)
        throw Error(ErrorCode::InvalidArgument, "linear fit needs at least two paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw Error(ErrorCode::InvalidArgument, "linear fit needs distinct x values");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        sse += r * r;
    }
    f.r2 = syy == 0.0 ? 1.0 : 1.0 - sse / syy;
    return f;
}

std::vector<ScalingSeries> scaling_probe(const std::vector<std::size_t> &metric_counts,
                                         const std::vector<Algorithm> &algorithms, const ScalingOptions &options) {
    if (metric_counts.empty()) throw Error(ErrorCode::InvalidArgument, "no metric counts given");
    if (options.repeats < 1) throw Error(ErrorCode::InvalidArgument, "repeats must be >= 1");
    const std::size_t largest = *std::max_element(metric_counts.begin(), metric_counts.end());
    for (std::size_t m : metric_counts)
        if (m == 0) throw Error(ErrorCode::InvalidArgument, "metric count must be >= 1");

    // One PM and three VMs give 4 x 34 metrics; each service adds 29 + 5.
    const std::size_t fixed_part = 4 * 34;
    const int services = static_cast<int>(std::max<std::size_t>(1, (largest + 33 - std::min(largest, fixed_part)) / 34));
    const TopologyGraph graph = generate_topology(services, 3, options.seed);
    FaultScenario scenario;
    scenario.kind = FaultKind::CpuHog;
    scenario.target_node = "svc1-ctr";
    scenario.target_layer = Layer::Container;
    scenario.seed = options.seed;
    const SimulationResult sim = simulate(graph, scenario);
    const auto &all = sim.normal.metrics();
    if (largest > all.size()) throw Error(ErrorCode::InvalidArgument, "metric count exceeds simulated metrics");
    const std::size_t truth = *sim.normal.index_of(sim.truth.root_cause_metric);

    std::vector<std::size_t> others;
    for (std::size_t i = 0; i < all.size(); ++i)
        if (i != truth) others.push_back(i);

    std::vector<ScalingSeries> out;
    for (Algorithm a : algorithms) out.push_back({a, {}, {}, {}});
    for (std::size_t m : metric_counts) {
        std::vector<std::size_t> pick{truth};
        for (std::size_t i = 0; i + 1 < m; ++i) pick.push_back(others[i * others.size() / (m - 1)]);
        std::sort(pick.begin(), pick.end());
        std::vector<MetricId> subset;
        for (std::size_t i : pick) subset.push_back(all[i]);
        const TimeSeriesDataset normal = project(sim.normal, subset);
        const TimeSeriesDataset anomalous = project(sim.anomalous, subset);
        for (auto &series : out) {
            double total = 0.0;
            for (int r = 0; r < options.repeats; ++r)
                total += timed_localize(series.algorithm, normal, anomalous, graph, options.params,
                                        options.seed + static_cast<std::uint64_t>(r))
                             .seconds;
            series.m.push_back(m);
            series.mean_seconds.push_back(total / options.repeats);
        }
    }
    if (metric_counts.size() >= 2)
        for (auto &series : out) {
            std::vector<double> x(series.m.begin(), series.m.end());
            series.fit = fit_linear(x, series.mean_seconds);
        }
    return out;
}

json scaling_to_json(const std::vector<ScalingSeries> &series) {
    json arr = json::array();
    for (const auto &s : series) {
        json points = json::array();
        for (std::size_t i = 0; i < s.m.size(); ++i) points.push_back({{"m", s.m[i]}, {"mean_seconds", s.mean_seconds[i]}});
        arr.push_back({{"algorithm", to_string(s.algorithm)},
                       {"points", std::move(points)},
                       {"slope", s.fit.slope},
                       {"intercept", s.fit.intercept},
                       {"r2", s.fit.r2}});
    }
    return {{"schema_version", kSchemaVersion}, {"series", std::move(arr)}};
}

} // namespace rca
