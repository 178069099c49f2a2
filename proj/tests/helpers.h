#pragma once

#include <random>
#include <string>
#include <vector>

#include "rca/model.h"

namespace testutil {

inline rca::MetricId metric(const std::string &name, const std::string &endpoint = "svc1",
                            rca::Layer layer = rca::Layer::ServiceInstance,
                            rca::Resource resource = rca::Resource::Application,
                            rca::MetricClass cls = rca::MetricClass::State) {
    return {cls, name, endpoint, layer, resource};
}

/// Column-major builder: `columns[c][r]`.
inline rca::TimeSeriesDataset dataset(std::vector<rca::MetricId> metrics, const std::vector<std::vector<double>> &columns,
                                      double t0 = 0.0, double interval = 5.0) {
    const std::size_t rows = columns.empty() ? 0 : columns[0].size();
    std::vector<double> ts(rows), data;
    for (std::size_t r = 0; r < rows; ++r) ts[r] = t0 + interval * static_cast<double>(r);
    for (const auto &c : columns) data.insert(data.end(), c.begin(), c.end());
    return rca::TimeSeriesDataset(std::move(metrics), std::move(ts), interval, std::move(data));
}

inline std::vector<double> gaussian(std::mt19937_64 &rng, std::size_t n, double mean = 0.0, double sd = 1.0) {
    std::normal_distribution<double> g(mean, sd);
    std::vector<double> v(n);
    for (auto &x : v) x = g(rng);
    return v;
}

} // namespace testutil
