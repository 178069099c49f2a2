#include "rca/citest.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>
#include <unordered_map>

#include <boost/math/special_functions/gamma.hpp>

namespace rca {

DiscreteDataset::DiscreteDataset(std::size_t rows, std::vector<std::vector<std::uint8_t>> columns,
                                 std::vector<int> cardinality)
    : rows_(rows), columns_(std::move(columns)), cardinality_(std::move(cardinality)) {
    if (columns_.size() != cardinality_.size())
        throw Error(ErrorCode::InvalidArgument, "one cardinality per column required");
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        if (columns_[c].size() != rows_)
            throw Error(ErrorCode::InvalidArgument, "ragged discrete column");
        if (cardinality_[c] < 1 || cardinality_[c] > kMaxBins)
            throw Error(ErrorCode::InvalidArgument, "cardinality out of range");
        for (auto v : columns_[c])
            if (v >= cardinality_[c])
                throw Error(ErrorCode::InvalidArgument, "label exceeds column cardinality");
    }
}

DiscreteDataset DiscreteDataset::repeated(std::size_t times) const {
    std::vector<std::vector<std::uint8_t>> cols(columns_.size());
    for (std::size_t c = 0; c < columns_.size(); ++c) {
        cols[c].reserve(rows_ * times);
        for (std::size_t t = 0; t < times; ++t)
            cols[c].insert(cols[c].end(), columns_[c].begin(), columns_[c].end());
    }
    return DiscreteDataset(rows_ * times, std::move(cols), cardinality_);
}

std::vector<std::uint8_t> equal_frequency_labels(std::span<const double> values, int bins) {
    if (bins < 2 || bins > kMaxBins)
        throw Error(ErrorCode::InvalidBins, "bins must be in [2, " + std::to_string(kMaxBins) +
                                                "], got " + std::to_string(bins));
    const std::size_t n = values.size();
    std::vector<std::uint8_t> labels(n, 0);
    if (n == 0) return labels;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::size_t first_rank = 0;
    for (std::size_t r = 0; r < n; ++r) {
        if (r > 0 && values[order[r]] != values[order[r - 1]]) first_rank = r;
        labels[order[r]] = static_cast<std::uint8_t>(first_rank * static_cast<std::size_t>(bins) / n);
    }
    return labels;
}

namespace {

void discretize_column(const TimeSeriesDataset &dataset, std::size_t c, int bins,
                       std::vector<std::uint8_t> &out, int &cardinality) {
    if (is_fnode(dataset.metrics()[c])) {
        auto col = dataset.column(c);
        out.resize(col.size());
        for (std::size_t r = 0; r < col.size(); ++r) out[r] = col[r] != 0.0 ? 1 : 0;
        cardinality = 2;
        return;
    }
    out = equal_frequency_labels(dataset.column(c), bins);
    cardinality = bins;
}

void check_discretize_args(const TimeSeriesDataset &dataset, int bins) {
    if (bins < 2 || bins > kMaxBins)
        throw Error(ErrorCode::InvalidBins, "bins must be in [2, " + std::to_string(kMaxBins) +
                                                "], got " + std::to_string(bins));
    if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "cannot discretize an empty dataset");
}

} // namespace

DiscreteDataset discretize_serial(const TimeSeriesDataset &dataset, int bins) {
    check_discretize_args(dataset, bins);
    std::vector<std::vector<std::uint8_t>> cols(dataset.cols());
    std::vector<int> card(dataset.cols(), bins);
    for (std::size_t c = 0; c < dataset.cols(); ++c) discretize_column(dataset, c, bins, cols[c], card[c]);
    return DiscreteDataset(dataset.rows(), std::move(cols), std::move(card));
}

DiscreteDataset discretize_parallel(const TimeSeriesDataset &dataset, int bins, int workers) {
    check_discretize_args(dataset, bins);
    const auto ncols = static_cast<std::ptrdiff_t>(dataset.cols());
    std::vector<std::vector<std::uint8_t>> cols(dataset.cols());
    std::vector<int> card(dataset.cols(), bins);
#pragma omp parallel for schedule(static) num_threads(std::max(1, workers))
    for (std::ptrdiff_t c = 0; c < ncols; ++c) {
        auto idx = static_cast<std::size_t>(c);
        discretize_column(dataset, idx, bins, cols[idx], card[idx]);
    }
    return DiscreteDataset(dataset.rows(), std::move(cols), std::move(card));
}

DiscreteDataset discretize(const TimeSeriesDataset &dataset, int bins, int workers) {
    return workers > 1 ? discretize_parallel(dataset, bins, workers) : discretize_serial(dataset, bins);
}

double chi_square_sf(double statistic, int dof) {
    if (dof <= 0) return 1.0;
    if (!(statistic > 0.0)) return 1.0;
    return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
}

namespace {

struct Scratch {
    std::vector<std::uint32_t> stratum;
    std::vector<int> counts;
    std::vector<int> row_sum;
    std::vector<int> col_sum;
    std::unordered_map<std::uint64_t, std::uint32_t> compact;
};

// Assigns each row a dense stratum id over the joint labels of `cond`.
std::uint32_t assign_strata(std::span<const std::size_t> cond, const DiscreteDataset &data,
                            Scratch &s) {
    const std::size_t n = data.rows();
    s.stratum.assign(n, 0);
    std::uint64_t range = 1;
    for (std::size_t c : cond) {
        const auto card = static_cast<std::uint64_t>(data.cardinality(c));
        auto col = data.column(c);
        for (std::size_t r = 0; r < n; ++r) s.stratum[r] = static_cast<std::uint32_t>(s.stratum[r] * card + col[r]);
        range *= card;
        if (range > (1u << 16) || range * 256 > 0xffffffffULL) {
            s.compact.clear();
            for (std::size_t r = 0; r < n; ++r) {
                auto [it, inserted] = s.compact.try_emplace(s.stratum[r],
                                                            static_cast<std::uint32_t>(s.compact.size()));
                s.stratum[r] = it->second;
            }
            range = s.compact.size();
        }
    }
    return static_cast<std::uint32_t>(range);
}

} // namespace

CiResult chi_square_ci(std::size_t x, std::size_t y, std::span<const std::size_t> cond,
                       const DiscreteDataset &data, double alpha) {
    const std::size_t ncols = data.cols();
    if (x >= ncols || y >= ncols)
        throw Error(ErrorCode::IndexOutOfRange, "tested column index out of range");
    for (std::size_t c : cond)
        if (c >= ncols) throw Error(ErrorCode::IndexOutOfRange, "conditioning index out of range");
    if (x == y) throw Error(ErrorCode::InvalidArgument, "x and y must differ");
    if (std::find(cond.begin(), cond.end(), x) != cond.end() ||
        std::find(cond.begin(), cond.end(), y) != cond.end())
        throw Error(ErrorCode::InvalidArgument, "x and y must not be in the conditioning set");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");

    thread_local Scratch s;
    const std::uint32_t strata = assign_strata(cond, data, s);
    const int cx = data.cardinality(x), cy = data.cardinality(y);
    const std::size_t cell = static_cast<std::size_t>(cx) * static_cast<std::size_t>(cy);
    s.counts.assign(static_cast<std::size_t>(strata) * cell, 0);

    auto colx = data.column(x);
    auto coly = data.column(y);
    for (std::size_t r = 0; r < data.rows(); ++r)
        ++s.counts[s.stratum[r] * cell + static_cast<std::size_t>(colx[r]) * cy + coly[r]];

    double stat = 0.0;
    int dof = 0;
    s.row_sum.resize(cx);
    s.col_sum.resize(cy);
    for (std::uint32_t k = 0; k < strata; ++k) {
        const int *table = s.counts.data() + static_cast<std::size_t>(k) * cell;
        std::fill(s.row_sum.begin(), s.row_sum.end(), 0);
        std::fill(s.col_sum.begin(), s.col_sum.end(), 0);
        int total = 0;
        for (int i = 0; i < cx; ++i)
            for (int j = 0; j < cy; ++j) {
                int v = table[i * cy + j];
                s.row_sum[i] += v;
                s.col_sum[j] += v;
                total += v;
            }
        if (total < 1) continue;
        int rows_nz = 0, cols_nz = 0;
        for (int v : s.row_sum) rows_nz += v > 0;
        for (int v : s.col_sum) cols_nz += v > 0;
        if (rows_nz < 2 || cols_nz < 2) continue;

        const double n = total;
        double part = 0.0;
        for (int i = 0; i < cx; ++i) {
            if (s.row_sum[i] == 0) continue;
            for (int j = 0; j < cy; ++j) {
                if (s.col_sum[j] == 0) continue;
                double expected = static_cast<double>(s.row_sum[i]) * s.col_sum[j] / n;
                double diff = table[i * cy + j] - expected;
                part += diff * diff / expected;
            }
        }
        stat += part;
        dof += (rows_nz - 1) * (cols_nz - 1);
    }

    CiResult out;
    out.statistic = stat;
    out.dof = dof;
    out.degenerate = dof == 0;
    out.p_value = std::clamp(chi_square_sf(stat, dof), 0.0, 1.0);
    out.independent = out.p_value > alpha;
    return out;
}

} // namespace rca
