#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rca/model.h"

namespace rca {

inline constexpr int kDefaultBins = 5;
inline constexpr double kDefaultAlpha = 0.05;
inline constexpr int kMaxBins = 256;

/// Integer-labelled copy of a dataset, column-major. Each column records
/// its label cardinality (labels are 0..cardinality-1).
class DiscreteDataset {
public:
    DiscreteDataset() = default;
    DiscreteDataset(std::size_t rows, std::vector<std::vector<std::uint8_t>> columns,
                    std::vector<int> cardinality);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return columns_.size(); }
    std::span<const std::uint8_t> column(std::size_t c) const { return columns_[c]; }
    int cardinality(std::size_t c) const { return cardinality_[c]; }

    /// Same rows with every row repeated `times` times (test helper for the
    /// duplication property).
    DiscreteDataset repeated(std::size_t times) const;

private:
    std::size_t rows_ = 0;
    std::vector<std::vector<std::uint8_t>> columns_;
    std::vector<int> cardinality_;
};

/// Equal-frequency labels for one column: the value at sorted rank r gets
/// floor(r * bins / n); tied values share the label of their lowest rank.
std::vector<std::uint8_t> equal_frequency_labels(std::span<const double> values, int bins);

/// Discretizes every column; F-NODE columns pass through as 0/1 labels.
/// `workers` > 1 runs the column loop under OpenMP.
DiscreteDataset discretize(const TimeSeriesDataset &dataset, int bins, int workers = 1);
DiscreteDataset discretize_serial(const TimeSeriesDataset &dataset, int bins);
DiscreteDataset discretize_parallel(const TimeSeriesDataset &dataset, int bins, int workers);

struct CiResult {
    bool independent = true;
    double p_value = 1.0;
    double statistic = 0.0;
    int dof = 0;
    /// Every stratum had a degenerate table; p_value is 1 by convention.
    bool degenerate = false;
};

/// Pearson chi-squared test of x ⟂ y | cond on discrete data. The statistic
/// and degrees of freedom are summed over the strata of cond; rows/columns
/// with zero margins are dropped inside each stratum.
CiResult chi_square_ci(std::size_t x, std::size_t y, std::span<const std::size_t> cond,
                       const DiscreteDataset &data, double alpha);

/// Upper-tail probability of the chi-squared distribution.
double chi_square_sf(double statistic, int dof);

} // namespace rca
