#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "helpers.h"
#include "oracles.h"
#include "rca/citest.h"

using namespace rca;
using testutil::dataset;
using testutil::metric;

namespace {

std::vector<int> labels_of(const std::vector<double> &v, int bins) {
    auto l = equal_frequency_labels(v, bins);
    return {l.begin(), l.end()};
}

DiscreteDataset from_labels(const std::vector<std::vector<std::uint8_t>> &cols) {
    std::vector<int> card;
    for (const auto &c : cols) card.push_back(c.empty() ? 1 : *std::max_element(c.begin(), c.end()) + 1);
    return DiscreteDataset(cols.empty() ? 0 : cols[0].size(), cols, card);
}

} // namespace

TEST_CASE("equal-frequency binning examples") {
    CHECK(labels_of({1, 2, 3, 4}, 2) == std::vector<int>{0, 0, 1, 1});
    CHECK(labels_of({5, 5, 5, 5}, 3) == std::vector<int>{0, 0, 0, 0});
    CHECK(labels_of({4, 3, 2, 1}, 2) == std::vector<int>{1, 1, 0, 0});
}

TEST_CASE("a 120-sample ramp fills five bins with 24 each") {
    std::vector<double> ramp(120);
    std::iota(ramp.begin(), ramp.end(), 0.0);
    std::mt19937_64 rng(1);
    std::shuffle(ramp.begin(), ramp.end(), rng);
    auto l = equal_frequency_labels(ramp, 5);
    // Oracle: the label is the sorted position divided into blocks of 24.
    std::vector<double> sorted = ramp;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> counts(5, 0);
    for (std::size_t i = 0; i < ramp.size(); ++i) {
        auto pos = std::lower_bound(sorted.begin(), sorted.end(), ramp[i]) - sorted.begin();
        CHECK(l[i] == pos / 24);
        ++counts[l[i]];
    }
    CHECK(counts == std::vector<int>{24, 24, 24, 24, 24});
}

TEST_CASE("discretize rejects bins below two and passes the F-NODE through") {
    auto m = metric("x");
    auto c = concat_with_fnode(dataset({m}, {{1, 2, 3}}, 0.0), dataset({m}, {{4, 5, 6}}, 15.0));
    CHECK_THROWS_AS(discretize(c, 1), Error);
    auto d = discretize(c, 3);
    auto f = d.column(1);
    CHECK(std::vector<int>(f.begin(), f.end()) == std::vector<int>{0, 0, 0, 1, 1, 1});
    CHECK(d.cardinality(1) == 2);
}

TEST_CASE("serial and parallel discretization agree") {
    std::mt19937_64 rng(9);
    std::vector<MetricId> ms;
    std::vector<std::vector<double>> cols;
    for (int i = 0; i < 40; ++i) {
        ms.push_back(metric("m" + std::to_string(i)));
        auto col = testutil::gaussian(rng, 120);
        if (i % 7 == 0)
            for (auto &v : col) v = std::round(v);
        cols.push_back(col);
    }
    auto d = dataset(ms, cols);
    auto a = discretize_serial(d, 5);
    auto b = discretize_parallel(d, 5, 4);
    REQUIRE(a.cols() == b.cols());
    for (std::size_t c = 0; c < a.cols(); ++c) {
        CHECK(a.cardinality(c) == b.cardinality(c));
        CHECK(std::equal(a.column(c).begin(), a.column(c).end(), b.column(c).begin()));
    }
}

TEST_CASE("proportional table is independent") {
    std::vector<std::uint8_t> x, y;
    for (int i = 0; i < 40; ++i) {
        x.push_back(static_cast<std::uint8_t>(i / 20));
        y.push_back(static_cast<std::uint8_t>((i / 10) % 2));
    }
    auto d = from_labels({x, y});
    auto r = chi_square_ci(0, 1, {}, d, 0.05);
    CHECK(r.statistic == doctest::Approx(0.0));
    CHECK(r.dof == 1);
    CHECK(r.p_value == doctest::Approx(1.0));
    CHECK(r.independent);
}

TEST_CASE("a copied binary column is strongly dependent") {
    std::vector<std::uint8_t> x;
    for (int i = 0; i < 60; ++i) x.push_back(static_cast<std::uint8_t>(i < 30 ? 0 : 1));
    auto d = from_labels({x, x});
    auto r = chi_square_ci(0, 1, {}, d, 0.05);
    // Oracle: Pearson on [[30,0],[0,30]] is N = 60 with one dof.
    auto s = oracle::stratified(d, 0, 1, {});
    CHECK(s.statistic == doctest::Approx(60.0));
    CHECK(r.statistic == doctest::Approx(s.statistic).epsilon(1e-12));
    CHECK(r.p_value < 1e-6);
    CHECK(r.p_value == doctest::Approx(oracle::chi2_sf(60.0, 1)).epsilon(1e-6));
    CHECK(!r.independent);
}

TEST_CASE("conditioning on a copy of y separates it") {
    std::mt19937_64 rng(5);
    std::vector<std::uint8_t> x, z;
    for (int i = 0; i < 200; ++i) {
        x.push_back(static_cast<std::uint8_t>(rng() % 3));
        z.push_back(static_cast<std::uint8_t>(rng() % 4));
    }
    auto d = from_labels({x, z, z});
    const std::size_t cond[] = {2};
    auto r = chi_square_ci(0, 1, cond, d, 0.05);
    CHECK(r.independent);
    CHECK(r.dof == 0);
    CHECK(r.p_value == 1.0);
    CHECK(r.degenerate);
}

TEST_CASE("symmetry and duplication properties") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::uint8_t> x, y, z;
        for (int i = 0; i < 80; ++i) {
            const auto a = static_cast<std::uint8_t>(rng() % 3);
            x.push_back(a);
            y.push_back(static_cast<std::uint8_t>((a + rng() % 2) % 3));
            z.push_back(static_cast<std::uint8_t>(rng() % 2));
        }
        auto d = from_labels({x, y, z});
        const std::size_t cond[] = {2};
        auto a = chi_square_ci(0, 1, cond, d, 0.05);
        auto b = chi_square_ci(1, 0, cond, d, 0.05);
        CHECK(a.statistic == doctest::Approx(b.statistic));
        CHECK(a.dof == b.dof);
        CHECK(a.p_value == doctest::Approx(b.p_value));

        auto dd = d.repeated(2);
        auto c = chi_square_ci(0, 1, cond, dd, 0.05);
        CHECK(c.statistic == doctest::Approx(2.0 * a.statistic));
        if (a.statistic > 0) CHECK(c.p_value <= a.p_value);
        CHECK((a.p_value >= 0.0 && a.p_value <= 1.0));
        CHECK(a.independent == (a.p_value > 0.05));
    }
}

TEST_CASE("index errors") {
    auto d = from_labels({{0, 1}, {1, 0}});
    CHECK_THROWS_AS(chi_square_ci(0, 2, {}, d, 0.05), Error);
    CHECK_THROWS_AS(chi_square_ci(0, 0, {}, d, 0.05), Error);
}

TEST_CASE("survival function matches the independent gamma oracle") {
    for (int dof : {1, 2, 3, 5, 9, 16, 40})
        for (double x : {0.01, 0.5, 1.0, 3.0, 10.0, 40.0, 90.0})
            CHECK(chi_square_sf(x, dof) == doctest::Approx(oracle::chi2_sf(x, dof)).epsilon(1e-9));
    CHECK(chi_square_sf(5.0, 0) == 1.0);
}
