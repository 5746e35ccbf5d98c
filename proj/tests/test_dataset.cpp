#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "cid/dataset.hpp"
#include "cid/math_util.hpp"

using namespace cid;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

TabularDataset small_dataset() {
    TabularDataset d;
    d.values.resize(3, 2);
    d.values << 1.0, 10.0, 2.0, 20.0, 3.0, 30.0;
    d.target.resize(3);
    d.target << 0.5, 1.5, 2.5;
    d.feature_names = {"a", "b"};
    return d;
}

}  // namespace

TEST_CASE("load_csv parses a small file") {
    const std::string path = temp_path("cid_small.csv");
    {
        std::ofstream out(path);
        out << "a,b,y\n1,10,0.5\n2,20,1.5\n3,30,2.5\n";
    }
    const TabularDataset d = load_csv(path, "y");
    CHECK(d.rows() == 3);
    CHECK(d.num_features() == 2);
    CHECK(d.feature_names == std::vector<std::string>{"a", "b"});
    CHECK(d.values(2, 1) == 30.0);
    CHECK(d.target(1) == 1.5);
}

TEST_CASE("load_csv errors name the problem") {
    CHECK_THROWS_WITH_AS(load_csv(temp_path("cid_missing_file.csv"), "y"),
                         doctest::Contains("cannot open"), std::runtime_error);

    const std::string path = temp_path("cid_blank_cell.csv");
    {
        std::ofstream out(path);
        out << "a,y\n1,2\n,3\n";
    }
    CHECK_THROWS_WITH_AS(load_csv(path, "y"), doctest::Contains("row 2"), std::runtime_error);

    const std::string path2 = temp_path("cid_bad_cell.csv");
    {
        std::ofstream out(path2);
        out << "a,y\n1,2\nfoo,3\n";
    }
    CHECK_THROWS_WITH_AS(load_csv(path2, "y"), doctest::Contains("column 'a'"), std::runtime_error);

    CHECK_THROWS_WITH_AS(load_csv(path2, "missing"), doctest::Contains("target column"),
                         std::runtime_error);
}

TEST_CASE("toy data round-trips through save/load to 6 decimals") {
    const TabularDataset toy = generate_toy(50, 9);
    const std::string path = temp_path("cid_roundtrip.csv");
    save_csv(toy, path);
    const TabularDataset back = load_csv(path, "y");
    REQUIRE(back.rows() == toy.rows());
    for (std::int64_t r = 0; r < toy.rows(); ++r) {
        for (std::int64_t c = 0; c < toy.num_features(); ++c)
            CHECK(back.values(r, c) == doctest::Approx(toy.values(r, c)).epsilon(1e-6));
        CHECK(back.target(r) == doctest::Approx(toy.target(r)).epsilon(1e-6));
    }
}

TEST_CASE("quantile_gaussianize maps ranks to normal quantiles") {
    TabularDataset d = small_dataset();
    const TabularDataset g = quantile_gaussianize(d);
    // ranks 1..3 of 3 -> Phi^-1(1/6), Phi^-1(3/6), Phi^-1(5/6)
    CHECK(g.values(0, 0) == doctest::Approx(-0.967421566101701).epsilon(1e-9));
    CHECK(g.values(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(g.values(2, 0) == doctest::Approx(0.967421566101701).epsilon(1e-9));
    // target transformed the same way
    CHECK(g.target(0) == doctest::Approx(-0.967421566101701).epsilon(1e-9));
}

TEST_CASE("quantile_gaussianize keeps sorted columns sorted and is monotone") {
    TabularDataset d;
    d.values.resize(6, 1);
    d.values << -3.0, -1.0, 0.5, 2.0, 7.0, 30.0;
    d.target.resize(6);
    d.target << 1, 2, 3, 4, 5, 6;
    d.feature_names = {"a"};
    const TabularDataset g = quantile_gaussianize(d);
    for (int r = 1; r < 6; ++r) CHECK(g.values(r, 0) > g.values(r - 1, 0));
}

TEST_CASE("quantile_gaussianize passes constant columns through") {
    TabularDataset d = small_dataset();
    d.values.col(0).setConstant(7.0);
    const TabularDataset g = quantile_gaussianize(d);
    CHECK(g.values(0, 0) == 7.0);
    CHECK(g.values(2, 0) == 7.0);
    CHECK(g.values(2, 1) != d.values(2, 1));  // other column still transformed
}

TEST_CASE("gaussianized heavy-tail sample looks normal") {
    const TabularDataset toy = generate_toy(800, 3);  // X1 is a gamma draw
    const TabularDataset g = quantile_gaussianize(toy);
    std::vector<double> col(800);
    for (int r = 0; r < 800; ++r) col[static_cast<std::size_t>(r)] = g.values(r, 0);
    const MeanStd ms = mean_std(col);
    double skew = 0.0;
    for (double v : col) skew += std::pow((v - ms.mean) / ms.std, 3.0);
    skew /= double(col.size());
    CHECK(std::abs(skew) < 0.1);
}

TEST_CASE("trim_outliers removes exactly the planted row") {
    TabularDataset d;
    d.values.resize(100, 2);
    d.target.resize(100);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int r = 0; r < 100; ++r) {
        d.values(r, 0) = normal(rng);
        d.values(r, 1) = normal(rng);
        d.target(r) = normal(rng);
    }
    d.values(37, 1) = 10.0 * 3.0;  // ~10 sigma given unit-ish std
    d.feature_names = {"a", "b"};
    const TrimResult t = trim_outliers(d, 4.0);
    CHECK(t.rows_removed == 1);
    CHECK(t.data.rows() == 99);
    for (std::int64_t r = 0; r < t.data.rows(); ++r) CHECK(t.data.values(r, 1) < 10.0);
}

TEST_CASE("trim_outliers leaves tame data unchanged and is idempotent at fixed thresholds") {
    const TabularDataset toy = generate_toy(300, 5);
    const TrimResult first = trim_outliers(toy, 4.0);
    // recompute the original thresholds and re-apply to the trimmed data
    std::vector<double> means, stds;
    for (std::int64_t c = 0; c <= toy.num_features(); ++c) {
        std::vector<double> col(static_cast<std::size_t>(toy.rows()));
        for (std::int64_t r = 0; r < toy.rows(); ++r) col[static_cast<std::size_t>(r)] = toy.value_at(r, c);
        const MeanStd ms = mean_std(col);
        means.push_back(ms.mean);
        stds.push_back(ms.std);
    }
    const TrimResult again = trim_outliers_with(first.data, means, stds, 4.0);
    CHECK(again.rows_removed == 0);

    TabularDataset tame;
    tame.values = Eigen::MatrixXd::Zero(10, 1);
    for (int r = 0; r < 10; ++r) tame.values(r, 0) = r * 0.1;
    tame.target = tame.values.col(0);
    tame.feature_names = {"a"};
    CHECK(trim_outliers(tame, 4.0).rows_removed == 0);
}

TEST_CASE("trim_outliers rejects degenerate requests") {
    TabularDataset d = small_dataset();
    CHECK_THROWS_AS(trim_outliers(d, 0.0), std::invalid_argument);
    // impossible threshold removes everything
    std::vector<double> means = {0.0, 0.0, 0.0}, stds = {1e-9, 1e-9, 1e-9};
    CHECK_THROWS_AS(trim_outliers_with(d, means, stds, 1e-6), std::runtime_error);
}

TEST_CASE("discretize spans each column with equal-width bins") {
    TabularDataset d;
    d.values.resize(1000, 1);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int r = 0; r < 1000; ++r) d.values(r, 0) = unif(rng);
    d.target = d.values.col(0);
    d.feature_names = {"u"};
    const TabularDataset g = discretize(d, 10);
    REQUIRE(g.discretized());
    CHECK(g.bin_edges[0].size() == 11);
    CHECK(g.bin_midpoints[0].size() == 10);
    // uniform data: each bin holds about M/10
    std::vector<int> counts(10, 0);
    for (int r = 0; r < 1000; ++r) counts[static_cast<std::size_t>(g.bin_of(r, 0))]++;
    const double expect = 100.0, slack = 3.0 * std::sqrt(expect);
    for (int b = 0; b < 10; ++b) CHECK(std::abs(counts[static_cast<std::size_t>(b)] - expect) <= slack);
    // snapping to the midpoint moves a value at most half a bin width
    const double width = g.bin_edges[0][1] - g.bin_edges[0][0];
    for (int r = 0; r < 1000; ++r)
        CHECK(std::abs(g.midpoint_of(r, 0) - g.values(r, 0)) <= 0.5 * width + 1e-12);
}

TEST_CASE("discretize handles constant and low-cardinality columns") {
    TabularDataset d;
    d.values.resize(5, 1);
    d.values.setConstant(2.0);
    d.target.resize(5);
    d.target << 0, 1, 0, 1, 0;
    d.feature_names = {"c"};
    const TabularDataset g = discretize(d, 4);
    std::set<int> occupied;
    for (int r = 0; r < 5; ++r) occupied.insert(g.bin_of(r, 0));
    CHECK(occupied.size() == 1);
    for (std::size_t b = 1; b < g.bin_edges[0].size(); ++b)
        CHECK(g.bin_edges[0][b] > g.bin_edges[0][b - 1]);
    CHECK_THROWS_AS(discretize(d, 1), std::invalid_argument);
}

TEST_CASE("make_subsamples is deterministic and in range") {
    const SubsampleSet a = make_subsamples(100, 10, 0.8, 42);
    const SubsampleSet b = make_subsamples(100, 10, 0.8, 42);
    CHECK(a.subsets == b.subsets);
    CHECK(a.count() == 10);
    for (const auto& subset : a.subsets) {
        CHECK(subset.size() == 80);
        std::set<int> unique(subset.begin(), subset.end());
        CHECK(unique.size() == subset.size());
        for (int idx : subset) {
            CHECK(idx >= 0);
            CHECK(idx < 100);
        }
    }
    const SubsampleSet c = make_subsamples(100, 10, 0.8, 43);
    CHECK(a.subsets != c.subsets);
}

TEST_CASE("make_subsamples with fraction 1 permutes all rows") {
    const SubsampleSet s = make_subsamples(12, 3, 1.0, 7);
    for (const auto& subset : s.subsets) {
        std::set<int> unique(subset.begin(), subset.end());
        CHECK(unique.size() == 12);
    }
}

TEST_CASE("make_subsamples rejects tiny draws") {
    CHECK_THROWS_AS(make_subsamples(10, 5, 0.1, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_subsamples(10, 1, 0.5, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_subsamples(10, 5, 0.0, 0), std::invalid_argument);
}

TEST_CASE("generate_toy structure") {
    const TabularDataset t = generate_toy(4000, 21);
    CHECK(t.num_features() == 6);  // latent mixture variables are not emitted
    CHECK(t.feature_names == std::vector<std::string>{"X1", "X2", "X3", "X4", "X5", "X6"});

    // X3 = X1 * X2 exactly, row-wise
    for (int r = 0; r < 4000; ++r)
        CHECK(t.values(r, 2) == t.values(r, 0) * t.values(r, 1));

    // X4 is a negated exponential with mean -0.2 and sin(X4) = X5
    double x4_mean = 0.0;
    for (int r = 0; r < 4000; ++r) {
        CHECK(t.values(r, 3) <= 0.0);
        CHECK(t.values(r, 4) == std::sin(t.values(r, 3)));
        x4_mean += t.values(r, 3);
    }
    x4_mean /= 4000.0;
    CHECK(x4_mean == doctest::Approx(-0.2).epsilon(0.08));

    // reproducibility
    const TabularDataset again = generate_toy(4000, 21);
    CHECK((again.values.array() == t.values.array()).all());
    CHECK((again.target.array() == t.target.array()).all());
}

TEST_CASE("generate_toy branch probabilities") {
    const std::int64_t n = 20000;
    const TabularDataset t = generate_toy(n, 2);
    std::int64_t x3_rows = 0, x6_rows = 0;
    for (std::int64_t r = 0; r < n; ++r) {
        if (t.target(r) == t.values(r, 2)) ++x3_rows;
        if (t.target(r) == t.values(r, 5)) ++x6_rows;
    }
    CHECK(double(x3_rows) / double(n) == doctest::Approx(0.20).epsilon(0.08));
    CHECK(double(x6_rows) / double(n) == doctest::Approx(0.05).epsilon(0.12));
}
