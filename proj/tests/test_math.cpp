#include <doctest.h>

#include <cmath>
#include <random>

#include "cid/math_util.hpp"

using namespace cid;

TEST_CASE("normal_quantile matches reference values") {
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(normal_quantile(1.0 / 6.0) == doctest::Approx(-0.967421566101701).epsilon(1e-10));
    CHECK(normal_quantile(5.0 / 6.0) == doctest::Approx(0.967421566101701).epsilon(1e-10));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-10));
    CHECK(normal_quantile(1e-6) == doctest::Approx(-4.753424308822899).epsilon(1e-9));
}

TEST_CASE("normal_quantile inverts normal_cdf") {
    for (double x : {-3.5, -1.0, -0.1, 0.0, 0.7, 2.9}) {
        CHECK(normal_quantile(normal_cdf(x)) == doctest::Approx(x).epsilon(1e-10));
    }
}

TEST_CASE("log_sum_exp is shift-stable") {
    std::vector<double> v = {-1000.0, -1000.0};
    CHECK(log_sum_exp(v) == doctest::Approx(-1000.0 + std::log(2.0)));
    std::vector<double> w = {0.0, std::log(2.0), std::log(3.0)};
    CHECK(log_sum_exp(w) == doctest::Approx(std::log(6.0)));
}

TEST_CASE("pearson_correlation basics") {
    std::vector<double> a = {1, 2, 3, 4}, b = {2, 4, 6, 8}, c = {5, 5, 5, 5};
    CHECK(pearson_correlation(a, b) == doctest::Approx(1.0));
    bool degenerate = false;
    CHECK(pearson_correlation(a, c, &degenerate) == 0.0);
    CHECK(degenerate);
}

TEST_CASE("sample_quantile interpolates") {
    std::vector<double> v = {4.0, 1.0, 3.0, 2.0};
    CHECK(sample_median(v) == doctest::Approx(2.5));
    CHECK(sample_quantile(v, 0.0) == doctest::Approx(1.0));
    CHECK(sample_quantile(v, 1.0) == doctest::Approx(4.0));
}

TEST_CASE("parallel_for_index covers all slots regardless of thread count") {
    std::vector<int> hits(101, 0);
    for (unsigned threads : {1u, 3u, 8u}) {
        std::fill(hits.begin(), hits.end(), 0);
        parallel_for_index(hits.size(), threads, [&](std::size_t i) { hits[i] += 1; });
        for (int h : hits) CHECK(h == 1);
    }
}

TEST_CASE("log_log_slope recovers a power law") {
    std::vector<double> x = {5, 10, 20, 40}, y;
    for (double v : x) y.push_back(3.0 * v * v);
    CHECK(log_log_slope(x, y) == doctest::Approx(2.0).epsilon(1e-12));
}
