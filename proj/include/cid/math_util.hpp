#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cid {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Standard normal density.
inline double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

/// Inverse standard normal CDF. Rational approximation (Acklam) polished with
/// one Halley step against erfc, good to full double precision on (0, 1).
double normal_quantile(double p);

/// log(sum(exp(v))) with max-shift stabilization. Returns -inf for empty input.
double log_sum_exp(std::span<const double> v);

/// Pearson correlation; returns 0 when either side has zero variance
/// (degenerate_flag set when provided).
double pearson_correlation(std::span<const double> a, std::span<const double> b,
                           bool* degenerate_flag = nullptr);

/// Linear-interpolation quantile of an unsorted sample, q in [0, 1].
double sample_quantile(std::vector<double> values, double q);

inline double sample_median(std::vector<double> values) {
    return sample_quantile(std::move(values), 0.5);
}

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // unbiased (n-1) denominator, 0 when n < 2
};

MeanStd mean_std(std::span<const double> v);

/// SplitMix64 step; used to derive independent seed streams from a master seed
/// so per-feature work can run on any thread layout with identical results.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    return mix_seed(master ^ mix_seed(a ^ mix_seed(b)));
}

/// Runs fn(i) for i in [0, n) across up to n_threads workers. fn must write
/// only to disjoint slots. n_threads <= 1 runs inline.
void parallel_for_index(std::size_t n, unsigned n_threads, const std::function<void(std::size_t)>& fn);

/// Least-squares slope of log(y) against log(x); used for power-law fits.
double log_log_slope(std::span<const double> x, std::span<const double> y);

}  // namespace cid
