#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cid {

/// Tabular numeric data: an M x N feature matrix plus a target column.
/// After discretize() every column (features and target alike) carries
/// equal-width bin edges and midpoints; raw values are kept alongside the
/// bin assignments. The target is addressed internally as column N.
struct TabularDataset {
    Eigen::MatrixXd values;              // M x N
    Eigen::VectorXd target;              // M
    std::vector<std::string> feature_names;
    std::string target_name = "y";

    // Discretization state, one entry per column (N features + target).
    // Empty until discretize() has run.
    std::vector<std::vector<double>> bin_edges;      // each sorted, size B+1
    std::vector<std::vector<double>> bin_midpoints;  // each size B
    Eigen::MatrixXi bin_index;                       // M x (N+1), -1 when absent

    std::int64_t rows() const { return values.rows(); }
    std::int64_t num_features() const { return values.cols(); }
    std::int64_t num_columns() const { return values.cols() + 1; }  // features + target
    bool discretized() const { return !bin_edges.empty(); }

    /// Column accessor treating the target as column N.
    double value_at(std::int64_t row, std::int64_t col) const {
        return col == values.cols() ? target(row) : values(row, col);
    }

    int num_bins(std::int64_t col) const {
        return static_cast<int>(bin_midpoints.at(static_cast<std::size_t>(col)).size());
    }
    int bin_of(std::int64_t row, std::int64_t col) const { return bin_index(row, col); }
    double midpoint_of(std::int64_t row, std::int64_t col) const {
        return bin_midpoints[static_cast<std::size_t>(col)][static_cast<std::size_t>(bin_index(row, col))];
    }
};

/// Row-index subsets used to estimate importance variability.
struct SubsampleSet {
    std::vector<std::vector<int>> subsets;
    std::uint64_t seed = 0;
    int count() const { return static_cast<int>(subsets.size()); }
};

TabularDataset load_csv(const std::string& path, const std::string& target_column, char delimiter = ',');
void save_csv(const TabularDataset& data, const std::string& path, char delimiter = ',');

/// Maps each column (features and target) to standard-normal quantiles of the
/// empirical ranks, rank r of M -> Phi^-1((r - 0.5) / M); ties get their
/// average rank. Constant columns are reported and passed through unchanged.
TabularDataset quantile_gaussianize(const TabularDataset& data);

struct TrimResult {
    TabularDataset data;
    std::int64_t rows_removed = 0;
};

/// Drops rows holding any value more than k_sigma standard deviations from
/// its column mean; column statistics are taken before any removal.
TrimResult trim_outliers(const TabularDataset& data, double k_sigma = 4.0);

/// Same test against caller-supplied per-column statistics (features first,
/// target last); lets repeated passes reuse one set of thresholds.
TrimResult trim_outliers_with(const TabularDataset& data,
                              const std::vector<double>& means,
                              const std::vector<double>& stds, double k_sigma);

/// Equal-width binning of every column over its [min, max] span.
TabularDataset discretize(const TabularDataset& data, int bins = 10);

SubsampleSet make_subsamples(std::int64_t n_rows, int n_subsets, double fraction, std::uint64_t seed);

/// Six-feature synthetic benchmark with strongly entangled columns:
/// X3 = X1*X2 and X5 = sin(X4), plus an independent bimodal X6; the target
/// copies one branch combination per row. Mixture/latent draws are not
/// emitted as columns.
TabularDataset generate_toy(std::int64_t n_samples = 800, std::uint64_t seed = 0);

}  // namespace cid
