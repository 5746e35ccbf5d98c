#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "cid/dataset.hpp"

namespace cid {

/// Gaussian graphical model over the stacked [features, target] columns.
/// The target is node N. Adjacency is derived from the precision support:
/// |precision(i,j)| > zero_tolerance for i != j.
struct PrecisionModel {
    Eigen::MatrixXd precision;  // (N+1) x (N+1), symmetric PSD
    Eigen::VectorXd mean;
    Eigen::VectorXd eta;        // precision * mean
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adjacency;
    double rho = 0.0;

    static constexpr double zero_tolerance = 1e-8;

    std::int64_t num_nodes() const { return precision.rows(); }
    std::int64_t target_node() const { return precision.rows() - 1; }

    /// Rebuilds eta and adjacency from precision and mean.
    void refresh_derived();
};

std::vector<int> neighbors(const PrecisionModel& model, int node);

/// Population covariance (1/M) of the stacked [X, y] columns.
Eigen::MatrixXd empirical_covariance(const TabularDataset& data);

struct GlassoOptions {
    double tol = 1e-4;         // mean |change| per sweep, relative to mean |S| off-diagonal
    int max_iter = 200;        // outer sweeps
    int max_inner = 400;       // coordinate-descent passes per column
    bool trace_objective = false;
};

/// L1-penalized sparse inverse covariance by block coordinate descent over
/// columns with a soft-threshold lasso inner loop. The diagonal is not
/// penalized. Throws on non-convergence with the last gap in the message.
PrecisionModel graphical_lasso(const Eigen::MatrixXd& covariance, double rho,
                               const GlassoOptions& options = {});

/// Penalized objective -logdet(P) + tr(S P) + rho * sum_{i != j} |P_ij|.
double glasso_objective(const Eigen::MatrixXd& covariance, const Eigen::MatrixXd& precision,
                        double rho);

/// Per-sweep objective values recorded by the last traced solve.
const std::vector<double>& glasso_last_trace();

/// Held-out Gaussian log-likelihood CV over a penalty grid; ties break toward
/// the larger (sparser) penalty, where scores within one standard error of
/// the best (over folds) count as tied.
double select_rho_cv(const TabularDataset& data, const std::vector<double>& grid, int folds = 5,
                     std::uint64_t seed = 0, std::vector<double>* scores_out = nullptr);

/// Log-spaced default grid scaled by the largest off-diagonal |S| entry.
std::vector<double> default_rho_grid(const Eigen::MatrixXd& covariance, int size = 8,
                                     double lo_frac = 0.01, double hi_frac = 1.0);

/// Undirected edge set over the [X, y] nodes, 1-based feature indices with
/// "y" accepted for the target, as read from a prior-graph file.
struct EdgeList {
    std::vector<std::pair<int, int>> edges;  // 0-based node indices
};

EdgeList load_edge_list(const std::string& path, std::int64_t n_features);

/// Maximum-likelihood Gaussian fit restricted to a fixed support via
/// iterative proportional scaling over singleton and edge cliques.
PrecisionModel fit_precision_with_support(const TabularDataset& data, const EdgeList& support,
                                          double tol = 1e-9, int max_iter = 500);

std::string precision_to_json(const PrecisionModel& model);
PrecisionModel precision_from_json(const std::string& text);

}  // namespace cid
