#pragma once

#include <Eigen/Dense>

#include "cid/dataset.hpp"
#include "cid/precision.hpp"

namespace cid {

/// Log-domain factor pieces for one (feature, row) evaluation.
///
/// log_F(a, b) holds the joint factor over feature bins a and target bins b
/// and is identically zero when the two nodes are not adjacent. log_d and
/// log_e hold the factor products tied to the feature side and target side
/// respectively, with the remaining columns fixed at the row's (bin-snapped)
/// values; each includes its own node potential. Factors that involve
/// neither the feature nor the target are per-row constants and cancel in
/// log_ratio, so they are never materialized.
struct PotentialTable {
    Eigen::MatrixXd log_F;   // B_x x B_y
    Eigen::VectorXd log_d;   // B_x
    Eigen::VectorXd log_e;   // B_y
    double log_f_obs = 0.0;  // joint factor at the observed bins
    int x_bin = 0;
    int y_bin = 0;
};

/// Lower clamp applied to every assembled log potential.
inline constexpr double kLogPotentialClamp = -700.0;

/// Log pairwise potential, -0.5 * x_s * precision(s,t) * x_t. One unordered
/// pair carries two of these (both orders), which assemble_factors folds in.
double log_pair_potential(const PrecisionModel& model, int s, int t, double x_s, double x_t);

/// Log node potential, -0.5 * (x_s^2 * precision(s,s) + 2 * eta(s) * x_s).
double log_node_potential(const PrecisionModel& model, int s, double x_s);

/// Per-feature pieces that do not depend on the row: the joint table with the
/// target, the node-potential profiles over the bin grids, and the neighbor
/// sets entering d and e.
struct FeatureFactorContext {
    int feature = 0;
    Eigen::MatrixXd log_F;
    Eigen::VectorXd node_d;           // node potential of the feature at each midpoint
    Eigen::VectorXd node_e;           // node potential of the target at each midpoint
    std::vector<int> d_neighbors;     // neighbors of the feature, target excluded
    std::vector<int> e_neighbors;     // neighbors of the target, feature excluded
};

FeatureFactorContext make_feature_context(const PrecisionModel& model, const TabularDataset& data,
                                          int feature);

PotentialTable assemble_factors_with_context(const FeatureFactorContext& ctx,
                                             const PrecisionModel& model,
                                             const TabularDataset& data, std::int64_t row);

/// Convenience form building the per-feature context on the fly.
PotentialTable assemble_factors(const PrecisionModel& model, const TabularDataset& data,
                                int feature, std::int64_t row);

/// log( f_obs * (d' F e) / ((d' F_y) * (F_x e)) ) with every reduction done
/// as a stabilized log-sum-exp; F_y / F_x are the observed column and row of
/// F. Exactly zero on the all-zero-F fast path. Throws when a reduction is
/// not finite.
double log_ratio(const PotentialTable& table);

/// Same reduction on caller-held pieces; lets hot loops reuse buffers.
double log_ratio_parts(const Eigen::VectorXd& log_d, const Eigen::VectorXd& log_e,
                       const Eigen::MatrixXd& log_F, int x_bin, int y_bin, double log_f_obs);

/// Per-row covered-information terms for one feature: local_mi minus the
/// factorized log ratio, assembled through a single reused workspace.
Eigen::VectorXd covered_info_column(const PrecisionModel& model, const TabularDataset& data,
                                    int feature, const Eigen::VectorXd& local_mi);

}  // namespace cid
