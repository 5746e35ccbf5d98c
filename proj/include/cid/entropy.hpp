#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "cid/dataset.hpp"
#include "cid/discrete_mrf.hpp"
#include "cid/potentials.hpp"
#include "cid/precision.hpp"

namespace cid {

/// Additive smoothing mass per 2-D histogram cell in the plug-in estimator.
inline constexpr double kMiSmoothing = 0.5;

/// Pointwise mutual information of one feature against the target for every
/// row, from the binned empirical joint with additive smoothing; the mean
/// over rows is the plug-in MI estimate.
Eigen::VectorXd local_mutual_info(const TabularDataset& data, int feature);

/// Pointwise mutual information under the fitted Gaussian model: the
/// (feature, target) covariance block is discretized onto the bin grid and
/// the pointwise log ratio is read at each row's bins. Keeps the mutual
/// information on the same footing as the factorized ratio term, which the
/// same model generates.
Eigen::VectorXd local_mutual_info_model(const PrecisionModel& model, const TabularDataset& data,
                                        int feature);

enum class MiSource { Model, Empirical };

/// Per-row covered-information term: the pointwise MI minus the factorized
/// log ratio at this row.
double covered_info_row(const PrecisionModel& model, const TabularDataset& data, int feature,
                        std::int64_t row, double local_mi_value);

struct SplitAggregates {
    Eigen::VectorXd positive;  // per subsample, mean of max(0, h)
    Eigen::VectorXd negative;  // per subsample, mean of |min(0, h)|
};

/// Positive/negative-part means of local terms over each subsample.
SplitAggregates split_redundant_synergistic(const Eigen::VectorXd& local_terms,
                                            const SubsampleSet& subsamples);

/// Local terms and per-(feature, subsample) aggregates for the whole dataset.
struct EntropyProfile {
    Eigen::MatrixXd local_mi;  // M x N
    Eigen::MatrixXd local_ci;  // M x N
    Eigen::MatrixXd mi_plus, mi_minus, ci_plus, ci_minus;  // N x n_subsets

    /// Reconstructions from the stored split aggregates.
    double mi_mean(int feature, int subsample) const {
        return mi_plus(feature, subsample) - mi_minus(feature, subsample);
    }
    double ci_mean(int feature, int subsample) const {
        return ci_plus(feature, subsample) - ci_minus(feature, subsample);
    }
};

/// Full profile: local MI, per-row covered information under the MRF, and
/// the redundant/synergistic splits per subsample. Feature loops run in
/// parallel; a per-feature failure aborts with the feature named.
EntropyProfile compute_entropy_profile(const PrecisionModel& model, const TabularDataset& data,
                                       const SubsampleSet& subsamples, unsigned n_threads = 0,
                                       MiSource mi_source = MiSource::Model);

void write_entropy_profile_csv(const EntropyProfile& profile,
                               const std::vector<std::string>& feature_names,
                               const std::string& path);

/// Entropy of the marginal over a set of variables, by direct summation.
double block_entropy(const JointTable& joint, const std::vector<int>& variables);

/// Multivariate intersection entropy over variable blocks: the expectation
/// of the signed inclusion-exclusion combination of local entropies.
double intersection_entropy(const JointTable& joint, const std::vector<std::vector<int>>& blocks);

/// Per-state local intersection-entropy terms for the given blocks, indexed
/// by flat joint state.
std::vector<double> local_intersection_terms(const JointTable& joint,
                                             const std::vector<std::vector<int>>& blocks);

/// Covered information of `feature` with respect to the joint's target by
/// brute-force inclusion-exclusion over the blocks {X_i}, {Y}, {rest}:
/// I(X_i;Y) + H(all) - H(rest,Y) + H(rest) - H(X_i,rest). Independent of the
/// factorized path.
double oracle_covered_info(const JointTable& joint, int feature);

}  // namespace cid
