#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cid/dataset.hpp"
#include "cid/entropy.hpp"
#include "cid/models.hpp"
#include "cid/precision.hpp"

namespace cid {

/// Per-feature, per-subsample importance values with aggregates.
struct ImportanceEstimate {
    std::string method;
    std::vector<std::string> feature_names;
    Eigen::MatrixXd per_subsample;  // N x S
    Eigen::VectorXd median, mean, std;
    std::vector<int> ranking;  // feature indices, median-descending

    /// Recomputes aggregates and the ranking from per_subsample.
    void finalize();
};

struct PermutationOptions {
    int n_permutations = 5;
    std::uint64_t seed = 0;
    std::string loss = "mse";
    unsigned n_threads = 0;
    bool identity_permutations = false;  // testing hook: pi = id gives exactly 0
};

/// Mean loss increase when one column is permuted within each evaluation
/// subsample, against the unpermuted baseline; losses are normalized by the
/// subsample size. One permutation stream per (subsample, repetition) is
/// shared across features, so per-feature work is order-independent.
ImportanceEstimate permutation_importance(const PredictiveModel& model, const TabularDataset& data,
                                          const SubsampleSet& subsamples,
                                          const PermutationOptions& options = {});

/// Absolute Pearson correlation of each feature with the target.
Eigen::VectorXd univariate_importance(const TabularDataset& data);

/// Same score restricted to each subsample, for spread reporting.
ImportanceEstimate univariate_importance_subsampled(const TabularDataset& data,
                                                    const SubsampleSet& subsamples);

/// Importance of a fitted forest as an estimate (single pseudo-subsample).
ImportanceEstimate gini_importance_estimate(const ExtremelyRandomizedTreesRegressor& model,
                                            const std::vector<std::string>& feature_names);

/// Linear map from the four split aggregates to the permutation-importance
/// scale, fit by evidence-maximized Bayesian regression on pairs pooled
/// across features and subsamples.
struct PhiLearned {
    BayesianLinearRegressor regression;
    double evaluate(double ci_plus, double ci_minus, double mi_plus, double mi_minus) const;
};

PhiLearned fit_phi_learned(const EntropyProfile& profile, const ImportanceEstimate& permutation);

/// Closed-form correction e / (g(Hc+) * (1 - Hc+/Hmi+)) with g = c on
/// positive redundant covered information and 1 otherwise.
struct PhiParametric {
    double c = 1.0;
    double cap_multiplier = 10.0;  // magnitude cap, in units of |e|, on factor blow-up

    double corrected(double e, double ci_plus, double mi_plus) const;
};

PhiParametric fit_phi_parametric(const EntropyProfile& profile,
                                 const ImportanceEstimate& permutation,
                                 const std::vector<double>& c_grid, int folds = 5,
                                 std::uint64_t seed = 0);

/// Grid of c values from the reciprocal defaults {1.2, ..., 2.4}.
std::vector<double> default_c_grid();

enum class PhiMode { Learned, Parametric };

struct CidOptions {
    PhiMode phi_mode = PhiMode::Learned;
    std::vector<double> c_grid;  // empty -> default_c_grid()
    MiSource mi_source = MiSource::Model;
    unsigned n_threads = 0;
};

struct CidResult {
    ImportanceEstimate corrected;  // the adjusted importance
    EntropyProfile profile;
    double phi_c = 0.0;  // selected c when parametric
};

/// Corrected importance from a fitted model, MRF and permutation baseline:
/// covered-information aggregates feed the phi map, which is then read out
/// at zero redundant covered information.
CidResult cid_importance(const TabularDataset& data, const PrecisionModel& mrf,
                         const SubsampleSet& subsamples, const ImportanceEstimate& permutation,
                         const CidOptions& options = {});

using ModelFactory = std::function<std::unique_ptr<PredictiveModel>(std::uint64_t seed)>;

struct SubsetCorrelationResult {
    std::vector<std::string> methods;
    std::vector<double> scores;      // Pearson(performance, summed importances)
    std::vector<bool> degenerate;    // correlation undefined, reported as 0
    int subsets_used = 0;
};

/// Retrains the model on random feature subsets and correlates held-out
/// performance with each ranking's summed median importances.
SubsetCorrelationResult subset_correlation_score(const TabularDataset& data,
                                                 const ModelFactory& factory,
                                                 const std::vector<ImportanceEstimate>& rankings,
                                                 int n_subsets = 100, int subset_size = -1,
                                                 std::uint64_t seed = 0,
                                                 double train_fraction = 0.8);

}  // namespace cid
