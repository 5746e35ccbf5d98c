#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>

namespace cid {

/// Fit/predict contract shared by the regressors; predictions are
/// deterministic for a fixed seed.
class PredictiveModel {
 public:
    virtual ~PredictiveModel() = default;
    virtual void fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) = 0;
    virtual Eigen::VectorXd predict(const Eigen::MatrixXd& features) const = 0;
    virtual bool fitted() const = 0;
    virtual std::unique_ptr<PredictiveModel> clone_unfitted() const = 0;
};

struct ErtParams {
    int n_trees = 100;
    int max_depth = -1;  // unlimited
    int min_leaf = 2;
    std::uint64_t seed = 0;
};

/// Regression forest of totally randomized trees: full sample per tree, one
/// uniform random threshold per candidate feature at each node, best split
/// by variance reduction, mean-aggregated predictions.
class ExtremelyRandomizedTreesRegressor : public PredictiveModel {
 public:
    explicit ExtremelyRandomizedTreesRegressor(ErtParams params = {}) : params_(params) {}

    void fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) override;
    Eigen::VectorXd predict(const Eigen::MatrixXd& features) const override;
    bool fitted() const override { return !trees_.empty(); }
    std::unique_ptr<PredictiveModel> clone_unfitted() const override {
        return std::make_unique<ExtremelyRandomizedTreesRegressor>(params_);
    }

    const ErtParams& params() const { return params_; }
    /// Per-feature sums of weighted variance reduction, tree-averaged (not
    /// normalized).
    const Eigen::VectorXd& raw_importance() const { return importance_; }

 private:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1, right = -1;
        double value = 0.0;
    };

    ErtParams params_;
    std::vector<std::vector<Node>> trees_;
    Eigen::VectorXd importance_;
    Eigen::Index n_features_ = 0;

    void build_tree(std::vector<Node>& tree, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                    std::uint64_t seed, Eigen::VectorXd& importance_accum);
};

/// Impurity-decrease importance of a fitted forest, normalized to sum 1.
Eigen::VectorXd gini_importance(const ExtremelyRandomizedTreesRegressor& model);

struct BayesianLinearParams {
    double alpha0 = 1e-6;  // initial weight precision
    double beta0 = 1.0;    // initial noise precision
    int max_iter = 300;
    double tol = 1e-12;
};

/// Conjugate Gaussian linear regression with evidence-maximized weight and
/// noise precisions; inputs and target are centered internally.
class BayesianLinearRegressor : public PredictiveModel {
 public:
    explicit BayesianLinearRegressor(BayesianLinearParams params = {}) : params_(params) {}

    void fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) override;
    Eigen::VectorXd predict(const Eigen::MatrixXd& features) const override;
    bool fitted() const override { return fitted_; }
    std::unique_ptr<PredictiveModel> clone_unfitted() const override {
        return std::make_unique<BayesianLinearRegressor>(params_);
    }

    const Eigen::VectorXd& weights() const { return weights_; }
    double intercept() const { return intercept_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }

 private:
    BayesianLinearParams params_;
    Eigen::VectorXd weights_;
    Eigen::VectorXd input_mean_;
    double intercept_ = 0.0;
    double alpha_ = 0.0, beta_ = 0.0;
    bool fitted_ = false;
};

}  // namespace cid
