#include "cid/models.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <limits>
#include <random>
#include <stack>
#include <stdexcept>

#include "cid/math_util.hpp"

namespace cid {

namespace {

struct SpanStats {
    double sum = 0.0;
    double sum_sq = 0.0;
    std::int64_t n = 0;
    double sse() const { return n > 0 ? sum_sq - sum * sum / double(n) : 0.0; }
    double mean() const { return n > 0 ? sum / double(n) : 0.0; }
};

}  // namespace

void ExtremelyRandomizedTreesRegressor::fit(const Eigen::MatrixXd& features,
                                            const Eigen::VectorXd& targets) {
    if (features.rows() != targets.size())
        throw std::invalid_argument("fit: feature rows and target length disagree");
    if (features.rows() < 1) throw std::invalid_argument("fit: empty training set");

    n_features_ = features.cols();
    trees_.assign(static_cast<std::size_t>(params_.n_trees), {});
    importance_ = Eigen::VectorXd::Zero(n_features_);

    const double target_var =
        (targets.array() - targets.mean()).square().sum() / double(std::max<Eigen::Index>(1, targets.size()));
    if (target_var <= 0.0)
        std::cerr << "warning: fit: constant target, every tree is a single leaf\n";

    Eigen::VectorXd tree_importance = Eigen::VectorXd::Zero(n_features_);
    for (int t = 0; t < params_.n_trees; ++t) {
        tree_importance.setZero();
        build_tree(trees_[static_cast<std::size_t>(t)], features, targets,
                   derive_seed(params_.seed, 0xe27ULL, std::uint64_t(t)), tree_importance);
        importance_ += tree_importance;
    }
    importance_ /= double(params_.n_trees);
}

void ExtremelyRandomizedTreesRegressor::build_tree(std::vector<Node>& tree, const Eigen::MatrixXd& x,
                                                   const Eigen::VectorXd& y, std::uint64_t seed,
                                                   Eigen::VectorXd& importance_accum) {
    const Eigen::Index m = x.rows();
    const Eigen::Index n = x.cols();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<int> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);

    struct Work {
        int node;
        std::int64_t begin, end;
        int depth;
    };

    tree.clear();
    tree.push_back({});
    std::stack<Work> stack;
    stack.push({0, 0, m, 0});

    // Scale-relative purity floor, so rescaling the target rebuilds the same
    // trees.
    double sse_floor = 0.0;
    {
        SpanStats root;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double v = y(i);
            root.sum += v;
            root.sum_sq += v * v;
        }
        root.n = m;
        sse_floor = 1e-12 * std::max(root.sse(), 1e-300);
    }

    while (!stack.empty()) {
        const Work w = stack.top();
        stack.pop();
        const std::int64_t count = w.end - w.begin;

        double node_sum = 0.0;
        for (std::int64_t i = w.begin; i < w.end; ++i)
            node_sum += y(order[static_cast<std::size_t>(i)]);
        const double node_mean = node_sum / double(count);
        tree[static_cast<std::size_t>(w.node)].value = node_mean;

        // Statistics are taken on mean-shifted targets so near-pure nodes do
        // not lose their SSE to cancellation.
        SpanStats stats;
        stats.n = count;
        for (std::int64_t i = w.begin; i < w.end; ++i) {
            const double v = y(order[static_cast<std::size_t>(i)]) - node_mean;
            stats.sum += v;
            stats.sum_sq += v * v;
        }

        const bool depth_ok = params_.max_depth < 0 || w.depth < params_.max_depth;
        if (count < 2 * params_.min_leaf || stats.sse() <= sse_floor || !depth_ok) continue;

        // One uniform threshold per feature; keep the best variance reduction
        // among splits leaving both sides at least min_leaf rows. Gains below
        // the relative floor are cancellation noise, not structure. Near-ties
        // (correlated features inducing the same partition) resolve to the
        // lowest feature index, stably under target rescaling.
        int best_feature = -1;
        double best_threshold = 0.0, best_gain = sse_floor;
        const double tie_eps =
            64.0 * std::numeric_limits<double>::epsilon() * std::max(stats.sse(), sse_floor);
        for (Eigen::Index f = 0; f < n; ++f) {
            double lo = x(order[static_cast<std::size_t>(w.begin)], f), hi = lo;
            for (std::int64_t i = w.begin + 1; i < w.end; ++i) {
                const double v = x(order[static_cast<std::size_t>(i)], f);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (!(hi > lo)) continue;
            const double threshold = lo + (hi - lo) * unit(rng);
            SpanStats left;
            for (std::int64_t i = w.begin; i < w.end; ++i) {
                const double v = x(order[static_cast<std::size_t>(i)], f);
                if (v < threshold) {
                    const double t = y(order[static_cast<std::size_t>(i)]) - node_mean;
                    left.sum += t;
                    left.sum_sq += t * t;
                    ++left.n;
                }
            }
            const std::int64_t right_n = count - left.n;
            if (left.n < params_.min_leaf || right_n < params_.min_leaf) continue;
            SpanStats right;
            right.sum = stats.sum - left.sum;
            right.sum_sq = stats.sum_sq - left.sum_sq;
            right.n = right_n;
            const double gain = stats.sse() - left.sse() - right.sse();
            if (gain > best_gain + tie_eps) {
                best_gain = gain;
                best_feature = static_cast<int>(f);
                best_threshold = threshold;
            }
        }
        if (best_feature < 0) continue;

        const auto mid = std::partition(order.begin() + w.begin, order.begin() + w.end, [&](int r) {
            return x(r, best_feature) < best_threshold;
        });
        const std::int64_t split = mid - order.begin();
        if (split == w.begin || split == w.end) continue;

        importance_accum(best_feature) += best_gain / double(m);

        const int left_id = static_cast<int>(tree.size());
        tree.push_back({});
        const int right_id = static_cast<int>(tree.size());
        tree.push_back({});
        tree[static_cast<std::size_t>(w.node)].feature = best_feature;
        tree[static_cast<std::size_t>(w.node)].threshold = best_threshold;
        tree[static_cast<std::size_t>(w.node)].left = left_id;
        tree[static_cast<std::size_t>(w.node)].right = right_id;
        stack.push({left_id, w.begin, split, w.depth + 1});
        stack.push({right_id, split, w.end, w.depth + 1});
    }
}

Eigen::VectorXd ExtremelyRandomizedTreesRegressor::predict(const Eigen::MatrixXd& features) const {
    if (!fitted()) throw std::runtime_error("predict: model is not fitted");
    if (features.cols() != n_features_)
        throw std::invalid_argument("predict: feature count disagrees with training data");
    const Eigen::Index m = features.rows();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m);
    std::vector<double> row(static_cast<std::size_t>(n_features_));
    for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index f = 0; f < n_features_; ++f) row[static_cast<std::size_t>(f)] = features(r, f);
        double acc = 0.0;
        for (const auto& tree : trees_) {
            int node = 0;
            while (tree[static_cast<std::size_t>(node)].feature >= 0) {
                const auto& nd = tree[static_cast<std::size_t>(node)];
                node = row[static_cast<std::size_t>(nd.feature)] < nd.threshold ? nd.left : nd.right;
            }
            acc += tree[static_cast<std::size_t>(node)].value;
        }
        out(r) = acc / double(trees_.size());
    }
    return out;
}

Eigen::VectorXd gini_importance(const ExtremelyRandomizedTreesRegressor& model) {
    if (!model.fitted()) throw std::runtime_error("gini_importance: model is not fitted");
    Eigen::VectorXd raw = model.raw_importance();
    const double total = raw.sum();
    if (total <= 0.0) {
        std::cerr << "warning: gini_importance: no informative split in the forest\n";
        return Eigen::VectorXd::Zero(raw.size());
    }
    return raw / total;
}

void BayesianLinearRegressor::fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) {
    const Eigen::Index m = features.rows();
    const Eigen::Index p = features.cols();
    if (m != targets.size()) throw std::invalid_argument("fit: feature rows and target length disagree");
    if (m < 2) throw std::invalid_argument("fit: need at least 2 rows");

    input_mean_ = features.colwise().mean();
    const double target_mean = targets.mean();
    const Eigen::MatrixXd xc = features.rowwise() - input_mean_.transpose();
    const Eigen::VectorXd yc = targets.array() - target_mean;

    const Eigen::MatrixXd gram = xc.transpose() * xc;
    const Eigen::VectorXd xty = xc.transpose() * yc;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const Eigen::VectorXd evals = eig.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXd evecs = eig.eigenvectors();

    double alpha = params_.alpha0, beta = params_.beta0;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
    for (int it = 0; it < params_.max_iter; ++it) {
        // Posterior mean in the eigenbasis of X'X.
        const Eigen::VectorXd proj = evecs.transpose() * xty;
        Eigen::VectorXd scaled(p);
        for (Eigen::Index i = 0; i < p; ++i) scaled(i) = proj(i) * beta / (alpha + beta * evals(i));
        w = evecs * scaled;

        double gamma = 0.0;
        for (Eigen::Index i = 0; i < p; ++i) gamma += beta * evals(i) / (alpha + beta * evals(i));
        const double wtw = w.squaredNorm();
        const double resid = (yc - xc * w).squaredNorm();

        const double alpha_new = wtw > 1e-300 ? gamma / wtw : 1e6;
        const double denom = std::max(resid, 1e-300);
        const double beta_new = std::min((double(m) - gamma) / denom, 1e12);

        const bool done = std::abs(alpha_new - alpha) <= params_.tol * std::abs(alpha) &&
                          std::abs(beta_new - beta) <= params_.tol * std::abs(beta);
        alpha = alpha_new;
        beta = beta_new;
        if (done) break;
    }

    // Posterior mean at the converged precisions.
    const Eigen::VectorXd proj = evecs.transpose() * xty;
    Eigen::VectorXd scaled(p);
    for (Eigen::Index i = 0; i < p; ++i) scaled(i) = proj(i) * beta / (alpha + beta * evals(i));
    w = evecs * scaled;

    weights_ = w;
    intercept_ = target_mean;
    alpha_ = alpha;
    beta_ = beta;
    fitted_ = true;
}

Eigen::VectorXd BayesianLinearRegressor::predict(const Eigen::MatrixXd& features) const {
    if (!fitted_) throw std::runtime_error("predict: model is not fitted");
    if (features.cols() != weights_.size())
        throw std::invalid_argument("predict: feature count disagrees with training data");
    return ((features.rowwise() - input_mean_.transpose()) * weights_).array() + intercept_;
}

}  // namespace cid
