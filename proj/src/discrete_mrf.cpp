#include "cid/discrete_mrf.hpp"

#include <cmath>
#include <stdexcept>

#include "cid/entropy.hpp"
#include "cid/math_util.hpp"

namespace cid {

std::size_t JointTable::num_states() const {
    std::size_t n = 1;
    for (int d : dims) n *= static_cast<std::size_t>(d);
    return n;
}

std::size_t JointTable::flat_index(const std::vector<int>& state) const {
    std::size_t idx = 0;
    for (std::size_t v = 0; v < dims.size(); ++v)
        idx = idx * static_cast<std::size_t>(dims[v]) + static_cast<std::size_t>(state[v]);
    return idx;
}

void JointTable::unflatten(std::size_t flat, std::vector<int>& state) const {
    state.resize(dims.size());
    for (std::size_t v = dims.size(); v-- > 0;) {
        state[v] = static_cast<int>(flat % static_cast<std::size_t>(dims[v]));
        flat /= static_cast<std::size_t>(dims[v]);
    }
}

double DiscreteMrf::log_pair_at(int a, int b, int sa, int sb) const {
    if (a == b) throw std::invalid_argument("log_pair_at: nodes must differ");
    if (a < b) return log_pair.at({a, b})(sa, sb);
    return log_pair.at({b, a})(sb, sa);
}

JointTable exact_joint(const DiscreteMrf& mrf) {
    JointTable joint;
    joint.dims.reserve(mrf.states.size());
    for (int v = 0; v < mrf.num_nodes(); ++v) joint.dims.push_back(mrf.num_states(v));
    const std::size_t total = joint.num_states();
    std::vector<double> log_weight(total);
    std::vector<int> state;
    for (std::size_t s = 0; s < total; ++s) {
        joint.unflatten(s, state);
        double lw = 0.0;
        for (int v = 0; v < mrf.num_nodes(); ++v) lw += mrf.log_node[static_cast<std::size_t>(v)](state[static_cast<std::size_t>(v)]);
        for (const auto& [key, table] : mrf.log_pair)
            lw += table(state[static_cast<std::size_t>(key.first)], state[static_cast<std::size_t>(key.second)]);
        log_weight[s] = lw;
    }
    const double log_z = log_sum_exp(log_weight);
    joint.probs.resize(total);
    for (std::size_t s = 0; s < total; ++s) joint.probs[s] = std::exp(log_weight[s] - log_z);
    return joint;
}

PotentialTable mrf_potential_table(const DiscreteMrf& mrf, int feature, int target,
                                   const std::vector<int>& state) {
    if (feature == target) throw std::invalid_argument("mrf_potential_table: feature equals target");
    const int bx = mrf.num_states(feature);
    const int by = mrf.num_states(target);

    PotentialTable table;
    table.x_bin = state[static_cast<std::size_t>(feature)];
    table.y_bin = state[static_cast<std::size_t>(target)];

    table.log_F.setZero(bx, by);
    if (mrf.adjacency(feature, target)) {
        for (int a = 0; a < bx; ++a)
            for (int b = 0; b < by; ++b)
                table.log_F(a, b) = mrf.log_pair_at(feature, target, a, b);
    }

    table.log_d = mrf.log_node[static_cast<std::size_t>(feature)];
    for (int j = 0; j < mrf.num_nodes(); ++j) {
        if (j == feature || j == target || !mrf.adjacency(feature, j)) continue;
        for (int a = 0; a < bx; ++a)
            table.log_d(a) += mrf.log_pair_at(feature, j, a, state[static_cast<std::size_t>(j)]);
    }

    table.log_e = mrf.log_node[static_cast<std::size_t>(target)];
    for (int j = 0; j < mrf.num_nodes(); ++j) {
        if (j == feature || j == target || !mrf.adjacency(target, j)) continue;
        for (int b = 0; b < by; ++b)
            table.log_e(b) += mrf.log_pair_at(target, j, b, state[static_cast<std::size_t>(j)]);
    }

    table.log_f_obs = table.log_F(table.x_bin, table.y_bin);
    return table;
}

double closed_form_covered_info(const DiscreteMrf& mrf, int feature, int target) {
    JointTable joint = exact_joint(mrf);
    joint.target = target;

    // Pointwise mutual information from the exact pair marginal.
    const int bx = mrf.num_states(feature);
    const int by = mrf.num_states(target);
    Eigen::MatrixXd pair = Eigen::MatrixXd::Zero(bx, by);
    Eigen::VectorXd px = Eigen::VectorXd::Zero(bx), py = Eigen::VectorXd::Zero(by);
    std::vector<int> state;
    for (std::size_t s = 0; s < joint.num_states(); ++s) {
        joint.unflatten(s, state);
        pair(state[static_cast<std::size_t>(feature)], state[static_cast<std::size_t>(target)]) += joint.probs[s];
    }
    px = pair.rowwise().sum();
    py = pair.colwise().sum().transpose();

    double covered = 0.0;
    for (std::size_t s = 0; s < joint.num_states(); ++s) {
        const double p = joint.probs[s];
        if (p <= 0.0) continue;
        joint.unflatten(s, state);
        const int a = state[static_cast<std::size_t>(feature)];
        const int b = state[static_cast<std::size_t>(target)];
        const double local_mi = std::log(pair(a, b) / (px(a) * py(b)));
        covered += p * (local_mi - log_ratio(mrf_potential_table(mrf, feature, target, state)));
    }
    return covered;
}

DiscreteMrf random_discrete_mrf(int n_nodes, int max_states, std::mt19937_64& rng, double edge_prob) {
    if (n_nodes < 2 || max_states < 2)
        throw std::invalid_argument("random_discrete_mrf: need >= 2 nodes and >= 2 states");
    std::uniform_real_distribution<double> unif(-1.5, 1.5);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    DiscreteMrf mrf;
    mrf.states.resize(static_cast<std::size_t>(n_nodes));
    mrf.log_node.resize(static_cast<std::size_t>(n_nodes));
    mrf.adjacency.setConstant(n_nodes, n_nodes, false);
    for (int v = 0; v < n_nodes; ++v) {
        const int k = 2 + static_cast<int>(rng() % std::uint64_t(max_states - 1));
        auto& grid = mrf.states[static_cast<std::size_t>(v)];
        grid.resize(static_cast<std::size_t>(k));
        for (int s = 0; s < k; ++s) grid[static_cast<std::size_t>(s)] = -1.0 + 2.0 * double(s) / double(k - 1);
        mrf.log_node[static_cast<std::size_t>(v)].resize(k);
        for (int s = 0; s < k; ++s) mrf.log_node[static_cast<std::size_t>(v)](s) = unif(rng);
    }
    bool any_edge = false;
    for (int a = 0; a < n_nodes; ++a) {
        for (int b = a + 1; b < n_nodes; ++b) {
            const bool last_chance = !any_edge && a == n_nodes - 2 && b == n_nodes - 1;
            if (coin(rng) < edge_prob || last_chance) {
                mrf.adjacency(a, b) = mrf.adjacency(b, a) = true;
                Eigen::MatrixXd table(mrf.num_states(a), mrf.num_states(b));
                for (Eigen::Index i = 0; i < table.rows(); ++i)
                    for (Eigen::Index j = 0; j < table.cols(); ++j) table(i, j) = unif(rng);
                mrf.log_pair[{a, b}] = table;
                any_edge = true;
            }
        }
    }
    return mrf;
}

}  // namespace cid
