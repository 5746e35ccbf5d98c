#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "cid/potentials.hpp"

namespace cid {

/// Explicit probability table over a handful of discrete variables.
/// Flat storage with the last variable varying fastest.
struct JointTable {
    std::vector<int> dims;
    std::vector<double> probs;
    int target = -1;  // defaults to the last variable

    int num_vars() const { return static_cast<int>(dims.size()); }
    int target_var() const { return target < 0 ? num_vars() - 1 : target; }
    std::size_t num_states() const;
    std::size_t flat_index(const std::vector<int>& state) const;
    void unflatten(std::size_t flat, std::vector<int>& state) const;
};

/// Pairwise Markov random field with arbitrary tabulated log potentials.
struct DiscreteMrf {
    std::vector<std::vector<double>> states;  // grid value per node state
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adjacency;
    std::vector<Eigen::VectorXd> log_node;                  // per node
    std::map<std::pair<int, int>, Eigen::MatrixXd> log_pair;  // keyed (lo, hi)

    int num_nodes() const { return static_cast<int>(states.size()); }
    int num_states(int node) const { return static_cast<int>(states[static_cast<std::size_t>(node)].size()); }
    double log_pair_at(int a, int b, int sa, int sb) const;
};

/// Normalized joint of the factor product, by enumeration.
JointTable exact_joint(const DiscreteMrf& mrf);

/// Factor table for one (feature, target) pair at a full state assignment;
/// mirrors the Gaussian-path assembly with tabulated potentials.
PotentialTable mrf_potential_table(const DiscreteMrf& mrf, int feature, int target,
                                   const std::vector<int>& state);

/// Covered information of `feature` with respect to `target` through the
/// factorized closed form: the exact expectation over the joint of
/// (pointwise mutual information - log_ratio).
double closed_form_covered_info(const DiscreteMrf& mrf, int feature, int target);

/// Random pairwise MRF with log potentials uniform in [-1.5, 1.5]; every
/// edge is included independently with probability edge_prob (at least one
/// edge graph-wide is forced so the instance is never fully trivial).
DiscreteMrf random_discrete_mrf(int n_nodes, int max_states, std::mt19937_64& rng,
                                double edge_prob = 0.6);

}  // namespace cid
