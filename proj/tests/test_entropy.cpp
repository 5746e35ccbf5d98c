#include <doctest.h>

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "cid/dataset.hpp"
#include "cid/discrete_mrf.hpp"
#include "cid/entropy.hpp"
#include "cid/math_util.hpp"

using namespace cid;

namespace {

// Uniform joint over the XOR triple (x1, x2, y = x1 ^ x2).
JointTable xor_joint() {
    JointTable joint;
    joint.dims = {2, 2, 2};
    joint.probs.assign(8, 0.0);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) joint.probs[joint.flat_index({a, b, a ^ b})] = 0.25;
    return joint;
}

TabularDataset binary_dataset(const std::vector<std::array<int, 2>>& rows) {
    TabularDataset d;
    d.values.resize(static_cast<Eigen::Index>(rows.size()), 1);
    d.target.resize(static_cast<Eigen::Index>(rows.size()));
    d.feature_names = {"x"};
    d.bin_edges = {{-0.5, 0.5, 1.5}, {-0.5, 0.5, 1.5}};
    d.bin_midpoints = {{0.0, 1.0}, {0.0, 1.0}};
    d.bin_index.resize(static_cast<Eigen::Index>(rows.size()), 2);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        d.values(static_cast<Eigen::Index>(r), 0) = rows[r][0];
        d.target(static_cast<Eigen::Index>(r)) = rows[r][1];
        d.bin_index(static_cast<Eigen::Index>(r), 0) = rows[r][0];
        d.bin_index(static_cast<Eigen::Index>(r), 1) = rows[r][1];
    }
    return d;
}

}  // namespace

TEST_CASE("local_mutual_info of independent bits averages to about zero") {
    std::mt19937_64 rng(1);
    std::vector<std::array<int, 2>> rows(10000);
    for (auto& r : rows) r = {int(rng() & 1), int(rng() & 1)};
    const TabularDataset d = binary_dataset(rows);
    const Eigen::VectorXd h = local_mutual_info(d, 0);
    CHECK(std::abs(h.mean()) < 0.01);
}

TEST_CASE("local_mutual_info of identical bits approaches log 2") {
    std::mt19937_64 rng(2);
    std::vector<std::array<int, 2>> rows(20000);
    for (auto& r : rows) {
        const int b = int(rng() & 1);
        r = {b, b};
    }
    const TabularDataset d = binary_dataset(rows);
    CHECK(local_mutual_info(d, 0).mean() == doctest::Approx(std::log(2.0)).epsilon(0.01));
}

TEST_CASE("XOR leaves single-feature local MI near zero") {
    std::mt19937_64 rng(3);
    std::vector<std::array<int, 2>> rows(20000);
    for (auto& r : rows) {
        const int x1 = int(rng() & 1), x2 = int(rng() & 1);
        r = {x1, x1 ^ x2};
    }
    const TabularDataset d = binary_dataset(rows);
    CHECK(std::abs(local_mutual_info(d, 0).mean()) < 0.01);
}

TEST_CASE("split_redundant_synergistic arithmetic") {
    SubsampleSet subsamples;
    subsamples.subsets = {{0, 1}};
    Eigen::VectorXd terms(2);
    terms << 1.0, -1.0;
    const SplitAggregates split = split_redundant_synergistic(terms, subsamples);
    CHECK(split.positive(0) == 0.5);
    CHECK(split.negative(0) == 0.5);

    Eigen::VectorXd all_pos(2);
    all_pos << 0.3, 0.7;
    const SplitAggregates pos_only = split_redundant_synergistic(all_pos, subsamples);
    CHECK(pos_only.negative(0) == 0.0);
    CHECK(pos_only.positive(0) == doctest::Approx(0.5));
}

TEST_CASE("per-element split identity is exact") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double h = normal(rng);
        const double reconstructed = std::max(0.0, h) - std::abs(std::min(0.0, h));
        CHECK(reconstructed == h);
    }
}

TEST_CASE("XOR local intersection terms are synergy-dominated") {
    const JointTable joint = xor_joint();
    const std::vector<std::vector<int>> blocks = {{0}, {1}, {2}};
    const std::vector<double> locals = local_intersection_terms(joint, blocks);
    // every occupied state carries the same -log 2 term
    Eigen::VectorXd occupied(4);
    int k = 0;
    for (std::size_t s = 0; s < joint.probs.size(); ++s)
        if (joint.probs[s] > 0) occupied(k++) = locals[s];
    REQUIRE(k == 4);
    SubsampleSet subsamples;
    subsamples.subsets = {{0, 1, 2, 3}};
    const SplitAggregates split = split_redundant_synergistic(occupied, subsamples);
    CHECK(split.negative(0) > split.positive(0));
    CHECK(split.positive(0) == 0.0);
    CHECK(split.negative(0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(intersection_entropy(joint, blocks) == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("two-block intersection entropy reduces to mutual information") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(0.1, 1.0);
    JointTable joint;
    joint.dims = {3, 4};
    joint.probs.resize(12);
    double total = 0.0;
    for (auto& p : joint.probs) total += (p = unif(rng));
    for (auto& p : joint.probs) p /= total;

    // direct pointwise MI formula
    std::vector<double> px(3, 0.0), py(4, 0.0);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 4; ++b) {
            px[static_cast<std::size_t>(a)] += joint.probs[joint.flat_index({a, b})];
            py[static_cast<std::size_t>(b)] += joint.probs[joint.flat_index({a, b})];
        }
    double mi = 0.0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 4; ++b) {
            const double p = joint.probs[joint.flat_index({a, b})];
            mi += p * std::log(p / (px[static_cast<std::size_t>(a)] * py[static_cast<std::size_t>(b)]));
        }
    CHECK(intersection_entropy(joint, {{0}, {1}}) == doctest::Approx(mi).epsilon(1e-14));
}

TEST_CASE("oracle_covered_info trivial cases") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> unif(0.1, 1.0);

    // rest independent of (feature, target): no coverage
    JointTable pair;
    pair.dims = {2, 3};
    pair.probs.resize(6);
    double total = 0.0;
    for (auto& p : pair.probs) total += (p = unif(rng));
    for (auto& p : pair.probs) p /= total;
    JointTable with_noise;
    with_noise.dims = {2, 2, 3};  // (feature, rest, target)
    with_noise.target = 2;
    with_noise.probs.resize(12);
    for (int a = 0; a < 2; ++a)
        for (int r = 0; r < 2; ++r)
            for (int b = 0; b < 3; ++b)
                with_noise.probs[with_noise.flat_index({a, r, b})] =
                    pair.probs[pair.flat_index({a, b})] * 0.5;
    CHECK(oracle_covered_info(with_noise, 0) == doctest::Approx(0.0).epsilon(1e-12));

    // rest duplicates the feature: full coverage, equal to I(feature; target)
    JointTable with_copy;
    with_copy.dims = {2, 2, 3};
    with_copy.target = 2;
    with_copy.probs.assign(12, 0.0);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 3; ++b)
            with_copy.probs[with_copy.flat_index({a, a, b})] = pair.probs[pair.flat_index({a, b})];
    const double mi = intersection_entropy(pair, {{0}, {1}});
    CHECK(oracle_covered_info(with_copy, 0) == doctest::Approx(mi).epsilon(1e-12));
}

TEST_CASE("oracle value is symmetric in the feature and target roles") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.05, 1.0);
    JointTable joint;
    joint.dims = {2, 3, 2};
    joint.probs.resize(12);
    double total = 0.0;
    for (auto& p : joint.probs) total += (p = unif(rng));
    for (auto& p : joint.probs) p /= total;

    joint.target = 2;
    const double a = oracle_covered_info(joint, 0);
    joint.target = 0;
    const double b = oracle_covered_info(joint, 2);
    CHECK(a == doctest::Approx(b).epsilon(1e-13));
}

TEST_CASE("oracle_covered_info validates its input") {
    JointTable bad;
    bad.dims = {2, 2};
    bad.probs = {0.5, 0.5, 0.5, 0.5};
    CHECK_THROWS_AS(oracle_covered_info(bad, 0), std::invalid_argument);
    JointTable huge;
    huge.dims = {6, 2};
    huge.probs.assign(12, 1.0 / 12.0);
    CHECK_THROWS_AS(oracle_covered_info(huge, 0), std::invalid_argument);
}

TEST_CASE("closed form equals the oracle on random table models") {
    std::mt19937_64 rng(8);
    double worst = 0.0;
    for (int rep = 0; rep < 40; ++rep) {
        const int nodes = 3 + int(rng() % 2);
        const DiscreteMrf mrf = random_discrete_mrf(nodes, 4, rng);
        const int target = int(rng() % std::uint64_t(nodes));
        int feature = int(rng() % std::uint64_t(nodes));
        if (feature == target) feature = (feature + 1) % nodes;
        JointTable joint = exact_joint(mrf);
        joint.target = target;
        worst = std::max(worst, std::abs(closed_form_covered_info(mrf, feature, target) -
                                         oracle_covered_info(joint, feature)));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("hand-set binary chain matches the inclusion-exclusion value") {
    // x0 -- x1 -- y chain with asymmetric potentials
    DiscreteMrf mrf;
    mrf.states = {{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}};
    mrf.adjacency.setConstant(3, 3, false);
    mrf.adjacency(0, 1) = mrf.adjacency(1, 0) = true;
    mrf.adjacency(1, 2) = mrf.adjacency(2, 1) = true;
    mrf.log_node.assign(3, Eigen::VectorXd::Zero(2));
    mrf.log_node[0] << 0.1, -0.2;
    Eigen::MatrixXd pair01(2, 2), pair12(2, 2);
    pair01 << 0.4, -0.3, -0.1, 0.6;
    pair12 << -0.5, 0.2, 0.3, 0.1;
    mrf.log_pair[{0, 1}] = pair01;
    mrf.log_pair[{1, 2}] = pair12;

    JointTable joint = exact_joint(mrf);
    joint.target = 2;
    const double closed = closed_form_covered_info(mrf, 0, 2);
    const double oracle = oracle_covered_info(joint, 0);
    CHECK(closed == doctest::Approx(oracle).epsilon(1e-12));

    // x0 and y are conditionally independent given x1, so the whole mutual
    // information is covered.
    const double mi = block_entropy(joint, {0}) + block_entropy(joint, {2}) -
                      block_entropy(joint, {0, 2});
    CHECK(closed == doctest::Approx(mi).epsilon(1e-10));
}

TEST_CASE("covered_info_row under an exact Gaussian-grid model matches the oracle") {
    // Random sparse precision over 3 nodes, binary grids; rows enumerate the
    // grid so the production path can be averaged under the exact joint.
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unif(-0.6, 0.6);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::MatrixXd prec = Eigen::MatrixXd::Identity(3, 3) * (1.2 + 0.3 * unif(rng));
        const double c01 = unif(rng), c12 = unif(rng);
        prec(0, 1) = prec(1, 0) = c01;
        prec(1, 2) = prec(2, 1) = c12;
        PrecisionModel model;
        model.precision = prec;
        model.mean = Eigen::VectorXd::Zero(3);
        model.refresh_derived();

        const std::vector<double> grid = {-1.0, 1.0};
        Eigen::MatrixXd rows(8, 3);
        for (int s = 0; s < 8; ++s)
            rows.row(s) << grid[static_cast<std::size_t>((s >> 2) & 1)],
                grid[static_cast<std::size_t>((s >> 1) & 1)], grid[static_cast<std::size_t>(s & 1)];
        TabularDataset d;
        d.values = rows.leftCols(2);
        d.target = rows.col(2);
        d.feature_names = {"a", "b"};
        d.bin_edges.assign(3, {-2.0, 0.0, 2.0});
        d.bin_midpoints.assign(3, grid);
        d.bin_index.resize(8, 3);
        for (int s = 0; s < 8; ++s) {
            d.bin_index(s, 0) = (s >> 2) & 1;
            d.bin_index(s, 1) = (s >> 1) & 1;
            d.bin_index(s, 2) = s & 1;
        }

        // exact joint from the same potential conventions
        JointTable joint;
        joint.dims = {2, 2, 2};
        joint.target = 2;
        joint.probs.resize(8);
        std::vector<double> logw(8);
        for (int s = 0; s < 8; ++s) {
            double lw = 0.0;
            for (int v = 0; v < 3; ++v) lw += log_node_potential(model, v, rows(s, v));
            lw += 2.0 * log_pair_potential(model, 0, 1, rows(s, 0), rows(s, 1));
            lw += 2.0 * log_pair_potential(model, 1, 2, rows(s, 1), rows(s, 2));
            lw += 2.0 * log_pair_potential(model, 0, 2, rows(s, 0), rows(s, 2));
            logw[static_cast<std::size_t>(s)] = lw;
        }
        const double logz = log_sum_exp(logw);
        for (int s = 0; s < 8; ++s) joint.probs[static_cast<std::size_t>(s)] = std::exp(logw[static_cast<std::size_t>(s)] - logz);

        // exact pointwise MI of (feature 0, target) from the joint
        Eigen::MatrixXd pair = Eigen::MatrixXd::Zero(2, 2);
        for (int s = 0; s < 8; ++s) pair((s >> 2) & 1, s & 1) += joint.probs[static_cast<std::size_t>(s)];
        const Eigen::VectorXd px = pair.rowwise().sum();
        const Eigen::VectorXd py = pair.colwise().sum().transpose();

        double closed = 0.0;
        for (int s = 0; s < 8; ++s) {
            const int a = (s >> 2) & 1, b = s & 1;
            const double local_mi = std::log(pair(a, b) / (px(a) * py(b)));
            closed += joint.probs[static_cast<std::size_t>(s)] * covered_info_row(model, d, 0, s, local_mi);
        }
        CHECK(closed == doctest::Approx(oracle_covered_info(joint, 0)).epsilon(1e-10));
    }
}

TEST_CASE("disconnected feature keeps its full local MI as covered information") {
    PrecisionModel model;
    model.precision = Eigen::MatrixXd::Identity(3, 3);
    model.precision(1, 2) = model.precision(2, 1) = -0.4;  // other feature couples to y
    model.mean = Eigen::VectorXd::Zero(3);
    model.refresh_derived();

    std::mt19937_64 rng(10);
    std::vector<std::array<int, 2>> rows(200);
    for (auto& r : rows) r = {int(rng() & 1), int(rng() & 1)};
    TabularDataset d = binary_dataset(rows);
    // widen to two features: insert a second column equal to the target
    TabularDataset wide;
    wide.values.resize(d.rows(), 2);
    wide.values.col(0) = d.values.col(0);
    wide.values.col(1) = d.target;
    wide.target = d.target;
    wide.feature_names = {"x", "copy"};
    wide.bin_edges = {d.bin_edges[0], d.bin_edges[0], d.bin_edges[1]};
    wide.bin_midpoints = {d.bin_midpoints[0], d.bin_midpoints[0], d.bin_midpoints[1]};
    wide.bin_index.resize(d.rows(), 3);
    wide.bin_index.col(0) = d.bin_index.col(0);
    wide.bin_index.col(1) = d.bin_index.col(1);
    wide.bin_index.col(2) = d.bin_index.col(1);

    const Eigen::VectorXd h = local_mutual_info(wide, 0);
    for (std::int64_t r = 0; r < wide.rows(); ++r)
        CHECK(covered_info_row(model, wide, 0, r, h(r)) == h(r));
}

TEST_CASE("duplicated feature is nearly fully covered end to end") {
    // x0 and x1 identical and predictive of y; the MRF ties x0 to y only
    // through the duplicate-aware fit.
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::int64_t m = 1500;
    TabularDataset d;
    d.values.resize(m, 2);
    d.target.resize(m);
    d.feature_names = {"x", "twin"};
    for (std::int64_t r = 0; r < m; ++r) {
        const double x = normal(rng);
        d.values(r, 0) = x;
        d.values(r, 1) = x;
        d.target(r) = x + 0.4 * normal(rng);
    }
    const TabularDataset g = discretize(quantile_gaussianize(d), 8);
    const PrecisionModel fit = graphical_lasso(empirical_covariance(g), 0.05);

    SubsampleSet subsamples;
    subsamples.subsets = {std::vector<int>(static_cast<std::size_t>(m)), {}};
    std::iota(subsamples.subsets[0].begin(), subsamples.subsets[0].end(), 0);
    subsamples.subsets[1] = subsamples.subsets[0];

    const EntropyProfile profile = compute_entropy_profile(fit, g, subsamples, 1);
    CHECK(profile.ci_plus(0, 0) >= 0.9 * profile.mi_plus(0, 0));
    CHECK(profile.mi_plus(0, 0) > 0.1);
}

TEST_CASE("entropy profile reconstruction identities hold per subsample") {
    const TabularDataset toy = generate_toy(300, 12);
    const TabularDataset g = discretize(quantile_gaussianize(toy), 6);
    const PrecisionModel fit = graphical_lasso(empirical_covariance(g), 0.1);
    const SubsampleSet subsamples = make_subsamples(g.rows(), 8, 0.7, 3);
    const EntropyProfile profile = compute_entropy_profile(fit, g, subsamples, 2);

    for (int f = 0; f < 6; ++f) {
        for (int s = 0; s < subsamples.count(); ++s) {
            CHECK(profile.mi_plus(f, s) >= 0.0);
            CHECK(profile.mi_minus(f, s) >= 0.0);
            CHECK(profile.ci_plus(f, s) >= 0.0);
            CHECK(profile.ci_minus(f, s) >= 0.0);

            // reconstruction equals an independent re-accumulation
            const auto& subset = subsamples.subsets[static_cast<std::size_t>(s)];
            double pos = 0.0, neg = 0.0;
            for (int k : subset) {
                pos += std::max(0.0, profile.local_mi(k, f));
                neg += std::abs(std::min(0.0, profile.local_mi(k, f)));
            }
            CHECK(profile.mi_plus(f, s) == pos / double(subset.size()));
            CHECK(profile.mi_minus(f, s) == neg / double(subset.size()));
            CHECK(profile.mi_mean(f, s) ==
                  pos / double(subset.size()) - neg / double(subset.size()));
        }
    }
}
