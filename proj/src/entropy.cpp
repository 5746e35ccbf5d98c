#include "cid/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "cid/math_util.hpp"

namespace cid {

Eigen::VectorXd local_mutual_info(const TabularDataset& data, int feature) {
    if (!data.discretized())
        throw std::invalid_argument("local_mutual_info: dataset is not discretized");
    const int y = static_cast<int>(data.num_features());
    if (feature < 0 || feature >= y)
        throw std::invalid_argument("local_mutual_info: feature out of range");
    const std::int64_t m = data.rows();
    const int bx = data.num_bins(feature);
    const int by = data.num_bins(y);

    Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(bx, by);
    for (std::int64_t r = 0; r < m; ++r) joint(data.bin_of(r, feature), data.bin_of(r, y)) += 1.0;
    joint.array() += kMiSmoothing;
    joint /= double(m) + kMiSmoothing * double(bx) * double(by);
    const Eigen::VectorXd px = joint.rowwise().sum();
    const Eigen::VectorXd py = joint.colwise().sum().transpose();

    Eigen::VectorXd out(m);
    for (std::int64_t r = 0; r < m; ++r) {
        const int a = data.bin_of(r, feature);
        const int b = data.bin_of(r, y);
        out(r) = std::log(joint(a, b) / (px(a) * py(b)));
    }
    return out;
}

Eigen::VectorXd local_mutual_info_model(const PrecisionModel& model, const TabularDataset& data,
                                        int feature) {
    if (!data.discretized())
        throw std::invalid_argument("local_mutual_info_model: dataset is not discretized");
    const int y = static_cast<int>(data.num_features());
    if (feature < 0 || feature >= y)
        throw std::invalid_argument("local_mutual_info_model: feature out of range");
    if (model.num_nodes() != data.num_columns())
        throw std::invalid_argument("local_mutual_info_model: model does not cover [X, y]");

    const Eigen::MatrixXd cov =
        model.precision.ldlt().solve(Eigen::MatrixXd::Identity(model.num_nodes(), model.num_nodes()));
    const double sxx = cov(feature, feature);
    const double syy = cov(y, y);
    const double sxy = cov(feature, y);
    const double det = sxx * syy - sxy * sxy;
    if (!(sxx > 0.0) || !(syy > 0.0) || !(det > 1e-14 * sxx * syy))
        throw std::runtime_error("local_mutual_info_model: degenerate (feature, target) block");

    const auto& mids_x = data.bin_midpoints[static_cast<std::size_t>(feature)];
    const auto& mids_y = data.bin_midpoints[static_cast<std::size_t>(y)];
    const int bx = static_cast<int>(mids_x.size());
    const int by = static_cast<int>(mids_y.size());

    // Bivariate normal mass on the bin grid, normalized over the grid.
    Eigen::MatrixXd joint(bx, by);
    for (int a = 0; a < bx; ++a) {
        const double dx = mids_x[static_cast<std::size_t>(a)] - model.mean(feature);
        for (int b = 0; b < by; ++b) {
            const double dy = mids_y[static_cast<std::size_t>(b)] - model.mean(y);
            const double quad = (syy * dx * dx - 2.0 * sxy * dx * dy + sxx * dy * dy) / det;
            joint(a, b) = std::exp(std::max(-0.5 * quad, kLogPotentialClamp));
        }
    }
    joint /= joint.sum();
    const Eigen::VectorXd px = joint.rowwise().sum();
    const Eigen::VectorXd py = joint.colwise().sum().transpose();

    const std::int64_t m = data.rows();
    Eigen::VectorXd out(m);
    for (std::int64_t r = 0; r < m; ++r) {
        const int a = data.bin_of(r, feature);
        const int b = data.bin_of(r, y);
        out(r) = std::log(joint(a, b) / (px(a) * py(b)));
    }
    return out;
}

double covered_info_row(const PrecisionModel& model, const TabularDataset& data, int feature,
                        std::int64_t row, double local_mi_value) {
    return local_mi_value - log_ratio(assemble_factors(model, data, feature, row));
}

SplitAggregates split_redundant_synergistic(const Eigen::VectorXd& local_terms,
                                            const SubsampleSet& subsamples) {
    SplitAggregates out;
    const int n = subsamples.count();
    out.positive.resize(n);
    out.negative.resize(n);
    for (int s = 0; s < n; ++s) {
        const auto& subset = subsamples.subsets[static_cast<std::size_t>(s)];
        double pos = 0.0, neg = 0.0;
        for (int k : subset) {
            const double h = local_terms(k);
            pos += std::max(0.0, h);
            neg += std::abs(std::min(0.0, h));
        }
        out.positive(s) = pos / double(subset.size());
        out.negative(s) = neg / double(subset.size());
    }
    return out;
}

EntropyProfile compute_entropy_profile(const PrecisionModel& model, const TabularDataset& data,
                                       const SubsampleSet& subsamples, unsigned n_threads,
                                       MiSource mi_source) {
    const std::int64_t m = data.rows();
    const int n = static_cast<int>(data.num_features());
    const int ns = subsamples.count();

    EntropyProfile profile;
    profile.local_mi.resize(m, n);
    profile.local_ci.resize(m, n);
    profile.mi_plus.resize(n, ns);
    profile.mi_minus.resize(n, ns);
    profile.ci_plus.resize(n, ns);
    profile.ci_minus.resize(n, ns);

    parallel_for_index(static_cast<std::size_t>(n), n_threads, [&](std::size_t fi) {
        const int feature = static_cast<int>(fi);
        try {
            const Eigen::VectorXd mi = mi_source == MiSource::Model
                                           ? local_mutual_info_model(model, data, feature)
                                           : local_mutual_info(data, feature);
            const Eigen::VectorXd ci = covered_info_column(model, data, feature, mi);
            profile.local_mi.col(feature) = mi;
            profile.local_ci.col(feature) = ci;
            const SplitAggregates mi_split = split_redundant_synergistic(mi, subsamples);
            const SplitAggregates ci_split = split_redundant_synergistic(ci, subsamples);
            profile.mi_plus.row(feature) = mi_split.positive.transpose();
            profile.mi_minus.row(feature) = mi_split.negative.transpose();
            profile.ci_plus.row(feature) = ci_split.positive.transpose();
            profile.ci_minus.row(feature) = ci_split.negative.transpose();
        } catch (const std::exception& e) {
            throw std::runtime_error("entropy profile failed for feature " +
                                     std::to_string(feature) + ": " + e.what());
        }
    });
    return profile;
}

void write_entropy_profile_csv(const EntropyProfile& profile,
                               const std::vector<std::string>& feature_names,
                               const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_entropy_profile_csv: cannot open '" + path + "'");
    out << "feature,subsample,Hc_plus,Hc_minus,Hmi_plus,Hmi_minus\n";
    char buf[160];
    for (Eigen::Index f = 0; f < profile.ci_plus.rows(); ++f) {
        for (Eigen::Index s = 0; s < profile.ci_plus.cols(); ++s) {
            std::snprintf(buf, sizeof(buf), "%s,%lld,%.10g,%.10g,%.10g,%.10g\n",
                          feature_names[static_cast<std::size_t>(f)].c_str(),
                          static_cast<long long>(s), profile.ci_plus(f, s), profile.ci_minus(f, s),
                          profile.mi_plus(f, s), profile.mi_minus(f, s));
            out << buf;
        }
    }
}

namespace {

void validate_joint(const JointTable& joint) {
    if (joint.dims.empty() || joint.dims.size() > 5)
        throw std::invalid_argument("joint table must cover 1..5 variables");
    for (int d : joint.dims)
        if (d < 1 || d > 5) throw std::invalid_argument("joint table states must lie in 1..5");
    if (joint.probs.size() != joint.num_states())
        throw std::invalid_argument("joint table size disagrees with dims");
    double total = 0.0;
    for (double p : joint.probs) {
        if (p < 0.0) throw std::invalid_argument("joint table has negative mass");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("joint table does not sum to 1");
}

// Marginal over a variable subset, indexed by the subset's own mixed radix.
struct Marginal {
    std::vector<int> vars;
    std::vector<double> probs;
    std::vector<int> dims;

    double at(const std::vector<int>& full_state) const {
        std::size_t idx = 0;
        for (std::size_t k = 0; k < vars.size(); ++k)
            idx = idx * static_cast<std::size_t>(dims[k]) +
                  static_cast<std::size_t>(full_state[static_cast<std::size_t>(vars[k])]);
        return probs[idx];
    }
};

Marginal marginalize(const JointTable& joint, const std::vector<int>& vars) {
    Marginal out;
    out.vars = vars;
    std::size_t size = 1;
    for (int v : vars) {
        out.dims.push_back(joint.dims[static_cast<std::size_t>(v)]);
        size *= static_cast<std::size_t>(joint.dims[static_cast<std::size_t>(v)]);
    }
    out.probs.assign(size, 0.0);
    std::vector<int> state;
    for (std::size_t s = 0; s < joint.num_states(); ++s) {
        joint.unflatten(s, state);
        std::size_t idx = 0;
        for (std::size_t k = 0; k < vars.size(); ++k)
            idx = idx * static_cast<std::size_t>(out.dims[k]) +
                  static_cast<std::size_t>(state[static_cast<std::size_t>(vars[k])]);
        out.probs[idx] += joint.probs[s];
    }
    return out;
}

}  // namespace

double block_entropy(const JointTable& joint, const std::vector<int>& variables) {
    validate_joint(joint);
    const Marginal marg = marginalize(joint, variables);
    double h = 0.0;
    for (double p : marg.probs)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

std::vector<double> local_intersection_terms(const JointTable& joint,
                                             const std::vector<std::vector<int>>& blocks) {
    validate_joint(joint);
    const std::size_t nb = blocks.size();
    if (nb == 0 || nb > 16) throw std::invalid_argument("intersection entropy: bad block count");

    // One marginal per nonempty block subset, with the inclusion-exclusion sign.
    std::vector<Marginal> marginals;
    std::vector<double> signs;
    for (std::size_t mask = 1; mask < (std::size_t(1) << nb); ++mask) {
        std::vector<int> vars;
        int bits = 0;
        for (std::size_t b = 0; b < nb; ++b) {
            if (mask & (std::size_t(1) << b)) {
                ++bits;
                for (int v : blocks[b]) vars.push_back(v);
            }
        }
        std::sort(vars.begin(), vars.end());
        vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
        marginals.push_back(marginalize(joint, vars));
        signs.push_back(bits % 2 == 1 ? 1.0 : -1.0);
    }

    std::vector<double> out(joint.num_states(), 0.0);
    std::vector<int> state;
    for (std::size_t s = 0; s < joint.num_states(); ++s) {
        if (joint.probs[s] <= 0.0) continue;
        joint.unflatten(s, state);
        double local = 0.0;
        for (std::size_t k = 0; k < marginals.size(); ++k) {
            const double p = marginals[k].at(state);
            local += signs[k] * -std::log(p);
        }
        out[s] = local;
    }
    return out;
}

double intersection_entropy(const JointTable& joint, const std::vector<std::vector<int>>& blocks) {
    const std::vector<double> local = local_intersection_terms(joint, blocks);
    double h = 0.0;
    for (std::size_t s = 0; s < joint.num_states(); ++s) h += joint.probs[s] * local[s];
    return h;
}

double oracle_covered_info(const JointTable& joint, int feature) {
    validate_joint(joint);
    const int target = joint.target_var();
    if (feature == target) throw std::invalid_argument("oracle_covered_info: feature equals target");
    std::vector<int> rest;
    for (int v = 0; v < joint.num_vars(); ++v)
        if (v != feature && v != target) rest.push_back(v);

    std::vector<int> all(static_cast<std::size_t>(joint.num_vars()));
    for (int v = 0; v < joint.num_vars(); ++v) all[static_cast<std::size_t>(v)] = v;
    std::vector<int> rest_y = rest, feature_rest = rest;
    rest_y.push_back(target);
    feature_rest.push_back(feature);

    const double mutual_info = block_entropy(joint, {feature}) + block_entropy(joint, {target}) -
                               block_entropy(joint, {feature, target});
    return mutual_info + block_entropy(joint, all) - block_entropy(joint, rest_y) +
           block_entropy(joint, rest) - block_entropy(joint, feature_rest);
}

}  // namespace cid
