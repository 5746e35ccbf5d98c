#include "cid/potentials.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cid {

namespace {

inline double clamp_log(double v) { return v < kLogPotentialClamp ? kLogPotentialClamp : v; }

}  // namespace

double log_pair_potential(const PrecisionModel& model, int s, int t, double x_s, double x_t) {
    if (s == t) throw std::invalid_argument("log_pair_potential: s and t must differ");
    return -0.5 * x_s * model.precision(s, t) * x_t;
}

double log_node_potential(const PrecisionModel& model, int s, double x_s) {
    return -0.5 * (x_s * x_s * model.precision(s, s) + 2.0 * model.eta(s) * x_s);
}

FeatureFactorContext make_feature_context(const PrecisionModel& model, const TabularDataset& data,
                                          int feature) {
    if (!data.discretized())
        throw std::invalid_argument("make_feature_context: dataset is not discretized");
    if (model.num_nodes() != data.num_columns())
        throw std::invalid_argument("make_feature_context: model does not cover [X, y]");
    const int y = static_cast<int>(model.target_node());
    if (feature < 0 || feature >= y)
        throw std::invalid_argument("make_feature_context: feature out of range");

    FeatureFactorContext ctx;
    ctx.feature = feature;
    const auto& mids_x = data.bin_midpoints[static_cast<std::size_t>(feature)];
    const auto& mids_y = data.bin_midpoints[static_cast<std::size_t>(y)];
    const int bx = static_cast<int>(mids_x.size());
    const int by = static_cast<int>(mids_y.size());

    ctx.node_d.resize(bx);
    for (int a = 0; a < bx; ++a)
        ctx.node_d(a) = clamp_log(log_node_potential(model, feature, mids_x[static_cast<std::size_t>(a)]));
    ctx.node_e.resize(by);
    for (int b = 0; b < by; ++b)
        ctx.node_e(b) = clamp_log(log_node_potential(model, y, mids_y[static_cast<std::size_t>(b)]));

    ctx.log_F.setZero(bx, by);
    if (model.adjacency(feature, y)) {
        for (int a = 0; a < bx; ++a)
            for (int b = 0; b < by; ++b)
                ctx.log_F(a, b) = clamp_log(2.0 * log_pair_potential(
                    model, feature, y, mids_x[static_cast<std::size_t>(a)], mids_y[static_cast<std::size_t>(b)]));
    }

    for (int j = 0; j < model.num_nodes(); ++j) {
        if (j == feature || j == y) continue;
        if (model.adjacency(feature, j)) ctx.d_neighbors.push_back(j);
        if (model.adjacency(y, j)) ctx.e_neighbors.push_back(j);
    }
    return ctx;
}

PotentialTable assemble_factors_with_context(const FeatureFactorContext& ctx,
                                             const PrecisionModel& model,
                                             const TabularDataset& data, std::int64_t row) {
    const int y = static_cast<int>(model.target_node());
    const auto& mids_x = data.bin_midpoints[static_cast<std::size_t>(ctx.feature)];
    const auto& mids_y = data.bin_midpoints[static_cast<std::size_t>(y)];
    const int bx = static_cast<int>(mids_x.size());
    const int by = static_cast<int>(mids_y.size());

    PotentialTable table;
    table.log_F = ctx.log_F;
    table.x_bin = data.bin_of(row, ctx.feature);
    table.y_bin = data.bin_of(row, y);

    // One unordered pair contributes the factor twice, so the pair exponent
    // is -x_s * precision * x_t; the sums over neighbors factor through the
    // grid value.
    double coupling_d = 0.0;
    for (int j : ctx.d_neighbors) coupling_d += model.precision(ctx.feature, j) * data.midpoint_of(row, j);
    table.log_d.resize(bx);
    for (int a = 0; a < bx; ++a)
        table.log_d(a) = clamp_log(ctx.node_d(a) - mids_x[static_cast<std::size_t>(a)] * coupling_d);

    double coupling_e = 0.0;
    for (int j : ctx.e_neighbors) coupling_e += model.precision(y, j) * data.midpoint_of(row, j);
    table.log_e.resize(by);
    for (int b = 0; b < by; ++b)
        table.log_e(b) = clamp_log(ctx.node_e(b) - mids_y[static_cast<std::size_t>(b)] * coupling_e);

    table.log_f_obs = table.log_F(table.x_bin, table.y_bin);
    return table;
}

PotentialTable assemble_factors(const PrecisionModel& model, const TabularDataset& data,
                                int feature, std::int64_t row) {
    return assemble_factors_with_context(make_feature_context(model, data, feature), model, data, row);
}

double log_ratio_parts(const Eigen::VectorXd& log_d, const Eigen::VectorXd& log_e,
                       const Eigen::MatrixXd& log_F, int x_bin, int y_bin, double log_f_obs) {
    const Eigen::Index bx = log_d.size();
    const Eigen::Index by = log_e.size();
    if (log_F.rows() != bx || log_F.cols() != by)
        throw std::invalid_argument("log_ratio: table dimensions disagree");

    // Non-adjacent feature/target: F is all-ones in linear scale, the grid
    // sum factorizes against the two denominators and the ratio is exactly 1.
    if ((log_F.array() == 0.0).all()) return log_f_obs;

    double grid_max = -std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < bx; ++a)
        for (Eigen::Index b = 0; b < by; ++b)
            grid_max = std::max(grid_max, log_d(a) + log_F(a, b) + log_e(b));
    double grid_sum = 0.0;
    for (Eigen::Index a = 0; a < bx; ++a)
        for (Eigen::Index b = 0; b < by; ++b)
            grid_sum += std::exp(log_d(a) + log_F(a, b) + log_e(b) - grid_max);
    const double log_numerator = grid_max + std::log(grid_sum);

    double dmax = -std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < bx; ++a) dmax = std::max(dmax, log_d(a) + log_F(a, y_bin));
    double dsum = 0.0;
    for (Eigen::Index a = 0; a < bx; ++a) dsum += std::exp(log_d(a) + log_F(a, y_bin) - dmax);
    const double log_den_feature = dmax + std::log(dsum);

    double emax = -std::numeric_limits<double>::infinity();
    for (Eigen::Index b = 0; b < by; ++b) emax = std::max(emax, log_F(x_bin, b) + log_e(b));
    double esum = 0.0;
    for (Eigen::Index b = 0; b < by; ++b) esum += std::exp(log_F(x_bin, b) + log_e(b) - emax);
    const double log_den_target = emax + std::log(esum);

    const double out = log_f_obs + log_numerator - log_den_feature - log_den_target;
    if (!std::isfinite(out))
        throw std::runtime_error("log_ratio: reduction underflowed, potentials are degenerate");
    return out;
}

double log_ratio(const PotentialTable& table) {
    return log_ratio_parts(table.log_d, table.log_e, table.log_F, table.x_bin, table.y_bin,
                           table.log_f_obs);
}

Eigen::VectorXd covered_info_column(const PrecisionModel& model, const TabularDataset& data,
                                    int feature, const Eigen::VectorXd& local_mi) {
    const FeatureFactorContext ctx = make_feature_context(model, data, feature);
    const int y = static_cast<int>(model.target_node());
    const auto& mids_x = data.bin_midpoints[static_cast<std::size_t>(feature)];
    const auto& mids_y = data.bin_midpoints[static_cast<std::size_t>(y)];
    const Eigen::Index bx = static_cast<Eigen::Index>(mids_x.size());
    const Eigen::Index by = static_cast<Eigen::Index>(mids_y.size());
    const std::int64_t m = data.rows();
    if (local_mi.size() != m)
        throw std::invalid_argument("covered_info_column: local_mi length disagrees");

    // Disconnected feature/target: the ratio is identically zero, every row
    // keeps its full local mutual information.
    if ((ctx.log_F.array() == 0.0).all()) return local_mi;

    Eigen::VectorXd log_d(bx), log_e(by), out(m);
    for (std::int64_t r = 0; r < m; ++r) {
        double coupling_d = 0.0;
        for (int j : ctx.d_neighbors) coupling_d += model.precision(feature, j) * data.midpoint_of(r, j);
        for (Eigen::Index a = 0; a < bx; ++a)
            log_d(a) = std::max(ctx.node_d(a) - mids_x[static_cast<std::size_t>(a)] * coupling_d,
                                kLogPotentialClamp);
        double coupling_e = 0.0;
        for (int j : ctx.e_neighbors) coupling_e += model.precision(y, j) * data.midpoint_of(r, j);
        for (Eigen::Index b = 0; b < by; ++b)
            log_e(b) = std::max(ctx.node_e(b) - mids_y[static_cast<std::size_t>(b)] * coupling_e,
                                kLogPotentialClamp);
        const int x_bin = data.bin_of(r, feature);
        const int y_bin = data.bin_of(r, y);
        out(r) = local_mi(r) -
                 log_ratio_parts(log_d, log_e, ctx.log_F, x_bin, y_bin, ctx.log_F(x_bin, y_bin));
    }
    return out;
}

}  // namespace cid
