#include "cid/precision.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cid/math_util.hpp"

namespace cid {

namespace {

double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

std::vector<double>& trace_storage() {
    static std::vector<double> trace;
    return trace;
}

// Recovers the precision matrix from the working covariance W and the
// per-column lasso coefficients.
Eigen::MatrixXd recover_precision(const Eigen::MatrixXd& w, const Eigen::MatrixXd& betas) {
    const Eigen::Index p = w.rows();
    Eigen::MatrixXd prec(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        double dot = 0.0;
        for (Eigen::Index k = 0, r = 0; k < p; ++k) {
            if (k == j) continue;
            dot += w(k, j) * betas(r++, j);
        }
        double denom = w(j, j) - dot;
        if (denom <= 0.0) denom = 1e-12;  // degenerate column; keep the iterate usable
        prec(j, j) = 1.0 / denom;
        for (Eigen::Index k = 0, r = 0; k < p; ++k) {
            if (k == j) continue;
            prec(k, j) = -betas(r++, j) / denom;
        }
    }
    return 0.5 * (prec + prec.transpose());
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adjacency_of(const Eigen::MatrixXd& prec) {
    const Eigen::Index p = prec.rows();
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adj(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            adj(i, j) = i != j && std::abs(prec(i, j)) > PrecisionModel::zero_tolerance;
    return adj;
}

Eigen::MatrixXd covariance_of_rows(const Eigen::MatrixXd& stacked, Eigen::VectorXd& mean_out) {
    const Eigen::Index m = stacked.rows();
    mean_out = stacked.colwise().mean();
    Eigen::MatrixXd centered = stacked.rowwise() - mean_out.transpose();
    return (centered.transpose() * centered) / double(m);
}

Eigen::MatrixXd stack_columns(const TabularDataset& data) {
    Eigen::MatrixXd stacked(data.rows(), data.num_columns());
    stacked.leftCols(data.num_features()) = data.values;
    stacked.col(data.num_features()) = data.target;
    return stacked;
}

}  // namespace

void PrecisionModel::refresh_derived() {
    eta = precision * mean;
    adjacency = adjacency_of(precision);
}

std::vector<int> neighbors(const PrecisionModel& model, int node) {
    if (node < 0 || node >= model.num_nodes())
        throw std::invalid_argument("neighbors: node out of range");
    std::vector<int> out;
    for (int j = 0; j < model.num_nodes(); ++j)
        if (model.adjacency(node, j)) out.push_back(j);
    return out;
}

Eigen::MatrixXd empirical_covariance(const TabularDataset& data) {
    if (data.rows() < 2) throw std::invalid_argument("empirical_covariance: need at least 2 rows");
    Eigen::VectorXd mean;
    return covariance_of_rows(stack_columns(data), mean);
}

double glasso_objective(const Eigen::MatrixXd& covariance, const Eigen::MatrixXd& precision,
                        double rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(precision);
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < precision.rows(); ++i) {
        const double ev = eig.eigenvalues()(i);
        if (ev <= 0.0) return std::numeric_limits<double>::infinity();
        logdet += std::log(ev);
    }
    double l1 = 0.0;
    for (Eigen::Index i = 0; i < precision.rows(); ++i)
        for (Eigen::Index j = 0; j < precision.cols(); ++j)
            if (i != j) l1 += std::abs(precision(i, j));
    return -logdet + (covariance * precision).trace() + rho * l1;
}

const std::vector<double>& glasso_last_trace() { return trace_storage(); }

PrecisionModel graphical_lasso(const Eigen::MatrixXd& covariance, double rho,
                               const GlassoOptions& options) {
    const Eigen::Index p = covariance.rows();
    if (covariance.cols() != p) throw std::invalid_argument("graphical_lasso: matrix not square");
    if (!covariance.isApprox(covariance.transpose(), 1e-10))
        throw std::invalid_argument("graphical_lasso: matrix not symmetric");
    if ((covariance.diagonal().array() <= 0.0).any())
        throw std::invalid_argument("graphical_lasso: covariance diagonal must be positive");
    if (rho < 0.0) throw std::invalid_argument("graphical_lasso: rho must be nonnegative");
    if (options.trace_objective) trace_storage().clear();

    PrecisionModel model;
    model.rho = rho;
    model.mean = Eigen::VectorXd::Zero(p);

    if (p == 1) {
        model.precision = Eigen::MatrixXd::Constant(1, 1, 1.0 / covariance(0, 0));
        model.refresh_derived();
        return model;
    }

    // Working covariance estimate; the unpenalized diagonal stays at S_ii.
    Eigen::MatrixXd w = covariance;
    Eigen::MatrixXd betas = Eigen::MatrixXd::Zero(p - 1, p);

    double scale = 0.0;
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            if (i != j) scale += std::abs(covariance(i, j));
    scale /= double(p * (p - 1));
    if (scale <= 0.0) scale = covariance.diagonal().mean();
    const double tol_abs = options.tol * scale;
    const double inner_tol = 0.05 * tol_abs;

    std::vector<Eigen::Index> rest(static_cast<std::size_t>(p) - 1);
    double max_delta = 0.0;
    bool converged = false;

    for (int sweep = 0; sweep < options.max_iter && !converged; ++sweep) {
        max_delta = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            for (Eigen::Index k = 0, r = 0; k < p; ++k)
                if (k != j) rest[static_cast<std::size_t>(r++)] = k;

            auto beta = betas.col(j);
            // Coordinate descent on 0.5 b'W11 b - b's12 + rho|b|_1.
            for (int pass = 0; pass < options.max_inner; ++pass) {
                double inner_delta = 0.0;
                for (Eigen::Index k = 0; k < p - 1; ++k) {
                    const Eigen::Index gk = rest[static_cast<std::size_t>(k)];
                    double resid = covariance(gk, j);
                    for (Eigen::Index l = 0; l < p - 1; ++l) {
                        if (l == k) continue;
                        resid -= w(gk, rest[static_cast<std::size_t>(l)]) * beta(l);
                    }
                    const double updated = soft_threshold(resid, rho) / w(gk, gk);
                    inner_delta = std::max(inner_delta, std::abs(updated - beta(k)));
                    beta(k) = updated;
                }
                if (inner_delta < inner_tol) break;
            }

            for (Eigen::Index k = 0; k < p - 1; ++k) {
                const Eigen::Index gk = rest[static_cast<std::size_t>(k)];
                double w12 = 0.0;
                for (Eigen::Index l = 0; l < p - 1; ++l)
                    w12 += w(gk, rest[static_cast<std::size_t>(l)]) * beta(l);
                max_delta = std::max(max_delta, std::abs(w12 - w(gk, j)));
                w(gk, j) = w12;
                w(j, gk) = w12;
            }
        }
        if (options.trace_objective)
            trace_storage().push_back(glasso_objective(covariance, recover_precision(w, betas), rho));
        converged = max_delta < tol_abs;
    }

    if (!converged) {
        std::ostringstream msg;
        msg << "graphical_lasso: no convergence after " << options.max_iter
            << " sweeps (last change " << max_delta << ", tolerance " << tol_abs << ")";
        throw std::runtime_error(msg.str());
    }

    model.precision = recover_precision(w, betas);
    model.refresh_derived();
    return model;
}

std::vector<double> default_rho_grid(const Eigen::MatrixXd& covariance, int size, double lo_frac,
                                     double hi_frac) {
    double base = 0.0;
    for (Eigen::Index i = 0; i < covariance.rows(); ++i)
        for (Eigen::Index j = 0; j < covariance.cols(); ++j)
            if (i != j) base = std::max(base, std::abs(covariance(i, j)));
    if (base <= 0.0) base = 1e-3;
    std::vector<double> grid(static_cast<std::size_t>(size));
    const double llo = std::log(lo_frac * base), lhi = std::log(hi_frac * base);
    for (int i = 0; i < size; ++i)
        grid[static_cast<std::size_t>(i)] =
            std::exp(llo + (lhi - llo) * (size == 1 ? 0.0 : double(i) / double(size - 1)));
    return grid;
}

double select_rho_cv(const TabularDataset& data, const std::vector<double>& grid, int folds,
                     std::uint64_t seed, std::vector<double>* scores_out) {
    if (grid.empty()) throw std::invalid_argument("select_rho_cv: empty grid");
    if (folds < 2) throw std::invalid_argument("select_rho_cv: need at least 2 folds");
    const Eigen::MatrixXd stacked = stack_columns(data);
    const Eigen::Index m = stacked.rows();
    const Eigen::Index d = stacked.cols();
    if (m < folds) throw std::invalid_argument("select_rho_cv: fewer rows than folds");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(derive_seed(seed, 0xcfULL));
    for (Eigen::Index i = m - 1; i > 0; --i) {
        const auto j = static_cast<Eigen::Index>(rng() % std::uint64_t(i + 1));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    std::vector<double> sorted_grid = grid;
    std::sort(sorted_grid.begin(), sorted_grid.end());
    const double log2pi = std::log(2.0 * M_PI);

    std::vector<double> mean_scores(sorted_grid.size(),
                                    -std::numeric_limits<double>::infinity());
    std::vector<double> se_scores(sorted_grid.size(), 0.0);

    for (std::size_t g = 0; g < sorted_grid.size(); ++g) {
        const double rho = sorted_grid[g];
        std::vector<double> fold_scores;
        for (int f = 0; f < folds; ++f) {
            std::vector<Eigen::Index> train, test;
            for (Eigen::Index i = 0; i < m; ++i)
                (static_cast<int>(i % folds) == f ? test : train).push_back(order[static_cast<std::size_t>(i)]);
            if (train.size() < 2 || test.empty()) continue;

            Eigen::MatrixXd train_rows(static_cast<Eigen::Index>(train.size()), d);
            for (std::size_t i = 0; i < train.size(); ++i) train_rows.row(static_cast<Eigen::Index>(i)) = stacked.row(train[i]);
            Eigen::VectorXd mu;
            const Eigen::MatrixXd s_train = covariance_of_rows(train_rows, mu);

            double fold_ll = 0.0;
            try {
                const PrecisionModel fit = graphical_lasso(s_train, rho);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fit.precision);
                double logdet = 0.0;
                bool ok = true;
                for (Eigen::Index i = 0; i < d; ++i) {
                    if (eig.eigenvalues()(i) <= 0.0) {
                        ok = false;
                        break;
                    }
                    logdet += std::log(eig.eigenvalues()(i));
                }
                if (!ok) throw std::runtime_error("non-positive-definite fold precision");
                for (Eigen::Index t : test) {
                    const Eigen::VectorXd z = stacked.row(t).transpose() - mu;
                    fold_ll += 0.5 * logdet - 0.5 * z.dot(fit.precision * z) - 0.5 * double(d) * log2pi;
                }
                fold_ll /= double(test.size());
                if (!std::isfinite(fold_ll)) throw std::runtime_error("non-finite held-out likelihood");
            } catch (const std::exception& e) {
                std::cerr << "warning: select_rho_cv: skipping fold " << f << " at rho " << rho
                          << " (" << e.what() << ")\n";
                continue;
            }
            fold_scores.push_back(fold_ll);
        }
        if (fold_scores.empty()) continue;
        const MeanStd ms = mean_std(fold_scores);
        mean_scores[g] = ms.mean;
        se_scores[g] = ms.std / std::sqrt(double(fold_scores.size()));
    }
    if (scores_out) *scores_out = mean_scores;

    std::size_t best = 0;
    for (std::size_t g = 1; g < sorted_grid.size(); ++g)
        if (mean_scores[g] > mean_scores[best]) best = g;
    if (!std::isfinite(mean_scores[best]))
        throw std::runtime_error("select_rho_cv: every fold failed on every grid value");

    // Scores within one standard error of the best count as ties, resolved
    // toward the larger (sparser) penalty.
    std::size_t chosen = best;
    for (std::size_t g = sorted_grid.size(); g-- > 0;) {
        if (mean_scores[g] >= mean_scores[best] - se_scores[best]) {
            chosen = g;
            break;
        }
    }
    return sorted_grid[chosen];
}

EdgeList load_edge_list(const std::string& path, std::int64_t n_features) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_edge_list: cannot open '" + path + "'");
    EdgeList out;
    std::string line;
    int line_num = 0;
    auto parse_node = [&](const std::string& tok) -> int {
        if (tok == "y" || tok == "Y") return static_cast<int>(n_features);
        try {
            const int idx = std::stoi(tok);
            if (idx < 1 || idx > n_features)
                throw std::out_of_range("feature index " + tok + " outside 1.." +
                                        std::to_string(n_features));
            return idx - 1;
        } catch (const std::exception&) {
            throw std::runtime_error("load_edge_list: bad node token '" + tok + "' at line " +
                                     std::to_string(line_num));
        }
    };
    while (std::getline(in, line)) {
        ++line_num;
        std::istringstream ss(line);
        std::string a, b;
        if (!(ss >> a)) continue;
        if (a.rfind('#', 0) == 0) continue;
        if (!(ss >> b))
            throw std::runtime_error("load_edge_list: line " + std::to_string(line_num) +
                                     " needs two node tokens");
        const int na = parse_node(a), nb = parse_node(b);
        if (na == nb)
            throw std::runtime_error("load_edge_list: self-loop at line " + std::to_string(line_num));
        out.edges.emplace_back(std::min(na, nb), std::max(na, nb));
    }
    std::sort(out.edges.begin(), out.edges.end());
    out.edges.erase(std::unique(out.edges.begin(), out.edges.end()), out.edges.end());
    return out;
}

PrecisionModel fit_precision_with_support(const TabularDataset& data, const EdgeList& support,
                                          double tol, int max_iter) {
    const Eigen::MatrixXd stacked = stack_columns(data);
    Eigen::VectorXd mean;
    const Eigen::MatrixXd s = covariance_of_rows(stacked, mean);
    const Eigen::Index p = s.rows();

    for (const auto& [a, b] : support.edges)
        if (a < 0 || b >= p) throw std::invalid_argument("fit_precision_with_support: edge out of range");

    Eigen::MatrixXd prec = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) prec(i, i) = 1.0 / s(i, i);

    // Iterative proportional scaling over singleton and edge cliques: at the
    // optimum the model covariance matches S on every clique block and the
    // precision is zero off the support.
    double gap = 0.0;
    for (int sweep = 0; sweep < max_iter; ++sweep) {
        for (Eigen::Index i = 0; i < p; ++i) {
            const Eigen::MatrixXd w = prec.llt().solve(Eigen::MatrixXd::Identity(p, p));
            prec(i, i) += 1.0 / s(i, i) - 1.0 / w(i, i);
        }
        for (const auto& [a, b] : support.edges) {
            const Eigen::MatrixXd w = prec.llt().solve(Eigen::MatrixXd::Identity(p, p));
            Eigen::Matrix2d s_block, w_block;
            s_block << s(a, a), s(a, b), s(a, b), s(b, b);
            w_block << w(a, a), w(a, b), w(a, b), w(b, b);
            const Eigen::Matrix2d delta = s_block.inverse() - w_block.inverse();
            prec(a, a) += delta(0, 0);
            prec(b, b) += delta(1, 1);
            prec(a, b) += delta(0, 1);
            prec(b, a) += delta(1, 0);
        }

        const Eigen::MatrixXd w = prec.llt().solve(Eigen::MatrixXd::Identity(p, p));
        gap = 0.0;
        for (Eigen::Index i = 0; i < p; ++i) gap = std::max(gap, std::abs(w(i, i) - s(i, i)));
        for (const auto& [a, b] : support.edges) gap = std::max(gap, std::abs(w(a, b) - s(a, b)));
        if (gap < tol) {
            PrecisionModel model;
            model.precision = 0.5 * (prec + prec.transpose());
            model.mean = mean;
            model.rho = 0.0;
            model.refresh_derived();
            return model;
        }
    }
    std::ostringstream msg;
    msg << "fit_precision_with_support: no convergence after " << max_iter << " sweeps (gap " << gap
        << ")";
    throw std::runtime_error(msg.str());
}

std::string precision_to_json(const PrecisionModel& model) {
    nlohmann::json doc;
    const Eigen::Index p = model.num_nodes();
    for (Eigen::Index i = 0; i < p; ++i) {
        std::vector<double> row(static_cast<std::size_t>(p));
        for (Eigen::Index j = 0; j < p; ++j) row[static_cast<std::size_t>(j)] = model.precision(i, j);
        doc["precision"].push_back(row);
    }
    doc["mean"] = std::vector<double>(model.mean.data(), model.mean.data() + model.mean.size());
    doc["rho"] = model.rho;
    doc["adjacency"] = nlohmann::json::array();
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i + 1; j < p; ++j)
            if (model.adjacency(i, j)) doc["adjacency"].push_back({i, j});
    return doc.dump(2);
}

PrecisionModel precision_from_json(const std::string& text) {
    const nlohmann::json doc = nlohmann::json::parse(text);
    PrecisionModel model;
    const auto& prec = doc.at("precision");
    const Eigen::Index p = static_cast<Eigen::Index>(prec.size());
    model.precision.resize(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            model.precision(i, j) = prec[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
    const auto& mean = doc.at("mean");
    model.mean.resize(static_cast<Eigen::Index>(mean.size()));
    for (Eigen::Index i = 0; i < model.mean.size(); ++i)
        model.mean(i) = mean[static_cast<std::size_t>(i)].get<double>();
    model.rho = doc.at("rho").get<double>();
    model.refresh_derived();
    return model;
}

}  // namespace cid
