#include "cid/importance.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "cid/math_util.hpp"

namespace cid {

namespace {

std::vector<int> random_permutation(std::size_t n, std::mt19937_64& rng) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i-- > 1;) {
        const std::size_t j = static_cast<std::size_t>(rng() % std::uint64_t(i + 1));
        std::swap(perm[i], perm[j]);
    }
    return perm;
}

double mse_loss(const Eigen::VectorXd& truth, const Eigen::VectorXd& prediction) {
    return (truth - prediction).squaredNorm() / double(truth.size());
}

}  // namespace

void ImportanceEstimate::finalize() {
    const Eigen::Index n = per_subsample.rows();
    median.resize(n);
    mean.resize(n);
    std.resize(n);
    for (Eigen::Index f = 0; f < n; ++f) {
        std::vector<double> row(per_subsample.row(f).begin(), per_subsample.row(f).end());
        median(f) = sample_median(row);
        const MeanStd ms = mean_std(row);
        mean(f) = ms.mean;
        std(f) = ms.std;
    }
    ranking.resize(static_cast<std::size_t>(n));
    std::iota(ranking.begin(), ranking.end(), 0);
    std::stable_sort(ranking.begin(), ranking.end(),
                     [&](int a, int b) { return median(a) > median(b); });
}

ImportanceEstimate permutation_importance(const PredictiveModel& model, const TabularDataset& data,
                                          const SubsampleSet& subsamples,
                                          const PermutationOptions& options) {
    if (!model.fitted()) throw std::runtime_error("permutation_importance: model is not fitted");
    if (options.loss != "mse")
        throw std::invalid_argument("permutation_importance: unknown loss '" + options.loss + "'");
    if (options.n_permutations < 1)
        throw std::invalid_argument("permutation_importance: need at least 1 permutation");

    const int n_features = static_cast<int>(data.num_features());
    const int n_subsets = subsamples.count();

    // Baseline predictions for every row, shared by all subsamples. The
    // baseline loss goes through the same gather order and reduction as the
    // permuted losses, so an identity permutation cancels exactly.
    const Eigen::VectorXd base_pred = model.predict(data.values);
    Eigen::VectorXd base_loss(n_subsets);
    for (int s = 0; s < n_subsets; ++s) {
        const auto& subset = subsamples.subsets[static_cast<std::size_t>(s)];
        Eigen::VectorXd truth(static_cast<Eigen::Index>(subset.size()));
        Eigen::VectorXd pred(static_cast<Eigen::Index>(subset.size()));
        for (std::size_t k = 0; k < subset.size(); ++k) {
            truth(static_cast<Eigen::Index>(k)) = data.target(subset[k]);
            pred(static_cast<Eigen::Index>(k)) = base_pred(subset[k]);
        }
        base_loss(s) = mse_loss(truth, pred);
    }

    // One permutation per (subsample, repetition), shared across features:
    // common random numbers keep the estimate invariant to column relabeling.
    std::vector<std::vector<std::vector<int>>> perms(static_cast<std::size_t>(n_subsets));
    for (int s = 0; s < n_subsets; ++s) {
        const std::size_t size = subsamples.subsets[static_cast<std::size_t>(s)].size();
        perms[static_cast<std::size_t>(s)].resize(static_cast<std::size_t>(options.n_permutations));
        for (int rep = 0; rep < options.n_permutations; ++rep) {
            if (options.identity_permutations) {
                auto& p = perms[static_cast<std::size_t>(s)][static_cast<std::size_t>(rep)];
                p.resize(size);
                std::iota(p.begin(), p.end(), 0);
            } else {
                std::mt19937_64 rng(derive_seed(options.seed, std::uint64_t(s), std::uint64_t(rep)));
                perms[static_cast<std::size_t>(s)][static_cast<std::size_t>(rep)] =
                    random_permutation(size, rng);
            }
        }
    }

    ImportanceEstimate out;
    out.method = "permutation";
    out.feature_names = data.feature_names;
    out.per_subsample.resize(n_features, n_subsets);

    parallel_for_index(static_cast<std::size_t>(n_features), options.n_threads, [&](std::size_t fi) {
        const int feature = static_cast<int>(fi);
        for (int s = 0; s < n_subsets; ++s) {
            const auto& subset = subsamples.subsets[static_cast<std::size_t>(s)];
            const Eigen::Index size = static_cast<Eigen::Index>(subset.size());
            Eigen::MatrixXd scratch(size, n_features);
            Eigen::VectorXd truth(size), original(size);
            for (Eigen::Index k = 0; k < size; ++k) {
                scratch.row(k) = data.values.row(subset[static_cast<std::size_t>(k)]);
                truth(k) = data.target(subset[static_cast<std::size_t>(k)]);
                original(k) = data.values(subset[static_cast<std::size_t>(k)], feature);
            }
            double acc = 0.0;
            for (int rep = 0; rep < options.n_permutations; ++rep) {
                const auto& perm = perms[static_cast<std::size_t>(s)][static_cast<std::size_t>(rep)];
                for (Eigen::Index k = 0; k < size; ++k)
                    scratch(k, feature) = original(perm[static_cast<std::size_t>(k)]);
                acc += mse_loss(truth, model.predict(scratch)) - base_loss(s);
            }
            out.per_subsample(feature, s) = acc / double(options.n_permutations);
        }
    });

    out.finalize();
    return out;
}

Eigen::VectorXd univariate_importance(const TabularDataset& data) {
    const Eigen::Index n = data.num_features();
    Eigen::VectorXd out(n);
    std::vector<double> col(static_cast<std::size_t>(data.rows()));
    std::vector<double> target(data.target.begin(), data.target.end());
    for (Eigen::Index f = 0; f < n; ++f) {
        for (std::int64_t r = 0; r < data.rows(); ++r) col[static_cast<std::size_t>(r)] = data.values(r, f);
        bool degenerate = false;
        const double corr = pearson_correlation(col, target, &degenerate);
        if (degenerate)
            std::cerr << "warning: univariate_importance: zero-variance column '"
                      << data.feature_names[static_cast<std::size_t>(f)] << "'\n";
        out(f) = std::abs(corr);
    }
    return out;
}

ImportanceEstimate univariate_importance_subsampled(const TabularDataset& data,
                                                    const SubsampleSet& subsamples) {
    const Eigen::Index n = data.num_features();
    ImportanceEstimate out;
    out.method = "univariate";
    out.feature_names = data.feature_names;
    out.per_subsample.resize(n, subsamples.count());
    for (int s = 0; s < subsamples.count(); ++s) {
        const auto& subset = subsamples.subsets[static_cast<std::size_t>(s)];
        std::vector<double> col(subset.size()), target(subset.size());
        for (std::size_t k = 0; k < subset.size(); ++k) target[k] = data.target(subset[k]);
        for (Eigen::Index f = 0; f < n; ++f) {
            for (std::size_t k = 0; k < subset.size(); ++k) col[k] = data.values(subset[k], f);
            out.per_subsample(f, s) = std::abs(pearson_correlation(col, target));
        }
    }
    out.finalize();
    return out;
}

ImportanceEstimate gini_importance_estimate(const ExtremelyRandomizedTreesRegressor& model,
                                            const std::vector<std::string>& feature_names) {
    ImportanceEstimate out;
    out.method = "gini";
    out.feature_names = feature_names;
    const Eigen::VectorXd imp = gini_importance(model);
    out.per_subsample = imp;
    out.finalize();
    return out;
}

double PhiLearned::evaluate(double ci_plus, double ci_minus, double mi_plus, double mi_minus) const {
    Eigen::MatrixXd x(1, 4);
    x << ci_plus, ci_minus, mi_plus, mi_minus;
    return regression.predict(x)(0);
}

PhiLearned fit_phi_learned(const EntropyProfile& profile, const ImportanceEstimate& permutation) {
    const Eigen::Index n = permutation.per_subsample.rows();
    const Eigen::Index s = permutation.per_subsample.cols();
    if (profile.ci_plus.rows() != n || profile.ci_plus.cols() != s)
        throw std::invalid_argument("fit_phi_learned: profile and importance shapes disagree");
    const Eigen::Index pairs = n * s;
    if (pairs < 8) throw std::invalid_argument("fit_phi_learned: need at least 8 training pairs");

    Eigen::MatrixXd x(pairs, 4);
    Eigen::VectorXd y(pairs);
    Eigen::Index row = 0;
    for (Eigen::Index f = 0; f < n; ++f) {
        for (Eigen::Index k = 0; k < s; ++k, ++row) {
            x(row, 0) = profile.ci_plus(f, k);
            x(row, 1) = profile.ci_minus(f, k);
            x(row, 2) = profile.mi_plus(f, k);
            x(row, 3) = profile.mi_minus(f, k);
            y(row) = permutation.per_subsample(f, k);
        }
    }
    PhiLearned phi;
    phi.regression.fit(x, y);
    return phi;
}

std::vector<double> default_c_grid() {
    const std::vector<double> reciprocal = {1.2, 1.4, 1.6, 1.8, 2.0, 2.2, 2.4};
    std::vector<double> grid;
    grid.reserve(reciprocal.size());
    for (double r : reciprocal) grid.push_back(1.0 / r);
    return grid;
}

double PhiParametric::corrected(double e, double ci_plus, double mi_plus) const {
    if (mi_plus <= 0.0) return e;  // excluded pair, correction undefined
    const double g = ci_plus > 0.0 ? c : 1.0;
    const double factor = g * (1.0 - ci_plus / mi_plus);
    if (factor <= 1e-12) {
        // Redundant covered information at or above the total: the inversion
        // blows up, cap the magnitude instead.
        return (e < 0.0 ? -1.0 : 1.0) * cap_multiplier * std::abs(e);
    }
    return e / factor;
}

PhiParametric fit_phi_parametric(const EntropyProfile& profile,
                                 const ImportanceEstimate& permutation,
                                 const std::vector<double>& c_grid, int folds,
                                 std::uint64_t seed) {
    if (c_grid.empty()) throw std::invalid_argument("fit_phi_parametric: empty c grid");
    if (folds < 2) throw std::invalid_argument("fit_phi_parametric: need at least 2 folds");
    const Eigen::Index n = permutation.per_subsample.rows();
    const Eigen::Index s = permutation.per_subsample.cols();
    if (profile.ci_plus.rows() != n || profile.ci_plus.cols() != s)
        throw std::invalid_argument("fit_phi_parametric: profile and importance shapes disagree");

    struct Pair {
        int feature;
        double e, ci_plus, mi_plus;
    };
    std::vector<Pair> pool;
    int excluded = 0;
    for (Eigen::Index f = 0; f < n; ++f) {
        for (Eigen::Index k = 0; k < s; ++k) {
            if (profile.mi_plus(f, k) > 0.0)
                pool.push_back({static_cast<int>(f), permutation.per_subsample(f, k),
                                profile.ci_plus(f, k), profile.mi_plus(f, k)});
            else
                ++excluded;
        }
    }
    if (excluded > 0)
        std::cerr << "warning: fit_phi_parametric: excluded " << excluded
                  << " pairs with zero redundant mutual information\n";
    if (pool.size() < static_cast<std::size_t>(folds))
        throw std::invalid_argument("fit_phi_parametric: too few usable pairs");

    std::mt19937_64 rng(derive_seed(seed, 0xc5e1ULL));
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = pool.size(); i-- > 1;) {
        const std::size_t j = static_cast<std::size_t>(rng() % std::uint64_t(i + 1));
        std::swap(order[i], order[j]);
    }

    // Held-out residual of the display equation, with the corrected value
    // summarized per feature on the training folds: the winning c makes the
    // inverted importance most consistent across subsamples.
    double best_rss = std::numeric_limits<double>::infinity();
    double best_c = c_grid.front();
    for (double c : c_grid) {
        PhiParametric candidate;
        candidate.c = c;
        double rss = 0.0;
        for (int fold = 0; fold < folds; ++fold) {
            std::vector<double> train_sum(static_cast<std::size_t>(n), 0.0);
            std::vector<int> train_count(static_cast<std::size_t>(n), 0);
            for (std::size_t i = 0; i < order.size(); ++i) {
                if (static_cast<int>(i % static_cast<std::size_t>(folds)) == fold) continue;
                const Pair& p = pool[order[i]];
                train_sum[static_cast<std::size_t>(p.feature)] +=
                    candidate.corrected(p.e, p.ci_plus, p.mi_plus);
                ++train_count[static_cast<std::size_t>(p.feature)];
            }
            for (std::size_t i = 0; i < order.size(); ++i) {
                if (static_cast<int>(i % static_cast<std::size_t>(folds)) != fold) continue;
                const Pair& p = pool[order[i]];
                if (train_count[static_cast<std::size_t>(p.feature)] == 0) continue;
                const double corrected_mean = train_sum[static_cast<std::size_t>(p.feature)] /
                                              double(train_count[static_cast<std::size_t>(p.feature)]);
                const double g = p.ci_plus > 0.0 ? c : 1.0;
                const double predicted_e = corrected_mean * g * (1.0 - p.ci_plus / p.mi_plus);
                rss += (p.e - predicted_e) * (p.e - predicted_e);
            }
        }
        if (rss < best_rss) {
            best_rss = rss;
            best_c = c;
        }
    }

    PhiParametric phi;
    phi.c = best_c;
    return phi;
}

CidResult cid_importance(const TabularDataset& data, const PrecisionModel& mrf,
                         const SubsampleSet& subsamples, const ImportanceEstimate& permutation,
                         const CidOptions& options) {
    CidResult result;
    result.profile =
        compute_entropy_profile(mrf, data, subsamples, options.n_threads, options.mi_source);

    const Eigen::Index n = permutation.per_subsample.rows();
    const Eigen::Index s = permutation.per_subsample.cols();
    result.corrected.method = "cid";
    result.corrected.feature_names = permutation.feature_names;
    result.corrected.per_subsample.resize(n, s);

    if (options.phi_mode == PhiMode::Learned) {
        const PhiLearned phi = fit_phi_learned(result.profile, permutation);
        for (Eigen::Index f = 0; f < n; ++f)
            for (Eigen::Index k = 0; k < s; ++k)
                result.corrected.per_subsample(f, k) =
                    phi.evaluate(0.0, result.profile.ci_minus(f, k), result.profile.mi_plus(f, k),
                                 result.profile.mi_minus(f, k));
    } else {
        const std::vector<double> grid = options.c_grid.empty() ? default_c_grid() : options.c_grid;
        const PhiParametric phi = fit_phi_parametric(result.profile, permutation, grid);
        result.phi_c = phi.c;
        for (Eigen::Index f = 0; f < n; ++f)
            for (Eigen::Index k = 0; k < s; ++k)
                result.corrected.per_subsample(f, k) = phi.corrected(
                    permutation.per_subsample(f, k), result.profile.ci_plus(f, k),
                    result.profile.mi_plus(f, k));
    }

    result.corrected.finalize();
    return result;
}

SubsetCorrelationResult subset_correlation_score(const TabularDataset& data,
                                                 const ModelFactory& factory,
                                                 const std::vector<ImportanceEstimate>& rankings,
                                                 int n_subsets, int subset_size, std::uint64_t seed,
                                                 double train_fraction) {
    if (rankings.size() < 2)
        throw std::invalid_argument("subset_correlation_score: need at least 2 methods");
    const int n_features = static_cast<int>(data.num_features());
    if (subset_size < 0) subset_size = std::max(1, n_features / 2);
    if (subset_size >= n_features)
        throw std::invalid_argument("subset_correlation_score: subset_size must be < N");
    const std::int64_t m = data.rows();
    const std::int64_t train_rows = static_cast<std::int64_t>(train_fraction * double(m));
    if (train_rows < 2 || train_rows >= m)
        throw std::invalid_argument("subset_correlation_score: bad train fraction");

    std::vector<double> performance;
    std::vector<std::vector<int>> chosen;
    std::mt19937_64 rng(derive_seed(seed, 0x5c02eULL));

    for (int t = 0; t < n_subsets; ++t) {
        // Feature subset without replacement.
        std::vector<int> features(static_cast<std::size_t>(n_features));
        std::iota(features.begin(), features.end(), 0);
        for (int i = 0; i < subset_size; ++i) {
            const auto j = i + static_cast<int>(rng() % std::uint64_t(n_features - i));
            std::swap(features[static_cast<std::size_t>(i)], features[static_cast<std::size_t>(j)]);
        }
        features.resize(static_cast<std::size_t>(subset_size));

        std::vector<int> rows(static_cast<std::size_t>(m));
        std::iota(rows.begin(), rows.end(), 0);
        for (std::int64_t i = m - 1; i > 0; --i) {
            const auto j = static_cast<std::int64_t>(rng() % std::uint64_t(i + 1));
            std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
        }

        Eigen::MatrixXd x_train(train_rows, subset_size), x_test(m - train_rows, subset_size);
        Eigen::VectorXd y_train(train_rows), y_test(m - train_rows);
        for (std::int64_t r = 0; r < m; ++r) {
            const int src = rows[static_cast<std::size_t>(r)];
            auto& x = r < train_rows ? x_train : x_test;
            auto& y = r < train_rows ? y_train : y_test;
            const std::int64_t dst = r < train_rows ? r : r - train_rows;
            for (int f = 0; f < subset_size; ++f) x(dst, f) = data.values(src, features[static_cast<std::size_t>(f)]);
            y(dst) = data.target(src);
        }

        try {
            auto model = factory(derive_seed(seed, 0xfacULL, std::uint64_t(t)));
            model->fit(x_train, y_train);
            const double mse = (y_test - model->predict(x_test)).squaredNorm() / double(y_test.size());
            performance.push_back(-mse);
            chosen.push_back(features);
        } catch (const std::exception& e) {
            std::cerr << "warning: subset_correlation_score: subset " << t << " skipped ("
                      << e.what() << ")\n";
        }
    }
    if (performance.size() < 2)
        throw std::runtime_error("subset_correlation_score: too few usable subsets");

    SubsetCorrelationResult out;
    out.subsets_used = static_cast<int>(performance.size());
    for (const auto& ranking : rankings) {
        std::vector<double> summed(performance.size());
        for (std::size_t t = 0; t < chosen.size(); ++t) {
            double total = 0.0;
            for (int f : chosen[t]) total += ranking.median(f);
            summed[t] = total;
        }
        bool degenerate = false;
        const double corr = pearson_correlation(performance, summed, &degenerate);
        if (degenerate)
            std::cerr << "warning: subset_correlation_score: method '" << ranking.method
                      << "' has constant summed importances, reporting 0\n";
        out.methods.push_back(ranking.method);
        out.scores.push_back(corr);
        out.degenerate.push_back(degenerate);
    }
    return out;
}

}  // namespace cid
