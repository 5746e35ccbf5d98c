#include "cid/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>

#include "cid/entropy.hpp"
#include "cid/math_util.hpp"
#include "cid/models.hpp"

namespace cid {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

[[noreturn]] void fail_stage(const std::string& stage, const std::exception& e) {
    throw std::runtime_error("stage '" + stage + "': " + e.what());
}

template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) {
    try {
        return fn();
    } catch (const std::invalid_argument&) {
        throw;  // configuration problems keep their type
    } catch (const std::exception& e) {
        fail_stage(stage, e);
    }
}

}  // namespace

void RunConfig::validate() const {
    if (use_toy == !input_path.empty())
        throw std::invalid_argument("config: exactly one of --input and --toy is required");
    if (use_toy && toy_samples < 1) throw std::invalid_argument("config: toy samples must be >= 1");
    if (bins < 2) throw std::invalid_argument("config: bins must be >= 2");
    if (!(k_sigma > 0.0)) throw std::invalid_argument("config: k-sigma must be positive");
    if (n_subsamples < 2) throw std::invalid_argument("config: subsamples must be >= 2");
    if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0))
        throw std::invalid_argument("config: subsample fraction must lie in (0, 1]");
    if (!(train_fraction > 0.0 && train_fraction <= 1.0))
        throw std::invalid_argument("config: train fraction must lie in (0, 1]");
    if (n_permutations < 1) throw std::invalid_argument("config: permutations must be >= 1");
    if (cv_folds < 2) throw std::invalid_argument("config: folds must be >= 2");
    if (phi_mode != "learned" && phi_mode != "parametric")
        throw std::invalid_argument("config: phi mode must be 'learned' or 'parametric'");
    if (mi_source != "model" && mi_source != "empirical")
        throw std::invalid_argument("config: mi source must be 'model' or 'empirical'");
    for (double v : inv_c_grid)
        if (!(v > 0.0)) throw std::invalid_argument("config: 1/c grid values must be positive");
    if (eval_subsets < 2) throw std::invalid_argument("config: eval subsets must be >= 2");
}

RankArtifacts run_rank_in_memory(const RunConfig& config) {
    config.validate();
    RankArtifacts art;

    TabularDataset raw = run_stage("load", [&] {
        return config.use_toy ? generate_toy(config.toy_samples, config.seed)
                              : load_csv(config.input_path, config.target_column, config.delimiter);
    });

    art.data = run_stage("preprocess", [&] {
        TabularDataset staged = std::move(raw);
        if (config.gaussianize && config.gaussianize_before_trim)
            staged = quantile_gaussianize(staged);
        TrimResult trimmed = trim_outliers(staged, config.k_sigma);
        art.rows_trimmed = trimmed.rows_removed;
        staged = std::move(trimmed.data);
        if (config.gaussianize && !config.gaussianize_before_trim)
            staged = quantile_gaussianize(staged);
        return discretize(staged, config.bins);
    });

    const std::int64_t m = art.data.rows();

    // Fit once on a training split; the evaluation subsamples are drawn from
    // the held-out pool (from everything when train_fraction is 1).
    std::vector<int> train_rows, eval_pool;
    run_stage("split", [&] {
        std::vector<int> order(static_cast<std::size_t>(m));
        std::iota(order.begin(), order.end(), 0);
        if (config.train_fraction < 1.0) {
            std::mt19937_64 rng(derive_seed(config.seed, 0x59117ULL));
            for (std::int64_t i = m - 1; i > 0; --i) {
                const auto j = static_cast<std::int64_t>(rng() % std::uint64_t(i + 1));
                std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
            }
            const auto n_train = static_cast<std::int64_t>(config.train_fraction * double(m));
            if (n_train < 2 || m - n_train < 3)
                throw std::invalid_argument("config: train fraction leaves too few rows");
            train_rows.assign(order.begin(), order.begin() + n_train);
            eval_pool.assign(order.begin() + n_train, order.end());
        } else {
            train_rows = order;
            eval_pool = order;
        }
        std::sort(train_rows.begin(), train_rows.end());
        std::sort(eval_pool.begin(), eval_pool.end());
        return 0;
    });

    art.subsamples = run_stage("subsample", [&] {
        SubsampleSet pool_relative =
            make_subsamples(static_cast<std::int64_t>(eval_pool.size()), config.n_subsamples,
                            config.subsample_fraction, derive_seed(config.seed, 0x5b5ULL));
        for (auto& subset : pool_relative.subsets)
            for (auto& idx : subset) idx = eval_pool[static_cast<std::size_t>(idx)];
        return pool_relative;
    });

    ExtremelyRandomizedTreesRegressor forest({.seed = derive_seed(config.seed, 0xf03e57ULL)});
    auto t0 = Clock::now();
    run_stage("fit-model", [&] {
        Eigen::MatrixXd x(train_rows.size(), art.data.num_features());
        Eigen::VectorXd y(train_rows.size());
        for (std::size_t i = 0; i < train_rows.size(); ++i) {
            x.row(static_cast<Eigen::Index>(i)) = art.data.values.row(train_rows[i]);
            y(static_cast<Eigen::Index>(i)) = art.data.target(train_rows[i]);
        }
        forest.fit(x, y);
        return 0;
    });
    const double fit_seconds = seconds_since(t0);

    t0 = Clock::now();
    art.gini = run_stage("gini", [&] {
        return gini_importance_estimate(forest, art.data.feature_names);
    });
    art.timings.push_back({"gini", (seconds_since(t0) + fit_seconds)});

    t0 = Clock::now();
    art.permutation = run_stage("permutation-importance", [&] {
        PermutationOptions opt;
        opt.n_permutations = config.n_permutations;
        opt.seed = derive_seed(config.seed, 0x9e2ULL);
        opt.n_threads = config.n_threads;
        return permutation_importance(forest, art.data, art.subsamples, opt);
    });
    const double permutation_seconds = seconds_since(t0);
    art.timings.push_back({"permutation", permutation_seconds / double(config.n_subsamples)});

    t0 = Clock::now();
    art.mrf = run_stage("graph-inference", [&] {
        if (!config.prior_graph_path.empty()) {
            const EdgeList support = load_edge_list(config.prior_graph_path, art.data.num_features());
            art.selected_rho = 0.0;
            return fit_precision_with_support(art.data, support);
        }
        const Eigen::MatrixXd s = empirical_covariance(art.data);
        double rho = config.rho;
        if (rho < 0.0) {
            const std::vector<double> grid =
                config.rho_grid.empty() ? default_rho_grid(s) : config.rho_grid;
            rho = select_rho_cv(art.data, grid, config.cv_folds, derive_seed(config.seed, 0xc4ULL));
        }
        art.selected_rho = rho;
        PrecisionModel model = graphical_lasso(s, rho);
        Eigen::VectorXd mean(art.data.num_columns());
        mean.head(art.data.num_features()) = art.data.values.colwise().mean().transpose();
        mean(art.data.num_features()) = art.data.target.mean();
        model.mean = mean;
        model.refresh_derived();
        return model;
    });
    const double graph_seconds = seconds_since(t0);

    t0 = Clock::now();
    CidResult cid = run_stage("covered-information", [&] {
        CidOptions opt;
        opt.phi_mode = config.phi_mode == "parametric" ? PhiMode::Parametric : PhiMode::Learned;
        for (double inv : config.inv_c_grid) opt.c_grid.push_back(1.0 / inv);
        opt.mi_source = config.mi_source == "empirical" ? MiSource::Empirical : MiSource::Model;
        opt.n_threads = config.n_threads;
        return cid_importance(art.data, art.mrf, art.subsamples, art.permutation, opt);
    });
    const double cid_seconds = seconds_since(t0);
    art.corrected = std::move(cid.corrected);
    art.profile = std::move(cid.profile);
    art.timings.push_back(
        {"cid", (permutation_seconds + graph_seconds + cid_seconds) / double(config.n_subsamples)});

    t0 = Clock::now();
    art.univariate = run_stage("univariate", [&] {
        return univariate_importance_subsampled(art.data, art.subsamples);
    });
    art.timings.push_back({"univariate", seconds_since(t0) / double(config.n_subsamples)});

    return art;
}

RankArtifacts run_rank(const RunConfig& config) {
    RankArtifacts art = run_rank_in_memory(config);
    run_stage("report", [&] {
        const std::filesystem::path dir(config.out_dir);
        std::filesystem::create_directories(dir);
        const std::vector<ImportanceEstimate> estimates = {art.gini, art.permutation, art.corrected,
                                                           art.univariate};
        write_importances_csv(estimates, (dir / "importances.csv").string());
        write_summary_json(estimates, (dir / "summary.json").string());
        write_entropy_profile_csv(art.profile, art.data.feature_names,
                                  (dir / "entropy_profile.csv").string());
        write_boxplot_svg(estimates, (dir / "figure.svg").string());
        std::ofstream prec((dir / "precision.json").string());
        prec << precision_to_json(art.mrf) << '\n';
        return 0;
    });
    return art;
}

EvaluateArtifacts run_evaluate(const RunConfig& config, const RankArtifacts* existing) {
    RankArtifacts local;
    const RankArtifacts* art = existing;
    if (art == nullptr) {
        local = run_rank(config);
        art = &local;
    }

    EvaluateArtifacts out;
    out.timings = art->timings;
    run_stage("subset-correlation", [&] {
        const std::vector<ImportanceEstimate> rankings = {art->gini, art->permutation,
                                                          art->corrected, art->univariate};
        ModelFactory factory = [](std::uint64_t seed) -> std::unique_ptr<PredictiveModel> {
            return std::make_unique<ExtremelyRandomizedTreesRegressor>(ErtParams{.seed = seed});
        };
        out.scores = subset_correlation_score(art->data, factory, rankings, config.eval_subsets,
                                              config.eval_subset_size,
                                              derive_seed(config.seed, 0xe7a1ULL));
        const std::filesystem::path dir(config.out_dir);
        std::filesystem::create_directories(dir);
        write_scores_csv(out.scores, out.timings, (dir / "scores.csv").string());
        return 0;
    });
    return out;
}

void run_generate_toy(std::int64_t n_samples, std::uint64_t seed, const std::string& out_path) {
    const TabularDataset data = generate_toy(n_samples, seed);
    save_csv(data, out_path);
}

OracleCheckResult run_oracle_check(int max_nodes, int max_states, int n_cases, std::uint64_t seed,
                                   double tolerance) {
    if (max_nodes < 3 || max_nodes > 5)
        throw std::invalid_argument("oracle check: max nodes must lie in 3..5");
    if (max_states < 2 || max_states > 5)
        throw std::invalid_argument("oracle check: max states must lie in 2..5");
    if (n_cases < 1) throw std::invalid_argument("oracle check: need at least 1 case");

    OracleCheckResult result;
    result.tolerance = tolerance;
    std::mt19937_64 rng(derive_seed(seed, 0x04ac1eULL));
    for (int i = 0; i < n_cases; ++i) {
        const int nodes = 3 + static_cast<int>(rng() % std::uint64_t(max_nodes - 2));
        const DiscreteMrf mrf = random_discrete_mrf(nodes, max_states, rng);
        const int target = static_cast<int>(rng() % std::uint64_t(nodes));
        int feature = static_cast<int>(rng() % std::uint64_t(nodes));
        if (feature == target) feature = (feature + 1) % nodes;

        JointTable joint = exact_joint(mrf);
        joint.target = target;
        const double closed = closed_form_covered_info(mrf, feature, target);
        const double oracle = oracle_covered_info(joint, feature);
        result.max_abs_diff = std::max(result.max_abs_diff, std::abs(closed - oracle));
        ++result.cases_run;
    }
    result.pass = result.max_abs_diff < tolerance;
    return result;
}

}  // namespace cid
