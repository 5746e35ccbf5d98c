#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "cid/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPipeline = 1;
constexpr int kExitConfig = 2;

void add_common_flags(CLI::App* cmd, cid::RunConfig& config, std::string& delimiter) {
    cmd->set_config("--config")->description("flat key=value config file; flags win");
    cmd->add_option("--input", config.input_path, "input CSV path (header row required)");
    cmd->add_flag("--toy", config.use_toy, "use the built-in synthetic benchmark instead of --input");
    cmd->add_option("--samples", config.toy_samples, "synthetic sample count")->capture_default_str();
    cmd->add_option("--target", config.target_column, "target column name")->capture_default_str();
    cmd->add_option("--delimiter", delimiter, "CSV delimiter")->capture_default_str();
    cmd->add_option("--bins", config.bins, "discretization bins per column")->capture_default_str();
    cmd->add_option("--k-sigma", config.k_sigma, "outlier trim threshold in standard deviations")
        ->capture_default_str();
    cmd->add_flag("!--no-gaussianize", config.gaussianize, "skip the quantile-gaussian transform");
    cmd->add_flag("--gaussianize-first", config.gaussianize_before_trim,
                  "gaussianize before trimming outliers");
    cmd->add_option("--subsamples", config.n_subsamples, "number of evaluation subsamples")
        ->capture_default_str();
    cmd->add_option("--subsample-fraction", config.subsample_fraction,
                    "fraction of the evaluation pool per subsample")
        ->capture_default_str();
    cmd->add_option("--train-fraction", config.train_fraction,
                    "fraction of rows used to fit the model; 1 fits on all rows")
        ->capture_default_str();
    cmd->add_option("--permutations", config.n_permutations, "permutation draws per subsample")
        ->capture_default_str();
    cmd->add_option("--rho", config.rho, "fixed l1 penalty; negative selects by cross-validation")
        ->capture_default_str();
    cmd->add_option("--rho-grid", config.rho_grid, "explicit l1 penalty grid");
    cmd->add_option("--folds", config.cv_folds, "cross-validation folds")->capture_default_str();
    cmd->add_option("--prior-graph", config.prior_graph_path,
                    "edge-list file (1-based feature indices, 'y' for the target); skips lasso");
    cmd->add_option("--phi", config.phi_mode, "importance map: learned | parametric")
        ->capture_default_str();
    cmd->add_option("--mi", config.mi_source,
                    "pointwise mutual information source: model | empirical")
        ->capture_default_str();
    cmd->add_option("--c-grid", config.inv_c_grid, "parametric 1/c grid")->capture_default_str();
    cmd->add_option("--seed", config.seed, "master seed")->capture_default_str();
    cmd->add_option("--out-dir", config.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--threads", config.n_threads, "worker threads (0 = hardware)")
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"covered-information-corrected feature importance"};
    app.require_subcommand(1);

    cid::RunConfig config;
    std::string delimiter = ",";

    auto* gen = app.add_subcommand("generate-toy", "write the synthetic benchmark as CSV");
    std::int64_t gen_samples = 800;
    std::uint64_t gen_seed = 0;
    std::string gen_out = "toy.csv";
    gen->add_option("--samples", gen_samples, "sample count")->capture_default_str();
    gen->add_option("--seed", gen_seed, "generator seed")->capture_default_str();
    gen->add_option("--out", gen_out, "output CSV path")->capture_default_str();

    auto* rank = app.add_subcommand("rank", "run the full importance pipeline and write reports");
    add_common_flags(rank, config, delimiter);

    auto* evaluate = app.add_subcommand(
        "evaluate", "rank, then score each method by subset-performance correlation");
    add_common_flags(evaluate, config, delimiter);
    evaluate->add_option("--eval-subsets", config.eval_subsets, "random feature subsets to retrain")
        ->capture_default_str();
    evaluate->add_option("--eval-subset-size", config.eval_subset_size,
                         "features per subset (-1 = half)")
        ->capture_default_str();

    auto* oracle = app.add_subcommand("oracle-check",
                                      "compare the factorized covered information against "
                                      "brute-force enumeration on random models");
    int oc_nodes = 4, oc_states = 5, oc_cases = 100;
    std::uint64_t oc_seed = 0;
    oracle->add_option("--max-nodes", oc_nodes, "node count upper bound (3..5)")->capture_default_str();
    oracle->add_option("--max-states", oc_states, "state count upper bound (2..5)")
        ->capture_default_str();
    oracle->add_option("--cases", oc_cases, "number of random cases")->capture_default_str();
    oracle->add_option("--seed", oc_seed, "case generator seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (!delimiter.empty()) config.delimiter = delimiter[0];

        if (gen->parsed()) {
            cid::run_generate_toy(gen_samples, gen_seed, gen_out);
            std::cout << "wrote " << gen_out << "\n";
            return kExitOk;
        }
        if (rank->parsed()) {
            config.validate();
            const cid::RankArtifacts art = cid::run_rank(config);
            std::cout << "rows kept: " << art.data.rows() << " (trimmed " << art.rows_trimmed
                      << "), penalty: " << art.selected_rho << "\n";
            for (const auto& est : {art.gini, art.permutation, art.corrected, art.univariate}) {
                std::cout << est.method << " ranking:";
                for (int f : est.ranking)
                    std::cout << ' ' << est.feature_names[static_cast<std::size_t>(f)];
                std::cout << "\n";
            }
            std::cout << "reports written to " << config.out_dir << "\n";
            return kExitOk;
        }
        if (evaluate->parsed()) {
            config.validate();
            const cid::EvaluateArtifacts art = cid::run_evaluate(config);
            for (std::size_t i = 0; i < art.scores.methods.size(); ++i)
                std::cout << art.scores.methods[i] << ": correlation "
                          << art.scores.scores[i]
                          << (art.scores.degenerate[i] ? " (degenerate)" : "") << "\n";
            std::cout << "scores written to " << config.out_dir << "\n";
            return kExitOk;
        }
        if (oracle->parsed()) {
            const cid::OracleCheckResult res =
                cid::run_oracle_check(oc_nodes, oc_states, oc_cases, oc_seed);
            std::printf("%s: %d cases, max |closed-form - enumeration| = %.3e (tolerance %.1e)\n",
                        res.pass ? "PASS" : "FAIL", res.cases_run, res.max_abs_diff, res.tolerance);
            return res.pass ? kExitOk : kExitPipeline;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPipeline;
    }
    return kExitConfig;
}
