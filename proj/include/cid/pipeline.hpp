#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cid/dataset.hpp"
#include "cid/importance.hpp"
#include "cid/precision.hpp"
#include "cid/report.hpp"

namespace cid {

/// Everything a ranking run needs; flags win over config-file values at the
/// CLI layer, validation happens here.
struct RunConfig {
    std::string input_path;       // exactly one of input_path / use_toy
    bool use_toy = false;
    std::int64_t toy_samples = 800;
    std::string target_column = "y";
    char delimiter = ',';

    int bins = 10;
    double k_sigma = 4.0;
    bool gaussianize = true;
    bool gaussianize_before_trim = false;

    int n_subsamples = 200;
    double subsample_fraction = 0.8;
    double train_fraction = 0.8;  // 1.0 fits on all rows and evaluates everywhere
    int n_permutations = 5;

    double rho = -1.0;            // >= 0 fixes the penalty, otherwise CV
    std::vector<double> rho_grid; // empty -> default grid
    int cv_folds = 5;
    std::string prior_graph_path;

    std::string phi_mode = "learned";  // learned | parametric
    std::string mi_source = "model";   // model | empirical
    std::vector<double> inv_c_grid = {1.2, 1.4, 1.6, 1.8, 2.0, 2.2, 2.4};

    std::uint64_t seed = 0;
    std::string out_dir = ".";
    unsigned n_threads = 0;

    int eval_subsets = 100;
    int eval_subset_size = -1;  // -1 -> N/2

    void validate() const;  // throws std::invalid_argument
};

struct RankArtifacts {
    TabularDataset data;  // preprocessed, discretized
    SubsampleSet subsamples;
    PrecisionModel mrf;
    ImportanceEstimate permutation, corrected, gini, univariate;
    EntropyProfile profile;
    std::int64_t rows_trimmed = 0;
    double selected_rho = 0.0;
    std::vector<MethodTiming> timings;
};

/// Full ranking pipeline; writes importances.csv, summary.json,
/// entropy_profile.csv, figure.svg and precision.json under out_dir.
/// Pipeline failures carry the failing stage in the message.
RankArtifacts run_rank(const RunConfig& config);

/// Ranking pipeline without report emission, for in-process callers.
RankArtifacts run_rank_in_memory(const RunConfig& config);

struct EvaluateArtifacts {
    SubsetCorrelationResult scores;
    std::vector<MethodTiming> timings;
};

/// Runs the ranking when needed, then the subset-correlation protocol;
/// writes scores.csv under out_dir.
EvaluateArtifacts run_evaluate(const RunConfig& config, const RankArtifacts* existing = nullptr);

/// Writes the toy benchmark as CSV (columns X1..X6, y).
void run_generate_toy(std::int64_t n_samples, std::uint64_t seed, const std::string& out_path);

struct OracleCheckResult {
    int cases_run = 0;
    double max_abs_diff = 0.0;
    bool pass = false;
    double tolerance = 1e-9;
};

/// Random table-potential graphical models: factorized covered information
/// against the brute-force inclusion-exclusion value.
OracleCheckResult run_oracle_check(int max_nodes, int max_states, int n_cases, std::uint64_t seed,
                                   double tolerance = 1e-9);

}  // namespace cid
