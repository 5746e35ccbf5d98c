#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cid/dataset.hpp"
#include "cid/discrete_mrf.hpp"
#include "cid/entropy.hpp"
#include "cid/importance.hpp"
#include "cid/models.hpp"
#include "cid/pipeline.hpp"
#include "cid/potentials.hpp"
#include "cid/precision.hpp"

namespace py = pybind11;
using namespace cid;

PYBIND11_MODULE(_core, m) {
    m.doc() = "covered-information-corrected feature importance";

    py::class_<TabularDataset>(m, "TabularDataset")
        .def(py::init([](const Eigen::MatrixXd& values, const Eigen::VectorXd& target,
                         std::vector<std::string> feature_names) {
                 TabularDataset d;
                 d.values = values;
                 d.target = target;
                 if (feature_names.empty())
                     for (Eigen::Index c = 0; c < values.cols(); ++c)
                         feature_names.push_back("f" + std::to_string(c));
                 d.feature_names = std::move(feature_names);
                 return d;
             }),
             py::arg("values"), py::arg("target"),
             py::arg("feature_names") = std::vector<std::string>{})
        .def_readonly("values", &TabularDataset::values)
        .def_readonly("target", &TabularDataset::target)
        .def_readonly("feature_names", &TabularDataset::feature_names)
        .def_readonly("bin_edges", &TabularDataset::bin_edges)
        .def_readonly("bin_midpoints", &TabularDataset::bin_midpoints)
        .def_property_readonly("rows", &TabularDataset::rows)
        .def_property_readonly("num_features", &TabularDataset::num_features)
        .def("discretized", &TabularDataset::discretized);

    py::class_<SubsampleSet>(m, "SubsampleSet")
        .def_readonly("subsets", &SubsampleSet::subsets)
        .def_property_readonly("count", &SubsampleSet::count);

    m.def("load_csv", &load_csv, py::arg("path"), py::arg("target_column"),
          py::arg("delimiter") = ',');
    m.def("save_csv", &save_csv, py::arg("data"), py::arg("path"), py::arg("delimiter") = ',');
    m.def("generate_toy", &generate_toy, py::arg("n_samples") = 800, py::arg("seed") = 0);
    m.def("quantile_gaussianize", &quantile_gaussianize);
    m.def(
        "trim_outliers",
        [](const TabularDataset& d, double k_sigma) {
            TrimResult r = trim_outliers(d, k_sigma);
            return py::make_tuple(r.data, r.rows_removed);
        },
        py::arg("data"), py::arg("k_sigma") = 4.0);
    m.def("discretize", &discretize, py::arg("data"), py::arg("bins") = 10);
    m.def("make_subsamples", &make_subsamples, py::arg("n_rows"), py::arg("n_subsets"),
          py::arg("fraction"), py::arg("seed"));

    py::class_<PrecisionModel>(m, "PrecisionModel")
        .def_readonly("precision", &PrecisionModel::precision)
        .def_readonly("mean", &PrecisionModel::mean)
        .def_readonly("eta", &PrecisionModel::eta)
        .def_readonly("rho", &PrecisionModel::rho)
        .def_property_readonly("adjacency",
                               [](const PrecisionModel& p) {
                                   return Eigen::MatrixXi(p.adjacency.cast<int>());
                               })
        .def("neighbors", [](const PrecisionModel& p, int node) { return neighbors(p, node); });

    m.def("empirical_covariance", &empirical_covariance);
    m.def(
        "graphical_lasso",
        [](const Eigen::MatrixXd& s, double rho, double tol, int max_iter) {
            GlassoOptions opt;
            opt.tol = tol;
            opt.max_iter = max_iter;
            return graphical_lasso(s, rho, opt);
        },
        py::arg("covariance"), py::arg("rho"), py::arg("tol") = 1e-4, py::arg("max_iter") = 200);
    m.def(
        "select_rho_cv",
        [](const TabularDataset& data, const std::vector<double>& grid, int folds,
           std::uint64_t seed) { return select_rho_cv(data, grid, folds, seed); },
        py::arg("data"), py::arg("grid"), py::arg("folds") = 5, py::arg("seed") = 0);
    m.def("default_rho_grid", &default_rho_grid, py::arg("covariance"), py::arg("size") = 8,
          py::arg("lo_frac") = 0.01, py::arg("hi_frac") = 1.0);
    m.def("precision_to_json", &precision_to_json);

    m.def("local_mutual_info", &local_mutual_info, py::arg("data"), py::arg("feature"));
    m.def("local_mutual_info_model", &local_mutual_info_model, py::arg("model"), py::arg("data"),
          py::arg("feature"));
    m.def("covered_info_row", &covered_info_row, py::arg("model"), py::arg("data"),
          py::arg("feature"), py::arg("row"), py::arg("local_mi_value"));
    m.def(
        "oracle_covered_info",
        [](const std::vector<int>& dims, const std::vector<double>& probs, int feature, int target) {
            JointTable joint;
            joint.dims = dims;
            joint.probs = probs;
            joint.target = target;
            return oracle_covered_info(joint, feature);
        },
        py::arg("dims"), py::arg("probs"), py::arg("feature"), py::arg("target") = -1);
    m.def("oracle_check", [](int max_nodes, int max_states, int n_cases, std::uint64_t seed) {
        const OracleCheckResult r = run_oracle_check(max_nodes, max_states, n_cases, seed);
        return py::make_tuple(r.pass, r.cases_run, r.max_abs_diff);
    });

    py::class_<ErtParams>(m, "ErtParams")
        .def(py::init<>())
        .def_readwrite("n_trees", &ErtParams::n_trees)
        .def_readwrite("max_depth", &ErtParams::max_depth)
        .def_readwrite("min_leaf", &ErtParams::min_leaf)
        .def_readwrite("seed", &ErtParams::seed);

    py::class_<ExtremelyRandomizedTreesRegressor>(m, "ExtremelyRandomizedTreesRegressor")
        .def(py::init<ErtParams>(), py::arg("params") = ErtParams{})
        .def("fit", &ExtremelyRandomizedTreesRegressor::fit)
        .def("predict", &ExtremelyRandomizedTreesRegressor::predict)
        .def("gini_importance",
             [](const ExtremelyRandomizedTreesRegressor& model) { return gini_importance(model); });

    py::class_<BayesianLinearRegressor>(m, "BayesianLinearRegressor")
        .def(py::init<>())
        .def("fit", &BayesianLinearRegressor::fit)
        .def("predict", &BayesianLinearRegressor::predict)
        .def_property_readonly("weights", &BayesianLinearRegressor::weights)
        .def_property_readonly("intercept", &BayesianLinearRegressor::intercept)
        .def_property_readonly("alpha", &BayesianLinearRegressor::alpha)
        .def_property_readonly("beta", &BayesianLinearRegressor::beta);

    py::class_<ImportanceEstimate>(m, "ImportanceEstimate")
        .def_readonly("method", &ImportanceEstimate::method)
        .def_readonly("feature_names", &ImportanceEstimate::feature_names)
        .def_readonly("per_subsample", &ImportanceEstimate::per_subsample)
        .def_readonly("median", &ImportanceEstimate::median)
        .def_readonly("mean", &ImportanceEstimate::mean)
        .def_readonly("std", &ImportanceEstimate::std)
        .def_readonly("ranking", &ImportanceEstimate::ranking);

    m.def(
        "permutation_importance",
        [](const ExtremelyRandomizedTreesRegressor& model, const TabularDataset& data,
           const SubsampleSet& subsamples, int n_permutations, std::uint64_t seed,
           unsigned n_threads) {
            PermutationOptions opt;
            opt.n_permutations = n_permutations;
            opt.seed = seed;
            opt.n_threads = n_threads;
            return permutation_importance(model, data, subsamples, opt);
        },
        py::arg("model"), py::arg("data"), py::arg("subsamples"), py::arg("n_permutations") = 5,
        py::arg("seed") = 0, py::arg("n_threads") = 0);
    m.def("univariate_importance", &univariate_importance);

    py::class_<EntropyProfile>(m, "EntropyProfile")
        .def_readonly("local_mi", &EntropyProfile::local_mi)
        .def_readonly("local_ci", &EntropyProfile::local_ci)
        .def_readonly("mi_plus", &EntropyProfile::mi_plus)
        .def_readonly("mi_minus", &EntropyProfile::mi_minus)
        .def_readonly("ci_plus", &EntropyProfile::ci_plus)
        .def_readonly("ci_minus", &EntropyProfile::ci_minus);

    m.def(
        "cid_importance",
        [](const TabularDataset& data, const PrecisionModel& mrf, const SubsampleSet& subsamples,
           const ImportanceEstimate& permutation, const std::string& phi_mode,
           const std::string& mi_source, unsigned n_threads) {
            CidOptions opt;
            opt.phi_mode = phi_mode == "parametric" ? PhiMode::Parametric : PhiMode::Learned;
            opt.mi_source = mi_source == "empirical" ? MiSource::Empirical : MiSource::Model;
            opt.n_threads = n_threads;
            CidResult r = cid_importance(data, mrf, subsamples, permutation, opt);
            return py::make_tuple(r.corrected, r.profile);
        },
        py::arg("data"), py::arg("mrf"), py::arg("subsamples"), py::arg("permutation"),
        py::arg("phi_mode") = "learned", py::arg("mi_source") = "model", py::arg("n_threads") = 0);

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("input_path", &RunConfig::input_path)
        .def_readwrite("use_toy", &RunConfig::use_toy)
        .def_readwrite("toy_samples", &RunConfig::toy_samples)
        .def_readwrite("target_column", &RunConfig::target_column)
        .def_readwrite("bins", &RunConfig::bins)
        .def_readwrite("k_sigma", &RunConfig::k_sigma)
        .def_readwrite("n_subsamples", &RunConfig::n_subsamples)
        .def_readwrite("subsample_fraction", &RunConfig::subsample_fraction)
        .def_readwrite("train_fraction", &RunConfig::train_fraction)
        .def_readwrite("n_permutations", &RunConfig::n_permutations)
        .def_readwrite("rho", &RunConfig::rho)
        .def_readwrite("phi_mode", &RunConfig::phi_mode)
        .def_readwrite("mi_source", &RunConfig::mi_source)
        .def_readwrite("seed", &RunConfig::seed)
        .def_readwrite("out_dir", &RunConfig::out_dir)
        .def_readwrite("n_threads", &RunConfig::n_threads);

    m.def("run_rank", [](const RunConfig& config) {
        const RankArtifacts art = run_rank(config);
        py::dict out;
        out["permutation"] = art.permutation;
        out["cid"] = art.corrected;
        out["gini"] = art.gini;
        out["univariate"] = art.univariate;
        out["selected_rho"] = art.selected_rho;
        out["rows_trimmed"] = art.rows_trimmed;
        return out;
    });
}
