#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "covdiff/cluster.hpp"
#include "covdiff/io.hpp"
#include "covdiff/moments.hpp"
#include "covdiff/sim.hpp"
#include "covdiff/two_sample.hpp"

namespace py = pybind11;
using namespace covdiff;

namespace {

DataMatrix make_data(const Eigen::MatrixXd& values,
                     const std::optional<std::vector<std::string>>& names) {
    DataMatrix d;
    d.values = values;
    d.column_names = names;
    d.validate();
    return d;
}

py::dict report_to_dict(const TestReport& r) {
    py::dict out;
    out["method"] = r.method;
    out["statistic"] = r.statistic;
    out["critical_value"] = r.critical_value;
    out["p_value"] = r.p_value;
    out["reject"] = r.reject;
    if (r.argmax_k >= 0)
        out["argmax_pair"] = py::make_tuple(r.argmax_k, r.argmax_l);
    else
        out["argmax_pair"] = py::none();
    out["n"] = r.n;
    out["m"] = r.m;
    out["p"] = r.p;
    out["B"] = r.B;
    out["alpha"] = r.alpha;
    out["seed"] = r.seed;
    return out;
}

CovarianceSpec cov_spec(const std::string& kind, int p, std::uint64_t seed) {
    CovarianceSpec spec;
    spec.kind = io::parse_cov_kind(kind);
    spec.p = p;
    spec.seed = seed;
    return spec;
}

InnovationSpec innov_spec(const std::string& kind, bool noncentral) {
    InnovationSpec spec;
    spec.kind = io::parse_innov_kind(kind);
    spec.noncentral = noncentral;
    return spec;
}

}  // namespace

PYBIND11_MODULE(_covdiff, m) {
    m.doc() =
        "Two-sample covariance equality testing with multiplier-bootstrap "
        "calibration, and block-FDR variable clustering.";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<DegeneracyError>(m, "DegeneracyError", PyExc_ValueError);
    py::register_exception<NotPsdError>(m, "NotPsdError", PyExc_ValueError);

    m.def(
        "moment_summary",
        [](const Eigen::MatrixXd& x) {
            MomentSummary s = compute_moment_summary(make_data(x, std::nullopt));
            py::dict out;
            out["n"] = s.n;
            out["means"] = s.means;
            out["sigma_hat"] = s.sigma_hat.to_dense();
            out["s_hat"] = s.s_hat.to_dense();
            return out;
        },
        py::arg("x"),
        "Sample means, covariance (divisor n), and entrywise variance proxies.");

    m.def(
        "pair_t_matrix",
        [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
            PairStatMatrix t =
                t_stat_matrix(compute_moment_summary(make_data(x, std::nullopt)),
                              compute_moment_summary(make_data(y, std::nullopt)));
            return t.values.to_dense();
        },
        py::arg("x"), py::arg("y"),
        "Entrywise standardized covariance differences between two samples.");

    m.def(
        "two_sample_test",
        [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int b, double alpha,
           std::uint64_t seed, int threads) {
            BootstrapConfig cfg{b, alpha, seed, threads};
            return report_to_dict(
                run_two_sample_test(make_data(x, std::nullopt), make_data(y, std::nullopt), cfg));
        },
        py::arg("x"), py::arg("y"), py::arg("b") = 1500, py::arg("alpha") = 0.05,
        py::arg("seed") = 0, py::arg("threads") = 0,
        "Max-type two-sample covariance equality test with multiplier-bootstrap "
        "calibration. argmax_pair is 0-based.");

    m.def(
        "bootstrap_distribution",
        [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int b, std::uint64_t seed,
           int threads) {
            BootstrapConfig cfg{b, 0.05, seed, threads};
            return bootstrap_distribution(make_data(x, std::nullopt),
                                          make_data(y, std::nullopt), cfg);
        },
        py::arg("x"), py::arg("y"), py::arg("b") = 1500, py::arg("seed") = 0,
        py::arg("threads") = 0, "Sorted multiplier-bootstrap replicates of the max statistic.");

    m.def("clx_quantile", &clx_quantile, py::arg("alpha"),
          "Closed-form type I extreme value quantile.");
    m.def(
        "clx_test",
        [](double statistic, int p, double alpha) {
            return report_to_dict(clx_test(statistic, p, alpha));
        },
        py::arg("statistic"), py::arg("p"), py::arg("alpha") = 0.05,
        "Extreme-value baseline decision for a max statistic.");

    m.def(
        "gen_covariance",
        [](const std::string& kind, int p, std::uint64_t seed) {
            return gen_covariance(cov_spec(kind, p, seed));
        },
        py::arg("kind"), py::arg("p"), py::arg("seed") = 0,
        "Structured covariance model: one of M1 (block diagonal), M2 (slow decay), "
        "M3 (long-range dependence), M4 (tridiagonal plus low rank).");

    m.def(
        "gen_sample",
        [](const Eigen::MatrixXd& sigma, const std::string& innov, int n,
           std::uint64_t seed, bool noncentral) {
            return gen_sample(sigma, innov_spec(innov, noncentral), n, seed).values;
        },
        py::arg("sigma"), py::arg("innov"), py::arg("n"), py::arg("seed") = 0,
        py::arg("noncentral") = false,
        "Draw n rows with the given covariance structure and innovation model "
        "(D1 gamma, D2 zero-inflated Poisson, D3 heavy-tail t).");

    m.def(
        "run_experiment",
        [](const std::string& cov, const std::string& innov, int p, int n1, int n2,
           int reps, int b, double alpha, bool alternative, std::uint64_t seed,
           int threads) {
            BootstrapConfig cfg{b, alpha, 0, threads};
            ExperimentSummary s = run_experiment(cov_spec(cov, p, seed), innov_spec(innov, false),
                                                 n1, n2, reps, cfg, alternative, seed);
            py::dict out;
            out["reps"] = s.reps;
            out["reject_frac_bootstrap"] = s.frac_bootstrap();
            out["reject_frac_clx"] = s.frac_clx();
            out["alternative"] = s.alternative;
            out["mean_gamma_hat"] = s.mean_gamma_hat;
            out["clamp_magnitude"] = s.clamp_magnitude;
            out["elapsed_seconds"] = s.elapsed_seconds;
            return out;
        },
        py::arg("cov"), py::arg("innov"), py::arg("p"), py::arg("n1"), py::arg("n2"),
        py::arg("reps"), py::arg("b") = 1500, py::arg("alpha") = 0.05,
        py::arg("alternative") = false, py::arg("seed") = 0, py::arg("threads") = 0,
        "Size/power experiment over `reps` replications.");

    m.def("bh_adjust", &bh_adjust, py::arg("p_values"),
          "Benjamini-Hochberg step-up adjusted values, in input order.");

    m.def(
        "cluster",
        [](const Eigen::MatrixXd& x, double pi, int b, std::uint64_t seed,
           std::optional<int> s0, bool absolute, int threads,
           std::optional<std::vector<std::string>> names) {
            DataMatrix data = make_data(x, names);
            ClusterPipelineResult r =
                cluster_pipeline(data, pi, b, seed, s0, absolute, threads);
            py::dict out;
            out["s0"] = r.s0;
            out["S"] = r.partition.S();
            out["rejected_blocks"] = r.rejected_blocks;
            out["dissimilarity"] = r.dissim;
            py::list merges;
            for (const auto& merge : r.tree.merges)
                merges.append(py::make_tuple(merge.left, merge.right, merge.height,
                                             merge.size));
            out["merges"] = merges;
            out["newick"] = io::to_newick(r.tree, data);
            py::list blocks;
            for (const auto& res : r.results) {
                py::dict entry;
                entry["block"] = res.block;
                entry["block_max"] = res.block_max;
                entry["p_hat"] = res.p_hat;
                entry["q_hat"] = res.q_hat;
                blocks.append(entry);
            }
            out["blocks"] = blocks;
            return out;
        },
        py::arg("x"), py::arg("pi") = 0.05, py::arg("b") = 1500, py::arg("seed") = 0,
        py::arg("s0") = py::none(), py::arg("absolute") = false, py::arg("threads") = 0,
        py::arg("names") = py::none(),
        "Block-FDR variable clustering: data-driven block size, block-wise "
        "bootstrap q-values, dissimilarity, and an average-linkage dendrogram. "
        "Merge node ids: leaves 0..p-1, merge i creates node p+i.");

    m.def(
        "cut_tree",
        [](int leaves, const std::vector<std::tuple<int, int, double, int>>& merges,
           int k) {
            ClusterTree tree;
            tree.leaves = leaves;
            for (const auto& [left, right, height, size] : merges)
                tree.merges.push_back({left, right, height, size});
            return cut_tree(tree, k);
        },
        py::arg("leaves"), py::arg("merges"), py::arg("k"),
        "Cut a dendrogram (as returned by cluster()['merges']) into k groups.");
}
