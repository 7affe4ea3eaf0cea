// covdiff: two-sample covariance equality testing, simulation experiments,
// and FDR-guided variable clustering.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "covdiff/cluster.hpp"
#include "covdiff/io.hpp"
#include "covdiff/rng.hpp"
#include "covdiff/sim.hpp"
#include "covdiff/two_sample.hpp"

namespace fs = std::filesystem;
using namespace covdiff;

namespace {

void emit(const std::string& content, const std::string& out_path, bool to_stdout) {
    if (to_stdout || out_path.empty()) {
        std::cout << content;
    } else {
        io::write_text_file(out_path, content);
    }
}

struct CommonOpts {
    std::uint64_t seed = 0;
    int B = 1500;
    double alpha = 0.05;
    int threads = 0;
    bool to_stdout = false;
};

int cmd_test(const std::string& x_path, const std::string& y_path, const CommonOpts& opts,
             bool transpose, bool exit_on_reject, const std::string& out_path) {
    const auto start = std::chrono::steady_clock::now();
    DataMatrix x = io::load_csv(x_path, transpose);
    DataMatrix y = io::load_csv(y_path, transpose);
    if (x.p() != y.p())
        throw ValidationError("test: dimension mismatch: " + x_path + " has p=" +
                              std::to_string(x.p()) + ", " + y_path + " has p=" +
                              std::to_string(y.p()));
    BootstrapConfig cfg{opts.B, opts.alpha, opts.seed, opts.threads};
    TestReport boot = run_two_sample_test(x, y, cfg);
    TestReport clx = clx_test(boot.statistic, boot.p, opts.alpha);
    const double wall_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    emit(io::test_report_json(boot, clx, x, wall_ms), out_path, opts.to_stdout);
    std::cerr << "T_max = " << boot.statistic << ", c_{B,alpha} = " << boot.critical_value
              << ", p = " << boot.p_value << (boot.reject ? " [reject]" : " [no reject]")
              << "\n";
    return (exit_on_reject && boot.reject) ? 2 : 0;
}

int cmd_simulate(const std::string& config_path, const CommonOpts& opts,
                 const std::string& out_dir) {
    io::ExperimentConfig cfg = io::parse_experiment_config(config_path);
    std::vector<io::ExperimentRow> rows;
    for (int p : cfg.p_list) {
        for (auto [n1, n2] : cfg.sample_sizes) {
            CovarianceSpec cov;
            cov.kind = cfg.cov;
            cov.p = p;
            cov.seed = rng::derive(cfg.seed, 101, static_cast<std::uint64_t>(p));
            InnovationSpec innov;
            innov.kind = cfg.innov;
            BootstrapConfig boot{cfg.B, cfg.alpha, 0, opts.threads};
            std::cerr << "running " << io::cov_kind_name(cfg.cov) << "/"
                      << io::innov_kind_name(cfg.innov) << " p=" << p << " (n1,n2)=("
                      << n1 << "," << n2 << ") reps=" << cfg.reps << "...\n";
            ExperimentSummary summary = run_experiment(
                cov, innov, n1, n2, cfg.reps, boot, cfg.alternative,
                rng::derive(cfg.seed, 102, static_cast<std::uint64_t>(p * 100003 + n1)));
            rows.push_back({cfg.cov, cfg.innov, p, n1, n2, summary, cfg.alpha, cfg.B});
        }
    }
    std::string table = io::experiment_table_tsv(rows);
    if (opts.to_stdout || out_dir.empty()) {
        std::cout << table;
    } else {
        fs::create_directories(out_dir);
        io::write_text_file((fs::path(out_dir) / "results.tsv").string(), table);
    }
    return 0;
}

int cmd_cluster(const std::string& x_path, const CommonOpts& opts, double pi,
                std::optional<int> s0, bool absolute, bool transpose,
                const std::string& order_path, const std::string& out_dir) {
    DataMatrix x = io::load_csv(x_path, transpose);
    if (!order_path.empty()) {
        std::ifstream in(order_path);
        if (!in) throw InputError("cluster: cannot open order file " + order_path);
        std::vector<int> perm;
        int v;
        while (in >> v) perm.push_back(v - 1);  // 1-based on disk
        if (static_cast<int>(perm.size()) != x.p())
            throw ValidationError("cluster: order file must list all " +
                                  std::to_string(x.p()) + " variables");
        DataMatrix reordered;
        reordered.values.resize(x.n(), x.p());
        if (x.column_names) reordered.column_names = std::vector<std::string>(x.p());
        for (int c = 0; c < x.p(); ++c) {
            if (perm[c] < 0 || perm[c] >= x.p())
                throw ValidationError("cluster: order index out of range");
            reordered.values.col(c) = x.values.col(perm[c]);
            if (x.column_names) (*reordered.column_names)[c] = (*x.column_names)[perm[c]];
        }
        x = std::move(reordered);
    }

    ClusterPipelineResult result =
        cluster_pipeline(x, pi, opts.B, opts.seed, s0, absolute, opts.threads);
    std::cerr << "s0 = " << result.s0 << ", S = " << result.partition.S()
              << ", rejected blocks = " << result.rejected_blocks << "\n";

    const std::string dissim = io::dissimilarity_tsv(result.dissim, x);
    const std::string newick = io::to_newick(result.tree, x);
    const std::string summary = io::cluster_summary_json(result, pi, opts.B, opts.seed);
    if (opts.to_stdout || out_dir.empty()) {
        std::cout << summary << newick;
    } else {
        fs::create_directories(out_dir);
        io::write_text_file((fs::path(out_dir) / "dissimilarity.tsv").string(), dissim);
        io::write_text_file((fs::path(out_dir) / "tree.nwk").string(), newick);
        io::write_text_file((fs::path(out_dir) / "summary.json").string(), summary);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"L-infinity two-sample covariance testing and variable clustering"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string x_path, y_path, config_path, out_path, out_dir, order_path;
    bool transpose = false, exit_on_reject = false, absolute = false;
    double pi = 0.05;
    int s0 = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", opts.seed, "RNG seed");
        sub->add_option("--B", opts.B, "bootstrap replicates")->check(CLI::PositiveNumber);
        sub->add_option("--threads", opts.threads,
                        "parallelism (default: COVDIFF_THREADS or all cores)");
        sub->add_flag("--stdout", opts.to_stdout, "write results to standard output");
    };

    auto* test = app.add_subcommand("test", "two-sample covariance equality test");
    test->add_option("x", x_path, "first sample CSV")->required();
    test->add_option("y", y_path, "second sample CSV")->required();
    test->add_option("--alpha", opts.alpha, "significance level")
        ->check(CLI::Range(1e-12, 1.0 - 1e-12));
    test->add_flag("--transpose", transpose, "input files have variables in rows");
    test->add_flag("--exit-on-reject", exit_on_reject, "exit code 2 on rejection");
    test->add_option("--out", out_path, "report file (default: stdout)");
    add_common(test);

    auto* simulate = app.add_subcommand("simulate", "size/power experiment tables");
    simulate->add_option("config", config_path, "experiment config file")->required();
    simulate->add_option("--out", out_dir, "output directory");
    add_common(simulate);

    auto* cluster = app.add_subcommand("cluster", "block-FDR variable clustering");
    cluster->add_option("x", x_path, "sample CSV")->required();
    cluster->add_option("--pi", pi, "q-value cut-off")->check(CLI::Range(1e-12, 1.0 - 1e-12));
    cluster->add_option("--s0", s0, "block size override (default: data-driven)");
    cluster->add_flag("--absolute", absolute, "use |t| for block maxima");
    cluster->add_flag("--transpose", transpose, "input file has variables in rows");
    cluster->add_option("--order", order_path, "1-based variable permutation file");
    cluster->add_option("--out", out_dir, "output directory");
    add_common(cluster);

    CLI11_PARSE(app, argc, argv);

    try {
        if (test->parsed())
            return cmd_test(x_path, y_path, opts, transpose, exit_on_reject, out_path);
        if (simulate->parsed()) return cmd_simulate(config_path, opts, out_dir);
        if (cluster->parsed())
            return cmd_cluster(x_path, opts, pi,
                               s0 > 0 ? std::optional<int>(s0) : std::nullopt, absolute,
                               transpose, order_path, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
