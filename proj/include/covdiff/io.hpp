#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "covdiff/cluster.hpp"
#include "covdiff/data_matrix.hpp"
#include "covdiff/sim.hpp"
#include "covdiff/two_sample.hpp"

namespace covdiff::io {

// Numeric CSV, rows = observations, optional single header row of column
// names. CRLF and LF line endings parse identically. `transpose` accommodates
// variables-in-rows layouts.
DataMatrix load_csv(const std::string& path, bool transpose = false);

// 17 significant digits, so load_csv(write_csv(m)) == m exactly.
void write_csv(const std::string& path, const DataMatrix& m);

// Parsed `covdiff simulate` configuration: simple `key = value` lines,
// comma-separated lists, '#' comments.
struct ExperimentConfig {
    CovKind cov = CovKind::M1;
    InnovKind innov = InnovKind::D1;
    std::vector<int> p_list;
    std::vector<std::pair<int, int>> sample_sizes;  // (n1, n2) pairs
    int reps = 1000;
    double alpha = 0.05;
    int B = 1500;
    bool alternative = false;
    std::uint64_t seed = 0;
};

ExperimentConfig parse_experiment_config(const std::string& path);

CovKind parse_cov_kind(const std::string& name);
InnovKind parse_innov_kind(const std::string& name);
std::string cov_kind_name(CovKind kind);
std::string innov_kind_name(InnovKind kind);

// JSON test report: bootstrap fields at the top level plus a "clx" block.
// Argmax pairs are 1-based, using column names when present.
std::string test_report_json(const TestReport& bootstrap, const TestReport& clx,
                             const DataMatrix& x, double wall_time_ms);

// One row of the simulate output table.
struct ExperimentRow {
    CovKind cov;
    InnovKind innov;
    int p, n1, n2;
    ExperimentSummary summary;
    double alpha;
    int B;
};

std::string experiment_table_tsv(const std::vector<ExperimentRow>& rows);

// Dissimilarity matrix as TSV with row/column labels.
std::string dissimilarity_tsv(const Eigen::MatrixXd& d, const DataMatrix& x);

// Newick with branch lengths; heights are half the merge height (ultrametric).
std::string to_newick(const ClusterTree& tree, const DataMatrix& x);

std::string cluster_summary_json(const ClusterPipelineResult& result, double pi, int B,
                                 std::uint64_t seed);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace covdiff::io
