#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "covdiff/data_matrix.hpp"
#include "covdiff/moments.hpp"

namespace covdiff {

// One-sample statistics t_tilde(k,l) = sqrt(n) * sigma_hat / sqrt(s_hat) over
// the strict upper triangle; the diagonal is excluded from the clustering
// hypotheses and left at zero.
struct OneSampleStatMatrix {
    int n = 0;
    PackedSymmetric values;
    PackedSymmetric s_hat;  // cached for the bootstrap scaling

    int p() const { return values.dim(); }
};

OneSampleStatMatrix one_sample_t_matrix(const MomentSummary& m);

// Partition of {(k,l): k < l} into s0 x s0 grid cells, diagonal cells first
// within each row of cells, trailing cells smaller when s0 does not divide p.
struct BlockPartition {
    int p = 0;
    int s0 = 0;
    std::vector<std::vector<std::pair<int, int>>> blocks;  // 0-based pairs

    int S() const { return static_cast<int>(blocks.size()); }
};

BlockPartition block_partition(int p, int s0);

struct LocalTestResult {
    int block = 0;
    double block_max = 0.0;  // signed by default; see `absolute` switches
    double p_hat = 1.0;
    double q_hat = 1.0;
};

// Block-wise bootstrap p-values. One shared set of B multiplier draws serves
// every block; block s is compared against its own maxima across those draws.
// `absolute` switches the block max from the literal signed t_tilde to |t_tilde|.
std::vector<LocalTestResult> local_p_values(const OneSampleStatMatrix& t,
                                            const BlockPartition& part,
                                            const DataMatrix& x, const MomentSummary& m,
                                            int B, std::uint64_t seed,
                                            bool absolute = false, int parallel = 0);

// Benjamini-Hochberg step-up adjusted values, returned in input order.
std::vector<double> bh_adjust(const std::vector<double>& p_values);

// d(k,l) = 1 - t_tilde(k,l) I(q_hat_s < pi) / max{block max, 1}; diagonal 0.
Eigen::MatrixXd dissimilarity(const OneSampleStatMatrix& t, const BlockPartition& part,
                              const std::vector<LocalTestResult>& results, double pi);

// Storey estimate #{p > lambda}/(1 - lambda) of the true-null count, capped at S.
double estimate_null_count(const std::vector<double>& p_values, double lambda = 0.5);

// Data-driven block size: max{ceil(log p), min s with S0_hat(s) <= S(s)/log S(s)}.
int select_block_size(const DataMatrix& x, int B, std::uint64_t seed,
                      double lambda = 0.5, bool absolute = false, int parallel = 0);

// Agglomerative dendrogram. Nodes 0..p-1 are leaves; merge i creates node p+i.
struct ClusterTree {
    struct Merge {
        int left = 0, right = 0;  // node ids, left has the smaller smallest member
        double height = 0.0;
        int size = 0;  // leaves under the merged node
    };
    int leaves = 0;
    std::vector<Merge> merges;  // p-1 entries, heights nondecreasing
};

// UPGMA (unweighted average linkage); ties broken by smallest member indices.
ClusterTree hierarchical_cluster(const Eigen::MatrixXd& d);

// Cut into exactly k clusters; labels are ranks of each cluster's smallest member.
std::vector<int> cut_tree(const ClusterTree& tree, int k);

// Cut at a height: clusters are the components after all merges with height <= h.
std::vector<int> cut_tree_at_height(const ClusterTree& tree, double height);

// Full pipeline driven by the CLI: moments -> (s0 selection) -> block tests ->
// dissimilarity -> UPGMA.
struct ClusterPipelineResult {
    int s0 = 0;
    BlockPartition partition;
    std::vector<LocalTestResult> results;
    Eigen::MatrixXd dissim;
    ClusterTree tree;
    int rejected_blocks = 0;  // q_hat < pi
};

ClusterPipelineResult cluster_pipeline(const DataMatrix& x, double pi, int B,
                                       std::uint64_t seed,
                                       std::optional<int> s0_override = std::nullopt,
                                       bool absolute = false, int parallel = 0);

}  // namespace covdiff
