#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <set>

#include "covdiff/cluster.hpp"
#include "oracles.hpp"

using namespace covdiff;

namespace {

DataMatrix make_data(const Eigen::MatrixXd& values) {
    DataMatrix d;
    d.values = values;
    return d;
}

Eigen::MatrixXd gaussian(int n, int p, unsigned seed) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd out(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) out(i, j) = normal(eng);
    return out;
}

// Data with one strongly dependent pair (columns 0 and 1).
DataMatrix correlated_pair(int n, int p, unsigned seed) {
    Eigen::MatrixXd values = gaussian(n, p, seed);
    values.col(1) = values.col(0) + 0.1 * values.col(1);
    return make_data(values);
}

std::vector<std::vector<int>> node_members(const ClusterTree& tree) {
    std::vector<std::vector<int>> members(tree.leaves + tree.merges.size());
    for (int i = 0; i < tree.leaves; ++i) members[i] = {i};
    for (std::size_t i = 0; i < tree.merges.size(); ++i) {
        auto joined = members[tree.merges[i].left];
        const auto& right = members[tree.merges[i].right];
        joined.insert(joined.end(), right.begin(), right.end());
        std::sort(joined.begin(), joined.end());
        members[tree.leaves + i] = std::move(joined);
    }
    return members;
}

}  // namespace

TEST_CASE("one-sample statistics match a scalar hand computation") {
    Eigen::MatrixXd values(4, 2);
    values << 1.0, 2.0, -1.0, 0.5, 2.0, -1.5, 0.25, 1.0;
    MomentSummary m = compute_moment_summary(make_data(values));
    OneSampleStatMatrix t = one_sample_t_matrix(m);
    CHECK(t.n == 4);
    CHECK(t.values(0, 0) == 0.0);  // diagonal excluded
    CHECK(t.values(1, 1) == 0.0);
    const double expected = std::sqrt(4.0) * m.sigma_hat(0, 1) / std::sqrt(m.s_hat(0, 1));
    CHECK(t.values(0, 1) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("one-sample statistics reject a degenerate pair") {
    Eigen::MatrixXd values = gaussian(10, 3, 1);
    values.col(1).setConstant(7.0);
    CHECK_THROWS_AS(one_sample_t_matrix(compute_moment_summary(make_data(values))),
                    DegeneracyError);
}

TEST_CASE("block partition examples") {
    SUBCASE("p=4, s0=2") {
        BlockPartition part = block_partition(4, 2);
        REQUIRE(part.S() == 3);
        CHECK(part.blocks[0] == std::vector<std::pair<int, int>>{{0, 1}});
        CHECK(part.blocks[1] ==
              std::vector<std::pair<int, int>>{{0, 2}, {0, 3}, {1, 2}, {1, 3}});
        CHECK(part.blocks[2] == std::vector<std::pair<int, int>>{{2, 3}});
    }
    SUBCASE("s0 >= p collapses to one block") {
        BlockPartition part = block_partition(5, 9);
        REQUIRE(part.S() == 1);
        CHECK(part.blocks[0].size() == 10);
    }
    SUBCASE("s0=1 gives singleton off-diagonal cells and empty diagonal cells") {
        BlockPartition part = block_partition(3, 1);
        CHECK(part.S() == 6);
        int empty = 0, pairs = 0;
        for (const auto& block : part.blocks) {
            empty += block.empty();
            pairs += static_cast<int>(block.size());
        }
        CHECK(empty == 3);
        CHECK(pairs == 3);
    }
    SUBCASE("every pair lands in exactly one block") {
        for (int p : {5, 7, 12}) {
            for (int s0 : {1, 2, 3, 5}) {
                BlockPartition part = block_partition(p, s0);
                std::set<std::pair<int, int>> seen;
                for (const auto& block : part.blocks)
                    for (const auto& pr : block) {
                        CHECK(pr.first < pr.second);
                        CHECK(seen.insert(pr).second);
                    }
                CHECK(static_cast<int>(seen.size()) == p * (p - 1) / 2);
            }
        }
    }
    CHECK_THROWS_AS(block_partition(4, 0), ValidationError);
    CHECK_THROWS_AS(block_partition(1, 1), ValidationError);
}

TEST_CASE("BH adjustment") {
    SUBCASE("hand example") {
        std::vector<double> q = bh_adjust({0.01, 0.04, 0.03, 0.005});
        CHECK(q[0] == doctest::Approx(0.02));
        CHECK(q[1] == doctest::Approx(0.04));
        CHECK(q[2] == doctest::Approx(0.04));
        CHECK(q[3] == doctest::Approx(0.02));
    }
    SUBCASE("matches the brute-force oracle on random inputs") {
        std::mt19937_64 eng(5);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<double> p_values(40);
        for (double& v : p_values) v = unif(eng);
        std::vector<double> q = bh_adjust(p_values);
        std::vector<double> ref = oracle::naive_bh(p_values);
        for (std::size_t i = 0; i < q.size(); ++i)
            CHECK(q[i] == doctest::Approx(ref[i]).epsilon(1e-14));
    }
    CHECK_THROWS_AS(bh_adjust({0.5, 1.5}), ValidationError);
    CHECK(bh_adjust({}).empty());
}

TEST_CASE("block-wise bootstrap p-values") {
    DataMatrix x = correlated_pair(80, 6, 11);
    MomentSummary m = compute_moment_summary(x);
    OneSampleStatMatrix t = one_sample_t_matrix(m);
    BlockPartition part = block_partition(6, 3);

    SUBCASE("B=1 p-values are 1/2 or 1 and the floor is 1/(B+1)") {
        auto results = local_p_values(t, part, x, m, 1, 3, false, 1);
        for (const auto& r : results) CHECK((r.p_hat == 0.5 || r.p_hat == 1.0));
        auto wide = local_p_values(t, part, x, m, 200, 3, false, 1);
        for (const auto& r : wide) {
            CHECK(r.p_hat >= 1.0 / 201.0);
            CHECK(r.p_hat <= 1.0);
        }
    }
    SUBCASE("the strongly dependent pair drives its block to the minimal p") {
        auto results = local_p_values(t, part, x, m, 400, 3, false, 1);
        CHECK(results[0].p_hat == doctest::Approx(1.0 / 401.0));
        CHECK(results[0].block_max == t.values(0, 1));
        CHECK(results[0].q_hat <= 3.0 * results[0].p_hat);
    }
    SUBCASE("deterministic across parallelism degrees") {
        auto a = local_p_values(t, part, x, m, 64, 9, false, 1);
        auto b = local_p_values(t, part, x, m, 64, 9, false, 8);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].p_hat == b[i].p_hat);
            CHECK(a[i].block_max == b[i].block_max);
        }
    }
    SUBCASE("empty blocks report p=1") {
        BlockPartition singles = block_partition(6, 1);
        auto results = local_p_values(t, singles, x, m, 32, 3, false, 1);
        for (int s = 0; s < singles.S(); ++s)
            if (singles.blocks[s].empty()) {
                CHECK(results[s].p_hat == 1.0);
                CHECK(results[s].block_max == -std::numeric_limits<double>::infinity());
            }
    }
    CHECK_THROWS_AS(local_p_values(t, part, x, m, 0, 3), ValidationError);
}

TEST_CASE("dissimilarity assembly") {
    OneSampleStatMatrix t;
    t.n = 10;
    t.values = PackedSymmetric(3);
    t.values.at(0, 1) = 2.0;
    t.values.at(0, 2) = -0.5;
    t.values.at(1, 2) = 0.25;
    BlockPartition part = block_partition(3, 3);  // one block with all pairs
    LocalTestResult res;
    res.block = 0;
    res.block_max = 2.0;

    SUBCASE("no rejection leaves the off-diagonal at one") {
        res.q_hat = 0.5;
        Eigen::MatrixXd d = dissimilarity(t, part, {res}, 0.05);
        CHECK(d.diagonal().isZero(0.0));
        CHECK(d(0, 1) == 1.0);
        CHECK(d(1, 2) == 1.0);
    }
    SUBCASE("rejection rescales by the block max when it exceeds one") {
        res.q_hat = 0.01;
        Eigen::MatrixXd d = dissimilarity(t, part, {res}, 0.05);
        CHECK(d(0, 1) == doctest::Approx(0.0));
        CHECK(d(0, 2) == doctest::Approx(1.0 - (-0.5) / 2.0));
        CHECK(d(1, 2) == doctest::Approx(1.0 - 0.25 / 2.0));
        CHECK(d == d.transpose().eval());
    }
    SUBCASE("block max below one uses denominator one") {
        OneSampleStatMatrix small = t;
        small.values.at(0, 1) = 0.5;
        LocalTestResult r2 = res;
        r2.q_hat = 0.01;
        r2.block_max = 0.5;
        Eigen::MatrixXd d = dissimilarity(small, part, {r2}, 0.05);
        CHECK(d(0, 1) == doctest::Approx(0.5));
    }
    CHECK_THROWS_AS(dissimilarity(t, part, {res, res}, 0.05), ValidationError);
}

TEST_CASE("true-null count estimate") {
    CHECK(estimate_null_count({0.9, 0.8, 0.2, 0.1}) == doctest::Approx(4.0));
    CHECK(estimate_null_count({0.9, 0.1, 0.1, 0.1}) == doctest::Approx(2.0));
    // cap at the number of hypotheses
    CHECK(estimate_null_count({0.9, 0.95}) == doctest::Approx(2.0));
    CHECK(estimate_null_count({}) == 0.0);
    CHECK_THROWS_AS(estimate_null_count({0.5}, 1.5), ValidationError);
}

TEST_CASE("data-driven block size") {
    DataMatrix x = make_data(gaussian(60, 10, 21));
    const int s0 = select_block_size(x, 100, 13, 0.5, false, 1);
    CHECK(s0 >= static_cast<int>(std::ceil(std::log(10.0))));
    CHECK(s0 <= 10);
    CHECK(select_block_size(x, 100, 13, 0.5, false, 4) == s0);
}

TEST_CASE("average-linkage tree: hand example") {
    Eigen::MatrixXd d(3, 3);
    d << 0, 1, 4, 1, 0, 2, 4, 2, 0;
    ClusterTree tree = hierarchical_cluster(d);
    REQUIRE(tree.merges.size() == 2);
    CHECK(tree.merges[0].left == 0);
    CHECK(tree.merges[0].right == 1);
    CHECK(tree.merges[0].height == 1.0);
    CHECK(tree.merges[0].size == 2);
    CHECK(tree.merges[1].left == 3);  // merged node keeps leaf 0, so it goes left
    CHECK(tree.merges[1].right == 2);
    CHECK(tree.merges[1].height == doctest::Approx(3.0));  // (4 + 2) / 2
    CHECK(tree.merges[1].size == 3);
}

TEST_CASE("average-linkage tree: ties pick the smallest member pair") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Ones(4, 4);
    d.diagonal().setZero();
    ClusterTree tree = hierarchical_cluster(d);
    CHECK(tree.merges[0].left == 0);
    CHECK(tree.merges[0].right == 1);
    // all remaining distances tie at 1; (0,2) beats (2,3) as a smallest-member pair
    CHECK(tree.merges[1].left == 4);
    CHECK(tree.merges[1].right == 2);
    CHECK(tree.merges[2].left == 5);
    CHECK(tree.merges[2].right == 3);
}

TEST_CASE("average-linkage tree matches the naive oracle") {
    std::mt19937_64 eng(31);
    std::uniform_real_distribution<double> unif(0.1, 2.0);
    const int p = 12;
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) d(i, j) = d(j, i) = unif(eng);

    ClusterTree tree = hierarchical_cluster(d);
    auto ref = oracle::naive_upgma(d);
    auto members = node_members(tree);
    REQUIRE(tree.merges.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        CHECK(members[tree.merges[i].left] == ref[i].left_members);
        CHECK(members[tree.merges[i].right] == ref[i].right_members);
        CHECK(tree.merges[i].height == doctest::Approx(ref[i].height).epsilon(1e-12));
    }
    for (std::size_t i = 1; i < tree.merges.size(); ++i)
        CHECK(tree.merges[i].height >= tree.merges[i - 1].height);
}

TEST_CASE("tree cutting") {
    Eigen::MatrixXd d(3, 3);
    d << 0, 1, 4, 1, 0, 2, 4, 2, 0;
    ClusterTree tree = hierarchical_cluster(d);
    CHECK(cut_tree(tree, 3) == std::vector<int>{0, 1, 2});
    CHECK(cut_tree(tree, 2) == std::vector<int>{0, 0, 1});
    CHECK(cut_tree(tree, 1) == std::vector<int>{0, 0, 0});
    CHECK_THROWS_AS(cut_tree(tree, 0), ValidationError);
    CHECK_THROWS_AS(cut_tree(tree, 4), ValidationError);

    CHECK(cut_tree_at_height(tree, 0.5) == std::vector<int>{0, 1, 2});
    CHECK(cut_tree_at_height(tree, 1.0) == std::vector<int>{0, 0, 1});
    CHECK(cut_tree_at_height(tree, 10.0) == std::vector<int>{0, 0, 0});
}

TEST_CASE("clustering pipeline end to end") {
    DataMatrix x = correlated_pair(100, 8, 41);
    ClusterPipelineResult result = cluster_pipeline(x, 0.05, 200, 5, 4, false, 1);
    CHECK(result.s0 == 4);
    CHECK(result.partition.S() == 3);
    CHECK(result.dissim.rows() == 8);
    CHECK((result.dissim - result.dissim.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(result.rejected_blocks >= 1);
    // the dependent pair should sit close together and merge first
    CHECK(result.dissim(0, 1) < 0.2);
    CHECK(result.tree.merges[0].left == 0);
    CHECK(result.tree.merges[0].right == 1);

    ClusterPipelineResult rerun = cluster_pipeline(x, 0.05, 200, 5, 4, false, 4);
    CHECK(rerun.dissim == result.dissim);

    ClusterPipelineResult chosen = cluster_pipeline(x, 0.05, 100, 5);
    CHECK(chosen.s0 >= static_cast<int>(std::ceil(std::log(8.0))));
}
