#include "covdiff/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "covdiff/parallel.hpp"
#include "covdiff/rng.hpp"

namespace covdiff {

OneSampleStatMatrix one_sample_t_matrix(const MomentSummary& m) {
    const int p = m.p();
    OneSampleStatMatrix out;
    out.n = m.n;
    out.values = PackedSymmetric(p);
    out.s_hat = PackedSymmetric(p);
    const double sqrt_n = std::sqrt(double(m.n));
    for (int k = 0; k < p; ++k) {
        for (int l = k + 1; l < p; ++l) {
            const double s = m.s_hat(k, l);
            if (s <= 0.0)
                throw DegeneracyError(k, l, "one_sample_t_matrix: zero s_hat for pair (" +
                                                std::to_string(k + 1) + "," +
                                                std::to_string(l + 1) + ")");
            out.s_hat.at(k, l) = s;
            out.values.at(k, l) = sqrt_n * m.sigma_hat(k, l) / std::sqrt(s);
        }
    }
    return out;
}

BlockPartition block_partition(int p, int s0) {
    if (s0 < 1) throw ValidationError("block_partition: s0 must be >= 1");
    if (p < 2) throw ValidationError("block_partition: p must be >= 2");
    s0 = std::min(s0, p);
    const int nc = (p + s0 - 1) / s0;
    BlockPartition part;
    part.p = p;
    part.s0 = s0;
    part.blocks.reserve(static_cast<std::size_t>(nc) * (nc + 1) / 2);
    for (int a = 0; a < nc; ++a) {
        for (int b = a; b < nc; ++b) {
            std::vector<std::pair<int, int>> block;
            const int k_end = std::min((a + 1) * s0, p);
            const int l_end = std::min((b + 1) * s0, p);
            for (int k = a * s0; k < k_end; ++k)
                for (int l = std::max(b * s0, k + 1); l < l_end; ++l)
                    block.emplace_back(k, l);
            part.blocks.push_back(std::move(block));
        }
    }
    return part;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double block_max_of(const PackedSymmetric& values,
                    const std::vector<std::pair<int, int>>& block, bool absolute) {
    double best = kNegInf;
    for (const auto& [k, l] : block) {
        const double v = absolute ? std::abs(values(k, l)) : values(k, l);
        best = std::max(best, v);
    }
    return best;
}

// One multiplier-bootstrap sweep shared by every candidate partition: for
// each replicate b the full perturbed matrix is formed once and reduced to
// per-block maxima for every partition in `parts`.
// Returns maxima[part][block][b].
std::vector<std::vector<std::vector<double>>> one_sample_block_maxima(
    const DataMatrix& x, const MomentSummary& m, const OneSampleStatMatrix& t,
    const std::vector<const BlockPartition*>& parts, int B, std::uint64_t seed,
    bool absolute, int parallel) {
    const int p = m.p();
    const int n = m.n;
    Eigen::MatrixXd centered = x.values.rowwise() - m.means.transpose();
    Eigen::MatrixXd sigma = m.sigma_hat.to_dense();
    // t_dagger scale sqrt(n / s_hat), strict upper triangle only
    Eigen::MatrixXd weight = Eigen::MatrixXd::Zero(p, p);
    for (int k = 0; k < p; ++k)
        for (int l = k + 1; l < p; ++l)
            weight(k, l) = weight(l, k) = std::sqrt(double(n) / t.s_hat(k, l));

    std::vector<std::vector<std::vector<double>>> maxima(parts.size());
    for (std::size_t j = 0; j < parts.size(); ++j)
        maxima[j].assign(parts[j]->blocks.size(), std::vector<double>(B));

    parallel_for(B, parallel, [&](std::size_t b) {
        auto eng = rng::substream(seed, b);
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd g(n);
        for (int i = 0; i < n; ++i) g[i] = normal(eng);
        Eigen::MatrixXd perturbed =
            ((centered.transpose() * (g.asDiagonal() * centered) / double(n) -
              g.mean() * sigma)
                 .cwiseProduct(weight))
                .eval();
        for (std::size_t j = 0; j < parts.size(); ++j) {
            const auto& blocks = parts[j]->blocks;
            for (std::size_t s = 0; s < blocks.size(); ++s) {
                double best = kNegInf;
                for (const auto& [k, l] : blocks[s]) {
                    const double v = absolute ? std::abs(perturbed(k, l)) : perturbed(k, l);
                    best = std::max(best, v);
                }
                maxima[j][s][b] = best;
            }
        }
    });
    return maxima;
}

std::vector<LocalTestResult> p_values_from_maxima(
    const OneSampleStatMatrix& t, const BlockPartition& part,
    const std::vector<std::vector<double>>& maxima, bool absolute) {
    const int B = maxima.empty() ? 0 : static_cast<int>(maxima[0].size());
    std::vector<LocalTestResult> results(part.S());
    std::vector<double> p_hats(part.S());
    for (int s = 0; s < part.S(); ++s) {
        results[s].block = s;
        if (part.blocks[s].empty()) {
            results[s].block_max = kNegInf;
            p_hats[s] = 1.0;
            continue;
        }
        const double obs = block_max_of(t.values, part.blocks[s], absolute);
        results[s].block_max = obs;
        int count = 0;
        for (double v : maxima[s])
            if (v >= obs) ++count;
        p_hats[s] = double(count + 1) / double(B + 1);
    }
    std::vector<double> q_hats = bh_adjust(p_hats);
    for (int s = 0; s < part.S(); ++s) {
        results[s].p_hat = p_hats[s];
        results[s].q_hat = q_hats[s];
    }
    return results;
}

}  // namespace

std::vector<LocalTestResult> local_p_values(const OneSampleStatMatrix& t,
                                            const BlockPartition& part,
                                            const DataMatrix& x, const MomentSummary& m,
                                            int B, std::uint64_t seed, bool absolute,
                                            int parallel) {
    if (B < 1) throw ValidationError("local_p_values: B must be >= 1");
    if (part.p != t.p())
        throw ValidationError("local_p_values: partition and statistics dimension mismatch");
    auto maxima =
        one_sample_block_maxima(x, m, t, {&part}, B, seed, absolute, parallel);
    return p_values_from_maxima(t, part, maxima[0], absolute);
}

std::vector<double> bh_adjust(const std::vector<double>& p_values) {
    const int s_total = static_cast<int>(p_values.size());
    for (double pv : p_values)
        if (!(pv >= 0.0 && pv <= 1.0))
            throw ValidationError("bh_adjust: p-value outside [0,1]");
    std::vector<int> order(s_total);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return p_values[a] < p_values[b]; });
    std::vector<double> q(s_total);
    double running = 1.0;
    for (int i = s_total - 1; i >= 0; --i) {
        running = std::min(running, double(s_total) * p_values[order[i]] / double(i + 1));
        q[order[i]] = running;
    }
    return q;
}

Eigen::MatrixXd dissimilarity(const OneSampleStatMatrix& t, const BlockPartition& part,
                              const std::vector<LocalTestResult>& results, double pi) {
    if (!(pi > 0.0 && pi < 1.0))
        throw ValidationError("dissimilarity: pi must be in (0,1)");
    if (static_cast<int>(results.size()) != part.S())
        throw ValidationError("dissimilarity: results size does not match partition");
    const int p = part.p;
    Eigen::MatrixXd d = Eigen::MatrixXd::Ones(p, p);
    d.diagonal().setZero();
    for (int s = 0; s < part.S(); ++s) {
        if (!(results[s].q_hat < pi)) continue;
        const double denom = std::max(results[s].block_max, 1.0);
        for (const auto& [k, l] : part.blocks[s])
            d(k, l) = d(l, k) = 1.0 - t.values(k, l) / denom;
    }
    return d;
}

double estimate_null_count(const std::vector<double>& p_values, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw ValidationError("estimate_null_count: lambda must be in (0,1)");
    int count = 0;
    for (double pv : p_values)
        if (pv > lambda) ++count;
    return std::min(double(count) / (1.0 - lambda), double(p_values.size()));
}

int select_block_size(const DataMatrix& x, int B, std::uint64_t seed, double lambda,
                      bool absolute, int parallel) {
    MomentSummary m = compute_moment_summary(x);
    OneSampleStatMatrix t = one_sample_t_matrix(m);
    const int p = m.p();

    std::vector<BlockPartition> parts;
    parts.reserve(p);
    for (int s = 1; s <= p; ++s) parts.push_back(block_partition(p, s));
    std::vector<const BlockPartition*> part_ptrs;
    for (const auto& part : parts) part_ptrs.push_back(&part);
    auto maxima = one_sample_block_maxima(x, m, t, part_ptrs, B, seed, absolute, parallel);

    const int floor_s = static_cast<int>(std::ceil(std::log(double(p))));
    int best_s = -1;
    double best_objective = std::numeric_limits<double>::infinity();
    int fallback_s = p;
    for (int s = 1; s <= p; ++s) {
        const BlockPartition& part = parts[s - 1];
        const double S = double(part.S());
        auto results = p_values_from_maxima(t, part, maxima[s - 1], absolute);
        std::vector<double> p_hats(results.size());
        for (std::size_t i = 0; i < results.size(); ++i) p_hats[i] = results[i].p_hat;
        const double s0_hat = estimate_null_count(p_hats, lambda);
        const bool satisfied = (part.S() == 1) || (s0_hat <= S / std::log(S));
        if (satisfied) {
            best_s = s;
            break;
        }
        const double objective = s0_hat * std::log(S) / S;
        if (objective < best_objective) {
            best_objective = objective;
            fallback_s = s;
        }
    }
    if (best_s < 0) best_s = fallback_s;  // unreachable: S(p) == 1 always satisfies
    return std::max(std::max(floor_s, 1), best_s);
}

ClusterTree hierarchical_cluster(const Eigen::MatrixXd& d) {
    const int p = static_cast<int>(d.rows());
    if (d.cols() != p || p < 2)
        throw ValidationError("hierarchical_cluster: need a square matrix with p >= 2");

    struct Cluster {
        int node;      // id in the merge tree
        int smallest;  // smallest leaf index, for tie-breaking and labeling
        int size;
    };
    std::vector<Cluster> active;
    for (int i = 0; i < p; ++i) active.push_back({i, i, 1});
    Eigen::MatrixXd dist = d;

    ClusterTree tree;
    tree.leaves = p;
    for (int step = 0; step < p - 1; ++step) {
        const int nc = static_cast<int>(active.size());
        int bi = 0, bj = 1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < nc; ++i) {
            for (int j = i + 1; j < nc; ++j) {
                const double v = dist(i, j);
                const auto lo = std::min(active[i].smallest, active[j].smallest);
                const auto hi = std::max(active[i].smallest, active[j].smallest);
                const auto blo = std::min(active[bi].smallest, active[bj].smallest);
                const auto bhi = std::max(active[bi].smallest, active[bj].smallest);
                if (v < best || (v == best && std::pair(lo, hi) < std::pair(blo, bhi))) {
                    best = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        const Cluster a = active[bi];
        const Cluster b = active[bj];
        ClusterTree::Merge merge;
        merge.left = a.smallest <= b.smallest ? a.node : b.node;
        merge.right = a.smallest <= b.smallest ? b.node : a.node;
        merge.height = best;
        merge.size = a.size + b.size;
        tree.merges.push_back(merge);

        // Lance-Williams update for unweighted average linkage
        Eigen::MatrixXd next(nc - 1, nc - 1);
        std::vector<Cluster> next_active;
        std::vector<int> keep;
        for (int i = 0; i < nc; ++i)
            if (i != bi && i != bj) keep.push_back(i);
        for (std::size_t i = 0; i < keep.size(); ++i) {
            next_active.push_back(active[keep[i]]);
            for (std::size_t j = i + 1; j < keep.size(); ++j)
                next(i, j) = next(j, i) = dist(keep[i], keep[j]);
            next(i, i) = 0.0;
        }
        Cluster merged{p + step, std::min(a.smallest, b.smallest), merge.size};
        const int mi = static_cast<int>(keep.size());
        for (std::size_t i = 0; i < keep.size(); ++i) {
            next(i, mi) = next(mi, i) =
                (a.size * dist(keep[i], bi) + b.size * dist(keep[i], bj)) / merge.size;
        }
        next(mi, mi) = 0.0;
        next_active.push_back(merged);
        active = std::move(next_active);
        dist = std::move(next);
    }
    return tree;
}

namespace {

std::vector<int> labels_after_merges(const ClusterTree& tree, int merges_applied) {
    const int p = tree.leaves;
    // union-find over tree nodes
    std::vector<int> parent(p + merges_applied);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (int i = 0; i < merges_applied; ++i) {
        const auto& merge = tree.merges[i];
        parent[find(merge.left)] = parent[find(merge.right)] = p + i;
    }
    // cluster id = rank of the cluster's smallest member
    std::vector<int> root_smallest(p + merges_applied, p);
    for (int v = 0; v < p; ++v) {
        const int r = find(v);
        root_smallest[r] = std::min(root_smallest[r], v);
    }
    std::vector<int> smallest_sorted;
    for (int v = 0; v < p; ++v)
        if (root_smallest[find(v)] == v) smallest_sorted.push_back(v);
    std::vector<int> labels(p);
    for (int v = 0; v < p; ++v) {
        const int s = root_smallest[find(v)];
        labels[v] = static_cast<int>(
            std::lower_bound(smallest_sorted.begin(), smallest_sorted.end(), s) -
            smallest_sorted.begin());
    }
    return labels;
}

}  // namespace

std::vector<int> cut_tree(const ClusterTree& tree, int k) {
    const int p = tree.leaves;
    if (k < 1 || k > p) throw ValidationError("cut_tree: k must be in [1, p]");
    return labels_after_merges(tree, p - k);
}

std::vector<int> cut_tree_at_height(const ClusterTree& tree, double height) {
    if (height < 0.0) throw ValidationError("cut_tree_at_height: height must be >= 0");
    int applied = 0;
    while (applied < static_cast<int>(tree.merges.size()) &&
           tree.merges[applied].height <= height)
        ++applied;
    return labels_after_merges(tree, applied);
}

ClusterPipelineResult cluster_pipeline(const DataMatrix& x, double pi, int B,
                                       std::uint64_t seed, std::optional<int> s0_override,
                                       bool absolute, int parallel) {
    if (!(pi > 0.0 && pi < 1.0))
        throw ValidationError("cluster_pipeline: pi must be in (0,1)");
    MomentSummary m = compute_moment_summary(x);
    OneSampleStatMatrix t = one_sample_t_matrix(m);

    ClusterPipelineResult out;
    out.s0 = s0_override ? *s0_override
                         : select_block_size(x, B, rng::derive(seed, 31), 0.5, absolute,
                                             parallel);
    out.partition = block_partition(x.p(), out.s0);
    out.results = local_p_values(t, out.partition, x, m, B, rng::derive(seed, 32),
                                 absolute, parallel);
    for (const auto& r : out.results)
        if (r.q_hat < pi) ++out.rejected_blocks;
    out.dissim = dissimilarity(t, out.partition, out.results, pi);
    out.tree = hierarchical_cluster(out.dissim);
    return out;
}

}  // namespace covdiff
