// Independent reference implementations used only by tests. These stay
// deliberately naive (double loops, long double accumulation) and must not
// call the library code paths they check.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

// Naive O(n p^2) moment computation with long double accumulators.
struct Moments {
    Eigen::VectorXd means;
    Eigen::MatrixXd sigma;
    Eigen::MatrixXd s;
};

inline Moments naive_moments(const Eigen::MatrixXd& data) {
    const int n = static_cast<int>(data.rows());
    const int p = static_cast<int>(data.cols());
    Moments out;
    out.means.resize(p);
    for (int k = 0; k < p; ++k) {
        long double acc = 0.0L;
        for (int i = 0; i < n; ++i) acc += data(i, k);
        out.means[k] = double(acc / n);
    }
    out.sigma.resize(p, p);
    out.s.resize(p, p);
    for (int k = 0; k < p; ++k) {
        for (int l = 0; l < p; ++l) {
            long double acc = 0.0L;
            for (int i = 0; i < n; ++i)
                acc += (data(i, k) - out.means[k]) * (data(i, l) - out.means[l]);
            out.sigma(k, l) = double(acc / n);
            long double acc2 = 0.0L;
            for (int i = 0; i < n; ++i) {
                const long double dev =
                    (data(i, k) - out.means[k]) * (data(i, l) - out.means[l]) -
                    (long double)out.sigma(k, l);
                acc2 += dev * dev;
            }
            out.s(k, l) = double(acc2 / n);
        }
    }
    return out;
}

// Brute-force BH step-up: q_(i) = min_{j >= i} min(1, S p_(j) / j).
inline std::vector<double> naive_bh(const std::vector<double>& p_values) {
    const int s_total = static_cast<int>(p_values.size());
    std::vector<int> order(s_total);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return p_values[a] < p_values[b]; });
    std::vector<double> q(s_total);
    for (int i = 0; i < s_total; ++i) {
        double best = 1.0;
        for (int j = i; j < s_total; ++j)
            best = std::min(best, double(s_total) * p_values[order[j]] / double(j + 1));
        q[order[i]] = best;
    }
    return q;
}

// Naive UPGMA: average linkage recomputed from the raw pairwise matrix over
// explicit member sets at every step.
struct NaiveMerge {
    std::vector<int> left_members, right_members;  // sorted leaf sets
    double height;
};

inline std::vector<NaiveMerge> naive_upgma(const Eigen::MatrixXd& d) {
    const int p = static_cast<int>(d.rows());
    std::vector<std::vector<int>> clusters;
    for (int i = 0; i < p; ++i) clusters.push_back({i});
    std::vector<NaiveMerge> merges;
    while (clusters.size() > 1) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 1;
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                long double acc = 0.0L;
                for (int a : clusters[i])
                    for (int b : clusters[j]) acc += d(a, b);
                const double avg =
                    double(acc / (clusters[i].size() * clusters[j].size()));
                const auto lo = std::min(clusters[i].front(), clusters[j].front());
                const auto hi = std::max(clusters[i].front(), clusters[j].front());
                const auto blo = std::min(clusters[bi].front(), clusters[bj].front());
                const auto bhi = std::max(clusters[bi].front(), clusters[bj].front());
                if (avg < best ||
                    (avg == best && std::pair(lo, hi) < std::pair(blo, bhi))) {
                    best = avg;
                    bi = i;
                    bj = j;
                }
            }
        }
        NaiveMerge merge;
        auto& a = clusters[bi];
        auto& b = clusters[bj];
        if (a.front() > b.front()) std::swap(a, b);
        merge.left_members = a;
        merge.right_members = b;
        merge.height = best;
        std::vector<int> joined = a;
        joined.insert(joined.end(), b.begin(), b.end());
        std::sort(joined.begin(), joined.end());
        clusters.erase(clusters.begin() + bj);
        clusters[bi] = joined;
        merges.push_back(std::move(merge));
    }
    return merges;
}

}  // namespace oracle
