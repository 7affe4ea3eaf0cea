#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "covdiff/data_matrix.hpp"
#include "covdiff/moments.hpp"

namespace covdiff {

// Entrywise two-sample t-type statistics over all pairs k <= l, with the
// denominators (n^-1 s1 + m^-1 s2)^1/2 cached for reuse by the bootstrap.
struct PairStatMatrix {
    PackedSymmetric values;  // t_hat(k,l)
    PackedSymmetric denom;   // shared by observed and perturbed statistics

    int p() const { return values.dim(); }
};

struct BootstrapConfig {
    int B = 1500;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    int parallel = 0;  // 0 = COVDIFF_THREADS / hardware default

    void validate() const {
        if (B < 1) throw ValidationError("BootstrapConfig: B must be >= 1");
        if (!(alpha > 0.0 && alpha < 1.0))
            throw ValidationError("BootstrapConfig: alpha must be in (0,1)");
    }
};

struct TestReport {
    double statistic = 0.0;
    double critical_value = 0.0;
    double p_value = 1.0;
    bool reject = false;
    int argmax_k = -1, argmax_l = -1;  // 0-based; -1 when not applicable
    std::string method;                // "bootstrap" or "clx"
    int B = 0;
    double alpha = 0.0;
    std::uint64_t seed = 0;
    int n = 0, m = 0, p = 0;
};

PairStatMatrix t_stat_matrix(const MomentSummary& mx, const MomentSummary& my);

// Max of |t_hat| over k <= l and the first pair attaining it (lexicographic).
std::pair<double, std::pair<int, int>> t_max(const PairStatMatrix& t);

// One multiplier-bootstrap replicate: the perturbed max statistic for a given
// vector of n+m multipliers. Denominators are the cached ones, not recomputed.
double perturbed_t_max_one(const DataMatrix& x, const DataMatrix& y,
                           const MomentSummary& mx, const MomentSummary& my,
                           const PackedSymmetric& denom,
                           const std::vector<double>& g);

// B replicates, ascending. Replicate b draws its multipliers from substream
// (cfg.seed, b), so the output is identical at any parallelism degree.
std::vector<double> bootstrap_distribution(const DataMatrix& x, const DataMatrix& y,
                                           const BootstrapConfig& cfg);

// inf{t in dist : 1 - F_B(t) <= alpha}: the order statistic at ceil(B(1-alpha)).
double bootstrap_critical_value(const std::vector<double>& dist, double alpha);

// (1 + #{b : dist_b >= statistic}) / (B + 1).
double bootstrap_p_value(const std::vector<double>& dist, double statistic);

TestReport run_two_sample_test(const DataMatrix& x, const DataMatrix& y,
                               const BootstrapConfig& cfg);

// (1-alpha)-quantile of the type I extreme value distribution,
// -log(8*pi) - 2*log log (1-alpha)^-1.
double clx_quantile(double alpha);

// Extreme-value baseline: rejects when statistic^2 - 4 log p + log log p
// exceeds clx_quantile(alpha).
TestReport clx_test(double statistic, int p, double alpha);

}  // namespace covdiff
