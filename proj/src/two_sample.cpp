#include "covdiff/two_sample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "covdiff/parallel.hpp"
#include "covdiff/rng.hpp"

namespace covdiff {

PairStatMatrix t_stat_matrix(const MomentSummary& mx, const MomentSummary& my) {
    const int p = mx.p();
    if (p != my.p())
        throw ValidationError("t_stat_matrix: dimension mismatch (" + std::to_string(p) +
                              " vs " + std::to_string(my.p()) + ")");
    PairStatMatrix out;
    out.values = PackedSymmetric(p);
    out.denom = PackedSymmetric(p);
    const double inv_n = 1.0 / mx.n;
    const double inv_m = 1.0 / my.n;
    for (int k = 0; k < p; ++k) {
        for (int l = k; l < p; ++l) {
            const double var = inv_n * mx.s_hat(k, l) + inv_m * my.s_hat(k, l);
            if (var <= 0.0)
                throw DegeneracyError(k, l, "t_stat_matrix: zero variance for pair (" +
                                                std::to_string(k + 1) + "," +
                                                std::to_string(l + 1) + ")");
            const double d = std::sqrt(var);
            out.denom.at(k, l) = d;
            out.values.at(k, l) = (mx.sigma_hat(k, l) - my.sigma_hat(k, l)) / d;
        }
    }
    return out;
}

std::pair<double, std::pair<int, int>> t_max(const PairStatMatrix& t) {
    const int p = t.p();
    double best = -1.0;
    std::pair<int, int> arg{0, 0};
    for (int k = 0; k < p; ++k) {
        for (int l = k; l < p; ++l) {
            const double v = std::abs(t.values(k, l));
            if (v > best) {
                best = v;
                arg = {k, l};
            }
        }
    }
    return {best, arg};
}

namespace {

// Cached centered data and moment matrices shared by all bootstrap replicates.
struct BootstrapContext {
    Eigen::MatrixXd c1, c2;          // centered samples
    Eigen::MatrixXd sigma1, sigma2;  // dense sigma_hat
    Eigen::MatrixXd inv_denom;       // dense 1/denom

    BootstrapContext(const DataMatrix& x, const DataMatrix& y, const MomentSummary& mx,
                     const MomentSummary& my, const PackedSymmetric& denom) {
        c1 = x.values.rowwise() - mx.means.transpose();
        c2 = y.values.rowwise() - my.means.transpose();
        sigma1 = mx.sigma_hat.to_dense();
        sigma2 = my.sigma_hat.to_dense();
        inv_denom = denom.to_dense().cwiseInverse();
    }

    // max_{k<=l} |t_dagger|; the perturbed matrices are exactly symmetric so
    // the max over the full matrix equals the max over the upper triangle.
    double replicate(const Eigen::VectorXd& g) const {
        const auto n = c1.rows();
        const auto m = c2.rows();
        const Eigen::VectorXd g1 = g.head(n);
        const Eigen::VectorXd g2 = g.tail(m);
        Eigen::MatrixXd s1 = c1.transpose() * (g1.asDiagonal() * c1) / double(n) -
                             (g1.mean()) * sigma1;
        Eigen::MatrixXd s2 = c2.transpose() * (g2.asDiagonal() * c2) / double(m) -
                             (g2.mean()) * sigma2;
        return ((s1 - s2).cwiseProduct(inv_denom)).cwiseAbs().maxCoeff();
    }
};

}  // namespace

double perturbed_t_max_one(const DataMatrix& x, const DataMatrix& y,
                           const MomentSummary& mx, const MomentSummary& my,
                           const PackedSymmetric& denom, const std::vector<double>& g) {
    const auto total = static_cast<std::size_t>(x.n()) + static_cast<std::size_t>(y.n());
    if (g.size() != total)
        throw ValidationError("perturbed_t_max_one: multiplier vector length " +
                              std::to_string(g.size()) + ", expected " + std::to_string(total));
    BootstrapContext ctx(x, y, mx, my, denom);
    return ctx.replicate(Eigen::Map<const Eigen::VectorXd>(g.data(), g.size()));
}

std::vector<double> bootstrap_distribution(const DataMatrix& x, const DataMatrix& y,
                                           const BootstrapConfig& cfg) {
    cfg.validate();
    MomentSummary mx = compute_moment_summary(x);
    MomentSummary my = compute_moment_summary(y);
    PairStatMatrix t = t_stat_matrix(mx, my);
    BootstrapContext ctx(x, y, mx, my, t.denom);

    const std::size_t total = static_cast<std::size_t>(x.n()) + y.n();
    std::vector<double> dist(cfg.B);
    parallel_for(cfg.B, cfg.parallel, [&](std::size_t b) {
        auto eng = rng::substream(cfg.seed, b);
        std::normal_distribution<double> normal(0.0, 1.0);
        Eigen::VectorXd g(total);
        for (std::size_t i = 0; i < total; ++i) g[i] = normal(eng);
        dist[b] = ctx.replicate(g);
    });
    std::sort(dist.begin(), dist.end());
    return dist;
}

double bootstrap_critical_value(const std::vector<double>& dist, double alpha) {
    const std::size_t B = dist.size();
    if (B == 0) throw ValidationError("bootstrap_critical_value: empty distribution");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ValidationError("bootstrap_critical_value: alpha must be in (0,1)");
    // smallest i with 1 - F_B(dist[i]) = (B-i-1)/B <= alpha; the epsilon
    // absorbs round-off in alpha*B at exact integer boundaries
    const double bound = alpha * double(B) * (1.0 + 1e-12);
    for (std::size_t i = 0; i < B; ++i) {
        if (double(B - i - 1) <= bound) return dist[i];
    }
    return dist.back();
}

double bootstrap_p_value(const std::vector<double>& dist, double statistic) {
    const std::size_t B = dist.size();
    std::size_t count = 0;
    for (double v : dist)
        if (v >= statistic) ++count;
    return double(count + 1) / double(B + 1);
}

TestReport run_two_sample_test(const DataMatrix& x, const DataMatrix& y,
                               const BootstrapConfig& cfg) {
    MomentSummary mx = compute_moment_summary(x);
    MomentSummary my = compute_moment_summary(y);
    PairStatMatrix t = t_stat_matrix(mx, my);
    auto [stat, arg] = t_max(t);
    std::vector<double> dist = bootstrap_distribution(x, y, cfg);

    TestReport report;
    report.statistic = stat;
    report.critical_value = bootstrap_critical_value(dist, cfg.alpha);
    report.p_value = bootstrap_p_value(dist, stat);
    report.reject = stat > report.critical_value;
    report.argmax_k = arg.first;
    report.argmax_l = arg.second;
    report.method = "bootstrap";
    report.B = cfg.B;
    report.alpha = cfg.alpha;
    report.seed = cfg.seed;
    report.n = x.n();
    report.m = y.n();
    report.p = x.p();
    return report;
}

double clx_quantile(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ValidationError("clx_quantile: alpha must be in (0,1)");
    return -std::log(8.0 * std::numbers::pi) - 2.0 * std::log(-std::log1p(-alpha));
}

TestReport clx_test(double statistic, int p, double alpha) {
    if (p < 2) throw ValidationError("clx_test: p must be >= 2");
    const double q = clx_quantile(alpha);
    const double shift = 4.0 * std::log(double(p)) - std::log(std::log(double(p)));
    const double z = statistic * statistic - shift;

    TestReport report;
    report.statistic = statistic;
    report.critical_value = std::sqrt(std::max(q + shift, 0.0));
    // limiting law: P(z <= t) -> exp(-(8 pi)^{-1/2} e^{-t/2})
    report.p_value = -std::expm1(-std::exp(-z / 2.0) / std::sqrt(8.0 * std::numbers::pi));
    report.reject = z > q;
    report.method = "clx";
    report.alpha = alpha;
    report.p = p;
    return report;
}

}  // namespace covdiff
