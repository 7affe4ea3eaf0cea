#include "covdiff/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <string>

#include "covdiff/moments.hpp"
#include "covdiff/parallel.hpp"
#include "covdiff/rng.hpp"

namespace covdiff {

namespace {

constexpr std::uint64_t kTagDiag = 11, kTagFrame = 12, kTagInnov = 13, kTagNcp = 14;
constexpr std::uint64_t kTagAlt = 21, kTagX = 22, kTagY = 23, kTagBoot = 24;

Eigen::VectorXd uniform_vector(int p, double low, double high, std::mt19937_64 eng) {
    std::uniform_real_distribution<double> unif(low, high);
    Eigen::VectorXd out(p);
    for (int i = 0; i < p; ++i) out[i] = unif(eng);
    return out;
}

}  // namespace

void InnovationSpec::validate() const {
    if (gamma_shape <= 0.0 || gamma_rate <= 0.0)
        throw ValidationError("InnovationSpec: gamma shape and rate must be positive");
    if (!(pois_prob >= 0.0 && pois_prob <= 1.0) || pois_mean < 0.0)
        throw ValidationError("InnovationSpec: invalid zero-inflated Poisson parameters");
    if (t_df <= 2.0)
        throw ValidationError("InnovationSpec: t degrees of freedom must exceed 2");
    if (ncp_low > ncp_high)
        throw ValidationError("InnovationSpec: ncp bounds out of order");
}

Eigen::MatrixXd gen_covariance(const CovarianceSpec& spec) {
    const int p = spec.p;
    if (p < 2) throw ValidationError("gen_covariance: p must be >= 2");
    Eigen::MatrixXd sigma(p, p);

    switch (spec.kind) {
        case CovKind::M1: {
            const int bs = spec.block_size;
            Eigen::VectorXd d = uniform_vector(p, spec.m1_diag_low, spec.m1_diag_high,
                                               rng::substream(spec.seed, kTagDiag));
            const int full_blocks = p / bs;
            for (int k = 0; k < p; ++k) {
                for (int l = 0; l < p; ++l) {
                    double a = 0.0;
                    if (k == l) {
                        a = 1.0;
                    } else if (k / bs == l / bs && k / bs < full_blocks) {
                        a = spec.block_corr;
                    }
                    sigma(k, l) = std::sqrt(d[k] * d[l]) * a;
                }
            }
            break;
        }
        case CovKind::M2: {
            for (int k = 0; k < p; ++k)
                for (int l = 0; l < p; ++l)
                    sigma(k, l) = std::pow(spec.decay_base,
                                           std::pow(double(std::abs(k - l)), spec.decay_exponent));
            break;
        }
        case CovKind::M3: {
            const double h2 = 2.0 * spec.hurst;
            Eigen::VectorXd d = uniform_vector(p, spec.m3_diag_low, spec.m3_diag_high,
                                               rng::substream(spec.seed, kTagDiag));
            for (int k = 0; k < p; ++k) {
                for (int l = 0; l < p; ++l) {
                    if (k == l) {
                        sigma(k, l) = d[k];
                    } else {
                        const double dist = double(std::abs(k - l));
                        sigma(k, l) = (std::pow(dist + 1.0, h2) + std::pow(dist - 1.0, h2) -
                                       2.0 * std::pow(dist, h2)) /
                                      2.0;
                    }
                }
            }
            break;
        }
        case CovKind::M4: {
            if (spec.k0 > p)
                throw ValidationError("gen_covariance: M4 requires k0 <= p");
            Eigen::MatrixXd f = Eigen::MatrixXd::Identity(p, p);
            for (int k = 0; k + 1 < p; ++k) f(k, k + 1) = f(k + 1, k) = spec.tridiag;
            Eigen::MatrixXd u = sample_stiefel(p, spec.k0, rng::derive(spec.seed, kTagFrame));
            Eigen::MatrixXd core = f + u * u.transpose();
            Eigen::VectorXd d = uniform_vector(p, spec.m4_diag_low, spec.m4_diag_high,
                                               rng::substream(spec.seed, kTagDiag));
            Eigen::VectorXd sq = d.cwiseSqrt();
            sigma = sq.asDiagonal() * core * sq.asDiagonal();
            break;
        }
    }
    // force exact symmetry
    for (int k = 0; k < p; ++k)
        for (int l = k + 1; l < p; ++l) sigma(l, k) = sigma(k, l);
    return sigma;
}

Eigen::MatrixXd sample_stiefel(int p, int k0, std::uint64_t seed) {
    if (k0 < 1 || k0 > p) throw ValidationError("sample_stiefel: need 1 <= k0 <= p");
    auto eng = rng::substream(seed, kTagFrame);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd gauss(p, k0);
    for (int j = 0; j < k0; ++j)
        for (int i = 0; i < p; ++i) gauss(i, j) = normal(eng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(p, k0);
    Eigen::VectorXd rdiag = qr.matrixQR().topLeftCorner(k0, k0).diagonal();
    for (int j = 0; j < k0; ++j)
        if (rdiag[j] < 0.0) q.col(j) = -q.col(j);
    return q;
}

namespace {

// Variance of the noncentral t with df nu and noncentrality mu.
double noncentral_t_variance(double nu, double mu) {
    const double c = std::sqrt(nu / 2.0) *
                     std::exp(std::lgamma((nu - 1.0) / 2.0) - std::lgamma(nu / 2.0));
    return nu * (1.0 + mu * mu) / (nu - 2.0) - mu * mu * c * c;
}

}  // namespace

DataMatrix gen_sample_with_factor(const Eigen::MatrixXd& factor,
                                  const InnovationSpec& innov, int n, std::uint64_t seed) {
    innov.validate();
    if (n < 2) throw ValidationError("gen_sample: n must be >= 2");
    const int p = static_cast<int>(factor.cols());

    Eigen::MatrixXd z(n, p);
    auto eng = rng::substream(seed, kTagInnov);
    switch (innov.kind) {
        case InnovKind::D1: {
            std::gamma_distribution<double> gamma(innov.gamma_shape, 1.0 / innov.gamma_rate);
            for (int j = 0; j < p; ++j)
                for (int i = 0; i < n; ++i) z(i, j) = gamma(eng);
            break;
        }
        case InnovKind::D2: {
            std::bernoulli_distribution nonzero(innov.pois_prob);
            std::poisson_distribution<long> pois(innov.pois_mean);
            for (int j = 0; j < p; ++j)
                for (int i = 0; i < n; ++i)
                    z(i, j) = nonzero(eng) ? double(pois(eng)) : 0.0;
            break;
        }
        case InnovKind::D3: {
            if (!innov.noncentral) {
                std::student_t_distribution<double> t(innov.t_df);
                for (int j = 0; j < p; ++j)
                    for (int i = 0; i < n; ++i) z(i, j) = t(eng);
            } else {
                auto ncp_eng = rng::substream(seed, kTagNcp);
                std::uniform_real_distribution<double> ncp_unif(innov.ncp_low, innov.ncp_high);
                std::normal_distribution<double> normal(0.0, 1.0);
                std::chi_squared_distribution<double> chi2(innov.t_df);
                const double central_var = innov.t_df / (innov.t_df - 2.0);
                double mu = ncp_unif(ncp_eng);
                double scale = innov.match_variance
                                   ? std::sqrt(central_var / noncentral_t_variance(innov.t_df, mu))
                                   : 1.0;
                for (int j = 0; j < p; ++j) {
                    if (j > 0 && innov.ncp_draw == NcpDraw::per_variable) {
                        mu = ncp_unif(ncp_eng);
                        scale = innov.match_variance
                                    ? std::sqrt(central_var /
                                                noncentral_t_variance(innov.t_df, mu))
                                    : 1.0;
                    }
                    for (int i = 0; i < n; ++i) {
                        const double num = normal(eng) + mu;
                        z(i, j) = scale * num / std::sqrt(chi2(eng) / innov.t_df);
                    }
                }
            }
            break;
        }
    }
    DataMatrix out;
    out.values = z * factor;  // factor is symmetric: row_i = factor * z_i
    return out;
}

DataMatrix gen_sample(const Eigen::MatrixXd& sigma_star, const InnovationSpec& innov,
                      int n, std::uint64_t seed, double* clamp_magnitude) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> probe(sigma_star, Eigen::EigenvaluesOnly);
    const double top = std::max(probe.eigenvalues().cwiseAbs().maxCoeff(), 1.0);
    Eigen::MatrixXd factor = symmetric_sqrt(sigma_star, 1e-10 * top, clamp_magnitude);
    return gen_sample_with_factor(factor, innov, n, seed);
}

AlternativePair build_alternative(const Eigen::MatrixXd& sigma_star, std::uint64_t seed,
                                  double sparsity) {
    const int p = static_cast<int>(sigma_star.rows());
    if (p < 2) throw ValidationError("build_alternative: p must be >= 2");
    const int nnz = static_cast<int>(std::floor(sparsity * p));
    if (nnz < 2)
        throw ValidationError(
            "build_alternative: floor(sparsity*p) < 2; raise p or the sparsity fraction");
    const int upper_count = nnz / 2;

    AlternativePair out;
    out.tau = 8.0 * std::max(sigma_star.diagonal().maxCoeff(), std::sqrt(std::log(double(p))));

    auto eng = rng::substream(seed, kTagAlt);
    std::uniform_int_distribution<int> pick_k(0, p - 1);
    std::set<std::pair<int, int>> support;
    while (static_cast<int>(support.size()) < upper_count) {
        int k = pick_k(eng), l = pick_k(eng);
        if (k == l) continue;
        if (k > l) std::swap(k, l);
        support.insert({k, l});
    }
    std::uniform_real_distribution<double> mag(out.tau / 2.0, 3.0 * out.tau / 2.0);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(p, p);
    for (const auto& [k, l] : support) {
        const double v = mag(eng);
        q(k, l) = q(l, k) = v;
        out.q_support.emplace_back(k, l);
    }

    out.lambda0 = std::abs(std::min(min_eigenvalue(sigma_star + q),
                                    min_eigenvalue(sigma_star))) +
                  0.05;
    Eigen::MatrixXd shift = out.lambda0 * Eigen::MatrixXd::Identity(p, p);
    out.sigma1_star = sigma_star + shift;
    out.sigma2_star = sigma_star + q + shift;
    return out;
}

double signal_strength(const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2,
                       const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2,
                       int n, int m) {
    const int p = static_cast<int>(sigma1.rows());
    if (sigma2.rows() != p || s1.rows() != p || s2.rows() != p)
        throw ValidationError("signal_strength: dimension mismatch");
    double best = 0.0;
    for (int k = 0; k < p; ++k) {
        for (int l = k; l < p; ++l) {
            const double var = s1(k, l) / n + s2(k, l) / m;
            if (var <= 0.0)
                throw DegeneracyError(k, l, "signal_strength: zero variance for pair (" +
                                                std::to_string(k + 1) + "," +
                                                std::to_string(l + 1) + ")");
            best = std::max(best, std::abs(sigma1(k, l) - sigma2(k, l)) / std::sqrt(var));
        }
    }
    return best / std::sqrt(std::log(double(p)));
}

ExperimentSummary run_experiment(const CovarianceSpec& cov, const InnovationSpec& innov,
                                 int n1, int n2, int reps, const BootstrapConfig& cfg,
                                 bool alternative, std::uint64_t seed) {
    cfg.validate();
    if (reps < 0) throw ValidationError("run_experiment: reps must be >= 0");
    const auto start = std::chrono::steady_clock::now();

    ExperimentSummary summary;
    summary.reps = reps;
    summary.alternative = alternative;
    if (reps == 0) return summary;

    Eigen::MatrixXd sigma_star = gen_covariance(cov);
    Eigen::MatrixXd sigma1 = sigma_star, sigma2 = sigma_star;
    if (alternative) {
        AlternativePair alt = build_alternative(sigma_star, rng::derive(seed, kTagAlt));
        sigma1 = alt.sigma1_star;
        sigma2 = alt.sigma2_star;
    }

    // PSD repair: clamp whatever negative eigenvalues the structure produced
    // (M3's randomized diagonal can be slightly indefinite) and record the
    // magnitude instead of failing the experiment.
    auto repair_tol = [](const Eigen::MatrixXd& s) {
        const double base = 1e-10 * std::max(s.cwiseAbs().maxCoeff() * s.rows(), 1.0);
        const double lo = min_eigenvalue(s);
        return lo < 0.0 ? std::max(base, -lo * (1.0 + 1e-12)) : base;
    };
    double clamp1 = 0.0, clamp2 = 0.0;
    Eigen::MatrixXd factor1 = symmetric_sqrt(sigma1, repair_tol(sigma1), &clamp1);
    Eigen::MatrixXd factor2 = symmetric_sqrt(sigma2, repair_tol(sigma2), &clamp2);
    summary.clamp_magnitude = std::max(clamp1, clamp2);

    InnovationSpec innov_x = innov;
    innov_x.noncentral = false;
    InnovationSpec innov_y = innov;
    innov_y.noncentral = (innov.kind == InnovKind::D3);

    std::vector<char> rej_boot(reps, 0), rej_clx(reps, 0);
    std::vector<double> gamma_hat(reps, 0.0);
    parallel_for(reps, cfg.parallel, [&](std::size_t r) {
        DataMatrix x = gen_sample_with_factor(factor1, innov_x, n1, rng::derive(seed, kTagX, r));
        DataMatrix y = gen_sample_with_factor(factor2, innov_y, n2, rng::derive(seed, kTagY, r));
        BootstrapConfig rep_cfg = cfg;
        rep_cfg.seed = rng::derive(seed, kTagBoot, r);
        rep_cfg.parallel = 1;
        TestReport boot = run_two_sample_test(x, y, rep_cfg);
        TestReport clx = clx_test(boot.statistic, boot.p, cfg.alpha);
        rej_boot[r] = boot.reject;
        rej_clx[r] = clx.reject;
        if (alternative) {
            MomentSummary mx = compute_moment_summary(x);
            MomentSummary my = compute_moment_summary(y);
            gamma_hat[r] = signal_strength(mx.sigma_hat.to_dense(), my.sigma_hat.to_dense(),
                                           mx.s_hat.to_dense(), my.s_hat.to_dense(), n1, n2);
        }
    });
    for (int r = 0; r < reps; ++r) {
        summary.reject_bootstrap += rej_boot[r];
        summary.reject_clx += rej_clx[r];
        summary.mean_gamma_hat += gamma_hat[r];
    }
    summary.mean_gamma_hat /= reps;
    summary.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return summary;
}

}  // namespace covdiff
