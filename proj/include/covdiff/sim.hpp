#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "covdiff/data_matrix.hpp"
#include "covdiff/two_sample.hpp"

namespace covdiff {

enum class CovKind { M1, M2, M3, M4 };
enum class InnovKind { D1, D2, D3 };

struct CovarianceSpec {
    CovKind kind = CovKind::M1;
    int p = 80;
    std::uint64_t seed = 0;
    // M1: block-diagonal correlation with randomized diagonal
    int block_size = 10;
    double block_corr = 0.55;
    double m1_diag_low = 0.5, m1_diag_high = 2.5;
    // M2: slow exponential decay
    double decay_base = 0.99;
    double decay_exponent = 1.0 / 3.0;
    // M3: long range dependence
    double hurst = 0.85;
    double m3_diag_low = 1.0, m3_diag_high = 2.0;
    // M4: tridiagonal plus random low-rank
    int k0 = 10;
    double tridiag = 0.5;
    double m4_diag_low = 1.0, m4_diag_high = 6.0;
};

// How the noncentrality parameter of the D3 second sample is drawn.
enum class NcpDraw { per_variable, shared };

struct InnovationSpec {
    InnovKind kind = InnovKind::D1;
    double gamma_shape = 4.0, gamma_rate = 10.0;    // D1
    double pois_mean = 1000.0, pois_prob = 0.15;    // D2
    double t_df = 5.0;                              // D3
    double ncp_low = -2.0, ncp_high = 2.0;
    bool noncentral = false;  // D3: draw t(ncp) instead of central t
    NcpDraw ncp_draw = NcpDraw::per_variable;
    // Rescale noncentral draws to the central t variance so that the two
    // samples share a common innovation variance and the null holds exactly.
    bool match_variance = true;

    void validate() const;
};

struct AlternativePair {
    Eigen::MatrixXd sigma1_star, sigma2_star;
    std::vector<std::pair<int, int>> q_support;  // strict-upper pairs, 0-based
    double lambda0 = 0.0;
    double tau = 0.0;
};

Eigen::MatrixXd gen_covariance(const CovarianceSpec& spec);

// Haar-uniform p x k0 orthonormal frame: QR of a Gaussian matrix with the
// R diagonal forced positive.
Eigen::MatrixXd sample_stiefel(int p, int k0, std::uint64_t seed);

// Rows are sigma_star^{1/2} z with i.i.d. innovation entries z. If
// clamp_magnitude is non-null it receives the PSD-repair clamp applied when
// factorizing sigma_star.
DataMatrix gen_sample(const Eigen::MatrixXd& sigma_star, const InnovationSpec& innov,
                      int n, std::uint64_t seed, double* clamp_magnitude = nullptr);

// Same, with the symmetric factor precomputed (factor * factor = sigma_star).
DataMatrix gen_sample_with_factor(const Eigen::MatrixXd& factor,
                                  const InnovationSpec& innov, int n, std::uint64_t seed);

// Sparse perturbation: floor(sparsity*p) nonzeros split between the two
// triangles, magnitudes Unif(tau/2, 3tau/2); both returned matrices are made
// PSD by the lambda0 shift.
AlternativePair build_alternative(const Eigen::MatrixXd& sigma_star, std::uint64_t seed,
                                  double sparsity = 0.05);

// Boundary gamma of the local-alternative class: the maximal standardized
// entrywise covariance difference divided by sqrt(log p).
double signal_strength(const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2,
                       const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2,
                       int n, int m);

struct ExperimentSummary {
    int reps = 0;
    int reject_bootstrap = 0;
    int reject_clx = 0;
    bool alternative = false;
    double clamp_magnitude = 0.0;   // PSD repair applied to the factor, if any
    double mean_gamma_hat = 0.0;    // estimated signal strength (alternative runs)
    double elapsed_seconds = 0.0;

    double frac_bootstrap() const { return reps ? double(reject_bootstrap) / reps : 0.0; }
    double frac_clx() const { return reps ? double(reject_clx) / reps : 0.0; }
    double se(double frac) const {
        return reps ? std::sqrt(frac * (1.0 - frac) / reps) : 0.0;
    }
};

// Size/power experiment: `reps` independent replications, each drawing fresh
// samples and running both the bootstrap test and the CLX baseline.
ExperimentSummary run_experiment(const CovarianceSpec& cov, const InnovationSpec& innov,
                                 int n1, int n2, int reps, const BootstrapConfig& cfg,
                                 bool alternative, std::uint64_t seed);

}  // namespace covdiff
