#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "covdiff/data_matrix.hpp"
#include "covdiff/packed_symmetric.hpp"

namespace covdiff {

// Sample moments of one data matrix. Both estimators use divisor n (not
// n-1), matching the estimands the test statistic is built on.
struct MomentSummary {
    int n = 0;
    Eigen::VectorXd means;       // length p
    PackedSymmetric sigma_hat;   // sigma_hat(k,l) = n^-1 sum_i c_ik c_il
    PackedSymmetric s_hat;       // s_hat(k,l) = n^-1 sum_i (c_ik c_il - sigma_hat(k,l))^2

    int p() const { return sigma_hat.dim(); }
};

MomentSummary compute_moment_summary(const DataMatrix& data);

// Assumption-(C3)-style diagnostic: the normalized fourth-moment ratios
// s_hat(k,l) / (sigma_hat(k,k) * sigma_hat(l,l)). Never throws on degenerate
// data; degenerate variables and low-ratio pairs are reported instead.
struct NondegeneracyReport {
    double min_ratio;                              // over pairs with positive diagonals
    std::vector<std::pair<int, int>> low_pairs;    // ratio below tol (0-based)
    std::vector<int> degenerate_variables;         // sigma_hat(k,k) == 0
};

NondegeneracyReport check_nondegeneracy(const MomentSummary& m, double tol);

// Symmetric PSD square root via eigendecomposition. Eigenvalues in
// [-tol, 0) are clamped to 0; an eigenvalue below -tol raises NotPsdError.
// If clamped_magnitude is non-null it receives the most negative eigenvalue
// that was clamped (0 when none were).
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& s, double tol,
                               double* clamped_magnitude = nullptr);

// Overload with the default tolerance 1e-10 * largest |eigenvalue|.
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& s);

double min_eigenvalue(const Eigen::MatrixXd& s);

}  // namespace covdiff
