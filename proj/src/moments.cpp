#include "covdiff/moments.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <string>

namespace covdiff {

MomentSummary compute_moment_summary(const DataMatrix& data) {
    data.validate();
    const int n = data.n();
    const int p = data.p();

    MomentSummary out;
    out.n = n;
    out.means = data.values.colwise().mean();

    Eigen::MatrixXd centered = data.values.rowwise() - out.means.transpose();
    out.sigma_hat = PackedSymmetric(p);
    out.s_hat = PackedSymmetric(p);
    const double inv_n = 1.0 / n;
    for (int k = 0; k < p; ++k) {
        for (int l = k; l < p; ++l) {
            Eigen::ArrayXd prod = centered.col(k).array() * centered.col(l).array();
            const double sigma = prod.sum() * inv_n;
            out.sigma_hat.at(k, l) = sigma;
            out.s_hat.at(k, l) = (prod - sigma).square().sum() * inv_n;
        }
    }
    return out;
}

NondegeneracyReport check_nondegeneracy(const MomentSummary& m, double tol) {
    NondegeneracyReport report;
    report.min_ratio = std::numeric_limits<double>::infinity();
    const int p = m.p();
    for (int k = 0; k < p; ++k)
        if (m.sigma_hat(k, k) == 0.0) report.degenerate_variables.push_back(k);

    for (int k = 0; k < p; ++k) {
        for (int l = k; l < p; ++l) {
            const double denom = m.sigma_hat(k, k) * m.sigma_hat(l, l);
            if (denom <= 0.0) continue;  // covered by degenerate_variables
            const double ratio = m.s_hat(k, l) / denom;
            report.min_ratio = std::min(report.min_ratio, ratio);
            if (ratio < tol) report.low_pairs.emplace_back(k, l);
        }
    }
    return report;
}

namespace {

void require_symmetric(const Eigen::MatrixXd& s, const char* who) {
    if (s.rows() != s.cols())
        throw ValidationError(std::string(who) + ": matrix is not square");
    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
        throw ValidationError(std::string(who) + ": matrix is not symmetric");
}

}  // namespace

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& s, double tol,
                               double* clamped_magnitude) {
    require_symmetric(s, "symmetric_sqrt");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s);
    Eigen::VectorXd evals = solver.eigenvalues();
    double clamped = 0.0;
    for (int i = 0; i < evals.size(); ++i) {
        if (evals[i] < -tol)
            throw NotPsdError(evals[i], "symmetric_sqrt: eigenvalue " +
                                            std::to_string(evals[i]) + " below -tol");
        if (evals[i] < 0.0) {
            clamped = std::min(clamped, evals[i]);
            evals[i] = 0.0;
        }
    }
    if (clamped_magnitude) *clamped_magnitude = -clamped;
    Eigen::MatrixXd r = solver.eigenvectors() * evals.cwiseSqrt().asDiagonal() *
                        solver.eigenvectors().transpose();
    // force exact symmetry
    return ((r + r.transpose()) / 2.0).eval();
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& s) {
    require_symmetric(s, "symmetric_sqrt");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s, Eigen::EigenvaluesOnly);
    const double top = solver.eigenvalues().cwiseAbs().maxCoeff();
    return symmetric_sqrt(s, 1e-10 * std::max(top, 1.0));
}

double min_eigenvalue(const Eigen::MatrixXd& s) {
    require_symmetric(s, "min_eigenvalue");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

}  // namespace covdiff
