#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "covdiff/errors.hpp"

namespace covdiff {

// Symmetric p x p matrix stored as the packed upper triangle (k <= l),
// row-major over rows k: index (k,l) -> k*p - k*(k-1)/2 + (l - k).
// Storage is written once per unordered pair; reads mirror, so the matrix
// is exactly symmetric by construction.
class PackedSymmetric {
public:
    PackedSymmetric() : p_(0) {}
    explicit PackedSymmetric(int p, double fill = 0.0)
        : p_(p), data_(static_cast<std::size_t>(p) * (p + 1) / 2, fill) {
        if (p < 0) throw ValidationError("PackedSymmetric: negative dimension");
    }

    int dim() const { return p_; }
    std::size_t packed_size() const { return data_.size(); }

    static std::size_t index(int k, int l, int p) {
        if (k > l) std::swap(k, l);
        return static_cast<std::size_t>(k) * p - static_cast<std::size_t>(k) * (k - 1) / 2 +
               static_cast<std::size_t>(l - k);
    }

    double operator()(int k, int l) const { return data_[index(k, l, p_)]; }
    double& at(int k, int l) { return data_[index(k, l, p_)]; }

    const std::vector<double>& packed() const { return data_; }
    std::vector<double>& packed() { return data_; }

    Eigen::MatrixXd to_dense() const {
        Eigen::MatrixXd out(p_, p_);
        for (int k = 0; k < p_; ++k)
            for (int l = k; l < p_; ++l) out(k, l) = out(l, k) = (*this)(k, l);
        return out;
    }

    // Packs the upper triangle of a dense matrix; lower triangle is ignored.
    static PackedSymmetric from_dense_upper(const Eigen::MatrixXd& m) {
        PackedSymmetric out(static_cast<int>(m.rows()));
        for (int k = 0; k < out.p_; ++k)
            for (int l = k; l < out.p_; ++l) out.at(k, l) = m(k, l);
        return out;
    }

private:
    int p_;
    std::vector<double> data_;
};

}  // namespace covdiff
