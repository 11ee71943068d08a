#ifndef lasich_matrix_set_hpp
#define lasich_matrix_set_hpp

#include <vector>

#include "lasich/common.hpp"

namespace lasich {

/// K symmetric p x p matrices indexed by subpopulation, stored column-wise
/// as a (p*p) x K stack so that cross-group maps on entry vectors
/// (theta_ij across groups) are plain matrix products on the right.
class MatrixSet {
  public:
    MatrixSet() = default;
    MatrixSet(Eigen::Index p, int k)
        : p_(p), stack_(Matrix::Zero(p * p, k)) {}

    static MatrixSet identity(Eigen::Index p, int k) {
        MatrixSet out(p, k);
        for (int g = 0; g < k; ++g) out.group(g) = Matrix::Identity(p, p);
        return out;
    }

    static MatrixSet from(const std::vector<Matrix>& mats) {
        if (mats.empty()) throw invalid_input("empty matrix set");
        const Eigen::Index p = mats[0].rows();
        MatrixSet out(p, static_cast<int>(mats.size()));
        for (std::size_t g = 0; g < mats.size(); ++g) {
            if (mats[g].rows() != p || mats[g].cols() != p)
                throw invalid_input("matrix set dimensions must agree");
            out.group(static_cast<int>(g)) = mats[g];
        }
        return out;
    }

    Eigen::Index p() const { return p_; }
    int num_groups() const { return static_cast<int>(stack_.cols()); }

    Eigen::Map<Matrix> group(int k) {
        return Eigen::Map<Matrix>(stack_.col(k).data(), p_, p_);
    }
    Eigen::Map<const Matrix> group(int k) const {
        return Eigen::Map<const Matrix>(stack_.col(k).data(), p_, p_);
    }

    /// Entry vector (theta_ij^(1), ..., theta_ij^(K)).
    Vector entry(Eigen::Index i, Eigen::Index j) const {
        return stack_.row(i + j * p_).transpose();
    }

    Matrix& stack() { return stack_; }
    const Matrix& stack() const { return stack_; }

    std::vector<Matrix> matrices() const {
        std::vector<Matrix> out;
        out.reserve(num_groups());
        for (int g = 0; g < num_groups(); ++g) out.push_back(group(g));
        return out;
    }

    void symmetrize_groups() {
        for (int g = 0; g < num_groups(); ++g) {
            auto m = group(g);
            m = ((m + m.transpose()) * 0.5).eval();
        }
    }

    /// Max over groups of the Frobenius distance to another set.
    double max_group_distance(const MatrixSet& other) const {
        double worst = 0.0;
        for (int g = 0; g < num_groups(); ++g)
            worst = std::max(worst,
                             (stack_.col(g) - other.stack_.col(g)).norm());
        return worst;
    }

  private:
    Eigen::Index p_ = 0;
    Matrix stack_;
};

}  // namespace lasich

#endif
