#ifndef lasich_model_hpp
#define lasich_model_hpp

#include <cmath>
#include <vector>

#include "lasich/common.hpp"

namespace lasich {

/// n observations in p dimensions with a group label in {1..K} per row.
struct GroupedSample {
    Matrix data;                  // n x p
    std::vector<int> membership;  // length n, labels in 1..K
    int num_groups = 0;

    GroupedSample() = default;
    GroupedSample(Matrix d, std::vector<int> labels, int k)
        : data(std::move(d)), membership(std::move(labels)), num_groups(k) {
        if (num_groups < 1) throw invalid_input("group count must be >= 1");
        if (static_cast<std::size_t>(data.rows()) != membership.size())
            throw invalid_input("membership length must equal row count");
        for (int label : membership)
            if (label < 1 || label > num_groups)
                throw invalid_input("group label outside 1..K");
    }

    Eigen::Index n() const { return data.rows(); }
    Eigen::Index p() const { return data.cols(); }
};

/// Per-group sample moments: counts, means, ML covariances (divisor n_k),
/// correlations, and mixture weights n_k/n.
struct GroupMoments {
    std::vector<Eigen::Index> counts;     // n_k
    std::vector<Vector> means;            // length p each
    std::vector<Matrix> covariances;      // p x p each
    std::vector<Matrix> correlations;     // p x p, unit diagonal
    std::vector<double> weights;          // n_k / n, sums to 1

    int num_groups() const { return static_cast<int>(counts.size()); }
    Eigen::Index p() const { return means.empty() ? 0 : means[0].size(); }
    Eigen::Index n() const {
        Eigen::Index total = 0;
        for (auto c : counts) total += c;
        return total;
    }

    /// Sample variances of group k (covariance diagonal).
    Vector variances(int k) const { return covariances.at(k).diagonal(); }

    /// Restricts every group's moments to the given coordinate subset.
    GroupMoments restricted(const std::vector<int>& coords) const {
        GroupMoments out;
        out.counts = counts;
        out.weights = weights;
        const auto m = static_cast<Eigen::Index>(coords.size());
        for (int k = 0; k < num_groups(); ++k) {
            Vector mu(m);
            Matrix cov(m, m), cor(m, m);
            for (Eigen::Index a = 0; a < m; ++a) {
                mu(a) = means[k](coords[a]);
                for (Eigen::Index b = 0; b < m; ++b) {
                    cov(a, b) = covariances[k](coords[a], coords[b]);
                    cor(a, b) = correlations[k](coords[a], coords[b]);
                }
            }
            out.means.push_back(std::move(mu));
            out.covariances.push_back(std::move(cov));
            out.correlations.push_back(std::move(cor));
        }
        return out;
    }
};

inline Matrix correlation_from_covariance(const Matrix& cov) {
    const Eigen::Index p = cov.rows();
    if (cov.cols() != p) throw invalid_input("covariance must be square");
    Vector inv_sd(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        if (!(cov(i, i) > 0.0))
            throw numeric_error("nonpositive variance: correlation undefined");
        inv_sd(i) = 1.0 / std::sqrt(cov(i, i));
    }
    Matrix corr = inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
    corr.diagonal().setOnes();
    return corr;
}

inline GroupMoments group_moments(const GroupedSample& sample) {
    const int num_groups = sample.num_groups;
    const Eigen::Index n = sample.n();
    const Eigen::Index p = sample.p();

    GroupMoments out;
    out.counts.assign(num_groups, 0);
    for (int label : sample.membership) ++out.counts[label - 1];
    for (int k = 0; k < num_groups; ++k)
        if (out.counts[k] < 2)
            throw invalid_input("group " + std::to_string(k + 1) +
                                " has fewer than 2 observations");

    for (int k = 0; k < num_groups; ++k) {
        const Eigen::Index nk = out.counts[k];
        Matrix rows(nk, p);
        Eigen::Index r = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            if (sample.membership[i] == k + 1) rows.row(r++) = sample.data.row(i);

        Vector mean = rows.colwise().mean();
        Matrix centered = rows.rowwise() - mean.transpose();
        Matrix cov = (centered.transpose() * centered) / static_cast<double>(nk);
        symmetrize(cov);
        for (Eigen::Index j = 0; j < p; ++j)
            if (!(cov(j, j) > 0.0))
                throw numeric_error("zero sample variance in group " +
                                    std::to_string(k + 1) + ", column " +
                                    std::to_string(j + 1));

        out.means.push_back(std::move(mean));
        out.correlations.push_back(correlation_from_covariance(cov));
        out.covariances.push_back(std::move(cov));
        out.weights.push_back(static_cast<double>(nk) / static_cast<double>(n));
    }
    return out;
}

/// Conjugates each inverse-correlation matrix by diag(1/sqrt(variance)),
/// giving the precision-scale estimate. Zeros are preserved exactly.
inline std::vector<Matrix> scale_to_precision(
    const std::vector<Matrix>& theta, const std::vector<Vector>& variances) {
    if (theta.size() != variances.size())
        throw invalid_input("group count mismatch");
    std::vector<Matrix> omega;
    omega.reserve(theta.size());
    for (std::size_t k = 0; k < theta.size(); ++k) {
        const Eigen::Index p = theta[k].rows();
        if (variances[k].size() != p) throw invalid_input("dimension mismatch");
        Vector inv_sd(p);
        for (Eigen::Index i = 0; i < p; ++i) {
            if (!(variances[k](i) > 0.0))
                throw numeric_error("nonpositive variance in scale_to_precision");
            inv_sd(i) = 1.0 / std::sqrt(variances[k](i));
        }
        omega.push_back(inv_sd.asDiagonal() * theta[k] * inv_sd.asDiagonal());
    }
    return omega;
}

/// Negative correlation-scale log-likelihood,
/// (1/n) sum_k n_k ( tr(Psi_k Theta_k) - logdet Theta_k ).
inline double negative_correlation_loglik(const std::vector<Matrix>& theta,
                                          const GroupMoments& moments) {
    if (static_cast<int>(theta.size()) != moments.num_groups())
        throw invalid_input("group count mismatch");
    double total = 0.0;
    for (std::size_t k = 0; k < theta.size(); ++k) {
        Eigen::LLT<Matrix> llt(theta[k]);
        if (llt.info() != Eigen::Success)
            throw numeric_error("theta is not positive definite");
        const double logdet =
            2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        const double trace =
            (moments.correlations[k].array() * theta[k].array()).sum();
        total += moments.weights[k] * (trace - logdet);
    }
    return total;
}

/// Joint estimate on both scales plus the exact off-diagonal support.
struct PrecisionEstimate {
    std::vector<Matrix> theta;  // inverse-correlation scale
    std::vector<Matrix> omega;  // precision scale
    std::vector<Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>> support;
    int iterations = 0;
    double final_residual = 0.0;
    bool converged = true;
    std::vector<std::vector<int>> screening_blocks;  // empty when unscreened

    int num_groups() const { return static_cast<int>(theta.size()); }
    Eigen::Index p() const { return theta.empty() ? 0 : theta[0].rows(); }

    /// Off-diagonal edges (i < j) of group k.
    std::vector<std::pair<int, int>> edges(int k) const {
        std::vector<std::pair<int, int>> out;
        const Eigen::Index dim = support.at(k).rows();
        for (Eigen::Index i = 0; i < dim; ++i)
            for (Eigen::Index j = i + 1; j < dim; ++j)
                if (support[k](i, j)) out.emplace_back(static_cast<int>(i),
                                                       static_cast<int>(j));
        return out;
    }
};

}  // namespace lasich

#endif
