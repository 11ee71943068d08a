#ifndef lasich_kkt_hpp
#define lasich_kkt_hpp

#include <cmath>
#include <vector>

#include "lasich/common.hpp"
#include "lasich/matrix_set.hpp"
#include "lasich/model.hpp"
#include "lasich/network.hpp"
#include "lasich/smallqp.hpp"
#include "lasich/solver.hpp"

namespace lasich {

/// Stationarity oracle for the solved (perturbed-Laplacian) problem. The
/// optimum is characterized per entry by
///   w_k (psi_ij - [theta^{-1}]_ij) + rho_n U1 + rho_n rho_2 U2 = 0
/// with U1 a sign subgradient and U2 a subgradient of the Laplacian-norm
/// penalty. Returns the largest violation over all entries and groups:
/// coordinate distances where the subgradients are fixed, and the distance
/// to the subdifferential set (a small box-and-ball problem) where the
/// entry vector is zero. Diagonal entries are unpenalized and must have a
/// vanishing gradient.
///
/// Entries within 100x the solver tolerance of zero are treated as zero
/// when picking subgradient branches: a soft-threshold survivor at noise
/// scale would otherwise pin the sign and Laplacian subgradients to an
/// arbitrary direction. The relaxation can only shrink the reported
/// violation, and by far less than the oracle's own resolution.
inline double kkt_violation(const PrecisionEstimate& estimate,
                            const GroupMoments& moments,
                            const LaplacianBundle& bundle,
                            const SolverConfig& config) {
    const int num_groups = estimate.num_groups();
    const Eigen::Index p = estimate.p();
    if (num_groups != moments.num_groups() ||
        num_groups != bundle.num_groups())
        throw invalid_input("group count mismatch");

    // Gradient blocks G_k = w_k (Psi_k - theta_k^{-1}).
    MatrixSet grad(p, num_groups);
    for (int k = 0; k < num_groups; ++k) {
        Eigen::LLT<Matrix> llt(estimate.theta[k]);
        if (llt.info() != Eigen::Success)
            throw numeric_error("estimate is not positive definite");
        const Matrix inverse = llt.solve(Matrix::Identity(p, p));
        grad.group(k) =
            moments.weights[k] * (moments.correlations[k] - inverse);
    }
    MatrixSet theta = MatrixSet::from(estimate.theta);

    Vector lam_eps = bundle.eigenvalues.cwiseMax(0.0).array() + bundle.epsilon;
    double worst = 0.0;
    for (int k = 0; k < num_groups; ++k)
        worst = std::max(worst, grad.group(k).diagonal().cwiseAbs().maxCoeff());

    const double zero_tol = std::max(100.0 * config.tol, 1e-12);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = i + 1; j < p; ++j) {
            Vector theta_ij = theta.entry(i, j);
            for (int k = 0; k < num_groups; ++k)
                if (std::abs(theta_ij(k)) <= zero_tol) theta_ij(k) = 0.0;
            const Vector target = -grad.entry(i, j);
            double violation;
            if (config.rho_2 > 0.0 && theta_ij.isZero(0.0)) {
                violation =
                    box_ball_distance(target, config.rho_n,
                                      config.rho_n * config.rho_2,
                                      bundle.eigenvectors, lam_eps);
            } else {
                Vector fixed = Vector::Zero(num_groups);
                if (config.rho_2 > 0.0) {
                    const Vector lt = bundle.L_eps * theta_ij;
                    fixed = config.rho_n * config.rho_2 * lt /
                            std::sqrt(theta_ij.dot(lt));
                }
                violation = 0.0;
                for (int k = 0; k < num_groups; ++k) {
                    const double rest = target(k) - fixed(k);
                    const double coord =
                        theta_ij(k) != 0.0
                            ? std::abs(rest - config.rho_n *
                                                  (theta_ij(k) > 0 ? 1.0 : -1.0))
                            : std::max(0.0, std::abs(rest) - config.rho_n);
                    violation = std::max(violation, coord);
                }
            }
            worst = std::max(worst, violation);
        }
    }
    return worst;
}

}  // namespace lasich

#endif
