#ifndef lasich_solver_hpp
#define lasich_solver_hpp

#include <cmath>
#include <vector>

#include "lasich/common.hpp"
#include "lasich/matrix_set.hpp"
#include "lasich/model.hpp"
#include "lasich/network.hpp"

namespace lasich {

struct SolverConfig {
    double rho_n = 0.1;   // l1 strength, > 0
    double rho_2 = 0.0;   // Laplacian strength, >= 0
    double epsilon = kDefaultLaplacianEpsilon;  // Laplacian perturbation, > 0
    double varrho = 1.0;  // ADMM penalty, > 0
    double tol = 1e-6;    // residual tolerance
    int max_iter = 2000;
    unsigned threads = 1;

    void validate() const {
        if (!(rho_n > 0.0)) throw invalid_input("rho_n must be positive");
        if (!(rho_2 >= 0.0)) throw invalid_input("rho_2 must be nonnegative");
        if (!(epsilon > 0.0)) throw invalid_input("epsilon must be positive");
        if (!(varrho > 0.0)) throw invalid_input("varrho must be positive");
        if (!(tol > 0.0)) throw invalid_input("tol must be positive");
        if (max_iter < 1) throw invalid_input("max_iter must be >= 1");
    }
};

/// ADMM iterate blocks and scaled duals. A carries the likelihood block,
/// B the l1 block, C the Laplacian block, D the consensus copy.
struct SolverState {
    MatrixSet A, B, C, D, E_A, E_B, E_C;
    int iteration = 0;
    double r_A = 0.0, r_B = 0.0, r_C = 0.0, s = 0.0;  // max-over-group Frobenius

    SolverState() = default;
    SolverState(Eigen::Index p, int k)
        : A(MatrixSet::identity(p, k)),
          B(MatrixSet::identity(p, k)),
          C(MatrixSet::identity(p, k)),
          D(MatrixSet::identity(p, k)),
          E_A(p, k),
          E_B(p, k),
          E_C(p, k) {}
};

inline double soft_threshold(double x, double y) {
    if (x > y) return x - y;
    if (x < -y) return x + y;
    return 0.0;
}

/// Likelihood block: per group, the unique positive definite minimizer of
///   w (tr(Psi A) - logdet A) + (varrho/2) ||A - (D - E_A)||_F^2,
/// obtained from the eigendecomposition of varrho (D - E_A) - w Psi.
inline MatrixSet update_concentration(const GroupMoments& moments,
                                      const MatrixSet& D, const MatrixSet& E_A,
                                      const SolverConfig& config) {
    const double varrho = config.varrho;
    if (D.num_groups() != moments.num_groups())
        throw invalid_input("matrix set group count must match moments");
    MatrixSet A(D.p(), D.num_groups());
    parallel_for(D.num_groups(), config.threads, [&](std::size_t g) {
        const int k = static_cast<int>(g);
        const double w = moments.weights[k];
        Matrix target = varrho * (D.group(k) - E_A.group(k)) -
                        w * moments.correlations[k];
        symmetrize(target);
        Eigen::SelfAdjointEigenSolver<Matrix> es(target);
        Vector vals = es.eigenvalues();
        for (Eigen::Index i = 0; i < vals.size(); ++i)
            vals(i) = (vals(i) + std::sqrt(vals(i) * vals(i) +
                                           4.0 * varrho * w)) /
                      (2.0 * varrho);
        A.group(k) = es.eigenvectors() * vals.asDiagonal() *
                     es.eigenvectors().transpose();
    });
    return A;
}

/// l1 block: off-diagonal soft threshold at rho_n / varrho, diagonal
/// passes through unpenalized.
inline MatrixSet update_sparsity(const MatrixSet& D, const MatrixSet& E_B,
                                 const SolverConfig& config) {
    const double thr = config.rho_n / config.varrho;
    MatrixSet B(D.p(), D.num_groups());
    B.stack() = D.stack() - E_B.stack();
    for (Eigen::Index r = 0; r < B.stack().rows(); ++r) {
        const Eigen::Index i = r % D.p(), j = r / D.p();
        if (i == j) continue;
        for (int k = 0; k < B.num_groups(); ++k)
            B.stack()(r, k) = soft_threshold(B.stack()(r, k), thr);
    }
    return B;
}

/// Laplacian block: groupwise shrinkage of each off-diagonal entry vector,
///   c_ij = (1 - rho_n rho_2 / (varrho ||H d_ij - e_ij||))_+ (d_ij - H^{-1} e_ij),
/// with H the symmetric root of L_eps. Diagonal vectors copy without shrinkage.
inline MatrixSet update_fusion(const MatrixSet& D, const MatrixSet& E_C,
                               const LaplacianBundle& bundle,
                               const SolverConfig& config) {
    const double kappa = config.rho_n * config.rho_2 / config.varrho;
    MatrixSet C(D.p(), D.num_groups());
    const Matrix T = D.stack() * bundle.half - E_C.stack();
    const Matrix V = D.stack() - E_C.stack() * bundle.half_inv;
    for (Eigen::Index r = 0; r < C.stack().rows(); ++r) {
        const Eigen::Index i = r % D.p(), j = r / D.p();
        if (i == j) {
            C.stack().row(r) = V.row(r);
            continue;
        }
        const double norm = T.row(r).norm();
        double factor;
        if (norm > 0.0)
            factor = std::max(0.0, 1.0 - kappa / norm);
        else
            factor = kappa == 0.0 ? 1.0 : 0.0;
        C.stack().row(r) = factor * V.row(r);
    }
    return C;
}

/// Consensus block: per entry vector, solve (2I + L_eps) d = rhs with the
/// K x K factor shared across all p^2 entries.
inline MatrixSet update_consensus(const MatrixSet& A, const MatrixSet& B,
                                  const MatrixSet& C, const MatrixSet& E_A,
                                  const MatrixSet& E_B, const MatrixSet& E_C,
                                  const LaplacianBundle& bundle) {
    const int k = A.num_groups();
    const Matrix system =
        2.0 * Matrix::Identity(k, k) + bundle.L_eps;
    const Matrix rhs = A.stack() + E_A.stack() + B.stack() + E_B.stack() +
                       C.stack() * bundle.L_eps + E_C.stack() * bundle.half;
    MatrixSet D(A.p(), k);
    // system is SPD and symmetric, so the right-multiplied inverse is exact.
    D.stack() = system.llt().solve(rhs.transpose()).transpose();
    return D;
}

/// Scaled dual ascent: E_A += A - D, E_B += B - D, e_C += H(c - d).
inline void update_duals(SolverState& state, const LaplacianBundle& bundle,
                         bool with_fusion) {
    state.E_A.stack() += state.A.stack() - state.D.stack();
    state.E_B.stack() += state.B.stack() - state.D.stack();
    if (with_fusion)
        state.E_C.stack() +=
            (state.C.stack() - state.D.stack()) * bundle.half;
}

/// Full objective with the perturbed Laplacian: -loglik + rho_n * l1(offdiag)
/// + rho_n rho_2 * sum over ordered pairs i != j of sqrt(theta_ij' L_eps theta_ij).
inline double objective_value(const MatrixSet& theta,
                              const GroupMoments& moments,
                              const LaplacianBundle& bundle,
                              const SolverConfig& config) {
    double value = negative_correlation_loglik(theta.matrices(), moments);
    const Eigen::Index p = theta.p();
    for (int k = 0; k < theta.num_groups(); ++k) {
        const auto m = theta.group(k);
        value += config.rho_n *
                 (m.cwiseAbs().sum() - m.diagonal().cwiseAbs().sum());
    }
    if (config.rho_2 > 0.0) {
        for (Eigen::Index i = 0; i < p; ++i)
            for (Eigen::Index j = 0; j < p; ++j) {
                if (i == j) continue;
                const Vector v = theta.entry(i, j);
                value += config.rho_n * config.rho_2 *
                         std::sqrt(std::max(v.dot(bundle.L_eps * v), 0.0));
            }
    }
    return value;
}

namespace detail {

inline PrecisionEstimate extract_estimate(const SolverState& state,
                                          const GroupMoments& moments,
                                          bool converged) {
    const Eigen::Index p = state.D.p();
    const int num_groups = state.D.num_groups();
    PrecisionEstimate est;
    est.iterations = state.iteration;
    est.final_residual =
        std::max({state.r_A, state.r_B, state.r_C, state.s});
    est.converged = converged;

    std::vector<Vector> variances;
    for (int k = 0; k < num_groups; ++k) {
        // Support comes from the l1 block's exact zeros, intersected
        // symmetrically; values come from the consensus block.
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask(p, p);
        const auto b = state.B.group(k);
        for (Eigen::Index i = 0; i < p; ++i)
            for (Eigen::Index j = 0; j < p; ++j)
                mask(i, j) = i == j || (b(i, j) != 0.0 && b(j, i) != 0.0);

        Matrix theta = symmetrized(state.D.group(k));
        for (Eigen::Index i = 0; i < p; ++i)
            for (Eigen::Index j = 0; j < p; ++j)
                if (!mask(i, j)) theta(i, j) = 0.0;

        est.support.push_back(std::move(mask));
        est.theta.push_back(std::move(theta));
        variances.push_back(moments.variances(k));
    }
    est.omega = scale_to_precision(est.theta, variances);
    return est;
}

}  // namespace detail

inline PrecisionEstimate solve(const GroupMoments& moments,
                               const LaplacianBundle& bundle,
                               const SolverConfig& config) {
    config.validate();
    const int num_groups = moments.num_groups();
    const Eigen::Index p = moments.p();
    if (num_groups < 1 || p < 1) throw invalid_input("empty problem");
    if (bundle.num_groups() != num_groups)
        throw invalid_input("network size must match group count");

    const bool with_fusion = config.rho_2 > 0.0;
    SolverState state(p, num_groups);

    bool converged = false;
    while (state.iteration < config.max_iter) {
        ++state.iteration;
        state.A = update_concentration(moments, state.D, state.E_A, config);
        state.B = update_sparsity(state.D, state.E_B, config);
        if (with_fusion)
            state.C = update_fusion(state.D, state.E_C, bundle, config);

        const Matrix previous_d = state.D.stack();
        if (with_fusion) {
            state.D = update_consensus(state.A, state.B, state.C, state.E_A,
                                       state.E_B, state.E_C, bundle);
        } else {
            state.D.stack() = 0.5 * (state.A.stack() + state.E_A.stack() +
                                     state.B.stack() + state.E_B.stack());
        }
        state.D.symmetrize_groups();
        update_duals(state, bundle, with_fusion);

        state.r_A = state.A.max_group_distance(state.D);
        state.r_B = state.B.max_group_distance(state.D);
        state.r_C = with_fusion ? state.C.max_group_distance(state.D) : 0.0;
        state.s = 0.0;
        for (int k = 0; k < num_groups; ++k)
            state.s = std::max(
                state.s, config.varrho *
                             (state.D.stack().col(k) - previous_d.col(k)).norm());

        if (std::max({state.r_A, state.r_B, state.r_C, state.s}) < config.tol) {
            converged = true;
            break;
        }
    }
    return detail::extract_estimate(state, moments, converged);
}

inline PrecisionEstimate solve(const GroupMoments& moments,
                               const SubpopulationNetwork& network,
                               const SolverConfig& config) {
    return solve(moments, laplacian(network, config.epsilon), config);
}

}  // namespace lasich

#endif
