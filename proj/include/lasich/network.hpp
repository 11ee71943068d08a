#ifndef lasich_network_hpp
#define lasich_network_hpp

#include <cmath>
#include <vector>

#include "lasich/common.hpp"

namespace lasich {

enum class LaplacianMode { unnormalized, normalized, identity };

/// Weighted graph on the K subpopulations. Edge weights encode expected
/// similarity between the groups' precision matrices.
struct SubpopulationNetwork {
    int num_groups = 0;
    Matrix weights;  // K x K, symmetric, nonnegative, zero diagonal
    LaplacianMode mode = LaplacianMode::normalized;

    SubpopulationNetwork() = default;
    SubpopulationNetwork(int k, Matrix w,
                         LaplacianMode m = LaplacianMode::normalized)
        : num_groups(k), weights(std::move(w)), mode(m) {
        if (num_groups < 1) throw invalid_input("K must be >= 1");
        if (weights.rows() != num_groups || weights.cols() != num_groups)
            throw invalid_input("weight matrix must be K x K");
        if ((weights - weights.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw invalid_input("weight matrix must be symmetric");
        for (int a = 0; a < num_groups; ++a) {
            if (weights(a, a) != 0.0)
                throw invalid_input("weight diagonal must be zero");
            for (int b = 0; b < num_groups; ++b)
                if (weights(a, b) < 0.0)
                    throw invalid_input("negative edge weight");
        }
    }

    Vector degrees() const { return weights.rowwise().sum(); }
};

inline SubpopulationNetwork build_complete_graph(
    int k, LaplacianMode mode = LaplacianMode::normalized) {
    if (k < 1) throw invalid_input("K must be >= 1");
    Matrix w = Matrix::Ones(k, k);
    w.diagonal().setZero();
    return SubpopulationNetwork(k, std::move(w), mode);
}

inline SubpopulationNetwork build_line_graph(
    int k, LaplacianMode mode = LaplacianMode::normalized) {
    if (k < 1) throw invalid_input("K must be >= 1");
    Matrix w = Matrix::Zero(k, k);
    for (int a = 0; a + 1 < k; ++a) w(a, a + 1) = w(a + 1, a) = 1.0;
    return SubpopulationNetwork(k, std::move(w), mode);
}

inline SubpopulationNetwork build_empty_graph(
    int k, LaplacianMode mode = LaplacianMode::unnormalized) {
    if (k < 1) throw invalid_input("K must be >= 1");
    return SubpopulationNetwork(k, Matrix::Zero(k, k), mode);
}

/// Graph Laplacian with its spectrum, the perturbed operator L + eps*I,
/// and the symmetric square root used by the solver.
struct LaplacianBundle {
    LaplacianMode mode = LaplacianMode::normalized;
    double epsilon = 0.0;
    Matrix L;                // K x K, positive semidefinite
    Vector eigenvalues;      // ascending, eigenvalues of L
    Matrix eigenvectors;     // columns, orthonormal
    Matrix L_eps;            // L + eps * I
    Matrix half;             // symmetric root, half * half = L_eps
    Matrix half_inv;         // inverse of the root
    double spectral_norm = 0.0;  // largest eigenvalue of L

    int num_groups() const { return static_cast<int>(L.rows()); }
};

inline constexpr double kDefaultLaplacianEpsilon = 1e-3;

inline LaplacianBundle laplacian(const SubpopulationNetwork& network,
                                 double epsilon = kDefaultLaplacianEpsilon) {
    if (!(epsilon > 0.0)) throw invalid_input("epsilon must be positive");
    const int k = network.num_groups;
    LaplacianBundle out;
    out.mode = network.mode;
    out.epsilon = epsilon;

    const Vector deg = network.degrees();
    switch (network.mode) {
        case LaplacianMode::unnormalized:
            out.L = Matrix(deg.asDiagonal()) - network.weights;
            break;
        case LaplacianMode::normalized: {
            // Isolated nodes get a zero row and column rather than L_kk = 1.
            Vector inv_sqrt_deg(k);
            for (int a = 0; a < k; ++a)
                inv_sqrt_deg(a) = deg(a) > 0.0 ? 1.0 / std::sqrt(deg(a)) : 0.0;
            out.L = -(inv_sqrt_deg.asDiagonal() * network.weights *
                      inv_sqrt_deg.asDiagonal());
            for (int a = 0; a < k; ++a) out.L(a, a) = deg(a) > 0.0 ? 1.0 : 0.0;
            break;
        }
        case LaplacianMode::identity:
            out.L = Matrix::Identity(k, k);
            break;
    }
    symmetrize(out.L);

    Eigen::SelfAdjointEigenSolver<Matrix> es(out.L);
    if (es.info() != Eigen::Success)
        throw numeric_error("Laplacian eigendecomposition failed");
    out.eigenvalues = es.eigenvalues();
    out.eigenvectors = es.eigenvectors();
    out.spectral_norm = out.eigenvalues(k - 1);

    out.L_eps = out.L + epsilon * Matrix::Identity(k, k);
    Vector sqrt_vals(k), inv_sqrt_vals(k);
    for (int a = 0; a < k; ++a) {
        const double v = std::max(out.eigenvalues(a), 0.0) + epsilon;
        sqrt_vals(a) = std::sqrt(v);
        inv_sqrt_vals(a) = 1.0 / sqrt_vals(a);
    }
    out.half = out.eigenvectors * sqrt_vals.asDiagonal() *
               out.eigenvectors.transpose();
    out.half_inv = out.eigenvectors * inv_sqrt_vals.asDiagonal() *
                   out.eigenvectors.transpose();
    return out;
}

/// sqrt(theta' L theta); tiny negative quadratic forms from roundoff clamp
/// to zero.
inline double laplacian_penalty(const Vector& theta,
                                const LaplacianBundle& bundle) {
    if (theta.size() != bundle.L.rows())
        throw invalid_input("vector length must equal K");
    const double q = theta.dot(bundle.L * theta);
    return std::sqrt(std::max(q, 0.0));
}

}  // namespace lasich

#endif
