#ifndef lasich_screening_hpp
#define lasich_screening_hpp

#include <algorithm>
#include <numeric>
#include <vector>

#include "lasich/common.hpp"
#include "lasich/model.hpp"
#include "lasich/network.hpp"
#include "lasich/smallqp.hpp"
#include "lasich/solver.hpp"

namespace lasich {

/// Disjoint index sets covering {0..p-1}, together with the screening
/// parameters they were computed under.
struct BlockPartition {
    std::vector<std::vector<int>> blocks;
    double rho_n = 0.0;
    double rho_2 = 0.0;
};

namespace detail {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace detail

/// Proposition-style zero test for one coordinate pair: the pair can be
/// dropped iff min over v in [-1,1]^K of
///   || Lambda_eps^{-1/2} U' (diag(w) psi_ij - rho_n v) || <= rho_n rho_2.
/// The spectrum is that of the perturbed Laplacian the solver actually
/// uses, so the check is exact for the solved problem.
inline bool pair_is_screened(const Vector& psi_ij,
                             const std::vector<double>& weights,
                             const LaplacianBundle& bundle,
                             const SolverConfig& config) {
    const Eigen::Index k = psi_ij.size();
    if (static_cast<Eigen::Index>(weights.size()) != k ||
        bundle.num_groups() != k)
        throw invalid_input("dimension mismatch in screening test");

    Vector weighted(k);
    for (Eigen::Index g = 0; g < k; ++g) weighted(g) = weights[g] * psi_ij(g);

    Vector inv_sqrt(k);
    for (Eigen::Index g = 0; g < k; ++g)
        inv_sqrt(g) = 1.0 / std::sqrt(std::max(bundle.eigenvalues(g), 0.0) +
                                      bundle.epsilon);
    const Matrix h = inv_sqrt.asDiagonal() * bundle.eigenvectors.transpose();

    const Vector v = box_least_squares(config.rho_n * h, h * weighted);
    const double minimum = (h * (weighted - config.rho_n * v)).norm();
    return minimum <= config.rho_n * config.rho_2 + 1e-12;
}

/// Connected components of the graph whose edges are the unscreened pairs.
/// Blocks are ordered by smallest member; members ascend within a block.
inline BlockPartition block_partition(const GroupMoments& moments,
                                      const LaplacianBundle& bundle,
                                      const SolverConfig& config) {
    const Eigen::Index p = moments.p();
    const int num_groups = moments.num_groups();
    detail::UnionFind uf(static_cast<int>(p));
    Vector psi_ij(num_groups);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = i + 1; j < p; ++j) {
            for (int k = 0; k < num_groups; ++k)
                psi_ij(k) = moments.correlations[k](i, j);
            if (!pair_is_screened(psi_ij, moments.weights, bundle, config))
                uf.unite(static_cast<int>(i), static_cast<int>(j));
        }
    }

    std::vector<std::vector<int>> grouped(p);
    for (int i = 0; i < static_cast<int>(p); ++i)
        grouped[uf.find(i)].push_back(i);
    BlockPartition partition;
    partition.rho_n = config.rho_n;
    partition.rho_2 = config.rho_2;
    for (auto& block : grouped)
        if (!block.empty()) partition.blocks.push_back(std::move(block));
    std::sort(partition.blocks.begin(), partition.blocks.end(),
              [](const auto& a, const auto& b) { return a[0] < b[0]; });
    return partition;
}

inline BlockPartition block_partition(const GroupMoments& moments,
                                      const SubpopulationNetwork& network,
                                      const SolverConfig& config) {
    return block_partition(moments, laplacian(network, config.epsilon), config);
}

/// Solves each block independently and assembles the full estimate with
/// exact zeros off the blocks.
inline PrecisionEstimate solve_with_screening(
    const GroupMoments& moments, const SubpopulationNetwork& network,
    const SolverConfig& config) {
    config.validate();
    const LaplacianBundle bundle = laplacian(network, config.epsilon);
    const BlockPartition partition = block_partition(moments, bundle, config);
    const Eigen::Index p = moments.p();
    const int num_groups = moments.num_groups();

    PrecisionEstimate est;
    est.screening_blocks = partition.blocks;
    est.converged = true;
    for (int k = 0; k < num_groups; ++k) {
        est.theta.emplace_back(Matrix::Zero(p, p));
        est.support.emplace_back(
            Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
                p, p, false));
        for (Eigen::Index i = 0; i < p; ++i) est.support[k](i, i) = true;
    }

    std::vector<PrecisionEstimate> partial(partition.blocks.size());
    SolverConfig block_config = config;
    block_config.threads = 1;
    parallel_for(partition.blocks.size(), config.threads, [&](std::size_t b) {
        const auto& block = partition.blocks[b];
        if (block.size() == 1) return;  // handled in closed form below
        partial[b] = solve(moments.restricted(block), bundle, block_config);
    });

    for (std::size_t b = 0; b < partition.blocks.size(); ++b) {
        const auto& block = partition.blocks[b];
        if (block.size() == 1) {
            // Singleton blocks have the unpenalized stationary point
            // theta_ii = 1/psi_ii = 1 on the correlation scale.
            for (int k = 0; k < num_groups; ++k)
                est.theta[k](block[0], block[0]) = 1.0;
            continue;
        }
        const PrecisionEstimate& sub = partial[b];
        est.iterations = std::max(est.iterations, sub.iterations);
        est.final_residual = std::max(est.final_residual, sub.final_residual);
        est.converged = est.converged && sub.converged;
        for (int k = 0; k < num_groups; ++k)
            for (std::size_t a = 0; a < block.size(); ++a)
                for (std::size_t c = 0; c < block.size(); ++c) {
                    est.theta[k](block[a], block[c]) = sub.theta[k](a, c);
                    est.support[k](block[a], block[c]) = sub.support[k](a, c);
                }
    }

    std::vector<Vector> variances;
    for (int k = 0; k < num_groups; ++k) variances.push_back(moments.variances(k));
    est.omega = scale_to_precision(est.theta, variances);
    return est;
}

}  // namespace lasich

#endif
