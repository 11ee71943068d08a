#ifndef lasich_eval_hpp
#define lasich_eval_hpp

#include <cmath>
#include <vector>

#include "lasich/common.hpp"
#include "lasich/model.hpp"
#include "lasich/network.hpp"
#include "lasich/screening.hpp"
#include "lasich/solver.hpp"

namespace lasich {

struct EdgeCounts {
    long detected = 0;
    long true_positive = 0;
    long false_positive = 0;
    long true_edges = 0;
};

struct EdgeMetrics {
    std::vector<EdgeCounts> per_group;
    EdgeCounts pooled;
    double frobenius_error = 0.0;  // sum over groups of ||omega_hat - omega_0||_F
    double spectral_error = 0.0;   // sum over groups of the spectral norms
};

/// Edge (i,j), i<j, counts as detected in group k iff the estimate's
/// support has it; true edges are the exact nonzeros of the truth.
inline EdgeMetrics edge_metrics(const PrecisionEstimate& estimate,
                                const std::vector<Matrix>& truth_omega) {
    const int num_groups = estimate.num_groups();
    if (static_cast<int>(truth_omega.size()) != num_groups)
        throw invalid_input("truth group count mismatch");
    const Eigen::Index p = estimate.p();

    EdgeMetrics metrics;
    for (int k = 0; k < num_groups; ++k) {
        if (truth_omega[k].rows() != p || truth_omega[k].cols() != p)
            throw invalid_input("truth dimension mismatch");
        EdgeCounts counts;
        for (Eigen::Index i = 0; i < p; ++i)
            for (Eigen::Index j = i + 1; j < p; ++j) {
                const bool detected = estimate.support[k](i, j);
                const bool real = truth_omega[k](i, j) != 0.0;
                counts.detected += detected;
                counts.true_edges += real;
                counts.true_positive += detected && real;
                counts.false_positive += detected && !real;
            }
        const Matrix diff = estimate.omega[k] - truth_omega[k];
        metrics.frobenius_error += diff.norm();
        Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(diff),
                                                 Eigen::EigenvaluesOnly);
        metrics.spectral_error += es.eigenvalues().cwiseAbs().maxCoeff();
        metrics.pooled.detected += counts.detected;
        metrics.pooled.true_positive += counts.true_positive;
        metrics.pooled.false_positive += counts.false_positive;
        metrics.pooled.true_edges += counts.true_edges;
        metrics.per_group.push_back(counts);
    }
    return metrics;
}

/// BIC on the correlation-scale likelihood:
///   sum_k n_k (tr(Psi_k theta_k) - logdet theta_k) + log(n) * df
/// with df the number of nonzero upper off-diagonal entries over all groups.
inline double bic(const PrecisionEstimate& estimate,
                  const GroupMoments& moments) {
    const int num_groups = estimate.num_groups();
    if (num_groups != moments.num_groups())
        throw invalid_input("group count mismatch");
    const Eigen::Index p = estimate.p();

    double value = 0.0;
    long df = 0;
    for (int k = 0; k < num_groups; ++k) {
        Eigen::LLT<Matrix> llt(estimate.theta[k]);
        if (llt.info() != Eigen::Success)
            throw numeric_error("estimate is not positive definite");
        const double logdet =
            2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
        const double trace =
            (moments.correlations[k].array() * estimate.theta[k].array()).sum();
        value += static_cast<double>(moments.counts[k]) * (trace - logdet);
        for (Eigen::Index i = 0; i < p; ++i)
            for (Eigen::Index j = i + 1; j < p; ++j)
                df += estimate.support[k](i, j) && estimate.theta[k](i, j) != 0.0;
    }
    return value + std::log(static_cast<double>(moments.n())) *
                       static_cast<double>(df);
}

struct PathRow {
    double rho_n = 0.0;
    double rho_2 = 0.0;
    EdgeMetrics metrics;
    double bic_value = 0.0;
    bool converged = true;
};

/// Fits the full (rho_n, rho_2) grid with screening; each grid point is an
/// independent solver instance, so rows evaluate in parallel. Truth may be
/// null, in which case only detected counts and BIC are meaningful.
inline std::vector<PathRow> tuning_path(const GroupMoments& moments,
                                        const SubpopulationNetwork& network,
                                        const std::vector<double>& rho_grid,
                                        const std::vector<double>& rho2_grid,
                                        const SolverConfig& config,
                                        const std::vector<Matrix>* truth_omega) {
    if (rho_grid.empty() || rho2_grid.empty())
        throw invalid_input("tuning grids must be nonempty");
    std::vector<PathRow> rows(rho_grid.size() * rho2_grid.size());
    SolverConfig point_config = config;
    point_config.threads = 1;
    parallel_for(rows.size(), config.threads, [&](std::size_t idx) {
        const double rho_n = rho_grid[idx / rho2_grid.size()];
        const double rho_2 = rho2_grid[idx % rho2_grid.size()];
        SolverConfig local = point_config;
        local.rho_n = rho_n;
        local.rho_2 = rho_2;
        const PrecisionEstimate est =
            solve_with_screening(moments, network, local);
        PathRow& row = rows[idx];
        row.rho_n = rho_n;
        row.rho_2 = rho_2;
        row.converged = est.converged;
        row.bic_value = bic(est, moments);
        if (truth_omega) {
            row.metrics = edge_metrics(est, *truth_omega);
        } else {
            for (int k = 0; k < est.num_groups(); ++k) {
                EdgeCounts counts;
                counts.detected = static_cast<long>(est.edges(k).size());
                row.metrics.pooled.detected += counts.detected;
                row.metrics.per_group.push_back(counts);
            }
        }
    });
    return rows;
}

}  // namespace lasich

#endif
