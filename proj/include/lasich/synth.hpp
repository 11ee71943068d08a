#ifndef lasich_synth_hpp
#define lasich_synth_hpp

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lasich/common.hpp"

namespace lasich {

enum class GraphKind { erdos_renyi, scale_free };

using EdgeList = std::vector<std::pair<int, int>>;  // pairs with i < j

namespace detail {

inline EdgeList all_pairs(int nodes) {
    EdgeList pairs;
    pairs.reserve(static_cast<std::size_t>(nodes) * (nodes - 1) / 2);
    for (int i = 0; i < nodes; ++i)
        for (int j = i + 1; j < nodes; ++j) pairs.emplace_back(i, j);
    return pairs;
}

inline EdgeList random_graph_edges(GraphKind kind, int nodes, int edges,
                                   std::mt19937_64& rng) {
    const long capacity = static_cast<long>(nodes) * (nodes - 1) / 2;
    if (edges < 0 || edges > capacity)
        throw invalid_input("edge count " + std::to_string(edges) +
                            " infeasible for " + std::to_string(nodes) +
                            " nodes");
    if (kind == GraphKind::erdos_renyi) {
        EdgeList pairs = all_pairs(nodes);
        std::shuffle(pairs.begin(), pairs.end(), rng);
        pairs.resize(edges);
        std::sort(pairs.begin(), pairs.end());
        return pairs;
    }

    // Preferential attachment, then random add/remove to hit the exact
    // edge budget.
    std::vector<std::vector<bool>> adj(nodes, std::vector<bool>(nodes, false));
    EdgeList result;
    const auto add_edge = [&](int a, int b) {
        adj[a][b] = adj[b][a] = true;
        result.emplace_back(std::min(a, b), std::max(a, b));
    };
    const int m = std::max(1, edges / std::max(nodes, 1));
    std::vector<int> endpoint_pool;  // node repeated once per incident edge
    if (nodes >= 2) add_edge(0, 1);
    endpoint_pool.push_back(0);
    endpoint_pool.push_back(1);
    for (int v = 2; v < nodes; ++v) {
        const int stubs = std::min(m, v);
        for (int s = 0; s < stubs; ++s) {
            int target = -1;
            for (int attempt = 0; attempt < 64; ++attempt) {
                std::uniform_int_distribution<std::size_t> pick(
                    0, endpoint_pool.size() - 1);
                const int candidate = endpoint_pool[pick(rng)];
                if (candidate != v && !adj[v][candidate]) {
                    target = candidate;
                    break;
                }
            }
            if (target < 0) {
                for (int u = 0; u < v && target < 0; ++u)
                    if (!adj[v][u]) target = u;
            }
            if (target < 0) break;
            add_edge(v, target);
            endpoint_pool.push_back(v);
            endpoint_pool.push_back(target);
        }
    }
    while (static_cast<int>(result.size()) > edges) {
        std::uniform_int_distribution<std::size_t> pick(0, result.size() - 1);
        const std::size_t r = pick(rng);
        adj[result[r].first][result[r].second] = false;
        adj[result[r].second][result[r].first] = false;
        result[r] = result.back();
        result.pop_back();
    }
    if (static_cast<int>(result.size()) < edges) {
        EdgeList missing;
        for (int i = 0; i < nodes; ++i)
            for (int j = i + 1; j < nodes; ++j)
                if (!adj[i][j]) missing.emplace_back(i, j);
        std::shuffle(missing.begin(), missing.end(), rng);
        for (std::size_t r = 0;
             static_cast<int>(result.size()) < edges && r < missing.size(); ++r)
            result.push_back(missing[r]);
    }
    std::sort(result.begin(), result.end());
    return result;
}

}  // namespace detail

inline EdgeList random_graph(GraphKind kind, int nodes, int edges,
                             std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return detail::random_graph_edges(kind, nodes, edges, rng);
}

/// Generation recipe for the three-group block-diagonal precision family.
struct PrecisionFamilySpec {
    int p = 100;
    int n_components = 4;
    GraphKind graph_kind = GraphKind::erdos_renyi;
    int total_edges = 95;
    double value_min = 0.5;   // magnitude interval, sign drawn at random
    double value_max = 0.7;
    double diag_boost = 0.1;
    double perturb_min = -0.2;
    double perturb_max = 0.2;
    std::uint64_t seed = 0;

    void validate() const {
        if (p < 1 || n_components < 3)
            throw invalid_input("need p >= 1 and at least 3 components");
        if (p % n_components != 0)
            throw invalid_input("p must be divisible by the component count");
        if (!(value_min > 0.0 && value_max < 1.0 && value_min <= value_max))
            throw invalid_input("value range must lie inside (0,1)");
        if (!(diag_boost > 0.0)) throw invalid_input("diag_boost must be > 0");
        if (perturb_min > perturb_max)
            throw invalid_input("empty perturbation range");
        const int size = p / n_components;
        const long capacity = static_cast<long>(n_components) * size *
                              (size - 1) / 2;
        if (total_edges < 0 || total_edges > capacity)
            throw invalid_input("edge budget exceeds component capacity");
    }

    std::vector<int> component_of() const {
        std::vector<int> owner(p);
        const int size = p / n_components;
        for (int i = 0; i < p; ++i) owner[i] = i / size;
        return owner;
    }
};

struct PrecisionFamily {
    std::vector<Matrix> omega;  // 3 true precision matrices
    std::vector<EdgeList> support;
    std::vector<std::vector<int>> components;  // coordinates per component
    std::vector<double> boosts;        // diagonal boost applied per group
    std::vector<bool> repair_deviated;  // boost exceeded the base recipe
};

/// Builds the three-group family: group 1 keeps all components; groups 2
/// and 3 drop components 2 and 3 respectively and perturb the surviving
/// entries. Whenever the raw symmetric matrix is not already positive
/// definite, the diagonal boost is raised to |lambda_min| + diag_boost and
/// the deviation is flagged in the result.
inline PrecisionFamily build_precision_family(const PrecisionFamilySpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    const int size = spec.p / spec.n_components;

    PrecisionFamily family;
    for (int c = 0; c < spec.n_components; ++c) {
        std::vector<int> coords(size);
        std::iota(coords.begin(), coords.end(), c * size);
        family.components.push_back(std::move(coords));
    }

    // Edge budget split as evenly as possible across components.
    std::vector<int> budget(spec.n_components,
                            spec.total_edges / spec.n_components);
    for (int c = 0; c < spec.total_edges % spec.n_components; ++c) ++budget[c];

    Matrix base = Matrix::Zero(spec.p, spec.p);
    std::uniform_real_distribution<double> magnitude(spec.value_min,
                                                     spec.value_max);
    std::bernoulli_distribution negative(0.5);
    std::vector<int> edge_component;
    EdgeList base_edges;
    for (int c = 0; c < spec.n_components; ++c) {
        const EdgeList local =
            detail::random_graph_edges(spec.graph_kind, size, budget[c], rng);
        for (const auto& [a, b] : local) {
            const int i = c * size + a, j = c * size + b;
            const double value = magnitude(rng) * (negative(rng) ? -1.0 : 1.0);
            base(i, j) = base(j, i) = value;
            base_edges.emplace_back(i, j);
            edge_component.push_back(c);
        }
    }

    const auto finalize = [&](Matrix raw) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(raw, Eigen::EigenvaluesOnly);
        const double lam_min = es.eigenvalues().minCoeff();
        const bool deviated = lam_min <= 0.0;
        const double boost =
            deviated ? -lam_min + spec.diag_boost : spec.diag_boost;
        raw.diagonal().array() += boost;
        Eigen::SelfAdjointEigenSolver<Matrix> check(raw, Eigen::EigenvaluesOnly);
        if (!(check.eigenvalues().minCoeff() > 0.0))
            throw numeric_error("positive definite repair failed, lambda_min " +
                                std::to_string(check.eigenvalues().minCoeff()));
        family.boosts.push_back(boost);
        family.repair_deviated.push_back(deviated);
        family.omega.push_back(std::move(raw));
    };

    finalize(base);
    family.support.push_back(base_edges);

    std::uniform_real_distribution<double> perturb(spec.perturb_min,
                                                   spec.perturb_max);
    for (int group = 1; group < 3; ++group) {
        const int removed = group;  // group 2 drops component 2, 3 drops 3
        Matrix raw = base;
        EdgeList edges;
        for (std::size_t e = 0; e < base_edges.size(); ++e) {
            const auto& [i, j] = base_edges[e];
            if (edge_component[e] == removed) {
                raw(i, j) = raw(j, i) = 0.0;
                continue;
            }
            const double value = raw(i, j) + perturb(rng);
            raw(i, j) = raw(j, i) = value;
            if (value != 0.0) edges.emplace_back(i, j);
        }
        finalize(raw);
        family.support.push_back(std::move(edges));
    }
    return family;
}

/// Draws n rows from N(mean, precision^{-1}) via the Cholesky factor of the
/// precision: x = mean + U^{-1} z with U'U = precision.
inline Matrix sample_mvn(int n, const Vector& mean, const Matrix& precision,
                         std::uint64_t seed) {
    const Eigen::Index p = precision.rows();
    if (mean.size() != p) throw invalid_input("mean dimension mismatch");
    Eigen::LLT<Matrix> llt(precision);
    if (llt.info() != Eigen::Success)
        throw numeric_error("precision matrix is not positive definite");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix z(p, n);
    for (Eigen::Index col = 0; col < n; ++col)
        for (Eigen::Index row = 0; row < p; ++row) z(row, col) = normal(rng);

    const Matrix solved = llt.matrixU().solve(z);
    return (solved.colwise() + mean).transpose();
}

/// Group means for the unknown-membership setting: mu_1 ~ N(0, sigma^2 I),
/// and groups 2 and 3 copy it with their removed component's coordinates
/// zeroed. sigma = 0 recovers the known-membership setting (all zeros).
inline std::vector<Vector> mean_family(const PrecisionFamilySpec& spec,
                                       double sigma, std::uint64_t seed) {
    if (sigma < 0.0) throw invalid_input("sigma must be nonnegative");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector mu1(spec.p);
    for (int i = 0; i < spec.p; ++i) mu1(i) = sigma * normal(rng);

    const std::vector<int> owner = spec.component_of();
    std::vector<Vector> means{mu1, mu1, mu1};
    for (int i = 0; i < spec.p; ++i) {
        if (owner[i] == 1) means[1](i) = 0.0;
        if (owner[i] == 2) means[2](i) = 0.0;
    }
    return means;
}

/// Min and max absolute partial correlation over the support of a
/// precision matrix; returns {0, 0} for diagonal matrices.
inline std::pair<double, double> partial_correlation_range(
    const Matrix& omega) {
    const Eigen::Index p = omega.rows();
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    bool any = false;
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i + 1; j < p; ++j) {
            if (omega(i, j) == 0.0) continue;
            const double pc =
                std::abs(omega(i, j)) / std::sqrt(omega(i, i) * omega(j, j));
            lo = std::min(lo, pc);
            hi = std::max(hi, pc);
            any = true;
        }
    if (!any) return {0.0, 0.0};
    return {lo, hi};
}

}  // namespace lasich

#endif
