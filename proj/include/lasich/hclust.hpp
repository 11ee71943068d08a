#ifndef lasich_hclust_hpp
#define lasich_hclust_hpp

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "lasich/common.hpp"
#include "lasich/model.hpp"
#include "lasich/network.hpp"
#include "lasich/screening.hpp"
#include "lasich/solver.hpp"

namespace lasich {

enum class Linkage { single, complete, average };

/// Agglomerative merge tree. Child ids below num_leaves are observations;
/// id num_leaves + m refers to the cluster created by merge m.
struct Dendrogram {
    struct Merge {
        int left = 0;
        int right = 0;
        double height = 0.0;
        int size = 0;  // leaves under the merged cluster
    };
    int num_leaves = 0;
    std::vector<Merge> merges;  // num_leaves - 1 entries, heights nondecreasing
};

/// Standard agglomerative clustering on Euclidean distances. Ties break on
/// the lexicographically smallest cluster-id pair, so results are
/// deterministic.
inline Dendrogram hierarchical_cluster(const Matrix& data, Linkage linkage) {
    const int n = static_cast<int>(data.rows());
    if (n < 2) throw invalid_input("clustering needs at least 2 observations");

    struct Cluster {
        int id;
        int size;
    };
    std::vector<Cluster> active(n);
    for (int i = 0; i < n; ++i) active[i] = {i, 1};

    Matrix dist(n, n);
    for (int i = 0; i < n; ++i) {
        dist(i, i) = 0.0;
        for (int j = i + 1; j < n; ++j)
            dist(i, j) = dist(j, i) = (data.row(i) - data.row(j)).norm();
    }

    Dendrogram out;
    out.num_leaves = n;
    out.merges.reserve(n - 1);

    for (int step = 0; step < n - 1; ++step) {
        const int m = static_cast<int>(active.size());
        int best_a = 0, best_b = 1;
        double best = std::numeric_limits<double>::infinity();
        for (int a = 0; a < m; ++a)
            for (int b = a + 1; b < m; ++b) {
                const double d = dist(a, b);
                if (d < best) {
                    best = d;
                    best_a = a;
                    best_b = b;
                } else if (d == best) {
                    const auto key = std::minmax(active[a].id, active[b].id);
                    const auto best_key =
                        std::minmax(active[best_a].id, active[best_b].id);
                    if (key < best_key) {
                        best_a = a;
                        best_b = b;
                    }
                }
            }

        const Cluster ca = active[best_a], cb = active[best_b];
        out.merges.push_back({std::min(ca.id, cb.id), std::max(ca.id, cb.id),
                              best, ca.size + cb.size});

        // Lance-Williams update of distances to the merged cluster, stored
        // in slot best_a; slot best_b is swapped out with the last column.
        for (int c = 0; c < m; ++c) {
            if (c == best_a || c == best_b) continue;
            double d;
            switch (linkage) {
                case Linkage::single:
                    d = std::min(dist(best_a, c), dist(best_b, c));
                    break;
                case Linkage::complete:
                    d = std::max(dist(best_a, c), dist(best_b, c));
                    break;
                case Linkage::average:
                default:
                    d = (ca.size * dist(best_a, c) + cb.size * dist(best_b, c)) /
                        static_cast<double>(ca.size + cb.size);
                    break;
            }
            dist(best_a, c) = dist(c, best_a) = d;
        }
        active[best_a] = {n + step, ca.size + cb.size};

        const int last = m - 1;
        if (best_b != last) {
            active[best_b] = active[last];
            for (int c = 0; c < m; ++c)
                dist(best_b, c) = dist(c, best_b) = dist(last, c);
            dist(best_b, best_b) = 0.0;
        }
        active.pop_back();
    }
    return out;
}

/// Removes the K-1 highest merges; remaining components become clusters.
/// Labels 1..K are assigned by order of smallest member index.
inline std::vector<int> cut(const Dendrogram& dendrogram, int k) {
    const int n = dendrogram.num_leaves;
    if (k < 1 || k > n) throw invalid_input("cut count out of range");

    detail::UnionFind uf(n);
    // Resolve a cluster id to one of its leaves.
    std::vector<int> representative(n + dendrogram.merges.size());
    std::iota(representative.begin(), representative.begin() + n, 0);
    for (int m = 0; m < n - k; ++m) {
        const auto& merge = dendrogram.merges[m];
        const int a = representative[merge.left];
        const int b = representative[merge.right];
        uf.unite(a, b);
        representative[n + m] = a;
    }
    for (std::size_t m = n - k; m < dendrogram.merges.size(); ++m)
        representative[n + m] =
            representative[dendrogram.merges[m].left];

    std::vector<int> root_label(n, 0);
    std::vector<int> labels(n);
    int next = 0;
    for (int i = 0; i < n; ++i) {
        const int root = uf.find(i);
        if (root_label[root] == 0) root_label[root] = ++next;
        labels[i] = root_label[root];
    }
    return labels;
}

/// Builds the subpopulation network from a dendrogram and a K-cut of it:
/// dissimilarity(k,k') is the cophenetic height of the first merge joining
/// the two clusters, and W = 1/dissimilarity.
inline SubpopulationNetwork subpopulation_network_from_dendrogram(
    const Dendrogram& dendrogram, const std::vector<int>& membership, int k,
    LaplacianMode mode = LaplacianMode::normalized) {
    const int n = dendrogram.num_leaves;
    if (static_cast<int>(membership.size()) != n)
        throw invalid_input("membership length mismatch");

    Matrix dissimilarity = Matrix::Zero(k, k);
    // Label sets carried up the merge tree; the first merge whose two sides
    // hold labels a and b fixes the cophenetic height of (a, b).
    std::vector<std::vector<bool>> labels_below(n + dendrogram.merges.size(),
                                                std::vector<bool>(k, false));
    for (int i = 0; i < n; ++i) {
        if (membership[i] < 1 || membership[i] > k)
            throw invalid_input("membership label outside 1..K");
        labels_below[i][membership[i] - 1] = true;
    }
    for (std::size_t m = 0; m < dendrogram.merges.size(); ++m) {
        const auto& merge = dendrogram.merges[m];
        const auto& left = labels_below[merge.left];
        const auto& right = labels_below[merge.right];
        for (int a = 0; a < k; ++a) {
            if (!left[a]) continue;
            for (int b = 0; b < k; ++b) {
                if (!right[b] || a == b) continue;
                if (dissimilarity(a, b) == 0.0) {
                    dissimilarity(a, b) = merge.height;
                    dissimilarity(b, a) = merge.height;
                }
            }
        }
        auto& joined = labels_below[n + m];
        for (int a = 0; a < k; ++a) joined[a] = left[a] || right[a];
    }

    Matrix weights = Matrix::Zero(k, k);
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b) {
            if (dissimilarity(a, b) == 0.0)
                throw numeric_error(
                    "zero dissimilarity between clusters " +
                    std::to_string(a + 1) + " and " + std::to_string(b + 1));
            weights(a, b) = weights(b, a) = 1.0 / dissimilarity(a, b);
        }
    return SubpopulationNetwork(k, std::move(weights), mode);
}

/// Fraction of observation pairs on which two partitions agree (together in
/// both or apart in both).
inline double rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw invalid_input("partition length mismatch");
    const std::size_t n = a.size();
    if (n < 2) return 1.0;
    std::size_t agree = 0, total = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            ++total;
            if ((a[i] == a[j]) == (b[i] == b[j])) ++agree;
        }
    return static_cast<double>(agree) / static_cast<double>(total);
}

struct HcLasichResult {
    PrecisionEstimate estimate;
    std::vector<int> membership;
    SubpopulationNetwork network;
    Dendrogram dendrogram;
};

/// Full pipeline for unlabeled data: cluster, cut, derive the network from
/// the dendrogram, then fit with screening on the estimated groups.
inline HcLasichResult hc_lasich(const Matrix& data, int k, Linkage linkage,
                                const SolverConfig& config,
                                LaplacianMode mode = LaplacianMode::normalized) {
    HcLasichResult result;
    result.dendrogram = hierarchical_cluster(data, linkage);
    result.membership = cut(result.dendrogram, k);

    std::vector<int> sizes(k, 0);
    for (int label : result.membership) ++sizes[label - 1];
    for (int g = 0; g < k; ++g)
        if (sizes[g] < 2)
            throw invalid_input("estimated cluster " + std::to_string(g + 1) +
                                " has fewer than 2 members");

    result.network =
        k > 1 ? subpopulation_network_from_dendrogram(result.dendrogram,
                                                      result.membership, k, mode)
              : SubpopulationNetwork(1, Matrix::Zero(1, 1), mode);
    const GroupedSample sample(data, result.membership, k);
    result.estimate =
        solve_with_screening(group_moments(sample), result.network, config);
    return result;
}

}  // namespace lasich

#endif
