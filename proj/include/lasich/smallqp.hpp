#ifndef lasich_smallqp_hpp
#define lasich_smallqp_hpp

#include <algorithm>
#include <cmath>
#include <limits>

#include "lasich/common.hpp"

namespace lasich {

/// Minimizes ||M v - b||^2 over v in [-1,1]^K. The dimension is the group
/// count, so the box is searched exactly: if the unconstrained solution is
/// interior it wins, otherwise every face pattern (each coordinate free or
/// fixed at +/-1) is checked against the KKT conditions. Iterative schemes
/// stall here because M carries the 1/sqrt(eps) weight of the perturbed
/// Laplacian's flat direction.
inline Vector box_least_squares(const Matrix& m, const Vector& b,
                                double tol = 1e-10) {
    const Eigen::Index dim = m.cols();
    const Matrix q = m.transpose() * m;
    const Vector c = m.transpose() * b;

    const Vector unconstrained = q.ldlt().solve(c);
    if ((unconstrained.cwiseAbs().array() <= 1.0 + tol).all())
        return unconstrained.cwiseMax(-1.0).cwiseMin(1.0);

    Vector best = unconstrained.cwiseMax(-1.0).cwiseMin(1.0);
    double best_value = 0.5 * best.dot(q * best) - c.dot(best);

    std::vector<int> pattern(dim, 0);  // 0 free, 1 at +1, 2 at -1
    long total = 1;
    for (Eigen::Index i = 0; i < dim; ++i) total *= 3;
    for (long code = 1; code < total; ++code) {
        long rest = code;
        std::vector<Eigen::Index> free_set;
        Vector v = Vector::Zero(dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            pattern[i] = static_cast<int>(rest % 3);
            rest /= 3;
            if (pattern[i] == 0)
                free_set.push_back(i);
            else
                v(i) = pattern[i] == 1 ? 1.0 : -1.0;
        }

        if (!free_set.empty()) {
            const auto nf = static_cast<Eigen::Index>(free_set.size());
            Matrix qff(nf, nf);
            Vector rhs(nf);
            for (Eigen::Index a = 0; a < nf; ++a) {
                rhs(a) = c(free_set[a]);
                for (Eigen::Index i = 0; i < dim; ++i)
                    if (pattern[i] != 0)
                        rhs(a) -= q(free_set[a], i) * v(i);
                for (Eigen::Index bb = 0; bb < nf; ++bb)
                    qff(a, bb) = q(free_set[a], free_set[bb]);
            }
            const Vector vf = qff.ldlt().solve(rhs);
            bool feasible = true;
            for (Eigen::Index a = 0; a < nf; ++a) {
                if (std::abs(vf(a)) > 1.0 + tol) feasible = false;
                v(free_set[a]) = std::clamp(vf(a), -1.0, 1.0);
            }
            if (!feasible) continue;
        }

        const Vector grad = q * v - c;
        bool optimal = true;
        for (Eigen::Index i = 0; i < dim && optimal; ++i) {
            if (pattern[i] == 1 && grad(i) > tol) optimal = false;
            if (pattern[i] == 2 && grad(i) < -tol) optimal = false;
        }
        if (optimal) return v;

        const double value = 0.5 * v.dot(q * v) - c.dot(v);
        if (value < best_value) {
            best_value = value;
            best = v;
        }
    }
    return best;  // best feasible candidate if no pattern certified
}

/// Computes M y* for the minimizer y* of ||r - M y||^2 over ||y|| <= 1,
/// where M = U diag(sqrt(lams)) U' is symmetric positive definite. In the
/// eigenbasis the constrained case reduces to a monotone scalar root.
inline Vector ball_least_squares_image(const Matrix& eigenvectors,
                                       const Vector& lams, const Vector& r) {
    const Eigen::Index dim = lams.size();
    const Vector rt = eigenvectors.transpose() * r;
    double norm2_unconstrained = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i)
        norm2_unconstrained += rt(i) * rt(i) / lams(i);
    if (norm2_unconstrained <= 1.0) return r;

    // ||y(nu)||^2 = sum lam_i rt_i^2 / (lam_i + nu)^2 decreases in nu.
    const auto norm2 = [&](double nu) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < dim; ++i) {
            const double d = lams(i) + nu;
            total += lams(i) * rt(i) * rt(i) / (d * d);
        }
        return total;
    };
    double lo = 0.0, hi = 1.0;
    while (norm2(hi) > 1.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (norm2(mid) > 1.0 ? lo : hi) = mid;
    }
    const double nu = 0.5 * (lo + hi);
    Vector image(dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        image(i) = lams(i) * rt(i) / (lams(i) + nu);
    return eigenvectors * image;
}

/// Euclidean distance from t to the Minkowski sum
///   { alpha u : u in [-1,1]^K } + { beta M y : ||y|| <= 1 },
/// with M = U diag(sqrt(lams)) U'. Two-block alternating exact
/// minimization; each block solve is closed form.
inline double box_ball_distance(const Vector& t, double alpha, double beta,
                                const Matrix& eigenvectors, const Vector& lams,
                                int max_rounds = 500, double tol = 1e-13) {
    Vector u = Vector::Zero(t.size()), my = Vector::Zero(t.size());
    double previous = std::numeric_limits<double>::infinity();
    for (int round = 0; round < max_rounds; ++round) {
        if (alpha > 0.0)
            u = ((t - my) / alpha).cwiseMax(-1.0).cwiseMin(1.0);
        if (beta > 0.0)
            my = beta * ball_least_squares_image(eigenvectors, lams,
                                                 (t - alpha * u) / beta);
        const double dist = (t - alpha * u - my).norm();
        if (previous - dist < tol) return dist;
        previous = dist;
    }
    return previous;
}

}  // namespace lasich

#endif
