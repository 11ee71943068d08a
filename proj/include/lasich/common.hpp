#ifndef lasich_common_hpp
#define lasich_common_hpp

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace lasich {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown when inputs violate a documented precondition.
struct invalid_input : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a numeric operation cannot be completed (singular matrix,
/// indefinite input, failed generation).
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void symmetrize(Matrix& m) { m = ((m + m.transpose()) * 0.5).eval(); }

inline Matrix symmetrized(const Matrix& m) { return (m + m.transpose()) * 0.5; }

/// Relative positive-definiteness test: smallest eigenvalue must exceed
/// rel_tol times the largest.
inline bool is_positive_definite(const Matrix& m, double rel_tol = 1e-10) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    return lo > rel_tol * std::max(hi, 0.0);
}

/// Runs fn(i) for i in [0, count). Work items must write disjoint outputs.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const unsigned workers =
        std::min<unsigned>(threads, static_cast<unsigned>(count));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::atomic<std::size_t> next{0};
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) break;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace lasich

#endif
