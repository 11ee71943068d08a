#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "lasich/screening.hpp"
#include "test_support.hpp"

using namespace lasich;
using lasich::testing::random_correlation;
using lasich::testing::synthetic_moments;

namespace {

/// Correlation matrices with two planted equicorrelated blocks and exact
/// zeros across them.
std::vector<Matrix> planted_two_block(Eigen::Index p, Eigen::Index split,
                                      const std::vector<double>& level) {
    std::vector<Matrix> out;
    for (double rho : level) {
        Matrix psi = Matrix::Identity(p, p);
        for (Eigen::Index i = 0; i < p; ++i)
            for (Eigen::Index j = i + 1; j < p; ++j)
                if ((i < split) == (j < split)) psi(i, j) = psi(j, i) = rho;
        out.push_back(psi);
    }
    return out;
}

}  // namespace

TEST_CASE("screening test basic cases") {
    const auto bundle = laplacian(build_line_graph(3), 1e-3);
    SolverConfig config;
    config.rho_n = 0.2;
    config.rho_2 = 0.1;
    const std::vector<double> weights{0.25, 0.5, 0.25};

    SECTION("small weighted entries always screen") {
        Vector psi(3);
        psi << 0.5, 0.2, -0.6;  // |w psi| <= 0.15 < rho_n componentwise
        REQUIRE(pair_is_screened(psi, weights, bundle, config));
    }
    SECTION("zero vector screens") {
        REQUIRE(pair_is_screened(Vector::Zero(3), weights, bundle, config));
    }
    SECTION("large entry with rho_2 = 0 does not screen") {
        SolverConfig tight = config;
        tight.rho_2 = 0.0;
        Vector psi(3);
        psi << 0.0, 0.9, 0.0;  // w_2 psi = 0.45 > rho_n
        REQUIRE_FALSE(pair_is_screened(psi, weights, bundle, tight));
    }
}

TEST_CASE("partition extremes") {
    std::mt19937_64 rng(23);
    const auto moments = synthetic_moments(
        {random_correlation(rng, 6), random_correlation(rng, 6)}, {0.5, 0.5});
    const auto network = build_complete_graph(2);

    SECTION("huge rho_n screens everything") {
        SolverConfig config;
        config.rho_n = 10.0;
        config.rho_2 = 0.1;
        const auto partition = block_partition(moments, network, config);
        REQUIRE(partition.blocks.size() == 6);
        for (const auto& block : partition.blocks)
            REQUIRE(block.size() == 1);
    }
    SECTION("tiny rho_n keeps one block") {
        SolverConfig config;
        config.rho_n = 1e-6;
        config.rho_2 = 1e-6;
        const auto partition = block_partition(moments, network, config);
        REQUIRE(partition.blocks.size() == 1);
        REQUIRE(partition.blocks[0].size() == 6);
    }
}

TEST_CASE("planted blocks are recovered and solved equivalently") {
    const auto correlations = planted_two_block(8, 4, {0.5, 0.45, 0.55});
    const auto moments =
        synthetic_moments(correlations, {0.25, 0.5, 0.25}, 200);
    const auto network = build_line_graph(3);
    SolverConfig config;
    config.rho_n = 0.05;
    config.rho_2 = 0.25;
    config.tol = 1e-8;
    config.max_iter = 50000;

    const auto partition = block_partition(moments, network, config);
    REQUIRE(partition.blocks.size() == 2);
    REQUIRE(partition.blocks[0] == std::vector<int>{0, 1, 2, 3});
    REQUIRE(partition.blocks[1] == std::vector<int>{4, 5, 6, 7});

    const auto screened = solve_with_screening(moments, network, config);
    const auto direct = solve(moments, network, config);
    REQUIRE(screened.converged);
    REQUIRE(direct.converged);
    for (int k = 0; k < 3; ++k)
        REQUIRE((screened.theta[k] - direct.theta[k]).cwiseAbs().maxCoeff() <
                1e-6);
}

TEST_CASE("screening is sound on random instances") {
    std::mt19937_64 rng(27);
    std::uniform_real_distribution<double> rho_pick(0.05, 0.3);
    for (int trial = 0; trial < 6; ++trial) {
        const int k = 1 + trial % 3;
        const Eigen::Index p = 6 + 2 * (trial % 3);
        std::vector<Matrix> correlations;
        std::vector<double> weights(k, 1.0 / k);
        for (int g = 0; g < k; ++g)
            correlations.push_back(random_correlation(rng, p));
        const auto moments = synthetic_moments(correlations, weights, 300);
        const auto network =
            k > 1 ? build_line_graph(k)
                  : build_empty_graph(1, LaplacianMode::unnormalized);
        SolverConfig config;
        config.rho_n = rho_pick(rng);
        config.rho_2 = trial % 2 == 0 ? 0.0 : 0.4;
        config.tol = 1e-8;
        config.max_iter = 50000;

        const auto screened = solve_with_screening(moments, network, config);
        const auto direct = solve(moments, network, config);
        REQUIRE(screened.converged);
        REQUIRE(direct.converged);
        for (int g = 0; g < k; ++g)
            REQUIRE((screened.theta[g] - direct.theta[g])
                        .cwiseAbs()
                        .maxCoeff() < 10 * config.tol);
    }
}

TEST_CASE("screening refines monotonically in rho_n") {
    std::mt19937_64 rng(33);
    const auto moments = synthetic_moments(
        {random_correlation(rng, 7), random_correlation(rng, 7)}, {0.4, 0.6});
    const auto bundle = laplacian(build_complete_graph(2), 1e-3);

    std::vector<std::vector<bool>> screened_by_rho;
    for (double rho_n : {0.02, 0.05, 0.1, 0.2, 0.5}) {
        SolverConfig config;
        config.rho_n = rho_n;
        config.rho_2 = 0.3;
        std::vector<bool> flags;
        Vector psi(2);
        for (int i = 0; i < 7; ++i)
            for (int j = i + 1; j < 7; ++j) {
                psi << moments.correlations[0](i, j),
                    moments.correlations[1](i, j);
                flags.push_back(
                    pair_is_screened(psi, moments.weights, bundle, config));
            }
        screened_by_rho.push_back(flags);
    }
    for (std::size_t level = 1; level < screened_by_rho.size(); ++level)
        for (std::size_t pair = 0; pair < screened_by_rho[0].size(); ++pair)
            if (screened_by_rho[level - 1][pair])
                REQUIRE(screened_by_rho[level][pair]);
}

TEST_CASE("partitions are deterministic") {
    std::mt19937_64 rng(35);
    const auto moments = synthetic_moments(
        {random_correlation(rng, 8), random_correlation(rng, 8)}, {0.5, 0.5});
    const auto network = build_complete_graph(2);
    SolverConfig config;
    config.rho_n = 0.12;
    config.rho_2 = 0.2;
    const auto a = block_partition(moments, network, config);
    const auto b = block_partition(moments, network, config);
    REQUIRE(a.blocks == b.blocks);
}

TEST_CASE("all-singleton partition yields a diagonal estimate") {
    std::mt19937_64 rng(37);
    const auto moments =
        synthetic_moments({random_correlation(rng, 5)}, {1.0});
    SolverConfig config;
    config.rho_n = 10.0;
    config.rho_2 = 0.0;
    const auto estimate = solve_with_screening(
        moments, build_empty_graph(1, LaplacianMode::unnormalized), config);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            if (i != j) REQUIRE(estimate.theta[0](i, j) == 0.0);
    REQUIRE(estimate.theta[0](0, 0) == Catch::Approx(1.0));
}
