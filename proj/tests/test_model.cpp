#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "lasich/model.hpp"
#include "test_support.hpp"

using namespace lasich;
using lasich::testing::random_spd;

TEST_CASE("group moments on a two-point group") {
    Matrix data(2, 2);
    data << 1, 2, 3, 4;
    GroupedSample sample(data, {1, 1}, 1);
    const GroupMoments moments = group_moments(sample);

    REQUIRE(moments.counts[0] == 2);
    REQUIRE(moments.means[0](0) == Catch::Approx(2.0));
    REQUIRE(moments.means[0](1) == Catch::Approx(3.0));
    // ML divisor n_k: centered rows are (-1,-1) and (1,1).
    Matrix expected(2, 2);
    expected << 1, 1, 1, 1;
    REQUIRE((moments.covariances[0] - expected).cwiseAbs().maxCoeff() < 1e-14);
    REQUIRE((moments.correlations[0] - expected).cwiseAbs().maxCoeff() < 1e-14);
    REQUIRE(moments.weights[0] == Catch::Approx(1.0));
}

TEST_CASE("group moments rejects degenerate groups") {
    Matrix data(3, 2);
    data << 1, 2, 3, 4, 5, 6;
    GroupedSample sample(data, {1, 1, 2}, 2);
    REQUIRE_THROWS_AS(group_moments(sample), invalid_input);
}

TEST_CASE("group moments rejects constant columns") {
    Matrix data(3, 2);
    data << 1, 7, 2, 7, 3, 7;
    GroupedSample sample(data, {1, 1, 1}, 1);
    REQUIRE_THROWS_AS(group_moments(sample), numeric_error);
}

TEST_CASE("grouped sample validates labels") {
    Matrix data(2, 1);
    data << 0, 1;
    REQUIRE_THROWS_AS(GroupedSample(data, {1, 3}, 2), invalid_input);
    REQUIRE_THROWS_AS(GroupedSample(data, {1}, 1), invalid_input);
}

TEST_CASE("weights sum to one across groups") {
    std::mt19937_64 rng(7);
    Matrix data = lasich::testing::random_matrix(rng, 10, 3);
    GroupedSample sample(data, {1, 1, 1, 2, 2, 2, 2, 3, 3, 3}, 3);
    const GroupMoments moments = group_moments(sample);
    double total = 0.0;
    for (double w : moments.weights) total += w;
    REQUIRE(total == Catch::Approx(1.0));
}

TEST_CASE("correlation from covariance") {
    Matrix cov(2, 2);
    cov << 4, 2, 2, 9;
    const Matrix corr = correlation_from_covariance(cov);
    REQUIRE(corr(0, 0) == Catch::Approx(1.0));
    REQUIRE(corr(1, 1) == Catch::Approx(1.0));
    REQUIRE(corr(0, 1) == Catch::Approx(1.0 / 3.0));

    REQUIRE(correlation_from_covariance(Matrix::Identity(3, 3))
                .isApprox(Matrix::Identity(3, 3)));

    Matrix diag = Matrix::Zero(2, 2);
    diag.diagonal() << 2.5, 0.3;
    REQUIRE(correlation_from_covariance(diag).isApprox(Matrix::Identity(2, 2)));

    Matrix bad(2, 2);
    bad << 0, 0, 0, 1;
    REQUIRE_THROWS_AS(correlation_from_covariance(bad), numeric_error);
}

TEST_CASE("correlation scaling is idempotent") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix corr = lasich::testing::random_correlation(rng, 6);
        const Matrix again = correlation_from_covariance(corr);
        REQUIRE((corr - again).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("scale to precision") {
    SECTION("constant variances rescale the identity") {
        const std::vector<Matrix> omega =
            scale_to_precision({Matrix::Identity(3, 3)},
                               {Vector::Constant(3, 4.0)});
        REQUIRE(omega[0].isApprox(0.25 * Matrix::Identity(3, 3)));
    }
    SECTION("unit variances are a no-op") {
        std::mt19937_64 rng(3);
        const Matrix theta = random_spd(rng, 4);
        const std::vector<Matrix> omega =
            scale_to_precision({theta}, {Vector::Ones(4)});
        REQUIRE(omega[0].isApprox(theta));
    }
    SECTION("zeros are preserved exactly") {
        Matrix theta = Matrix::Identity(3, 3);
        theta(0, 2) = theta(2, 0) = 0.4;
        Vector variances(3);
        variances << 2.0, 3.0, 0.5;
        const std::vector<Matrix> omega =
            scale_to_precision({theta}, {variances});
        REQUIRE(omega[0](0, 1) == 0.0);
        REQUIRE(omega[0](1, 2) == 0.0);
        REQUIRE(omega[0](0, 2) != 0.0);
    }
    SECTION("nonpositive variance fails") {
        REQUIRE_THROWS_AS(scale_to_precision({Matrix::Identity(2, 2)},
                                             {Vector::Zero(2)}),
                          numeric_error);
    }
}

TEST_CASE("precision scale recovery from correlation scale") {
    // Inverting the correlation matrix and conjugating back by the inverse
    // standard deviations must reproduce the covariance inverse.
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix sigma = random_spd(rng, 5);
        const Matrix psi = correlation_from_covariance(sigma);
        const Matrix theta = psi.inverse();
        const std::vector<Matrix> omega =
            scale_to_precision({theta}, {Vector(sigma.diagonal())});
        REQUIRE((omega[0] - sigma.inverse()).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("negative correlation loglik values") {
    SECTION("scalar identity") {
        const auto moments = lasich::testing::synthetic_moments(
            {Matrix::Identity(1, 1)}, {1.0});
        REQUIRE(negative_correlation_loglik({Matrix::Identity(1, 1)}, moments) ==
                Catch::Approx(1.0));
    }
    SECTION("identity in dimension p") {
        const auto moments = lasich::testing::synthetic_moments(
            {Matrix::Identity(4, 4), Matrix::Identity(4, 4)}, {0.3, 0.7});
        REQUIRE(negative_correlation_loglik(
                    {Matrix::Identity(4, 4), Matrix::Identity(4, 4)},
                    moments) == Catch::Approx(4.0));
    }
    SECTION("scalar theta = 2") {
        const auto moments = lasich::testing::synthetic_moments(
            {Matrix::Identity(1, 1)}, {1.0});
        REQUIRE(negative_correlation_loglik({2.0 * Matrix::Identity(1, 1)},
                                            moments) ==
                Catch::Approx(2.0 - std::log(2.0)));
    }
    SECTION("indefinite input fails") {
        const auto moments = lasich::testing::synthetic_moments(
            {Matrix::Identity(2, 2)}, {1.0});
        Matrix bad(2, 2);
        bad << 1, 2, 2, 1;
        REQUIRE_THROWS_AS(negative_correlation_loglik({bad}, moments),
                          numeric_error);
    }
}

TEST_CASE("negative loglik is convex") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(0.05, 0.95);
    const auto moments = lasich::testing::synthetic_moments(
        {lasich::testing::random_correlation(rng, 4)}, {1.0});
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix a = random_spd(rng, 4);
        const Matrix b = random_spd(rng, 4);
        const double t = unif(rng);
        const double mixed =
            negative_correlation_loglik({t * a + (1 - t) * b}, moments);
        const double bound = t * negative_correlation_loglik({a}, moments) +
                             (1 - t) * negative_correlation_loglik({b}, moments);
        REQUIRE(mixed <= bound + 1e-10);
    }
}

TEST_CASE("loglik gradient matches finite differences") {
    std::mt19937_64 rng(29);
    const Matrix psi1 = lasich::testing::random_correlation(rng, 4);
    const Matrix psi2 = lasich::testing::random_correlation(rng, 4);
    const auto moments =
        lasich::testing::synthetic_moments({psi1, psi2}, {0.4, 0.6});
    std::vector<Matrix> theta{random_spd(rng, 4), random_spd(rng, 4)};

    const double h = 1e-5;
    for (int k = 0; k < 2; ++k) {
        const Matrix grad =
            moments.weights[k] * (moments.correlations[k] - theta[k].inverse());
        for (Eigen::Index i = 0; i < 4; ++i)
            for (Eigen::Index j = i; j < 4; ++j) {
                // Perturb symmetrically: (i,j) and (j,i) by h/2 each, so the
                // directional derivative equals the (i,j) gradient entry.
                auto shifted = theta;
                const double step = i == j ? h : h / 2;
                shifted[k](i, j) += step;
                shifted[k](j, i) = shifted[k](i, j);
                const double up = negative_correlation_loglik(shifted, moments);
                shifted = theta;
                shifted[k](i, j) -= step;
                shifted[k](j, i) = shifted[k](i, j);
                const double down =
                    negative_correlation_loglik(shifted, moments);
                const double fd = (up - down) / (2 * h);
                REQUIRE(fd == Catch::Approx(grad(i, j)).margin(1e-8).epsilon(1e-4));
            }
    }
}
