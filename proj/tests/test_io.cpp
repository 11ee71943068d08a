#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "lasich/io.hpp"
#include "lasich/synth.hpp"
#include "test_support.hpp"

using namespace lasich;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const auto dir =
        fs::temp_directory_path() /
        ("lasich_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string command = std::string(LASICH_CLI_PATH) + " " + args +
                                " >/dev/null 2>/dev/null";
    const int status = std::system(command.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("csv round trip with group labels") {
    const auto dir = temp_dir();
    std::mt19937_64 rng(71);
    const Matrix data = lasich::testing::random_matrix(rng, 6, 3);
    const std::vector<int> labels{1, 1, 2, 2, 2, 1};
    write_data_csv((dir / "data.csv").string(), data, &labels);

    const GroupedSample sample = read_grouped_csv((dir / "data.csv").string());
    REQUIRE(sample.num_groups == 2);
    REQUIRE(sample.membership == labels);
    REQUIRE((sample.data - data).cwiseAbs().maxCoeff() < 1e-15);
    fs::remove_all(dir);
}

TEST_CASE("csv validation errors") {
    const auto dir = temp_dir();
    SECTION("missing header") {
        write_file(dir / "bad.csv", "");
        REQUIRE_THROWS_AS(read_csv((dir / "bad.csv").string()), io_error);
    }
    SECTION("ragged row") {
        write_file(dir / "bad.csv", "a,b\n1,2\n3\n");
        REQUIRE_THROWS_AS(read_csv((dir / "bad.csv").string()), io_error);
    }
    SECTION("non numeric cell") {
        write_file(dir / "bad.csv", "a,b\n1,oops\n");
        REQUIRE_THROWS_AS(read_csv((dir / "bad.csv").string()), io_error);
    }
    SECTION("missing group column for labeled reads") {
        write_file(dir / "bad.csv", "a,b\n1,2\n");
        REQUIRE_THROWS_AS(read_grouped_csv((dir / "bad.csv").string()),
                          io_error);
    }
    SECTION("label exceeding K") {
        write_file(dir / "bad.csv", "a,group\n1,1\n2,5\n");
        REQUIRE_THROWS_AS(read_grouped_csv((dir / "bad.csv").string(), 2),
                          invalid_input);
    }
    fs::remove_all(dir);
}

TEST_CASE("network json round trip") {
    Matrix w = Matrix::Zero(3, 3);
    w(0, 1) = w(1, 0) = 1.5;
    w(1, 2) = w(2, 1) = 0.25;
    const SubpopulationNetwork network(3, w, LaplacianMode::unnormalized);
    const auto j = network_to_json(network);
    const auto back = network_from_json(j);
    REQUIRE(back.num_groups == 3);
    REQUIRE(back.mode == LaplacianMode::unnormalized);
    REQUIRE((back.weights - w).cwiseAbs().maxCoeff() < 1e-15);

    REQUIRE_THROWS_AS(network_from_json(json{{"K", 2}}), io_error);
    REQUIRE_THROWS_AS(
        network_from_json(json{{"K", 2},
                               {"mode", "normalized"},
                               {"edges", {{1, 1, 1.0}}}}),
        io_error);
}

TEST_CASE("estimate json round trip") {
    std::mt19937_64 rng(73);
    Matrix theta = Matrix::Identity(3, 3);
    theta(0, 2) = theta(2, 0) = -0.3;
    PrecisionEstimate est;
    est.theta = {theta};
    est.omega = {2.0 * theta};
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask(3, 3);
    mask.setConstant(false);
    mask.diagonal().setConstant(true);
    mask(0, 2) = mask(2, 0) = true;
    est.support = {mask};
    est.iterations = 42;
    est.final_residual = 1e-9;
    est.converged = true;

    const auto back = estimate_from_json(estimate_to_json(est));
    REQUIRE((back.theta[0] - est.theta[0]).cwiseAbs().maxCoeff() < 1e-15);
    REQUIRE((back.omega[0] - est.omega[0]).cwiseAbs().maxCoeff() < 1e-15);
    REQUIRE(back.support[0](0, 2));
    REQUIRE_FALSE(back.support[0](0, 1));
    REQUIRE(back.iterations == 42);
}

TEST_CASE("cli pipeline round trip") {
    const auto dir = temp_dir();
    const std::string base = dir.string();

    REQUIRE(run_cli("simulate --p 20 --n 30,40,30 --edges 12 --seed 3"
                    " --data-out " + base + "/data.csv"
                    " --truth-out " + base + "/truth.json"
                    " --spec-out " + base + "/spec.json") == 0);
    REQUIRE(fs::exists(dir / "data.csv"));
    REQUIRE(fs::exists(dir / "truth.json"));

    REQUIRE(run_cli("fit --input " + base + "/data.csv"
                    " --network line --rho-n 0.15 --rho2 0.4"
                    " --output " + base + "/estimate.json") == 0);
    REQUIRE(run_cli("evaluate --estimate " + base + "/estimate.json"
                    " --truth " + base + "/truth.json"
                    " --output " + base + "/metrics.json") == 0);

    const auto metrics = read_json(base + "/metrics.json");
    REQUIRE(metrics.at("pooled").at("detected").get<long>() >= 0);
    REQUIRE(metrics.at("pooled").at("true_edges").get<long>() > 0);

    REQUIRE(run_cli("screen --input " + base + "/data.csv"
                    " --network line --rho-n 0.5 --rho2 0.1"
                    " --output " + base + "/partition.json") == 0);
    const auto partition = read_json(base + "/partition.json");
    REQUIRE(partition.at("blocks").size() >= 1);
    REQUIRE(partition.at("config").at("seed").get<int>() == 0);

    fs::remove_all(dir);
}

TEST_CASE("cli determinism") {
    const auto dir = temp_dir();
    const std::string base = dir.string();
    const std::string simulate_cmd =
        "simulate --p 16 --n 20,20,20 --edges 10 --seed 11"
        " --data-out " + base + "/data.csv"
        " --truth-out " + base + "/truth.json";
    const std::string fit_cmd =
        "fit --input " + base + "/data.csv --network complete --rho-n 0.2"
        " --output " + base + "/estimate.json";

    REQUIRE(run_cli(simulate_cmd) == 0);
    REQUIRE(run_cli(fit_cmd) == 0);
    const std::string data = read_file(dir / "data.csv");
    const std::string truth = read_file(dir / "truth.json");
    const std::string estimate = read_file(dir / "estimate.json");

    REQUIRE(run_cli(simulate_cmd) == 0);
    REQUIRE(run_cli(fit_cmd) == 0);
    REQUIRE(read_file(dir / "data.csv") == data);
    REQUIRE(read_file(dir / "truth.json") == truth);
    REQUIRE(read_file(dir / "estimate.json") == estimate);
    fs::remove_all(dir);
}

TEST_CASE("cli error codes") {
    const auto dir = temp_dir();
    const std::string base = dir.string();

    // Missing required flag: usage error.
    REQUIRE(run_cli("hcfit --input nowhere.csv --output x.json") == 64);
    // Unreadable/malformed data.
    write_file(dir / "bad.csv", "a,group\n1,oops\n");
    REQUIRE(run_cli("fit --input " + base + "/bad.csv --output " + base +
                    "/x.json") == 65);
    // Inconsistent K.
    write_file(dir / "data.csv", "a,b,group\n1,2,1\n2,1,1\n0,4,3\n5,1,3\n");
    REQUIRE(run_cli("fit --input " + base + "/data.csv --k 2 --output " +
                    base + "/x.json") == 66);
    fs::remove_all(dir);
}

TEST_CASE("cli hcfit writes all artifacts") {
    const auto dir = temp_dir();
    const std::string base = dir.string();
    std::mt19937_64 rng(79);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::ofstream out(dir / "plain.csv");
    out << "x1,x2,x3\n";
    for (int i = 0; i < 40; ++i) {
        const double shift = i < 20 ? -4.0 : 4.0;
        out << shift + normal(rng) << ',' << shift + normal(rng) << ','
            << shift + normal(rng) << '\n';
    }
    out.close();

    REQUIRE(run_cli("hcfit --input " + base + "/plain.csv --k 2"
                    " --linkage complete --rho-n 0.3"
                    " --output " + base + "/estimate.json"
                    " --membership-out " + base + "/membership.csv"
                    " --network-out " + base + "/network.json") == 0);
    REQUIRE(fs::exists(dir / "membership.csv"));
    const auto network = read_json(base + "/network.json");
    REQUIRE(network.at("K").get<int>() == 2);
    REQUIRE(network.at("edges").size() == 1);

    const std::string membership = read_file(dir / "membership.csv");
    REQUIRE(membership.substr(0, 18) == "observation,group\n");
    fs::remove_all(dir);
}

TEST_CASE("cli path emits curve data") {
    const auto dir = temp_dir();
    const std::string base = dir.string();
    REQUIRE(run_cli("simulate --p 12 --n 20,30,20 --edges 8 --seed 5"
                    " --data-out " + base + "/data.csv"
                    " --truth-out " + base + "/truth.json") == 0);
    REQUIRE(run_cli("path --input " + base + "/data.csv"
                    " --network line --rho-grid 0.1,0.3 --rho2-grid 0,0.5"
                    " --truth " + base + "/truth.json"
                    " --output " + base + "/path.csv") == 0);
    const std::string csv = read_file(dir / "path.csv");
    REQUIRE(csv.rfind("rho_n,rho_2,detected,tp,fp,frobenius,bic\n", 0) == 0);
    int lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    REQUIRE(lines == 5);  // header + 4 grid points
    REQUIRE(fs::exists(dir / "path.csv.meta.json"));
    fs::remove_all(dir);
}
