// Command-line surface for joint sparse precision estimation:
//   simulate  synthetic three-group data and ground truth
//   fit       labeled CSV + subpopulation network -> estimate JSON
//   hcfit     unlabeled CSV -> membership, network, and estimate
//   screen    block-diagonal partition implied by the tuning parameters
//   evaluate  estimate vs truth -> metrics JSON
//   path      tuning grid -> CSV of detected/tp/fp/frobenius/bic rows

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lasich/lasich.hpp"

namespace {

using lasich::json;

// Exit codes: 64 usage, 65 malformed data, 66 inconsistent configuration,
// 70 numeric failure.
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitConfig = 66;
constexpr int kExitNumeric = 70;

struct CommonOptions {
    double rho_n = 0.1;
    double rho_2 = 0.0;
    double epsilon = lasich::kDefaultLaplacianEpsilon;
    double varrho = 1.0;
    double tol = 1e-6;
    int max_iter = 2000;
    unsigned threads = 1;
    std::uint64_t seed = 0;

    void add_solver_flags(CLI::App* cmd) {
        cmd->add_option("--rho-n", rho_n, "l1 penalty strength");
        cmd->add_option("--rho2", rho_2, "Laplacian penalty multiplier");
        cmd->add_option("--epsilon", epsilon, "Laplacian perturbation");
        cmd->add_option("--varrho", varrho, "ADMM penalty parameter");
        cmd->add_option("--tol", tol, "residual tolerance");
        cmd->add_option("--max-iter", max_iter, "iteration cap");
        cmd->add_option("--threads", threads, "worker thread cap");
    }

    lasich::SolverConfig solver_config() const {
        lasich::SolverConfig config;
        config.rho_n = rho_n;
        config.rho_2 = rho_2;
        config.epsilon = epsilon;
        config.varrho = varrho;
        config.tol = tol;
        config.max_iter = max_iter;
        config.threads = threads;
        return config;
    }

    json to_json() const {
        return {{"rho_n", rho_n},     {"rho_2", rho_2},
                {"epsilon", epsilon}, {"varrho", varrho},
                {"tol", tol},         {"max_iter", max_iter},
                {"threads", threads}, {"seed", seed}};
    }
};

struct NetworkOptions {
    std::string source = "complete";  // complete | line | identity | file | hc
    std::string file;
    std::string mode = "normalized";

    void add_flags(CLI::App* cmd, bool allow_hc) {
        const std::string choices =
            allow_hc ? "complete|line|identity|file|hc"
                     : "complete|line|identity|file";
        cmd->add_option("--network", source,
                        "network source (" + choices + ")");
        cmd->add_option("--network-file", file,
                        "network JSON (with --network file)");
        cmd->add_option("--mode", mode,
                        "Laplacian mode (normalized|unnormalized|identity)");
    }

    lasich::SubpopulationNetwork build(int k) const {
        const auto m = lasich::mode_from_name(mode);
        if (source == "complete") return lasich::build_complete_graph(k, m);
        if (source == "line") return lasich::build_line_graph(k, m);
        if (source == "identity")
            return lasich::build_empty_graph(k, lasich::LaplacianMode::identity);
        if (source == "file") {
            if (file.empty())
                throw lasich::invalid_input(
                    "--network file requires --network-file");
            auto network = lasich::read_network_json(file);
            if (network.num_groups != k)
                throw lasich::invalid_input(
                    "network K=" + std::to_string(network.num_groups) +
                    " does not match data K=" + std::to_string(k));
            return network;
        }
        throw lasich::invalid_input("unknown network source '" + source + "'");
    }

    json to_json() const {
        json out = {{"source", source}, {"mode", mode}};
        if (!file.empty()) out["file"] = file;
        return out;
    }
};

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (cell.empty()) continue;
        values.push_back(std::stod(cell));
    }
    if (values.empty())
        throw lasich::invalid_input("empty grid '" + text + "'");
    return values;
}

json truth_to_json(const lasich::PrecisionFamily& family,
                   const lasich::PrecisionFamilySpec& spec) {
    json omegas = json::array();
    json supports = json::array();
    for (std::size_t k = 0; k < family.omega.size(); ++k) {
        omegas.push_back(lasich::matrix_to_json(family.omega[k]));
        json edges = json::array();
        for (const auto& [i, j] : family.support[k])
            edges.push_back({i + 1, j + 1});
        supports.push_back(edges);
    }
    json components = json::array();
    for (const auto& component : family.components) {
        json coords = json::array();
        for (int i : component) coords.push_back(i + 1);
        components.push_back(coords);
    }
    double lo = 1.0, hi = 0.0;
    for (const auto& omega : family.omega) {
        const auto [a, b] = lasich::partial_correlation_range(omega);
        if (b > 0.0) {
            lo = std::min(lo, a);
            hi = std::max(hi, b);
        }
    }
    return {{"p", spec.p},
            {"K", 3},
            {"omega", omegas},
            {"supports", supports},
            {"components", components},
            {"generation",
             {{"boosts", family.boosts},
              {"repair_deviated", family.repair_deviated},
              {"partial_correlation_range", {lo, hi}}}}};
}

std::vector<lasich::Matrix> truth_from_json(const json& truth) {
    std::vector<lasich::Matrix> omegas;
    for (const auto& m : truth.at("omega"))
        omegas.push_back(lasich::matrix_from_json(m));
    return omegas;
}

json metrics_to_json(const lasich::EdgeMetrics& metrics) {
    json per_group = json::array();
    for (const auto& counts : metrics.per_group)
        per_group.push_back({{"detected", counts.detected},
                             {"true_positive", counts.true_positive},
                             {"false_positive", counts.false_positive},
                             {"true_edges", counts.true_edges}});
    return {{"per_group", per_group},
            {"pooled",
             {{"detected", metrics.pooled.detected},
              {"true_positive", metrics.pooled.true_positive},
              {"false_positive", metrics.pooled.false_positive},
              {"true_edges", metrics.pooled.true_edges}}},
            {"frobenius_error", metrics.frobenius_error},
            {"spectral_error", metrics.spectral_error}};
}

int run_simulate(int p, const std::string& n_text, const std::string& graph,
                 int edges, int components, double sigma,
                 const CommonOptions& common, const std::string& data_out,
                 const std::string& truth_out, const std::string& spec_out) {
    lasich::PrecisionFamilySpec spec;
    spec.p = p;
    spec.n_components = components;
    spec.total_edges = edges;
    spec.seed = common.seed;
    if (graph == "er")
        spec.graph_kind = lasich::GraphKind::erdos_renyi;
    else if (graph == "sf")
        spec.graph_kind = lasich::GraphKind::scale_free;
    else
        throw lasich::invalid_input("--graph must be er or sf");

    const auto grid = parse_grid(n_text);
    if (grid.size() != 3)
        throw lasich::invalid_input("--n must list three group sizes");
    std::vector<int> sizes;
    for (double v : grid) {
        if (v < 2 || v != static_cast<int>(v))
            throw lasich::invalid_input("group sizes must be integers >= 2");
        sizes.push_back(static_cast<int>(v));
    }

    const auto family = lasich::build_precision_family(spec);
    const auto means = lasich::mean_family(spec, sigma, spec.seed + 1);

    const int total = sizes[0] + sizes[1] + sizes[2];
    lasich::Matrix data(total, p);
    std::vector<int> labels(total);
    int row = 0;
    for (int k = 0; k < 3; ++k) {
        const lasich::Matrix draw = lasich::sample_mvn(
            sizes[k], means[k], family.omega[k], spec.seed + 17 * (k + 1));
        data.middleRows(row, sizes[k]) = draw;
        for (int r = 0; r < sizes[k]; ++r) labels[row + r] = k + 1;
        row += sizes[k];
    }

    const json config = {{"p", p},
                         {"n", sizes},
                         {"graph", graph},
                         {"edges", edges},
                         {"components", components},
                         {"sigma", sigma},
                         {"seed", common.seed}};
    lasich::write_data_csv(data_out, data, &labels);
    json truth = truth_to_json(family, spec);
    truth["config"] = config;
    lasich::write_json(truth_out, truth);
    if (!spec_out.empty())
        lasich::write_json(spec_out, {{"config", config}});
    return 0;
}

int run_fit(const std::string& input, int k, const NetworkOptions& network,
            const CommonOptions& common, bool screen,
            const std::string& output) {
    const auto sample = lasich::read_grouped_csv(input, k);
    const auto moments = lasich::group_moments(sample);
    const auto net = network.build(sample.num_groups);
    const auto config = common.solver_config();
    const auto estimate = screen
                              ? lasich::solve_with_screening(moments, net, config)
                              : lasich::solve(moments, net, config);

    json out = lasich::estimate_to_json(estimate);
    out["config"] = common.to_json();
    out["config"]["network"] = network.to_json();
    out["config"]["screen"] = screen;
    out["config"]["input"] = input;
    lasich::write_json(output, out);
    if (!estimate.converged)
        std::cerr << "warning: solver hit max_iter before tolerance\n";
    return 0;
}

int run_hcfit(const std::string& input, int k, const std::string& linkage_name,
              const NetworkOptions& network, const CommonOptions& common,
              const std::string& membership_out, const std::string& network_out,
              const std::string& output) {
    lasich::Linkage linkage;
    if (linkage_name == "single")
        linkage = lasich::Linkage::single;
    else if (linkage_name == "complete")
        linkage = lasich::Linkage::complete;
    else if (linkage_name == "average")
        linkage = lasich::Linkage::average;
    else
        throw lasich::invalid_input("--linkage must be single|complete|average");

    const auto data = lasich::read_unlabeled_csv(input);
    const auto result = lasich::hc_lasich(data, k, linkage,
                                          common.solver_config(),
                                          lasich::mode_from_name(network.mode));

    lasich::write_membership_csv(membership_out, result.membership);
    json net = lasich::network_to_json(result.network);
    json config = common.to_json();
    config["k"] = k;
    config["linkage"] = linkage_name;
    config["input"] = input;
    net["config"] = config;
    lasich::write_json(network_out, net);

    json est = lasich::estimate_to_json(result.estimate);
    est["config"] = config;
    lasich::write_json(output, est);
    return 0;
}

int run_screen(const std::string& input, int k, const NetworkOptions& network,
               const CommonOptions& common, const std::string& output) {
    const auto sample = lasich::read_grouped_csv(input, k);
    const auto moments = lasich::group_moments(sample);
    const auto net = network.build(sample.num_groups);
    const auto partition =
        lasich::block_partition(moments, net, common.solver_config());
    json out = lasich::partition_to_json(partition);
    out["config"] = common.to_json();
    out["config"]["network"] = network.to_json();
    lasich::write_json(output, out);
    return 0;
}

int run_evaluate(const std::string& estimate_path, const std::string& truth_path,
                 const std::string& output) {
    const auto estimate = lasich::estimate_from_json(
        lasich::read_json(estimate_path));
    const auto truth = truth_from_json(lasich::read_json(truth_path));
    const auto metrics = lasich::edge_metrics(estimate, truth);
    json out = metrics_to_json(metrics);
    out["config"] = {{"estimate", estimate_path}, {"truth", truth_path}};
    lasich::write_json(output, out);
    return 0;
}

int run_path(const std::string& input, int k, const NetworkOptions& network,
             const CommonOptions& common, const std::string& rho_grid_text,
             const std::string& rho2_grid_text, const std::string& truth_path,
             const std::string& output) {
    const auto sample = lasich::read_grouped_csv(input, k);
    const auto moments = lasich::group_moments(sample);
    const auto net = network.build(sample.num_groups);
    const auto rho_grid = parse_grid(rho_grid_text);
    const auto rho2_grid = parse_grid(rho2_grid_text);

    std::vector<lasich::Matrix> truth;
    if (!truth_path.empty())
        truth = truth_from_json(lasich::read_json(truth_path));

    const auto rows = lasich::tuning_path(moments, net, rho_grid, rho2_grid,
                                          common.solver_config(),
                                          truth.empty() ? nullptr : &truth);

    std::ofstream out(output);
    if (!out) throw lasich::io_error("cannot write " + output);
    out.precision(12);
    out << "rho_n,rho_2,detected,tp,fp,frobenius,bic\n";
    for (const auto& row : rows)
        out << row.rho_n << ',' << row.rho_2 << ',' << row.metrics.pooled.detected
            << ',' << row.metrics.pooled.true_positive << ','
            << row.metrics.pooled.false_positive << ','
            << row.metrics.frobenius_error << ',' << row.bic_value << '\n';
    out.close();

    json meta = {{"config", common.to_json()}};
    meta["config"]["network"] = network.to_json();
    meta["config"]["rho_grid"] = rho_grid;
    meta["config"]["rho2_grid"] = rho2_grid;
    meta["config"]["input"] = input;
    lasich::write_json(output + ".meta.json", meta);
    return 0;
}

void emit_error(int code, const std::string& kind, const std::string& message) {
    const json err = {
        {"error", {{"code", code}, {"kind", kind}, {"message", message}}}};
    std::cerr << err.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint sparse precision estimation with Laplacian shrinkage"};
    app.require_subcommand(1);

    CommonOptions common;
    NetworkOptions network;
    int k = 0;
    bool no_screen = false;
    std::string input, output, linkage = "complete";

    // simulate
    int p = 60, edges = 95, components = 4;
    double sigma = 0.0;
    std::string n_text = "50,100,50", graph = "er";
    std::string data_out = "data.csv", truth_out = "truth.json", spec_out;
    auto* simulate = app.add_subcommand("simulate", "generate synthetic data");
    simulate->add_option("--p", p, "dimension");
    simulate->add_option("--n", n_text, "three group sizes, comma separated");
    simulate->add_option("--graph", graph, "er|sf");
    simulate->add_option("--edges", edges, "total true edges");
    simulate->add_option("--components", components, "block count");
    simulate->add_option("--sigma", sigma, "mean spread (0 = known membership)");
    simulate->add_option("--seed", common.seed, "RNG seed");
    simulate->add_option("--data-out", data_out, "labeled data CSV");
    simulate->add_option("--truth-out", truth_out, "truth JSON");
    simulate->add_option("--spec-out", spec_out, "resolved spec JSON");

    auto* fit = app.add_subcommand("fit", "fit from labeled data");
    fit->add_option("--input", input, "labeled CSV")->required();
    fit->add_option("--k", k, "group count (0 = infer)");
    fit->add_option("--output", output, "estimate JSON")->required();
    fit->add_flag("--no-screen", no_screen, "disable block screening");
    fit->add_option("--seed", common.seed, "RNG seed (recorded)");
    network.add_flags(fit, false);
    common.add_solver_flags(fit);

    std::string membership_out = "membership.csv", network_out = "network.json";
    auto* hcfit = app.add_subcommand("hcfit", "cluster, then fit");
    hcfit->add_option("--input", input, "unlabeled CSV")->required();
    hcfit->add_option("--k", k, "cluster count")->required();
    hcfit->add_option("--linkage", linkage, "single|complete|average");
    hcfit->add_option("--output", output, "estimate JSON")->required();
    hcfit->add_option("--membership-out", membership_out, "membership CSV");
    hcfit->add_option("--network-out", network_out, "network JSON");
    hcfit->add_option("--mode", network.mode, "Laplacian mode");
    hcfit->add_option("--seed", common.seed, "RNG seed (recorded)");
    common.add_solver_flags(hcfit);

    auto* screen = app.add_subcommand("screen", "emit the block partition");
    screen->add_option("--input", input, "labeled CSV")->required();
    screen->add_option("--k", k, "group count (0 = infer)");
    screen->add_option("--output", output, "partition JSON")->required();
    screen->add_option("--seed", common.seed, "RNG seed (recorded)");
    network.add_flags(screen, false);
    common.add_solver_flags(screen);

    std::string estimate_path, truth_path;
    auto* evaluate = app.add_subcommand("evaluate", "estimate vs truth");
    evaluate->add_option("--estimate", estimate_path, "estimate JSON")
        ->required();
    evaluate->add_option("--truth", truth_path, "truth JSON")->required();
    evaluate->add_option("--output", output, "metrics JSON")->required();

    std::string rho_grid_text = "0.05,0.1,0.2", rho2_grid_text = "0";
    auto* path = app.add_subcommand("path", "tuning-path curve data");
    path->add_option("--input", input, "labeled CSV")->required();
    path->add_option("--k", k, "group count (0 = infer)");
    path->add_option("--rho-grid", rho_grid_text, "rho_n grid");
    path->add_option("--rho2-grid", rho2_grid_text, "rho_2 grid");
    path->add_option("--truth", truth_path, "truth JSON (for tp/fp)");
    path->add_option("--output", output, "curve CSV")->required();
    path->add_option("--seed", common.seed, "RNG seed (recorded)");
    network.add_flags(path, false);
    common.add_solver_flags(path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        emit_error(kExitUsage, "usage", e.what());
        return kExitUsage;
    }

    try {
        if (simulate->parsed())
            return run_simulate(p, n_text, graph, edges, components, sigma,
                                common, data_out, truth_out, spec_out);
        if (fit->parsed())
            return run_fit(input, k, network, common, !no_screen, output);
        if (hcfit->parsed())
            return run_hcfit(input, k, linkage, network, common, membership_out,
                             network_out, output);
        if (screen->parsed())
            return run_screen(input, k, network, common, output);
        if (evaluate->parsed())
            return run_evaluate(estimate_path, truth_path, output);
        if (path->parsed())
            return run_path(input, k, network, common, rho_grid_text,
                            rho2_grid_text, truth_path, output);
    } catch (const lasich::io_error& e) {
        emit_error(kExitData, "data", e.what());
        return kExitData;
    } catch (const lasich::invalid_input& e) {
        emit_error(kExitConfig, "config", e.what());
        return kExitConfig;
    } catch (const lasich::numeric_error& e) {
        emit_error(kExitNumeric, "numeric", e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        emit_error(kExitNumeric, "internal", e.what());
        return kExitNumeric;
    }
    return kExitUsage;
}
