#ifndef lasich_io_hpp
#define lasich_io_hpp

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lasich/common.hpp"
#include "lasich/hclust.hpp"
#include "lasich/model.hpp"
#include "lasich/network.hpp"
#include "lasich/screening.hpp"
#include "lasich/solver.hpp"

namespace lasich {

using json = nlohmann::json;

/// Thrown for unreadable or structurally invalid input files.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw io_error(path + ": missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) table.header.push_back(cell);
    if (table.header.empty()) throw io_error(path + ": empty header row");

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw io_error(path + ":" + std::to_string(line_no) +
                               ": non-numeric cell '" + cell + "'");
            }
        }
        if (row.size() != table.header.size())
            throw io_error(path + ":" + std::to_string(line_no) +
                           ": expected " + std::to_string(table.header.size()) +
                           " cells, got " + std::to_string(row.size()));
        table.rows.push_back(std::move(row));
    }
    return table;
}

/// Reads a labeled sample: final column must be named "group" and hold
/// integer labels 1..K. If num_groups is 0 it is inferred from the labels.
inline GroupedSample read_grouped_csv(const std::string& path,
                                      int num_groups = 0) {
    const CsvTable table = read_csv(path);
    if (table.header.size() < 2 || table.header.back() != "group")
        throw io_error(path + ": expected a final 'group' column");
    const std::size_t p = table.header.size() - 1;
    const std::size_t n = table.rows.size();
    if (n == 0) throw io_error(path + ": no observations");

    Matrix data(n, p);
    std::vector<int> labels(n);
    int max_label = 0;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < p; ++c) data(r, c) = table.rows[r][c];
        const double raw = table.rows[r][p];
        const int label = static_cast<int>(raw);
        if (raw != label || label < 1)
            throw io_error(path + ": group labels must be integers >= 1");
        labels[r] = label;
        max_label = std::max(max_label, label);
    }
    if (num_groups == 0) num_groups = max_label;
    if (max_label > num_groups)
        throw invalid_input(path + ": group label exceeds K=" +
                            std::to_string(num_groups));
    return GroupedSample(std::move(data), std::move(labels), num_groups);
}

/// Reads an unlabeled sample (all columns numeric features).
inline Matrix read_unlabeled_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    if (!table.header.empty() && table.header.back() == "group")
        throw io_error(path + ": unexpected 'group' column in unlabeled data");
    const std::size_t n = table.rows.size();
    if (n == 0) throw io_error(path + ": no observations");
    Matrix data(n, table.header.size());
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < table.header.size(); ++c)
            data(r, c) = table.rows[r][c];
    return data;
}

inline void write_data_csv(const std::string& path, const Matrix& data,
                           const std::vector<int>* labels) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    out.precision(17);
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
        if (c) out << ',';
        out << 'x' << (c + 1);
    }
    if (labels) out << ",group";
    out << '\n';
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
        for (Eigen::Index c = 0; c < data.cols(); ++c) {
            if (c) out << ',';
            out << data(r, c);
        }
        if (labels) out << ',' << (*labels)[r];
        out << '\n';
    }
}

inline std::string mode_name(LaplacianMode mode) {
    switch (mode) {
        case LaplacianMode::unnormalized: return "unnormalized";
        case LaplacianMode::normalized: return "normalized";
        case LaplacianMode::identity: return "identity";
    }
    return "normalized";
}

inline LaplacianMode mode_from_name(const std::string& name) {
    if (name == "unnormalized") return LaplacianMode::unnormalized;
    if (name == "normalized") return LaplacianMode::normalized;
    if (name == "identity") return LaplacianMode::identity;
    throw io_error("unknown Laplacian mode '" + name + "'");
}

inline json network_to_json(const SubpopulationNetwork& network) {
    json edges = json::array();
    for (int a = 0; a < network.num_groups; ++a)
        for (int b = a + 1; b < network.num_groups; ++b)
            if (network.weights(a, b) != 0.0)
                edges.push_back({a + 1, b + 1, network.weights(a, b)});
    return {{"K", network.num_groups},
            {"mode", mode_name(network.mode)},
            {"edges", edges}};
}

inline SubpopulationNetwork network_from_json(const json& j) {
    if (!j.contains("K") || !j.contains("mode") || !j.contains("edges"))
        throw io_error("network JSON needs K, mode, and edges");
    const int k = j.at("K").get<int>();
    if (k < 1) throw io_error("network K must be >= 1");
    Matrix w = Matrix::Zero(k, k);
    for (const auto& edge : j.at("edges")) {
        if (!edge.is_array() || edge.size() != 3)
            throw io_error("network edges must be [k, k', weight] triples");
        const int a = edge[0].get<int>(), b = edge[1].get<int>();
        if (a < 1 || a > k || b < 1 || b > k || a == b)
            throw io_error("network edge endpoints must be distinct, in 1..K");
        const double weight = edge[2].get<double>();
        if (weight < 0.0) throw io_error("network edge weights must be >= 0");
        w(a - 1, b - 1) = w(b - 1, a - 1) = weight;
    }
    return SubpopulationNetwork(k, std::move(w),
                                mode_from_name(j.at("mode").get<std::string>()));
}

inline SubpopulationNetwork read_network_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw io_error(path + ": " + e.what());
    }
    return network_from_json(j);
}

/// Estimate as per-group sparse entries [i, j, theta, omega] over the upper
/// triangle plus diagonal, 1-based indices.
inline json estimate_to_json(const PrecisionEstimate& estimate) {
    json groups = json::array();
    const Eigen::Index p = estimate.p();
    for (int k = 0; k < estimate.num_groups(); ++k) {
        json entries = json::array();
        for (Eigen::Index i = 0; i < p; ++i)
            for (Eigen::Index j = i; j < p; ++j) {
                if (i != j && !estimate.support[k](i, j)) continue;
                if (i != j && estimate.theta[k](i, j) == 0.0) continue;
                entries.push_back({i + 1, j + 1, estimate.theta[k](i, j),
                                   estimate.omega[k](i, j)});
            }
        groups.push_back({{"group", k + 1}, {"entries", entries}});
    }
    json out = {{"p", estimate.p()},
                {"K", estimate.num_groups()},
                {"groups", groups},
                {"convergence",
                 {{"iterations", estimate.iterations},
                  {"final_residual", estimate.final_residual},
                  {"converged", estimate.converged}}}};
    if (!estimate.screening_blocks.empty()) {
        json blocks = json::array();
        for (const auto& block : estimate.screening_blocks) {
            json b = json::array();
            for (int i : block) b.push_back(i + 1);
            blocks.push_back(b);
        }
        out["screening_blocks"] = blocks;
    }
    return out;
}

inline PrecisionEstimate estimate_from_json(const json& j) {
    const Eigen::Index p = j.at("p").get<Eigen::Index>();
    const int num_groups = j.at("K").get<int>();
    PrecisionEstimate est;
    for (int k = 0; k < num_groups; ++k) {
        est.theta.emplace_back(Matrix::Zero(p, p));
        est.omega.emplace_back(Matrix::Zero(p, p));
        est.support.emplace_back(
            Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
                p, p, false));
        for (Eigen::Index i = 0; i < p; ++i) est.support[k](i, i) = true;
    }
    for (const auto& group : j.at("groups")) {
        const int k = group.at("group").get<int>() - 1;
        if (k < 0 || k >= num_groups) throw io_error("group index out of range");
        for (const auto& entry : group.at("entries")) {
            const Eigen::Index i = entry[0].get<Eigen::Index>() - 1;
            const Eigen::Index jj = entry[1].get<Eigen::Index>() - 1;
            if (i < 0 || jj < i || jj >= p)
                throw io_error("estimate entry index out of range");
            const double theta = entry[2].get<double>();
            const double omega = entry[3].get<double>();
            est.theta[k](i, jj) = est.theta[k](jj, i) = theta;
            est.omega[k](i, jj) = est.omega[k](jj, i) = omega;
            est.support[k](i, jj) = est.support[k](jj, i) = true;
        }
    }
    const auto& conv = j.at("convergence");
    est.iterations = conv.at("iterations").get<int>();
    est.final_residual = conv.at("final_residual").get<double>();
    est.converged = conv.at("converged").get<bool>();
    return est;
}

inline json partition_to_json(const BlockPartition& partition) {
    json blocks = json::array();
    for (const auto& block : partition.blocks) {
        json b = json::array();
        for (int i : block) b.push_back(i + 1);
        blocks.push_back(b);
    }
    return {{"blocks", blocks},
            {"rho_n", partition.rho_n},
            {"rho_2", partition.rho_2}};
}

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline Matrix matrix_from_json(const json& j) {
    const std::size_t rows = j.size();
    if (rows == 0) throw io_error("empty matrix in JSON");
    const std::size_t cols = j.at(0).size();
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (j.at(i).size() != cols) throw io_error("ragged matrix in JSON");
        for (std::size_t c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
    }
    return m;
}

inline void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

inline json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw io_error(path + ": " + e.what());
    }
    return j;
}

inline void write_membership_csv(const std::string& path,
                                 const std::vector<int>& membership) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    out << "observation,group\n";
    for (std::size_t i = 0; i < membership.size(); ++i)
        out << (i + 1) << ',' << membership[i] << '\n';
}

}  // namespace lasich

#endif
