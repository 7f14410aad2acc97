#include "sve/csv.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sve {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

csv_writer::csv_writer(const std::filesystem::path& path) : path_(path), out_(path) {
    if (!out_) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
}

void csv_writer::write_row(std::span<const std::string> cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) {
            out_ << ',';
        }
        out_ << cells[i];
    }
    out_ << '\n';
}

void csv_writer::write_row(std::initializer_list<std::string> cells) {
    write_row(std::span<const std::string>(cells.begin(), cells.size()));
}

void write_ensemble_csv(const std::filesystem::path& path, const path_ensemble& ens,
                        const std::vector<std::vector<double>>* node_states,
                        std::size_t n_nodes) {
    csv_writer w(path);
    std::vector<std::string> header{"path_id", "t"};
    for (int c = 1; c <= ens.n; ++c) {
        header.push_back("X_" + std::to_string(c));
    }
    if (node_states != nullptr) {
        for (std::size_t j = 1; j <= n_nodes; ++j) {
            header.push_back("Y_" + std::to_string(j));
        }
    }
    w.write_row(header);
    std::vector<std::string> row;
    for (std::size_t p = 0; p < ens.paths.size(); ++p) {
        const auto& rec = ens.paths[p];
        if (!rec.ok) {
            continue;
        }
        for (int i = 0; i <= ens.steps; ++i) {
            row.clear();
            row.push_back(std::to_string(p));
            row.push_back(format_g17(ens.times[static_cast<std::size_t>(i)]));
            for (int c = 0; c < ens.n; ++c) {
                row.push_back(format_g17(rec.x[static_cast<std::size_t>(i) * ens.n + c]));
            }
            if (node_states != nullptr) {
                const auto& st = (*node_states)[p];
                for (std::size_t j = 0; j < n_nodes; ++j) {
                    row.push_back(format_g17(st[static_cast<std::size_t>(i) * n_nodes + j]));
                }
            }
            w.write_row(row);
        }
    }
}

path_ensemble read_ensemble_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("empty ensemble csv '" + path.string() + "'");
    }
    int n = 0;
    {
        std::stringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) {
            if (cell.rfind("X_", 0) == 0) {
                ++n;
            }
        }
    }
    if (n == 0) {
        throw std::runtime_error("ensemble csv '" + path.string() + "' has no X columns");
    }

    std::map<long, std::vector<std::pair<double, std::vector<double>>>> by_path;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::stringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');
        const long pid = std::stol(cell);
        std::getline(ls, cell, ',');
        const double t = std::stod(cell);
        std::vector<double> x(static_cast<std::size_t>(n));
        for (int c = 0; c < n; ++c) {
            std::getline(ls, cell, ',');
            x[static_cast<std::size_t>(c)] = std::stod(cell);
        }
        by_path[pid].push_back({t, std::move(x)});
    }
    if (by_path.empty()) {
        throw std::runtime_error("ensemble csv '" + path.string() + "' has no rows");
    }

    path_ensemble ens;
    ens.n = n;
    const auto& first = by_path.begin()->second;
    ens.steps = static_cast<int>(first.size()) - 1;
    ens.T = first.back().first;
    ens.h = ens.steps > 0 ? first[1].first - first[0].first : 1.0;
    for (const auto& [t, x] : first) {
        ens.times.push_back(t);
    }
    for (const auto& [pid, rows] : by_path) {
        if (static_cast<int>(rows.size()) != ens.steps + 1) {
            throw std::runtime_error("ensemble csv '" + path.string() +
                                     "' has ragged paths (path " + std::to_string(pid) + ")");
        }
        lift_path_record rec;
        rec.x.reserve(rows.size() * static_cast<std::size_t>(n));
        for (const auto& [t, x] : rows) {
            rec.x.insert(rec.x.end(), x.begin(), x.end());
        }
        ens.paths.push_back(std::move(rec));
    }
    return ens;
}

std::uint64_t file_content_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot hash missing file '" + path.string() + "'");
    }
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 14];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

}  // namespace sve
