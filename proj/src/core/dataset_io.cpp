#include "core/dataset_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "core/error.hpp"

namespace rms {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        out.push_back(cell);
    }
    return out;
}

}  // namespace

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open data file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("data file '" + path + "' is empty");
    const auto header = split(line);
    if (header.size() < 2 || header.back() != "y")
        throw ConfigError("data header must be x_1_1,...,x_J_d,y");
    const std::size_t w = header.size() - 1;
    std::size_t J = 0, d = 0;
    for (std::size_t c = 0; c < w; ++c) {
        unsigned j = 0, k = 0;
        char tail = 0;
        if (std::sscanf(header[c].c_str(), "x_%u_%u%c", &j, &k, &tail) != 2 || j == 0 || k == 0)
            throw ConfigError("bad covariate column name '" + header[c] + "'");
        J = std::max<std::size_t>(J, j);
        d = std::max<std::size_t>(d, k);
    }
    if (J * d != w) throw ConfigError("covariate columns do not form a complete J x d block");
    for (std::size_t c = 0; c < w; ++c) {
        const std::string expect = "x_" + std::to_string(c / d + 1) + "_" + std::to_string(c % d + 1);
        if (header[c] != expect) throw ConfigError("expected column '" + expect + "', found '" + header[c] + "'");
    }
    std::vector<double> x, y;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split(line);
        if (cells.size() != w + 1)
            throw ConfigError("line " + std::to_string(line_no) + ": expected " + std::to_string(w + 1) + " fields");
        for (std::size_t c = 0; c <= w; ++c) {
            char* end = nullptr;
            const double v = std::strtod(cells[c].c_str(), &end);
            if (end == cells[c].c_str() || *end != '\0')
                throw ConfigError("line " + std::to_string(line_no) + ": '" + cells[c] + "' is not a number");
            (c < w ? x : y).push_back(v);
        }
    }
    if (y.empty()) throw ConfigError("data file '" + path + "' has no observations");
    return make_dataset(J, d, std::move(x), y);
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    for (std::size_t j = 0; j < data.J; ++j)
        for (std::size_t k = 0; k < data.d; ++k) out << "x_" << j + 1 << "_" << k + 1 << ",";
    out << "y\n";
    char buf[32];
    for (std::size_t i = 0; i < data.n; ++i) {
        for (double v : data.row(i)) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << buf << ",";
        }
        out << (data.y_centered[i] + data.centering > 0.5 ? 1 : 0) << "\n";
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace rms
