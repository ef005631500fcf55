#include "wicksell/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wicksell {

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::string trimmed(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lowered(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

std::vector<double> read_observation_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    std::vector<double> values;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        const std::string t = trimmed(line);
        if (t.empty()) continue;
        if (row == 1) {
            const std::string h = lowered(t);
            if (h == "radius" || h == "z") continue;
        }
        double v = 0.0;
        try {
            std::size_t pos = 0;
            v = std::stod(t, &pos);
            if (pos != t.size()) throw std::invalid_argument(t);
        } catch (const std::exception&) {
            throw std::runtime_error(path + ": row " + std::to_string(row) +
                                     ": not a number: '" + t + "'");
        }
        if (!std::isfinite(v) || v < 0.0)
            throw std::runtime_error(path + ": row " + std::to_string(row) +
                                     ": observations must be finite and nonnegative");
        values.push_back(v);
    }
    if (values.empty()) throw std::runtime_error(path + ": no observations");
    return values;
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    out << header << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ",";
            out << format_full(row[i]);
        }
        out << "\n";
    }
    write_text_file(path, out.str());
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << contents;
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace wicksell
