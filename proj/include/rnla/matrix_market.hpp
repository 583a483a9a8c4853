#pragma once

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rnla/core.hpp"

namespace rnla {

struct Triplet {
    Index row = 0, col = 0;
    double value = 0.0;
};

// Coordinate-format sparse matrix, the exchange type for sparsified output.
struct SparseCoo {
    Index rows = 0, cols = 0;
    std::vector<Triplet> entries;

    Matrix to_dense() const {
        Matrix m = Matrix::Zero(rows, cols);
        for (const auto& t : entries) m(t.row, t.col) += t.value;
        return m;
    }
};

namespace mm_detail {

struct ParseError : std::runtime_error {
    ParseError(const std::string& path, long line, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + what) {}
};

inline std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// 17 significant digits round-trips a double exactly through decimal text.
inline std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace mm_detail

// Reads MatrixMarket `array` or `coordinate` files, real field,
// general or symmetric symmetry, into a dense matrix.
inline Matrix read_matrix_market(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_matrix_market: cannot open " + path);

    long lineno = 0;
    std::string line;

    if (!std::getline(in, line)) throw mm_detail::ParseError(path, 1, "empty file");
    ++lineno;

    std::istringstream header(mm_detail::lower(line));
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%matrixmarket" || object != "matrix")
        throw mm_detail::ParseError(path, lineno, "missing %%MatrixMarket matrix banner");
    if (format != "array" && format != "coordinate")
        throw mm_detail::ParseError(path, lineno, "unsupported format '" + format + "'");
    if (field != "real" && field != "integer")
        throw mm_detail::ParseError(path, lineno, "unsupported field '" + field + "'");
    if (symmetry != "general" && symmetry != "symmetric")
        throw mm_detail::ParseError(path, lineno, "unsupported symmetry '" + symmetry + "'");

    auto next_data_line = [&](std::string& out) -> bool {
        while (std::getline(in, line)) {
            ++lineno;
            std::size_t i = 0;
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            if (i == line.size() || line[i] == '%') continue;
            out = line;
            return true;
        }
        return false;
    };

    std::string sizes;
    if (!next_data_line(sizes)) throw mm_detail::ParseError(path, lineno, "missing size line");

    std::istringstream sz(sizes);
    long long rows = -1, cols = -1, nnz = -1;
    if (format == "array") {
        if (!(sz >> rows >> cols)) throw mm_detail::ParseError(path, lineno, "malformed size line");
    } else {
        if (!(sz >> rows >> cols >> nnz)) throw mm_detail::ParseError(path, lineno, "malformed size line");
    }
    if (rows < 0 || cols < 0)
        throw mm_detail::ParseError(path, lineno, "negative dimension");
    if (rows > (1LL << 30) || cols > (1LL << 30) || rows * cols > (1LL << 32))
        throw mm_detail::ParseError(path, lineno, "dimensions overflow dense storage");

    Matrix m = Matrix::Zero(rows, cols);

    if (format == "array") {
        const bool sym = (symmetry == "symmetric");
        // Column-major order; symmetric files store the lower triangle.
        std::string entry;
        for (long long j = 0; j < cols; ++j) {
            for (long long i = sym ? j : 0; i < rows; ++i) {
                if (!next_data_line(entry))
                    throw mm_detail::ParseError(path, lineno, "fewer entries than header declares");
                std::istringstream es(entry);
                double v;
                if (!(es >> v)) throw mm_detail::ParseError(path, lineno, "malformed entry");
                m(i, j) = v;
                if (sym) m(j, i) = v;
            }
        }
        std::string extra;
        if (next_data_line(extra))
            throw mm_detail::ParseError(path, lineno, "more entries than header declares");
    } else {
        std::string entry;
        for (long long e = 0; e < nnz; ++e) {
            if (!next_data_line(entry))
                throw mm_detail::ParseError(path, lineno, "fewer entries than header declares");
            std::istringstream es(entry);
            long long i, j;
            double v;
            if (!(es >> i >> j >> v)) throw mm_detail::ParseError(path, lineno, "malformed entry");
            if (i < 1 || i > rows || j < 1 || j > cols)
                throw mm_detail::ParseError(path, lineno, "index out of range");
            m(i - 1, j - 1) += v;
            if (symmetry == "symmetric" && i != j) m(j - 1, i - 1) += v;
        }
    }
    return m;
}

inline void write_matrix_market(const Matrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_matrix_market: cannot open " + path);
    out << "%%MatrixMarket matrix array real general\n";
    out << m.rows() << " " << m.cols() << "\n";
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i) out << mm_detail::format17(m(i, j)) << "\n";
}

inline void write_matrix_market(const SparseCoo& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_matrix_market: cannot open " + path);
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.rows << " " << m.cols << " " << m.entries.size() << "\n";
    for (const auto& t : m.entries)
        out << (t.row + 1) << " " << (t.col + 1) << " " << mm_detail::format17(t.value) << "\n";
}

} // namespace rnla
