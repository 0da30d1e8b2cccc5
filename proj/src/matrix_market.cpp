#include "specop/matrix_market.hpp"

#include "specop/error.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace specop::mm {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool next_data_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '%') continue;
        return true;
    }
    return false;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

MatrixFile read(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw Error(ErrorCode::io_error, "empty Matrix Market stream");
    std::istringstream hs(header);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || lower(object) != "matrix") {
        throw Error(ErrorCode::io_error, "missing %%MatrixMarket matrix banner");
    }
    format = lower(format);
    field = lower(field);
    symmetry = lower(symmetry);
    if (field != "real" && field != "double" && field != "integer") {
        throw Error(ErrorCode::io_error, "unsupported field '" + field + "'");
    }
    if (symmetry != "general" && symmetry != "symmetric") {
        throw Error(ErrorCode::io_error, "unsupported symmetry '" + symmetry + "'");
    }
    const bool sym = symmetry == "symmetric";

    std::string line;
    if (!next_data_line(in, line)) throw Error(ErrorCode::io_error, "missing size line");
    std::istringstream ss(line);
    MatrixFile out;
    out.symmetric = sym;
    if (format == "array") {
        Index rows = 0, cols = 0;
        if (!(ss >> rows >> cols) || rows <= 0 || cols <= 0) {
            throw Error(ErrorCode::io_error, "bad array size line");
        }
        if (sym && rows != cols) throw Error(ErrorCode::io_error, "symmetric array must be square");
        out.value = Matrix::Zero(rows, cols);
        // Column-major; symmetric files list the lower triangle only.
        for (Index j = 0; j < cols; ++j) {
            for (Index i = sym ? j : 0; i < rows; ++i) {
                if (!next_data_line(in, line)) throw Error(ErrorCode::io_error, "truncated array data");
                std::istringstream vs(line);
                double v = 0.0;
                if (!(vs >> v)) throw Error(ErrorCode::io_error, "bad value '" + line + "'");
                out.value(i, j) = v;
                if (sym) out.value(j, i) = v;
            }
        }
    } else if (format == "coordinate") {
        Index rows = 0, cols = 0, nnz = 0;
        if (!(ss >> rows >> cols >> nnz) || rows <= 0 || cols <= 0 || nnz < 0) {
            throw Error(ErrorCode::io_error, "bad coordinate size line");
        }
        out.value = Matrix::Zero(rows, cols);
        for (Index k = 0; k < nnz; ++k) {
            if (!next_data_line(in, line)) throw Error(ErrorCode::io_error, "truncated coordinate data");
            std::istringstream vs(line);
            Index i = 0, j = 0;
            double v = 0.0;
            if (!(vs >> i >> j >> v) || i < 1 || j < 1 || i > rows || j > cols) {
                throw Error(ErrorCode::io_error, "bad coordinate entry '" + line + "'");
            }
            out.value(i - 1, j - 1) = v;
            if (sym) out.value(j - 1, i - 1) = v;
        }
    } else {
        throw Error(ErrorCode::io_error, "unsupported format '" + format + "'");
    }
    return out;
}

MatrixFile read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path + "'");
    return read(in);
}

void write(std::ostream& out, const Matrix& X, bool symmetric, Layout layout) {
    if (symmetric && X.rows() != X.cols()) {
        throw Error(ErrorCode::shape_mismatch, "symmetric output must be square");
    }
    const char* qual = symmetric ? "symmetric" : "general";
    if (layout == Layout::array) {
        out << "%%MatrixMarket matrix array real " << qual << "\n";
        out << X.rows() << " " << X.cols() << "\n";
        for (Index j = 0; j < X.cols(); ++j) {
            for (Index i = symmetric ? j : 0; i < X.rows(); ++i) out << format_double(X(i, j)) << "\n";
        }
    } else {
        std::vector<std::tuple<Index, Index, double>> entries;
        for (Index j = 0; j < X.cols(); ++j) {
            for (Index i = symmetric ? j : 0; i < X.rows(); ++i) {
                if (X(i, j) != 0.0) entries.emplace_back(i + 1, j + 1, X(i, j));
            }
        }
        out << "%%MatrixMarket matrix coordinate real " << qual << "\n";
        out << X.rows() << " " << X.cols() << " " << entries.size() << "\n";
        for (const auto& [i, j, v] : entries) out << i << " " << j << " " << format_double(v) << "\n";
    }
}

void write_file(const std::string& path, const Matrix& X, bool symmetric, Layout layout) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path + "'");
    write(out, X, symmetric, layout);
    if (!out) throw Error(ErrorCode::io_error, "write to '" + path + "' failed");
}

}  // namespace specop::mm
