#pragma once

#include "specop/linalg.hpp"

#include <iosfwd>
#include <string>

namespace specop::mm {

enum class Layout { array, coordinate };

struct MatrixFile {
    Matrix value;
    bool symmetric = false;
};

/// Reads a real Matrix Market file (array or coordinate; general or
/// symmetric). Symmetric files are expanded to full storage.
[[nodiscard]] MatrixFile read(std::istream& in);
[[nodiscard]] MatrixFile read_file(const std::string& path);

/// Writes with 17 significant digits. When `symmetric` is set only the lower
/// triangle is emitted under the `symmetric` qualifier.
void write(std::ostream& out, const Matrix& X, bool symmetric = false,
           Layout layout = Layout::array);
void write_file(const std::string& path, const Matrix& X, bool symmetric = false,
                Layout layout = Layout::array);

}  // namespace specop::mm
