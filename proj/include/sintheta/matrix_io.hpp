#pragma once

#include <filesystem>

#include "sintheta/linalg.hpp"

namespace sintheta {

// CSV: one row per line, comma separated, '.' decimal, 17 significant digits.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

// Raw binary: two little-endian uint64 dims, then row-major IEEE-754 doubles.
Matrix read_matrix_bin(const std::filesystem::path& path);
void write_matrix_bin(const std::filesystem::path& path, const Matrix& m);

/// Dispatches on extension: ".csv" is text, anything else is binary.
Matrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const Matrix& m);

}  // namespace sintheta
