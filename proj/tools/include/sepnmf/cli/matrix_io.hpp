#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "sepnmf/matrix.hpp"

namespace sepnmf::cli {

enum class MatrixFormat { kMtx, kBin, kCsv };

MatrixFormat parse_format(std::string_view name);
std::string_view extension(MatrixFormat format);  // ".mtx", ".bin", ".csv"

// Binary layout, little-endian: 8-byte magic, u32 version, u32 reserved (0),
// u64 rows, u64 cols, then rows * cols doubles in row-major order.
inline constexpr char kBinaryMagic[8] = {'S', 'E', 'P', 'N', 'M', 'F', 'M', 'X'};
inline constexpr std::uint32_t kBinaryVersion = 1;

std::string encode_matrix(const Matrix& a, MatrixFormat format);
Matrix decode_matrix(std::string_view bytes, MatrixFormat format);

// Picks the format from the extension, falling back to sniffing the content.
MatrixFormat detect_format(const std::filesystem::path& path, std::string_view bytes);

void write_matrix(const std::filesystem::path& path, const Matrix& a, MatrixFormat format);
Matrix read_matrix(const std::filesystem::path& path);

}  // namespace sepnmf::cli
