#include "sepnmf/cli/matrix_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstring>
#include <sstream>

#include "sepnmf/cli/files.hpp"
#include "sepnmf/error.hpp"

namespace sepnmf::cli {

MatrixFormat parse_format(std::string_view name) {
  if (name == "mtx") return MatrixFormat::kMtx;
  if (name == "bin") return MatrixFormat::kBin;
  if (name == "csv") return MatrixFormat::kCsv;
  throw Error(ErrorCode::kParse, "unknown matrix format '" + std::string(name) + "'");
}

std::string_view extension(MatrixFormat format) {
  switch (format) {
    case MatrixFormat::kMtx:
      return ".mtx";
    case MatrixFormat::kBin:
      return ".bin";
    case MatrixFormat::kCsv:
      return ".csv";
  }
  return "";
}

namespace {

template <typename T>
T swap_bytes(T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  std::reverse(b, b + sizeof(T));
  std::memcpy(&v, b, sizeof(T));
  return v;
}

template <typename T>
void put_le(std::string& out, T v) {
  if constexpr (std::endian::native == std::endian::big) v = swap_bytes(v);
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get_le(std::string_view bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) throw Error(ErrorCode::kParse, "binary matrix truncated");
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  if constexpr (std::endian::native == std::endian::big) v = swap_bytes(v);
  return v;
}

std::string encode_binary(const Matrix& a) {
  std::string out(kBinaryMagic, sizeof kBinaryMagic);
  put_le<std::uint32_t>(out, kBinaryVersion);
  put_le<std::uint32_t>(out, 0);
  put_le<std::uint64_t>(out, a.rows());
  put_le<std::uint64_t>(out, a.cols());
  out.reserve(out.size() + a.size() * sizeof(double));
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) put_le(out, std::bit_cast<std::uint64_t>(a(i, j)));
  return out;
}

Matrix decode_binary(std::string_view bytes) {
  if (bytes.size() < sizeof kBinaryMagic ||
      std::memcmp(bytes.data(), kBinaryMagic, sizeof kBinaryMagic) != 0) {
    throw Error(ErrorCode::kParse, "binary matrix has a bad magic number");
  }
  std::size_t pos = sizeof kBinaryMagic;
  const auto version = get_le<std::uint32_t>(bytes, pos);
  if (version != kBinaryVersion) {
    throw Error(ErrorCode::kParse, "unsupported binary matrix version " + std::to_string(version));
  }
  get_le<std::uint32_t>(bytes, pos);
  const auto rows = get_le<std::uint64_t>(bytes, pos);
  const auto cols = get_le<std::uint64_t>(bytes, pos);
  if (cols != 0 && rows > (bytes.size() - pos) / sizeof(double) / cols) {
    throw Error(ErrorCode::kParse, "binary matrix truncated");
  }
  if (bytes.size() - pos != rows * cols * sizeof(double)) {
    throw Error(ErrorCode::kParse, "binary matrix has trailing bytes");
  }
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = std::bit_cast<double>(get_le<std::uint64_t>(bytes, pos));
  return a;
}

std::string encode_mtx(const Matrix& a) {
  std::string out = "%%MatrixMarket matrix array real general\n";
  out += std::to_string(a.rows()) + " " + std::to_string(a.cols()) + "\n";
  for (double v : a.data()) {
    out += format_double(v);
    out += '\n';
  }
  return out;
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

Index parse_count(std::string_view s) {
  const double v = parse_double(s, "matrix market size line");
  if (v < 0 || v != static_cast<double>(static_cast<Index>(v))) {
    throw Error(ErrorCode::kParse, "bad matrix market size '" + std::string(s) + "'");
  }
  return static_cast<Index>(v);
}

Matrix decode_mtx(std::string_view bytes) {
  std::istringstream in{std::string(bytes)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0) {
    throw Error(ErrorCode::kParse, "missing %%MatrixMarket banner");
  }
  const auto banner = tokens(line);
  if (banner.size() < 5 || banner[1] != "matrix" || banner[3] != "real" || banner[4] != "general") {
    throw Error(ErrorCode::kParse, "only real general matrices are supported");
  }
  const bool coordinate = banner[2] == "coordinate";
  if (!coordinate && banner[2] != "array") {
    throw Error(ErrorCode::kParse, "unknown matrix market layout '" + std::string(banner[2]) + "'");
  }
  while (std::getline(in, line) && (line.empty() || line[0] == '%')) {
  }
  const auto size = tokens(line);
  if (size.size() != (coordinate ? 3u : 2u)) throw Error(ErrorCode::kParse, "bad matrix market size line");
  const Index rows = parse_count(size[0]);
  const Index cols = parse_count(size[1]);
  Matrix a(rows, cols);
  if (!coordinate) {
    Index n = 0;
    auto data = a.data();
    while (std::getline(in, line)) {
      for (std::string_view t : tokens(line)) {
        if (n == data.size()) throw Error(ErrorCode::kParse, "matrix market has extra entries");
        data[n++] = parse_double(t, "matrix market entry");
      }
    }
    if (n != data.size()) throw Error(ErrorCode::kParse, "matrix market has too few entries");
  } else {
    const Index nnz = parse_count(size[2]);
    for (Index e = 0; e < nnz; ++e) {
      if (!std::getline(in, line)) throw Error(ErrorCode::kParse, "matrix market has too few entries");
      const auto t = tokens(line);
      if (t.size() != 3) throw Error(ErrorCode::kParse, "bad matrix market entry line");
      const Index i = parse_count(t[0]);
      const Index j = parse_count(t[1]);
      if (i < 1 || i > rows || j < 1 || j > cols) throw Error(ErrorCode::kParse, "entry out of range");
      a(i - 1, j - 1) = parse_double(t[2], "matrix market entry");
    }
  }
  return a;
}

std::string encode_csv(const Matrix& a) {
  std::string out;
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(a(i, j));
    }
    out += '\n';
  }
  return out;
}

Matrix decode_csv(std::string_view bytes) {
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    std::size_t nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) nl = bytes.size();
    std::string_view line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t p = 0;
    while (p <= line.size()) {
      const std::size_t comma = std::min(line.find(',', p), line.size());
      row.push_back(parse_double(line.substr(p, comma - p), "csv matrix"));
      p = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::kParse, "csv row " + std::to_string(rows.size() + 1) + " has " +
                                         std::to_string(row.size()) + " fields, expected " +
                                         std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  const Index r = rows.size();
  const Index c = r ? rows.front().size() : 0;
  Matrix a(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) a(i, j) = rows[i][j];
  return a;
}

}  // namespace

std::string encode_matrix(const Matrix& a, MatrixFormat format) {
  switch (format) {
    case MatrixFormat::kMtx:
      return encode_mtx(a);
    case MatrixFormat::kBin:
      return encode_binary(a);
    case MatrixFormat::kCsv:
      return encode_csv(a);
  }
  return {};
}

Matrix decode_matrix(std::string_view bytes, MatrixFormat format) {
  Matrix a;
  switch (format) {
    case MatrixFormat::kMtx:
      a = decode_mtx(bytes);
      break;
    case MatrixFormat::kBin:
      a = decode_binary(bytes);
      break;
    case MatrixFormat::kCsv:
      a = decode_csv(bytes);
      break;
  }
  require_finite(a, "matrix file");
  return a;
}

MatrixFormat detect_format(const std::filesystem::path& path, std::string_view bytes) {
  const std::string ext = path.extension().string();
  if (ext == ".mtx") return MatrixFormat::kMtx;
  if (ext == ".bin") return MatrixFormat::kBin;
  if (ext == ".csv") return MatrixFormat::kCsv;
  if (bytes.size() >= sizeof kBinaryMagic &&
      std::memcmp(bytes.data(), kBinaryMagic, sizeof kBinaryMagic) == 0) {
    return MatrixFormat::kBin;
  }
  if (bytes.rfind("%%MatrixMarket", 0) == 0) return MatrixFormat::kMtx;
  return MatrixFormat::kCsv;
}

void write_matrix(const std::filesystem::path& path, const Matrix& a, MatrixFormat format) {
  write_file_atomic(path, encode_matrix(a, format));
}

Matrix read_matrix(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    return decode_matrix(bytes, detect_format(path, bytes));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

}  // namespace sepnmf::cli
