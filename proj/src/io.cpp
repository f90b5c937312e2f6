#include "sketchnmf/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string_view>

#include "sketchnmf/errors.hpp"

namespace sketchnmf::io {

namespace {

std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}

std::vector<fs::path>& log_entries() {
  static std::vector<fs::path> entries;
  return entries;
}

fs::path normalized(const fs::path& p) {
  std::error_code ec;
  auto abs = fs::weakly_canonical(p, ec);
  return ec ? p.lexically_normal() : abs;
}

std::ifstream open_for_read(const fs::path& path) {
  FileAccessLog::record(path);
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_for_write(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view token, std::size_t line) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
    throw ParseError(line, "not a number: '" + std::string(token) + "'");
  }
  return v;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::size_t parse_index(std::string_view token, std::size_t line) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line, "not an index: '" + std::string(token) + "'");
  }
  return v;
}

}  // namespace

void FileAccessLog::record(const fs::path& path) {
  std::lock_guard lock(log_mutex());
  log_entries().push_back(normalized(path));
}

std::vector<fs::path> FileAccessLog::snapshot() {
  std::lock_guard lock(log_mutex());
  return log_entries();
}

void FileAccessLog::clear() {
  std::lock_guard lock(log_mutex());
  log_entries().clear();
}

bool FileAccessLog::contains(const fs::path& path) {
  const auto target = normalized(path);
  std::lock_guard lock(log_mutex());
  const auto& e = log_entries();
  return std::find(e.begin(), e.end(), target) != e.end();
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_matrix_csv(const fs::path& path, const DenseMatrix& m) {
  auto out = open_for_write(path);
  std::string line;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    line.clear();
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) line.push_back(',');
      line += format_double(m(i, j));
    }
    line.push_back('\n');
    out << line;
  }
  if (!out) throw IoError("write failed: " + path.string());
}

DenseMatrix read_matrix_csv(const fs::path& path, std::size_t budget) {
  auto in = open_for_read(path);
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = trim(line);
    if (s.empty()) continue;
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      const auto comma = s.find(',', start);
      values.push_back(parse_double(s.substr(start, comma - start), lineno));
      ++count;
      if (values.size() > budget) throw DimOverflow("csv matrix exceeds dense budget");
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw ParseError(lineno, "expected " + std::to_string(cols) + " columns, got " +
                                   std::to_string(count));
    }
    ++rows;
  }
  if (rows == 0) throw ParseError(lineno, "empty matrix file");
  return DenseMatrix(rows, cols, values);
}

void write_vector_csv(const fs::path& path, const Vector& v) {
  auto out = open_for_write(path);
  for (double x : v.data()) out << format_double(x) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

Vector read_vector_csv(const fs::path& path) {
  const DenseMatrix m = read_matrix_csv(path);
  if (m.cols() != 1) throw ParseError(1, "expected a single-column file");
  return Vector(m.data());
}

void write_matrix_market(const fs::path& path, const DenseMatrix& m) {
  std::size_t nnz = 0;
  for (double v : m.data()) nnz += v != 0.0;
  auto out = open_for_write(path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << nnz << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0) out << i + 1 << ' ' << j + 1 << ' ' << format_double(m(i, j)) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

DenseMatrix read_matrix_market(const fs::path& path, std::size_t budget) {
  auto in = open_for_read(path);
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) throw ParseError(1, "missing MatrixMarket header");
  ++lineno;
  {
    std::string lowered(trim(line));
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const auto tokens = split_ws(lowered);
    if (tokens.size() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" ||
        tokens[2] != "coordinate" || tokens[3] != "real" || tokens[4] != "general") {
      throw ParseError(lineno, "unsupported header (need coordinate real general)");
    }
  }

  std::size_t rows = 0, cols = 0, nnz = 0;
  bool have_size = false;
  std::vector<double> dense;
  std::size_t seen = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = trim(line);
    if (s.empty() || s.front() == '%') continue;
    const auto tokens = split_ws(s);
    if (!have_size) {
      if (tokens.size() != 3) throw ParseError(lineno, "expected 'rows cols nnz'");
      rows = parse_index(tokens[0], lineno);
      cols = parse_index(tokens[1], lineno);
      nnz = parse_index(tokens[2], lineno);
      if (rows == 0 || cols == 0) throw ParseError(lineno, "zero dimension");
      if (rows > budget / cols) throw DimOverflow("MatrixMarket matrix exceeds dense budget");
      dense.assign(rows * cols, 0.0);
      have_size = true;
      continue;
    }
    if (tokens.size() != 3) throw ParseError(lineno, "expected 'row col value'");
    const std::size_t i = parse_index(tokens[0], lineno);
    const std::size_t j = parse_index(tokens[1], lineno);
    if (i == 0 || j == 0 || i > rows || j > cols) throw ParseError(lineno, "index out of range");
    dense[(i - 1) * cols + (j - 1)] += parse_double(tokens[2], lineno);
    ++seen;
  }
  if (!have_size) throw ParseError(lineno, "missing size line");
  if (seen != nnz) {
    throw ParseError(lineno, "expected " + std::to_string(nnz) + " entries, found " +
                                 std::to_string(seen));
  }
  return DenseMatrix(rows, cols, dense);
}

nlohmann::json read_json(const fs::path& path) {
  auto in = open_for_read(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, std::string("invalid JSON in ") + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  auto out = open_for_write(path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace sketchnmf::io
