#include "permanent/matrix_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "permanent/errors.hpp"

namespace permanent {

InputFormat parse_input_format(std::string_view name) {
  if (name == "auto") return InputFormat::Auto;
  if (name == "mm" || name == "matrix-market" || name == "mtx") return InputFormat::MatrixMarket;
  if (name == "dense" || name == "dense-text" || name == "text") return InputFormat::DenseText;
  throw std::invalid_argument("unknown input format '" + std::string(name) + "'");
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) {
    out.push_back(tok);
  }
  return out;
}

bool is_integer_token(std::string_view t) {
  if (!t.empty() && (t.front() == '+' || t.front() == '-')) {
    t.remove_prefix(1);
  }
  return !t.empty() && std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); });
}

double parse_double(std::string_view t, std::size_t line) {
  if (!t.empty() && t.front() == '+') {
    t.remove_prefix(1);
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw ParseError("invalid number '" + std::string(t) + "'", line);
  }
  if (!std::isfinite(v)) {
    throw ParseError("non-finite value '" + std::string(t) + "'", line);
  }
  return v;
}

BigInt parse_integer(std::string_view t, std::size_t line) {
  if (!is_integer_token(t)) {
    throw ParseError("invalid integer '" + std::string(t) + "'", line);
  }
  if (t.front() == '+') {
    t.remove_prefix(1);
  }
  return BigInt(std::string(t));
}

long long parse_index(const std::string& t, std::size_t line) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw ParseError("invalid index '" + t + "'", line);
  }
  return v;
}

void check_dimension(long long rows, long long cols, int max_n, std::size_t line) {
  if (rows != cols) {
    throw ParseError("matrix must be square, got " + std::to_string(rows) + "x" + std::to_string(cols), line);
  }
  if (rows < 0) {
    throw ParseError("negative dimension", line);
  }
  if (rows > max_n) {
    throw ImpossibleError("matrix dimension " + std::to_string(rows) + " exceeds the limit " + std::to_string(max_n));
  }
}

/// Reads the next data line, skipping blanks and lines starting with comment.
bool next_data_line(std::istream& in, std::string& line, std::size_t& number, char comment) {
  while (std::getline(in, line)) {
    ++number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == comment) {
      continue;
    }
    return true;
  }
  return false;
}

enum class Field { Real, Complex, Integer, Pattern };
enum class Symmetry { General, Symmetric, Skew, Hermitian };

template <MatrixScalar T>
T read_value(const std::vector<std::string>& tok, std::size_t offset, Field field, std::size_t line) {
  if constexpr (std::is_same_v<T, double>) {
    return parse_double(tok[offset], line);
  } else if constexpr (std::is_same_v<T, Complex>) {
    return {parse_double(tok[offset], line), parse_double(tok[offset + 1], line)};
  } else {
    return field == Field::Pattern ? BigInt(1) : parse_integer(tok[offset], line);
  }
}

template <MatrixScalar T>
T mirror(const T& v, Symmetry sym) {
  if (sym == Symmetry::Skew) {
    return T(-v);
  }
  if constexpr (std::is_same_v<T, Complex>) {
    if (sym == Symmetry::Hermitian) {
      return std::conj(v);
    }
  }
  return v;
}

template <MatrixScalar T>
SparsePair<T> read_mm_body(std::istream& in, std::size_t& line_no, bool coordinate, Field field, Symmetry sym,
                           int max_n) {
  std::string line;
  if (!next_data_line(in, line, line_no, '%')) {
    throw ParseError("missing size line", line_no + 1);
  }
  const auto size = split(line);
  if (size.size() != (coordinate ? 3U : 2U)) {
    throw ParseError("malformed size line", line_no);
  }
  const long long rows = parse_index(size[0], line_no);
  const long long cols = parse_index(size[1], line_no);
  check_dimension(rows, cols, max_n, line_no);
  const int n = static_cast<int>(rows);

  const std::size_t width = field == Field::Pattern ? 0 : (field == Field::Complex ? 2 : 1);
  std::vector<Triplet<T>> entries;
  auto add = [&](int i, int j, T v, std::size_t at) {
    if (i != j && sym != Symmetry::General) {
      entries.push_back({j, i, mirror(v, sym)});
    } else if (i == j && sym == Symmetry::Skew && !is_zero(v)) {
      throw ParseError("skew-symmetric matrix with a nonzero diagonal", at);
    }
    entries.push_back({i, j, std::move(v)});
  };

  if (coordinate) {
    const long long nnz = parse_index(size[2], line_no);
    if (nnz < 0) {
      throw ParseError("negative entry count", line_no);
    }
    for (long long k = 0; k < nnz; ++k) {
      if (!next_data_line(in, line, line_no, '%')) {
        throw ParseError("expected " + std::to_string(nnz) + " entries, found " + std::to_string(k), line_no);
      }
      const auto tok = split(line);
      if (tok.size() != 2 + width) {
        throw ParseError("expected " + std::to_string(2 + width) + " fields", line_no);
      }
      const long long i = parse_index(tok[0], line_no);
      const long long j = parse_index(tok[1], line_no);
      if (i < 1 || i > n || j < 1 || j > n) {
        throw ParseError("entry index out of range", line_no);
      }
      if (sym != Symmetry::General && j > i) {
        throw ParseError("symmetric storage expects the lower triangle", line_no);
      }
      add(static_cast<int>(i - 1), static_cast<int>(j - 1), read_value<T>(tok, 2, field, line_no), line_no);
    }
  } else {
    if (field == Field::Pattern) {
      throw ParseError("array format cannot be pattern", line_no);
    }
    // Column-major; symmetric variants store the lower triangle only.
    for (int j = 0; j < n; ++j) {
      const int first = sym == Symmetry::General ? 0 : (sym == Symmetry::Skew ? j + 1 : j);
      for (int i = first; i < n; ++i) {
        if (!next_data_line(in, line, line_no, '%')) {
          throw ParseError("array data ended early", line_no);
        }
        const auto tok = split(line);
        if (tok.size() != width) {
          throw ParseError("expected " + std::to_string(width) + " fields", line_no);
        }
        add(i, j, read_value<T>(tok, 0, field, line_no), line_no);
      }
    }
  }
  if (next_data_line(in, line, line_no, '%')) {
    throw ParseError("unexpected data after the last entry", line_no);
  }
  return SparsePair<T>::from_triplets(n, std::move(entries));
}

template <MatrixScalar T>
SparsePair<T> drop_small(const SparsePair<T>& s, double tol) {
  auto entries = s.triplets();
  std::erase_if(entries, [&](const auto& e) { return magnitude(e.value) <= tol; });
  return SparsePair<T>::from_triplets(s.n(), std::move(entries));
}

} // namespace

Ingested read_matrix_market(std::istream& in, int max_n) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw ParseError("empty input", 1);
  }
  line_no = 1;
  const auto head = split(lower(line));
  if (head.size() != 5 || head[0] != "%%matrixmarket" || head[1] != "matrix") {
    throw ParseError("missing '%%MatrixMarket matrix' header", line_no);
  }
  bool coordinate;
  if (head[2] == "coordinate") {
    coordinate = true;
  } else if (head[2] == "array") {
    coordinate = false;
  } else {
    throw ParseError("unknown storage '" + head[2] + "'", line_no);
  }
  Field field;
  if (head[3] == "real" || head[3] == "double") {
    field = Field::Real;
  } else if (head[3] == "complex") {
    field = Field::Complex;
  } else if (head[3] == "integer") {
    field = Field::Integer;
  } else if (head[3] == "pattern") {
    field = Field::Pattern;
  } else {
    throw ParseError("unknown field '" + head[3] + "'", line_no);
  }
  Symmetry sym;
  if (head[4] == "general") {
    sym = Symmetry::General;
  } else if (head[4] == "symmetric") {
    sym = Symmetry::Symmetric;
  } else if (head[4] == "skew-symmetric") {
    sym = Symmetry::Skew;
  } else if (head[4] == "hermitian") {
    if (field != Field::Complex) {
      throw ParseError("hermitian storage requires the complex field", line_no);
    }
    sym = Symmetry::Hermitian;
  } else {
    throw ParseError("unknown symmetry '" + head[4] + "'", line_no);
  }
  if (field == Field::Pattern && sym == Symmetry::Skew) {
    throw ParseError("pattern matrices cannot be skew-symmetric", line_no);
  }

  Ingested out{SparsePair<double>::from_triplets(0, {}), InputFormat::MatrixMarket, field == Field::Pattern};
  switch (field) {
  case Field::Real:
    out.matrix = read_mm_body<double>(in, line_no, coordinate, field, sym, max_n);
    break;
  case Field::Complex:
    out.matrix = read_mm_body<Complex>(in, line_no, coordinate, field, sym, max_n);
    break;
  case Field::Integer:
  case Field::Pattern:
    out.matrix = read_mm_body<BigInt>(in, line_no, coordinate, field, sym, max_n);
    break;
  }
  return out;
}

Ingested read_dense_text(std::istream& in, int max_n) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    auto tok = split(line);
    if (tok.empty()) {
      continue;
    }
    rows.push_back(std::move(tok));
    row_lines.push_back(line_no);
  }
  const auto n = static_cast<long long>(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<long long>(rows[i].size()) != n) {
      throw ParseError("row has " + std::to_string(rows[i].size()) + " values, expected " + std::to_string(n),
                       row_lines[i]);
    }
  }
  check_dimension(n, n, max_n, 0);
  const bool integral = std::all_of(rows.begin(), rows.end(), [](const auto& r) {
    return std::all_of(r.begin(), r.end(), [](const std::string& t) { return is_integer_token(t); });
  });

  Ingested out{SparsePair<double>::from_triplets(0, {}), InputFormat::DenseText, false};
  if (integral) {
    std::vector<Triplet<BigInt>> entries;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        entries.push_back({i, j, parse_integer(rows[i][j], row_lines[i])});
      }
    }
    out.matrix = SparsePair<BigInt>::from_triplets(static_cast<int>(n), std::move(entries));
  } else {
    std::vector<Triplet<double>> entries;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        entries.push_back({i, j, parse_double(rows[i][j], row_lines[i])});
      }
    }
    out.matrix = SparsePair<double>::from_triplets(static_cast<int>(n), std::move(entries));
  }
  return out;
}

Ingested ingest(std::istream& in, const IngestOptions& options) {
  InputFormat format = options.format;
  if (format == InputFormat::Auto) {
    const int c = in.peek();
    format = c == '%' ? InputFormat::MatrixMarket : InputFormat::DenseText;
  }
  Ingested out = format == InputFormat::MatrixMarket ? read_matrix_market(in, options.max_n)
                                                     : read_dense_text(in, options.max_n);
  if (options.zero_tolerance < 0) {
    throw std::invalid_argument("zero tolerance must be nonnegative");
  }
  if (options.zero_tolerance > 0) {
    std::visit([&](const auto& s) { out.matrix = drop_small(s, options.zero_tolerance); }, out.matrix);
  }
  return out;
}

Ingested ingest(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "'");
  }
  return ingest(in, options);
}

void write_matrix_market(std::ostream& out, const AnySparse& matrix) {
  std::visit(
      [&](const auto& s) {
        using T = typename std::decay_t<decltype(s.crs().vals)>::value_type;
        const char* field = std::is_same_v<T, double> ? "real" : (std::is_same_v<T, Complex> ? "complex" : "integer");
        out << "%%MatrixMarket matrix coordinate " << field << " general\n";
        out << s.n() << ' ' << s.n() << ' ' << s.nnz() << '\n';
        char buf[64];
        for (const auto& t : s.triplets()) {
          out << t.row + 1 << ' ' << t.col + 1;
          if constexpr (std::is_same_v<T, double>) {
            std::snprintf(buf, sizeof buf, " %.17g", t.value);
            out << buf;
          } else if constexpr (std::is_same_v<T, Complex>) {
            std::snprintf(buf, sizeof buf, " %.17g %.17g", t.value.real(), t.value.imag());
            out << buf;
          } else {
            out << ' ' << t.value.str();
          }
          out << '\n';
        }
      },
      matrix);
}

} // namespace permanent
