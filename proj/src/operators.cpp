#include "affineopt/operators.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "affineopt/errors.hpp"

namespace affineopt {

namespace {

void validate(const RowMajorMatrix& m) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw InputError(fmt::format("matrix must be nonempty, got {}x{}", m.rows(), m.cols()));
  }
  if (!m.allFinite()) {
    throw InputError("matrix contains non-finite entries");
  }
}

void check_length(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw InputError(fmt::format("{}: expected length {}, got {}", what, want, got));
  }
}

double parse_double(std::string_view field, std::size_t line) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
    field.remove_suffix(1);
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw InputError(fmt::format("matrix file line {}: cannot parse '{}'", line, field));
  }
  return value;
}

}  // namespace

DenseMatrix::DenseMatrix(Eigen::Index rows, Eigen::Index cols, std::span<const double> row_major) {
  if (rows < 1 || cols < 1) {
    throw InputError(fmt::format("matrix must be nonempty, got {}x{}", rows, cols));
  }
  if (static_cast<Eigen::Index>(row_major.size()) != rows * cols) {
    throw InputError(fmt::format("matrix {}x{} needs {} entries, got {}", rows, cols, rows * cols,
                                 row_major.size()));
  }
  entries_ = Eigen::Map<const RowMajorMatrix>(row_major.data(), rows, cols);
  validate(entries_);
}

DenseMatrix::DenseMatrix(RowMajorMatrix entries) : entries_(std::move(entries)) { validate(entries_); }

DenseMatrix DenseMatrix::identity(Eigen::Index n) {
  return DenseMatrix(RowMajorMatrix::Identity(n, n));
}

InstrumentedMap::InstrumentedMap(DenseMatrix matrix)
    : matrix_(std::make_shared<const DenseMatrix>(std::move(matrix))) {}

InstrumentedMap::InstrumentedMap(std::shared_ptr<const DenseMatrix> matrix)
    : matrix_(std::move(matrix)) {
  if (!matrix_) throw InputError("null matrix");
}

Vector InstrumentedMap::apply(const Vector& x) {
  check_length(x.size(), cols(), "apply");
  ++counters_.count_K;
  return matrix_->entries() * x;
}

Vector InstrumentedMap::apply_transpose(const Vector& y) {
  check_length(y.size(), rows(), "apply_transpose");
  ++counters_.count_Kt;
  return matrix_->entries().transpose() * y;
}

Vector InstrumentedMap::gram_apply(const Vector& x) {
  return apply_transpose(apply(x));
}

DenseMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open matrix file {}", path.string()));

  std::string line;
  if (!std::getline(in, line)) throw InputError("matrix file is empty");
  std::istringstream header(line);
  long long rows = 0, cols = 0;
  if (!(header >> rows >> cols) || rows < 1 || cols < 1) {
    throw InputError(fmt::format("matrix file header must be 'p d', got '{}'", line));
  }

  std::vector<double> entries;
  entries.reserve(static_cast<std::size_t>(rows * cols));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string_view rest(line);
    std::size_t fields = 0;
    while (true) {
      auto comma = rest.find(',');
      entries.push_back(parse_double(rest.substr(0, comma), line_no));
      ++fields;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (static_cast<long long>(fields) != cols) {
      throw InputError(fmt::format("matrix file line {}: expected {} fields, got {}", line_no, cols, fields));
    }
  }
  return DenseMatrix(rows, cols, entries);
}

void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& matrix) {
  std::ofstream out(path);
  if (!out) throw InputError(fmt::format("cannot write matrix file {}", path.string()));
  out << matrix.rows() << ' ' << matrix.cols() << '\n';
  std::string row;
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    row.clear();
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      if (j) row += ',';
      row += fmt::format("{:.17g}", matrix(i, j));
    }
    out << row << '\n';
  }
}

}  // namespace affineopt
