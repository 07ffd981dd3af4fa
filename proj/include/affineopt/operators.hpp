#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>

#include <Eigen/Dense>

namespace affineopt {

using Vector = Eigen::VectorXd;
using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/**
 * @brief Immutable dense p x d matrix stored row-major.
 *
 * Construction validates shape and finiteness; afterwards the object is
 * never modified and may be shared between threads.
 */
class DenseMatrix {
 public:
  DenseMatrix(Eigen::Index rows, Eigen::Index cols, std::span<const double> row_major);
  explicit DenseMatrix(RowMajorMatrix entries);

  static DenseMatrix identity(Eigen::Index n);

  Eigen::Index rows() const { return entries_.rows(); }
  Eigen::Index cols() const { return entries_.cols(); }
  const RowMajorMatrix& entries() const { return entries_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

 private:
  RowMajorMatrix entries_;
};

struct CounterSnapshot {
  std::uint64_t count_K = 0;
  std::uint64_t count_Kt = 0;

  std::uint64_t total() const { return count_K + count_Kt; }
  friend bool operator==(const CounterSnapshot&, const CounterSnapshot&) = default;
};

inline CounterSnapshot operator-(const CounterSnapshot& a, const CounterSnapshot& b) {
  return {a.count_K - b.count_K, a.count_Kt - b.count_Kt};
}

/**
 * @brief The constraint operator K together with exact counts of how many
 * times K and K^T have been applied.
 *
 * Copies share the underlying matrix but own independent counters, so
 * each solver run works on its own wrapper.
 */
class InstrumentedMap {
 public:
  explicit InstrumentedMap(DenseMatrix matrix);
  explicit InstrumentedMap(std::shared_ptr<const DenseMatrix> matrix);

  Eigen::Index rows() const { return matrix_->rows(); }
  Eigen::Index cols() const { return matrix_->cols(); }

  /// Kx; counts one application of K.
  Vector apply(const Vector& x);
  /// K^T y; counts one application of K^T.
  Vector apply_transpose(const Vector& y);
  /// K^T(Kx); counts one of each.
  Vector gram_apply(const Vector& x);

  CounterSnapshot counter_snapshot() const { return counters_; }
  void reset_counters() { counters_ = {}; }

  /// Direct access for diagnostics and oracles; does not touch counters.
  const DenseMatrix& matrix() const { return *matrix_; }
  const std::shared_ptr<const DenseMatrix>& shared_matrix() const { return matrix_; }

  /// Fresh wrapper over the same matrix with zeroed counters.
  InstrumentedMap fresh() const { return InstrumentedMap(matrix_); }

 private:
  std::shared_ptr<const DenseMatrix> matrix_;
  CounterSnapshot counters_;
};

// Matrix file: first line "p d", then p lines of d comma-separated entries.
DenseMatrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& matrix);

}  // namespace affineopt
