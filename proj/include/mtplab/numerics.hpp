#pragma once

// Dense kernels for the two-layer attention model: a small row-major matrix,
// causal softmax, and the softmax Jacobian J(s) = diag(s) - s s^T.

#include <cstddef>
#include <span>
#include <vector>

namespace mtplab {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  // Strictly lower shift: ones at (i, i-1).
  static Matrix lower_shift(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  Matrix& operator+=(const Matrix& other);
  Matrix& operator*=(double scale);
  bool operator==(const Matrix& other) const = default;

  double max_abs() const noexcept;
  bool all_finite() const noexcept;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(Matrix a, const Matrix& b);
Matrix transpose(const Matrix& m);
Matrix outer(std::span<const double> col, std::span<const double> row);
// Row vector times matrix.
std::vector<double> vecmat(std::span<const double> v, const Matrix& m);
// Matrix times column vector.
std::vector<double> matvec(const Matrix& m, std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

inline constexpr double kStochasticTol = 1e-12;

// Stable softmax of a full vector.
std::vector<double> softmax(std::span<const double> logits);

// Row t sees columns 0..t; masked columns are excluded from the normalisation
// and come out as exact zeros. Throws Errc::dimension for non-square input.
Matrix masked_softmax(const Matrix& logits);

Matrix softmax_jacobian(std::span<const double> s);

// Applies J(s) to g without materialising J: s * (g - <g, s>).
std::vector<double> softmax_jacobian_apply(std::span<const double> s,
                                           std::span<const double> g);

bool is_distribution(std::span<const double> s, double tol = kStochasticTol);

// Lowest index wins ties.
std::size_t argmax(std::span<const double> v);

}  // namespace mtplab
