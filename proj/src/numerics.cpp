#include "mtplab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mtplab/error.hpp"

namespace mtplab {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(Errc::dimension, std::string(op) + ": shape mismatch " +
                                     std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                     " vs " + std::to_string(b.rows()) + "x" +
                                     std::to_string(b.cols()));
  }
}

// Softmax over the first `visible` entries of `logits`, written into `out`.
void softmax_prefix(std::span<const double> logits, std::size_t visible, std::span<double> out) {
  double peak = logits[0];
  for (std::size_t j = 1; j < visible; ++j) peak = std::max(peak, logits[j]);
  double total = 0.0;
  for (std::size_t j = 0; j < visible; ++j) {
    out[j] = std::exp(logits[j] - peak);
    total += out[j];
  }
  for (std::size_t j = 0; j < visible; ++j) out[j] /= total;
  for (std::size_t j = visible; j < out.size(); ++j) out[j] = 0.0;
}

}  // namespace

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::lower_shift(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 1; i < n; ++i) m(i, i - 1) = 1.0;
  return m;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double scale) {
  for (double& x : data_) x *= scale;
  return *this;
}

double Matrix::max_abs() const noexcept {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::abs(x));
  return m;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw Error(Errc::dimension, "matrix product: inner dimensions " + std::to_string(a.cols()) +
                                     " and " + std::to_string(b.rows()));
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Matrix operator+(Matrix a, const Matrix& b) {
  a += b;
  return a;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

Matrix outer(std::span<const double> col, std::span<const double> row) {
  Matrix m(col.size(), row.size());
  for (std::size_t i = 0; i < col.size(); ++i)
    for (std::size_t j = 0; j < row.size(); ++j) m(i, j) = col[i] * row[j];
  return m;
}

std::vector<double> vecmat(std::span<const double> v, const Matrix& m) {
  if (v.size() != m.rows()) throw Error(Errc::dimension, "vecmat: length mismatch");
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (v[i] == 0.0) continue;
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += v[i] * m(i, j);
  }
  return out;
}

std::vector<double> matvec(const Matrix& m, std::span<const double> v) {
  if (v.size() != m.cols()) throw Error(Errc::dimension, "matvec: length mismatch");
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = dot(m.row(i), v);
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (!logits.empty()) softmax_prefix(logits, logits.size(), out);
  return out;
}

Matrix masked_softmax(const Matrix& logits) {
  if (!logits.square() || logits.rows() == 0) {
    throw Error(Errc::dimension, "masked_softmax: expected a non-empty square matrix, got " +
                                     std::to_string(logits.rows()) + "x" +
                                     std::to_string(logits.cols()));
  }
  Matrix s(logits.rows(), logits.cols());
  for (std::size_t t = 0; t < logits.rows(); ++t) softmax_prefix(logits.row(t), t + 1, s.row(t));
  return s;
}

Matrix softmax_jacobian(std::span<const double> s) {
  const std::size_t n = s.size();
  Matrix j(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) j(a, b) = -s[a] * s[b];
    j(a, a) += s[a];
  }
  return j;
}

std::vector<double> softmax_jacobian_apply(std::span<const double> s, std::span<const double> g) {
  const double mean = dot(g, s);
  std::vector<double> out(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) out[k] = s[k] * (g[k] - mean);
  return out;
}

bool is_distribution(std::span<const double> s, double tol) {
  double total = 0.0;
  for (double x : s) {
    if (!(x >= 0.0) || !std::isfinite(x)) return false;
    total += x;
  }
  return std::abs(total - 1.0) <= tol;
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > v[best]) best = k;
  return best;
}

}  // namespace mtplab
