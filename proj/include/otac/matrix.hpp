#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace otac {

// Dense row-major matrix. Sizes here are tiny (agents in a network), so
// everything below favors robustness over asymptotic speed.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("matrix shape mismatch");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
      throw std::invalid_argument("matrix shape mismatch");
    Matrix c = a;
    for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] -= b.data_[i];
    return c;
  }

  friend Matrix operator*(double s, const Matrix& a) {
    Matrix c = a;
    for (double& v : c.data_) v *= s;
    return c;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

inline std::vector<double> operator*(const Matrix& a,
                                     std::span<const double> x) {
  if (a.cols() != x.size()) throw std::invalid_argument("matvec shape mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

inline double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double inf_norm(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column k pairs with values[k]
};

// Cyclic Jacobi rotations. Unbeatable robustness at these sizes; used for
// spectral norms where an exact answer matters more than speed.
inline SymmetricEigen jacobi_eigen(const Matrix& sym) {
  const std::size_t n = sym.rows();
  if (n != sym.cols()) throw std::invalid_argument("jacobi_eigen: not square");
  Matrix a = sym;
  Matrix v = Matrix::identity(n);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-300) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <
            1e-18 * (std::abs(a(p, p)) + std::abs(a(q, q)) + 1e-300))
          continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  SymmetricEigen result;
  result.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.values[i] = a(i, i);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return result.values[i] < result.values[j];
  });
  SymmetricEigen sorted;
  sorted.values.resize(n);
  sorted.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    sorted.values[k] = result.values[order[k]];
    for (std::size_t i = 0; i < n; ++i) sorted.vectors(i, k) = v(i, order[k]);
  }
  return sorted;
}

struct TopSingularPair {
  double value = 0.0;
  std::vector<double> left;   // u
  std::vector<double> right;  // v, with A v = value * u
};

// Largest singular value and its pair, via Jacobi on A^T A.
inline TopSingularPair top_singular(const Matrix& a) {
  const Matrix ata = a.transposed() * a;
  const SymmetricEigen eig = jacobi_eigen(ata);
  const std::size_t n = ata.rows();
  TopSingularPair out;
  const double lam = std::max(eig.values[n - 1], 0.0);
  out.value = std::sqrt(lam);
  out.right.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.right[i] = eig.vectors(i, n - 1);
  out.left = a * std::span<const double>(out.right);
  const double ln = norm2(out.left);
  if (ln > 0.0)
    for (double& v : out.left) v /= ln;
  return out;
}

inline double spectral_norm(const Matrix& a) { return top_singular(a).value; }

// Spectral radius of a general real matrix by Gelfand's formula with
// repeated squaring: ||A^(2^k)||_F^(1/2^k) -> rho(A). Each squaring is
// normalized so nothing overflows; the accumulated log rescales at the end.
// Handles complex eigenvalue pairs, which rules out plain power iteration.
inline double spectral_radius(const Matrix& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("spectral_radius: not square");
  if (a.rows() == 0) return 0.0;
  Matrix m = a;
  double log_scale = 0.0;  // log ||A^(2^k)|| = log ||m|| + log_scale
  for (int k = 0; k < 64; ++k) {
    const double nf = frobenius_norm(m);
    if (nf == 0.0) return 0.0;
    log_scale = 2.0 * (log_scale + std::log(nf));
    m = (1.0 / nf) * m;
    m = m * m;
  }
  const double nf = frobenius_norm(m);
  if (nf == 0.0) return 0.0;
  return std::exp((std::log(nf) + log_scale) * 0x1.0p-64);
}

}  // namespace otac
