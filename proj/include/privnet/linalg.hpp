#pragma once

// Dense linear algebra for small matrices (agent counts and model dimensions
// stay in the tens for desk-scale experiments, so nothing here is blocked).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace privnet {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative shape");
  }
  Matrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = static_cast<int>(init.size());
    cols_ = rows_ ? static_cast<int>(init.begin()->size()) : 0;
    data_.reserve(static_cast<size_t>(rows_) * cols_);
    for (const auto& row : init) {
      if (static_cast<int>(row.size()) != cols_)
        throw std::invalid_argument("Matrix: ragged initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

  const double* row(int r) const { return data_.data() + static_cast<size_t>(r) * cols_; }
  double* row(int r) { return data_.data() + static_cast<size_t>(r) * cols_; }

  Vector& data() { return data_; }
  const Vector& data() const { return data_; }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  Vector data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

inline Vector operator*(const Matrix& a, const Vector& x) {
  if (a.cols() != static_cast<int>(x.size()))
    throw std::invalid_argument("matvec: shape mismatch");
  Vector y(a.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline double dot(const Vector& a, const Vector& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

inline double norm_inf(const Vector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double frobenius_norm(const Matrix& a) {
  double acc = 0.0;
  for (double x : a.data()) acc += x * x;
  return std::sqrt(acc);
}

// In-place axpy: y += alpha * x.
inline void axpy(double alpha, const Vector& x, Vector& y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

// Solves A x = b by Gaussian elimination with partial pivoting.
// Throws std::runtime_error when the system is numerically singular.
inline Vector solve(Matrix a, Vector b) {
  if (!a.square() || a.rows() != static_cast<int>(b.size()))
    throw std::invalid_argument("solve: shape mismatch");
  const int n = a.rows();
  double scale = 0.0;
  for (double x : a.data()) scale = std::max(scale, std::abs(x));
  const double tol = std::max(scale, 1.0) * 1e-13;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (std::abs(a(piv, k)) <= tol)
      throw std::runtime_error("solve: singular system (rank-deficient)");
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (int i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (int j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  Vector x(n);
  for (int i = n - 1; i >= 0; --i) {
    double acc = b[i];
    for (int j = i + 1; j < n; ++j) acc -= a(i, j) * x[j];
    x[i] = acc / a(i, i);
  }
  return x;
}

// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
inline Matrix cholesky(const Matrix& a) {
  if (!a.square()) throw std::invalid_argument("cholesky: not square");
  const int n = a.rows();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-10 * std::max(1.0, frobenius_norm(a)))
        throw std::invalid_argument("cholesky: matrix not symmetric");
  Matrix l(n, n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d <= 0.0) throw std::invalid_argument("cholesky: matrix not positive definite");
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
inline Vector symmetric_eigenvalues(Matrix s) {
  if (!s.square()) throw std::invalid_argument("symmetric_eigenvalues: not square");
  const int n = s.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += s(i, j) * s(i, j);
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(s(p, q)) < 1e-300) continue;
        const double theta = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (int k = 0; k < n; ++k) {
          const double skp = s(k, p), skq = s(k, q);
          s(k, p) = c * skp - sn * skq;
          s(k, q) = sn * skp + c * skq;
        }
        for (int k = 0; k < n; ++k) {
          const double spk = s(p, k), sqk = s(q, k);
          s(p, k) = c * spk - sn * sqk;
          s(q, k) = sn * spk + c * sqk;
        }
      }
  }
  Vector eig(n);
  for (int i = 0; i < n; ++i) eig[i] = s(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

// Spectral radius estimate valid for general (possibly non-symmetric) square
// matrices. Repeated squaring separates eigenvalue moduli before the power
// iteration, so complex-conjugate dominant pairs converge as well; the final
// 2^squarings-th root shrinks the remaining estimation error accordingly.
inline double spectral_radius(Matrix b, int squarings = 6, int iterations = 400) {
  if (!b.square()) throw std::invalid_argument("spectral_radius: not square");
  const int n = b.rows();
  if (n == 0) return 0.0;
  if (n == 1) return std::abs(b(0, 0));
  double log_scale = 0.0;
  for (int s = 0; s < squarings; ++s) {
    const double f = frobenius_norm(b);
    if (f == 0.0) return 0.0;
    for (double& x : b.data()) x /= f;
    log_scale = 2.0 * log_scale + 2.0 * std::log(f);
    b = b * b;
  }
  {
    const double f = frobenius_norm(b);
    if (f == 0.0) return 0.0;
    for (double& x : b.data()) x /= f;
    log_scale += std::log(f);
  }
  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = 1.0 + 0.37 * i;  // fixed generic start
  double log_growth = 0.0;
  int counted = 0;
  double nx = norm2(x);
  for (int it = 0; it < iterations; ++it) {
    for (double& v : x) v /= nx;
    Vector y = b * x;
    const double ny = norm2(y);
    if (ny == 0.0) return 0.0;
    if (it >= iterations / 2) {
      log_growth += std::log(ny);
      ++counted;
    }
    x = std::move(y);
    nx = ny;
  }
  const double log_rho_pow = log_growth / counted + log_scale;
  return std::exp(log_rho_pow / std::pow(2.0, squarings));
}

}  // namespace privnet
