#ifndef PSDC_LINALG_HPP
#define PSDC_LINALG_HPP

// Small dense linear algebra: LU with partial pivoting, determinants,
// eigenvalues of real matrices (Hessenberg reduction + shifted QR) and a
// Thomas solver for tridiagonal systems. Everything here targets the tiny
// systems this project needs (dense M <= 16, tridiagonal N ~ 2e3); there is
// deliberately no sparse or iterative machinery.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "psdc/common.hpp"

namespace psdc {

template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, fill) {
    if (rows < 1 || cols < 1) throw InvalidArgument("Matrix: dimensions must be >= 1");
  }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  static Matrix diagonal(const std::vector<T>& d) {
    Matrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (int i = 0; i < m.rows(); ++i) m(i, i) = d[static_cast<size_t>(i)];
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  T& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  const T& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

  std::vector<T> diag() const {
    std::vector<T> d(static_cast<size_t>(std::min(rows_, cols_)));
    for (size_t i = 0; i < d.size(); ++i) d[i] = (*this)(static_cast<int>(i), static_cast<int>(i));
    return d;
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double inf_norm() const {
    double best = 0.0;
    for (int i = 0; i < rows_; ++i) {
      double s = 0.0;
      for (int j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
      best = std::max(best, s);
    }
    return best;
  }

  Matrix& operator+=(const Matrix& o) {
    for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
  }
  Matrix& operator*=(T s) {
    for (auto& v : a_) v *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, T s) { return a *= s; }
  friend Matrix operator*(T s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw InvalidArgument("Matrix product: size mismatch");
    Matrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
      for (int k = 0; k < a.cols(); ++k) {
        const T aik = a(i, k);
        for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend std::vector<T> operator*(const Matrix& a, const std::vector<T>& x) {
    if (a.cols() != static_cast<int>(x.size()))
      throw InvalidArgument("Matrix-vector product: size mismatch");
    std::vector<T> y(static_cast<size_t>(a.rows()), T{});
    for (int i = 0; i < a.rows(); ++i) {
      T s{};
      for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[static_cast<size_t>(j)];
      y[static_cast<size_t>(i)] = s;
    }
    return y;
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<T> a_;
};

using DenseMatrix = Matrix<double>;
using ComplexMatrix = Matrix<Complex>;

inline double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double inf_norm(const std::vector<Complex>& v) {
  double m = 0.0;
  for (const Complex& x : v) m = std::max(m, std::abs(x));
  return m;
}

// ---------------------------------------------------------------------------
// LU factorization with partial pivoting. PA = LU with L unit lower
// triangular; both factors are packed into one matrix. A pivot below
// 1e-14 * ||A||_inf marks the factorization singular; the factorization still
// runs to completion so determinants of singular matrices come out as zero.
// ---------------------------------------------------------------------------

template <class T>
struct LuFactors {
  Matrix<T> lu;            // L strictly below the diagonal, U on and above
  std::vector<int> perm;   // row i of LU corresponds to row perm[i] of A
  int sign = 1;            // parity of the permutation
  bool singular = false;

  Matrix<T> unit_lower() const {
    const int n = lu.rows();
    Matrix<T> l = Matrix<T>::identity(n);
    for (int i = 1; i < n; ++i)
      for (int j = 0; j < i; ++j) l(i, j) = lu(i, j);
    return l;
  }
  Matrix<T> upper() const {
    const int n = lu.rows();
    Matrix<T> u(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) u(i, j) = lu(i, j);
    return u;
  }
};

template <class T>
LuFactors<T> lu_decompose(const Matrix<T>& a) {
  if (!a.square()) throw InvalidArgument("lu_decompose: matrix must be square");
  const int n = a.rows();
  const double tiny = 1e-14 * a.inf_norm();

  LuFactors<T> f;
  f.lu = a;
  f.perm.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) f.perm[static_cast<size_t>(i)] = i;

  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(f.lu(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double m = std::abs(f.lu(i, k));
      if (m > best) {
        best = m;
        piv = i;
      }
    }
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(piv, j));
      std::swap(f.perm[static_cast<size_t>(k)], f.perm[static_cast<size_t>(piv)]);
      f.sign = -f.sign;
    }
    if (best <= tiny) {
      f.singular = true;
      if (best == 0.0) continue;  // whole column is zero, nothing to eliminate
    }
    const T pivot = f.lu(k, k);
    for (int i = k + 1; i < n; ++i) {
      const T m = f.lu(i, k) / pivot;
      f.lu(i, k) = m;
      for (int j = k + 1; j < n; ++j) f.lu(i, j) -= m * f.lu(k, j);
    }
  }
  return f;
}

template <class T>
std::vector<T> lu_solve(const LuFactors<T>& f, const std::vector<T>& b) {
  const int n = f.lu.rows();
  if (static_cast<int>(b.size()) != n) throw InvalidArgument("lu_solve: size mismatch");
  if (f.singular) throw NumericalFailure("lu_solve: matrix is singular to working precision");
  std::vector<T> x(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] = b[static_cast<size_t>(f.perm[static_cast<size_t>(i)])];
  for (int i = 1; i < n; ++i) {
    T s = x[static_cast<size_t>(i)];
    for (int j = 0; j < i; ++j) s -= f.lu(i, j) * x[static_cast<size_t>(j)];
    x[static_cast<size_t>(i)] = s;
  }
  for (int i = n - 1; i >= 0; --i) {
    T s = x[static_cast<size_t>(i)];
    for (int j = i + 1; j < n; ++j) s -= f.lu(i, j) * x[static_cast<size_t>(j)];
    x[static_cast<size_t>(i)] = s / f.lu(i, i);
  }
  return x;
}

template <class T>
T determinant(const Matrix<T>& a) {
  const LuFactors<T> f = lu_decompose(a);
  T det = static_cast<T>(f.sign);
  for (int i = 0; i < a.rows(); ++i) det *= f.lu(i, i);
  return det;
}

template <class T>
std::vector<T> solve_dense(const Matrix<T>& a, const std::vector<T>& b) {
  return lu_solve(lu_decompose(a), b);
}

// Inverse through LU; only used on the tiny Q-sized matrices.
template <class T>
Matrix<T> inverse(const Matrix<T>& a) {
  const LuFactors<T> f = lu_decompose(a);
  const int n = a.rows();
  Matrix<T> inv(n, n);
  std::vector<T> e(static_cast<size_t>(n), T{});
  for (int j = 0; j < n; ++j) {
    e[static_cast<size_t>(j)] = T(1);
    std::vector<T> col = lu_solve(f, e);
    e[static_cast<size_t>(j)] = T{};
    for (int i = 0; i < n; ++i) inv(i, j) = col[static_cast<size_t>(i)];
  }
  return inv;
}

// ---------------------------------------------------------------------------
// Tridiagonal systems (Thomas recurrence, no pivoting; callers guarantee the
// systems are diagonally dominant).
// ---------------------------------------------------------------------------

struct Tridiagonal {
  std::vector<double> lower;  // size n-1
  std::vector<double> diag;   // size n
  std::vector<double> upper;  // size n-1

  explicit Tridiagonal(int n = 1)
      : lower(static_cast<size_t>(n - 1)), diag(static_cast<size_t>(n)), upper(static_cast<size_t>(n - 1)) {
    if (n < 1) throw InvalidArgument("Tridiagonal: dimension must be >= 1");
  }
  int size() const { return static_cast<int>(diag.size()); }
};

inline std::vector<double> solve_tridiagonal(const Tridiagonal& t, const std::vector<double>& b) {
  const int n = t.size();
  if (static_cast<int>(b.size()) != n) throw InvalidArgument("solve_tridiagonal: size mismatch");
  std::vector<double> c(static_cast<size_t>(n)), x(static_cast<size_t>(n));
  double piv = t.diag[0];
  if (piv == 0.0) throw NumericalFailure("solve_tridiagonal: zero pivot");
  x[0] = b[0] / piv;
  for (int i = 1; i < n; ++i) {
    c[static_cast<size_t>(i)] = t.upper[static_cast<size_t>(i - 1)] / piv;
    piv = t.diag[static_cast<size_t>(i)] - t.lower[static_cast<size_t>(i - 1)] * c[static_cast<size_t>(i)];
    if (piv == 0.0) throw NumericalFailure("solve_tridiagonal: zero pivot");
    x[static_cast<size_t>(i)] =
        (b[static_cast<size_t>(i)] - t.lower[static_cast<size_t>(i - 1)] * x[static_cast<size_t>(i - 1)]) / piv;
  }
  for (int i = n - 2; i >= 0; --i)
    x[static_cast<size_t>(i)] -= c[static_cast<size_t>(i + 1)] * x[static_cast<size_t>(i + 1)];
  return x;
}

// ---------------------------------------------------------------------------
// Eigenvalues of a real square matrix. Householder reduction to upper
// Hessenberg form, then an explicitly shifted QR iteration carried out in
// complex arithmetic with Wilkinson shifts (Golub & Van Loan, ch. 7).
// Complex shifts keep the implementation simple and still resolve conjugate
// pairs of real matrices; with M <= 16 the extra arithmetic is irrelevant.
// ---------------------------------------------------------------------------

namespace detail {

inline void hessenberg_reduce(DenseMatrix& h) {
  const int n = h.rows();
  std::vector<double> v(static_cast<size_t>(n));
  for (int k = 0; k < n - 2; ++k) {
    double norm = 0.0;
    for (int i = k + 1; i < n; ++i) norm += h(i, k) * h(i, k);
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    const double alpha = (h(k + 1, k) >= 0.0) ? -norm : norm;
    double vnorm = 0.0;
    for (int i = k + 1; i < n; ++i) {
      v[static_cast<size_t>(i)] = h(i, k);
      if (i == k + 1) v[static_cast<size_t>(i)] -= alpha;
      vnorm += v[static_cast<size_t>(i)] * v[static_cast<size_t>(i)];
    }
    if (vnorm == 0.0) continue;
    // H <- (I - 2vv^T) H (I - 2vv^T), restricted to the affected block
    for (int j = k; j < n; ++j) {
      double dot = 0.0;
      for (int i = k + 1; i < n; ++i) dot += v[static_cast<size_t>(i)] * h(i, j);
      dot *= 2.0 / vnorm;
      for (int i = k + 1; i < n; ++i) h(i, j) -= dot * v[static_cast<size_t>(i)];
    }
    for (int i = 0; i < n; ++i) {
      double dot = 0.0;
      for (int j = k + 1; j < n; ++j) dot += h(i, j) * v[static_cast<size_t>(j)];
      dot *= 2.0 / vnorm;
      for (int j = k + 1; j < n; ++j) h(i, j) -= dot * v[static_cast<size_t>(j)];
    }
    for (int i = k + 2; i < n; ++i) h(i, k) = 0.0;
    h(k + 1, k) = alpha;
  }
}

inline std::pair<Complex, Complex> eig2x2(Complex a, Complex b, Complex c, Complex d) {
  const Complex half_tr = 0.5 * (a + d);
  const Complex disc = std::sqrt(0.25 * (a - d) * (a - d) + b * c);
  return {half_tr + disc, half_tr - disc};
}

}  // namespace detail

inline std::vector<Complex> eigenvalues(const DenseMatrix& a) {
  if (!a.square()) throw InvalidArgument("eigenvalues: matrix must be square");
  const int n = a.rows();
  const double norm_a = a.inf_norm();
  std::vector<Complex> eigs;
  eigs.reserve(static_cast<size_t>(n));
  if (norm_a == 0.0) return std::vector<Complex>(static_cast<size_t>(n), Complex(0.0));

  DenseMatrix hr = a;
  detail::hessenberg_reduce(hr);
  ComplexMatrix h(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) h(i, j) = Complex(hr(i, j));

  const double deflate = 1e-13 * norm_a;
  auto small_subdiag = [&](int i) {
    const double bound =
        std::max(deflate, 1e-16 * (std::abs(h(i - 1, i - 1)) + std::abs(h(i, i))));
    return std::abs(h(i, i - 1)) <= bound;
  };

  int hi = n - 1;
  int stalled = 0;
  long iter = 0;
  const long iter_cap = 100L * n;
  while (hi >= 0) {
    if (hi == 0) {
      eigs.push_back(h(0, 0));
      break;
    }
    // locate the active block [lo, hi]
    int lo = hi;
    while (lo > 0 && !small_subdiag(lo)) --lo;
    if (lo == hi) {
      eigs.push_back(h(hi, hi));
      --hi;
      stalled = 0;
      continue;
    }
    if (lo == hi - 1) {
      auto [l1, l2] = detail::eig2x2(h(lo, lo), h(lo, hi), h(hi, lo), h(hi, hi));
      eigs.push_back(l1);
      eigs.push_back(l2);
      hi -= 2;
      stalled = 0;
      continue;
    }

    if (++iter > iter_cap)
      throw NumericalFailure("eigenvalues: QR iteration did not converge");

    Complex shift;
    if (++stalled % 12 == 0) {
      // exceptional shift to break rare stagnation cycles
      shift = h(hi, hi) + 0.75 * (std::abs(h(hi, hi - 1)) + std::abs(h(hi - 1, hi - 2)));
    } else {
      auto [l1, l2] =
          detail::eig2x2(h(hi - 1, hi - 1), h(hi - 1, hi), h(hi, hi - 1), h(hi, hi));
      shift = (std::abs(l1 - h(hi, hi)) <= std::abs(l2 - h(hi, hi))) ? l1 : l2;
    }

    // one explicit shifted QR step on the active block
    for (int i = lo; i <= hi; ++i) h(i, i) -= shift;
    std::vector<Complex> cs(static_cast<size_t>(hi)), sn(static_cast<size_t>(hi));
    for (int i = lo; i < hi; ++i) {
      const Complex x = h(i, i), y = h(i + 1, i);
      const double t = std::hypot(std::abs(x), std::abs(y));
      Complex c(1.0), s(0.0);
      if (t > 0.0) {
        c = x / t;
        s = y / t;
      }
      cs[static_cast<size_t>(i)] = c;
      sn[static_cast<size_t>(i)] = s;
      for (int j = i; j <= hi; ++j) {
        const Complex hi_j = h(i, j), lo_j = h(i + 1, j);
        h(i, j) = std::conj(c) * hi_j + std::conj(s) * lo_j;
        h(i + 1, j) = -s * hi_j + c * lo_j;
      }
    }
    for (int i = lo; i < hi; ++i) {
      const Complex c = cs[static_cast<size_t>(i)], s = sn[static_cast<size_t>(i)];
      const int top = std::min(i + 1, hi);
      for (int r = lo; r <= top; ++r) {
        const Complex a1 = h(r, i), a2 = h(r, i + 1);
        h(r, i) = a1 * c + a2 * s;
        h(r, i + 1) = -a1 * std::conj(s) + a2 * std::conj(c);
      }
    }
    for (int i = lo; i <= hi; ++i) h(i, i) += shift;
  }
  return eigs;
}

inline double spectral_radius(const DenseMatrix& a) {
  double r = 0.0;
  for (const Complex& l : eigenvalues(a)) r = std::max(r, std::abs(l));
  return r;
}

// ---------------------------------------------------------------------------
// Power-law fit y = alpha * x^beta through positive data, least squares in
// log space (2x2 normal equations).
// ---------------------------------------------------------------------------

struct PowerFit {
  double alpha = 0.0;
  double beta = 0.0;
  double evaluate(double x) const { return alpha * std::pow(x, beta); }
};

inline PowerFit fit_power_law(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw InvalidArgument("fit_power_law: need at least two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0))
      throw InvalidArgument("fit_power_law: data must be strictly positive");
    const double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double m = static_cast<double>(points.size());
  const double denom = m * sxx - sx * sx;
  if (std::abs(denom) < 1e-300) throw InvalidArgument("fit_power_law: degenerate abscissae");
  PowerFit fit;
  fit.beta = (m * sxy - sx * sy) / denom;
  fit.alpha = std::exp((sy - fit.beta * sx) / m);
  return fit;
}

}  // namespace psdc

#endif
