#include "mgeom/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mgeom/error.hpp"

namespace mgeom {

namespace {

constexpr double kSymmetryTol = 1e-8;
constexpr double kNegativeClamp = -1e-6;
constexpr int kMaxSweeps = 100;

void require_finite(const Matrix& m, const char* what) {
  require(!m.empty(), ErrorCode::InvalidInput, std::string(what) + ": empty matrix");
  require(m.all_finite(), ErrorCode::InvalidInput, std::string(what) + ": non-finite entry");
}

std::vector<double> clamped_eigenvalues(const Matrix& s) {
  auto values = sym_eigen(s).eigenvalues;
  for (double& v : values) {
    require(v >= kNegativeClamp, ErrorCode::NotPsd,
            "matrix is not positive semidefinite (eigenvalue " + std::to_string(v) + ")");
    if (v < 0.0) v = 0.0;
  }
  return values;
}

// Solves L y = rhs in place for lower-triangular L.
void forward_substitute(const Matrix& l, std::span<double> rhs) {
  const std::size_t n = l.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double v = rhs[i];
    for (std::size_t k = 0; k < i; ++k) v -= l(i, k) * rhs[k];
    rhs[i] = v / l(i, i);
  }
}

}  // namespace

Matrix covariance(const Matrix& points, bool center) {
  require_finite(points, "covariance");
  const std::size_t p = points.rows();
  const std::size_t m = points.cols();

  std::vector<double> mean(p, 0.0);
  if (center) {
    for (std::size_t r = 0; r < p; ++r) {
      const auto row = points.row(r);
      mean[r] = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(m);
    }
  }

  Matrix cov(p, p);
  std::vector<double> dev(p);
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t r = 0; r < p; ++r) dev[r] = points(r, c) - mean[r];
    for (std::size_t a = 0; a < p; ++a) {
      const double da = dev[a];
      for (std::size_t b = a; b < p; ++b) cov(a, b) += da * dev[b];
    }
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = a; b < p; ++b) {
      cov(a, b) *= inv_m;
      cov(b, a) = cov(a, b);
    }
  return cov;
}

SymEigen sym_eigen(const Matrix& s) {
  require_finite(s, "sym_eigen");
  require(s.rows() == s.cols(), ErrorCode::InvalidInput, "sym_eigen: matrix is not square");
  const std::size_t n = s.rows();

  double scale = 0.0;
  for (double v : s.values()) scale = std::max(scale, std::abs(v));
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      require(std::abs(s(i, j) - s(j, i)) <= kSymmetryTol * (1.0 + scale),
              ErrorCode::InvalidInput, "sym_eigen: matrix is not symmetric");
      a(i, j) = 0.5 * (s(i, j) + s(j, i));
    }

  Matrix v = Matrix::identity(n);
  const double total = a.frobenius_norm();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off == 0.0 || std::sqrt(off) <= 1e-17 * total) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = a(p, k) = c * akp - sn * akq;
          a(k, q) = a(q, k) = sn * akp + c * akq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;

        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

  SymEigen out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.eigenvalues[j] = a(order[j], order[j]);
    for (std::size_t k = 0; k < n; ++k) out.eigenvectors(k, j) = v(k, order[j]);
  }
  return out;
}

double logdet_i_plus(const Matrix& s) {
  double sum = 0.0;
  for (double v : clamped_eigenvalues(s)) sum += std::log2(1.0 + v);
  return sum;
}

double logdet_i_plus_ln(const Matrix& s) {
  double sum = 0.0;
  for (double v : clamped_eigenvalues(s)) sum += std::log1p(v);
  return sum;
}

Matrix cholesky(const Matrix& a) {
  require_finite(a, "cholesky");
  require(a.rows() == a.cols(), ErrorCode::InvalidInput, "cholesky: matrix is not square");
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    require(d > 0.0 && std::isfinite(d), ErrorCode::NotPsd,
            "cholesky: matrix is not positive definite");
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  return l;
}

std::vector<double> solve_spd(const Matrix& a, const std::vector<double>& b) {
  require(b.size() == a.rows(), ErrorCode::InvalidInput, "solve_spd: size mismatch");
  const Matrix l = cholesky(a);
  std::vector<double> x = b;
  forward_substitute(l, x);
  const std::size_t n = l.rows();
  for (std::size_t ii = n; ii-- > 0;) {
    double v = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) v -= l(k, ii) * x[k];
    x[ii] = v / l(ii, ii);
  }
  return x;
}

double log2_det_ratio(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::InvalidInput,
          "log2_det_ratio: shape mismatch");
  const std::size_t n = a.rows();
  const Matrix l = cholesky(b);

  // w = L^{-1} a, then m = L^{-1} w^T = L^{-1} a L^{-T} (a symmetric).
  Matrix w(n, n);
  std::vector<double> col(n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < n; ++r) col[r] = a(r, c);
    forward_substitute(l, col);
    for (std::size_t r = 0; r < n; ++r) w(r, c) = col[r];
  }
  Matrix m(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < n; ++r) col[r] = w(c, r);
    forward_substitute(l, col);
    for (std::size_t r = 0; r < n; ++r) m(r, c) = col[r];
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) m(i, j) = m(j, i) = 0.5 * (m(i, j) + m(j, i));

  double sum = 0.0;
  for (double mu : sym_eigen(m).eigenvalues) {
    require(mu > 0.0, ErrorCode::NotPsd, "log2_det_ratio: numerator is not positive definite");
    sum += std::log2(mu);
  }
  return sum;
}

}  // namespace mgeom
