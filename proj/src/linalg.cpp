#include "trim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace trim {

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(Vec& x, double alpha) {
  for (double& v : x) v *= alpha;
}

void SparseMatrix::multiply(const Vec& x, Vec& y) const {
  if (static_cast<int>(x.size()) != cols || static_cast<int>(y.size()) != rows)
    throw std::invalid_argument("spmv: dimension mismatch");
  for (int i = 0; i < rows; ++i) {
    double s = 0.0;
    const std::int64_t end = row_offsets[i + 1];
    for (std::int64_t k = row_offsets[i]; k < end; ++k) s += values[k] * x[col_indices[k]];
    y[i] = s;
  }
}

void SparseMatrix::multiply_add(const Vec& x, Vec& y, double alpha) const {
  if (static_cast<int>(x.size()) != cols || static_cast<int>(y.size()) != rows)
    throw std::invalid_argument("spmv: dimension mismatch");
  for (int i = 0; i < rows; ++i) {
    double s = 0.0;
    const std::int64_t end = row_offsets[i + 1];
    for (std::int64_t k = row_offsets[i]; k < end; ++k) s += values[k] * x[col_indices[k]];
    y[i] += alpha * s;
  }
}

Vec SparseMatrix::diagonal() const {
  Vec d(rows, 0.0);
  for (int i = 0; i < rows; ++i) {
    for (std::int64_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      if (col_indices[k] == i) {
        d[i] = values[k];
        break;
      }
    }
  }
  return d;
}

SparseMatrix SparseMatrix::transposed() const {
  SparseMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.row_offsets.assign(cols + 1, 0);
  for (std::int32_t c : col_indices) ++t.row_offsets[c + 1];
  for (int i = 0; i < cols; ++i) t.row_offsets[i + 1] += t.row_offsets[i];
  t.col_indices.resize(values.size());
  t.values.resize(values.size());
  std::vector<std::int64_t> cursor(t.row_offsets.begin(), t.row_offsets.end() - 1);
  for (int i = 0; i < rows; ++i) {
    for (std::int64_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      const std::int64_t pos = cursor[col_indices[k]]++;
      t.col_indices[pos] = i;
      t.values[pos] = values[k];
    }
  }
  return t;  // columns come out sorted because rows were scanned in order
}

double SparseMatrix::value_sum() const {
  return std::accumulate(values.begin(), values.end(), 0.0);
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

SparseMatrix SparseMatrix::identity(int n) {
  SparseMatrix a;
  a.rows = a.cols = n;
  a.row_offsets.resize(n + 1);
  a.col_indices.resize(n);
  a.values.assign(n, 1.0);
  for (int i = 0; i <= n; ++i) a.row_offsets[i] = i;
  for (int i = 0; i < n; ++i) a.col_indices[i] = i;
  return a;
}

SparseMatrix CooBuilder::finalize(int rows, int cols) {
  for (const Entry& e : entries_) {
    if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols)
      throw std::invalid_argument("CooBuilder: entry outside matrix bounds");
  }
  // stable: duplicates must accumulate in insertion order so that
  // symmetrically assembled matrices come out bitwise symmetric
  std::stable_sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_offsets.assign(rows + 1, 0);
  std::size_t i = 0;
  while (i < entries_.size()) {
    std::size_t j = i + 1;
    double v = entries_[i].value;
    while (j < entries_.size() && entries_[j].row == entries_[i].row &&
           entries_[j].col == entries_[i].col) {
      v += entries_[j].value;
      ++j;
    }
    m.col_indices.push_back(entries_[i].col);
    m.values.push_back(v);
    ++m.row_offsets[entries_[i].row + 1];
    i = j;
  }
  for (int r = 0; r < rows; ++r) m.row_offsets[r + 1] += m.row_offsets[r];
  return m;
}

namespace {

Vec jacobi_inverse(const SparseMatrix& A) {
  Vec d = A.diagonal();
  for (double& v : d) v = (std::abs(v) > 0.0) ? 1.0 / v : 1.0;
  return d;
}

double true_relative_residual(const SparseMatrix& A, const Vec& b, const Vec& x, double bnorm,
                              Vec& scratch) {
  A.multiply(x, scratch);
  double s = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double r = b[i] - scratch[i];
    s += r * r;
  }
  return std::sqrt(s) / bnorm;
}

}  // namespace

SolveReport solve_spd(const SparseMatrix& A, const Vec& b, Vec& x, double tol, int maxit) {
  if (A.rows != A.cols) throw std::invalid_argument("solve_spd: matrix not square");
  if (static_cast<int>(b.size()) != A.rows) throw std::invalid_argument("solve_spd: rhs size");
  SolveReport report;
  const double bnorm = norm2(b);
  x.assign(A.rows, 0.0);
  if (bnorm == 0.0) return report;

  const Vec dinv = jacobi_inverse(A);
  Vec r = b;  // r = b - A*0
  Vec z(A.rows), p(A.rows), Ap(A.rows);
  for (int i = 0; i < A.rows; ++i) z[i] = dinv[i] * r[i];
  p = z;
  double rz = dot(r, z);
  double rnorm = norm2(r);
  report.residual_history.push_back(rnorm);

  for (int it = 0; it < maxit; ++it) {
    A.multiply(p, Ap);
    const double pAp = dot(p, Ap);
    if (pAp <= 0.0) throw SolveFailure("solve_spd: matrix not positive definite", rnorm / bnorm);
    const double alpha = rz / pAp;
    axpy(alpha, p, x);
    axpy(-alpha, Ap, r);
    rnorm = norm2(r);
    report.residual_history.push_back(rnorm);
    ++report.iterations;
    if (rnorm <= tol * bnorm) {
      report.relative_residual = true_relative_residual(A, b, x, bnorm, Ap);
      if (report.relative_residual <= tol) return report;
    }
    for (int i = 0; i < A.rows; ++i) z[i] = dinv[i] * r[i];
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (int i = 0; i < A.rows; ++i) p[i] = z[i] + beta * p[i];
  }
  throw SolveFailure("solve_spd: no convergence after " + std::to_string(maxit) + " iterations",
                     rnorm / bnorm);
}

GmresSolver::GmresSolver(double tol, int maxit, int restart)
    : tol_(tol), maxit_(maxit), restart_(std::max(1, restart)) {}

void GmresSolver::set_matrix(const SparseMatrix& A) {
  if (A.rows != A.cols) throw std::invalid_argument("GmresSolver: matrix not square");
  A_ = &A;
  dinv_ = jacobi_inverse(A);
  const int n = A.rows;
  const int m = restart_;
  V_.assign(m + 1, Vec(n));
  H_.assign(m + 1, Vec(m, 0.0));
  cs_.assign(m, 0.0);
  sn_.assign(m, 0.0);
  g_.assign(m + 1, 0.0);
  w_.assign(n, 0.0);
  scratch_.assign(n, 0.0);
}

SolveReport GmresSolver::solve(const Vec& b, Vec& x) {
  if (A_ == nullptr) throw std::logic_error("GmresSolver: set_matrix not called");
  const SparseMatrix& A = *A_;
  const int n = A.rows;
  if (static_cast<int>(b.size()) != n) throw std::invalid_argument("GmresSolver: rhs size");
  SolveReport report;
  const double bnorm = norm2(b);
  if (static_cast<int>(x.size()) != n) x.assign(n, 0.0);
  if (bnorm == 0.0) {
    x.assign(n, 0.0);
    return report;
  }
  const int m = restart_;

  int total_it = 0;
  double relres = 1.0;
  while (total_it < maxit_) {
    // r = b - A x
    A.multiply(x, w_);
    for (int i = 0; i < n; ++i) V_[0][i] = b[i] - w_[i];
    double beta = norm2(V_[0]);
    report.residual_history.push_back(beta);
    if (beta <= tol_ * bnorm) {
      report.relative_residual = beta / bnorm;
      return report;
    }
    scale(V_[0], 1.0 / beta);
    std::fill(g_.begin(), g_.end(), 0.0);
    g_[0] = beta;

    int j = 0;
    for (; j < m && total_it < maxit_; ++j, ++total_it) {
      // w = A * (Dinv * v_j)   (right preconditioning)
      for (int i = 0; i < n; ++i) scratch_[i] = dinv_[i] * V_[j][i];
      A.multiply(scratch_, w_);
      for (int i = 0; i <= j; ++i) {
        const double h = dot(w_, V_[i]);
        H_[i][j] = h;
        axpy(-h, V_[i], w_);
      }
      const double h1 = norm2(w_);
      H_[j + 1][j] = h1;
      if (h1 > 0.0) {
        for (int i = 0; i < n; ++i) V_[j + 1][i] = w_[i] / h1;
      }
      // apply accumulated Givens rotations to the new column
      for (int i = 0; i < j; ++i) {
        const double t = cs_[i] * H_[i][j] + sn_[i] * H_[i + 1][j];
        H_[i + 1][j] = -sn_[i] * H_[i][j] + cs_[i] * H_[i + 1][j];
        H_[i][j] = t;
      }
      const double denom = std::hypot(H_[j][j], H_[j + 1][j]);
      if (denom == 0.0) {
        cs_[j] = 1.0;
        sn_[j] = 0.0;
      } else {
        cs_[j] = H_[j][j] / denom;
        sn_[j] = H_[j + 1][j] / denom;
      }
      H_[j][j] = cs_[j] * H_[j][j] + sn_[j] * H_[j + 1][j];
      H_[j + 1][j] = 0.0;
      g_[j + 1] = -sn_[j] * g_[j];
      g_[j] = cs_[j] * g_[j];
      ++report.iterations;
      report.residual_history.push_back(std::abs(g_[j + 1]));
      if (std::abs(g_[j + 1]) <= tol_ * bnorm || h1 == 0.0) {
        ++j;
        break;
      }
    }

    // back substitution: y = R^{-1} g
    Vec y(j, 0.0);
    for (int i = j - 1; i >= 0; --i) {
      double s = g_[i];
      for (int k = i + 1; k < j; ++k) s -= H_[i][k] * y[k];
      y[i] = (H_[i][i] != 0.0) ? s / H_[i][i] : 0.0;
    }
    // x += Dinv * V y
    for (int k = 0; k < j; ++k) {
      if (y[k] == 0.0) continue;
      for (int i = 0; i < n; ++i) x[i] += y[k] * dinv_[i] * V_[k][i];
    }
    relres = true_relative_residual(A, b, x, bnorm, w_);
    if (relres <= tol_) {
      report.relative_residual = relres;
      return report;
    }
  }
  throw SolveFailure("solve_general: no convergence after " + std::to_string(maxit_) +
                         " iterations",
                     relres);
}

SolveReport solve_general(const SparseMatrix& A, const Vec& b, Vec& x, double tol, int maxit,
                          int restart) {
  if (static_cast<int>(b.size()) != A.rows) throw std::invalid_argument("solve_general: rhs size");
  GmresSolver solver(tol, maxit, restart);
  solver.set_matrix(A);
  return solver.solve(b, x);
}

SparseMatrix lump(const SparseMatrix& M) {
  if (M.rows != M.cols) throw std::invalid_argument("lump: matrix not square");
  SparseMatrix d = SparseMatrix::identity(M.rows);
  for (int i = 0; i < M.rows; ++i) {
    double s = 0.0;
    for (std::int64_t k = M.row_offsets[i]; k < M.row_offsets[i + 1]; ++k) s += M.values[k];
    if (s <= 0.0)
      throw std::invalid_argument("lump: non-positive row sum at row " + std::to_string(i));
    d.values[i] = s;
  }
  return d;
}

}  // namespace trim
