#ifndef TRIM_LINALG_HPP
#define TRIM_LINALG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace trim {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
void axpy(double alpha, const Vec& x, Vec& y);  // y += alpha*x
void scale(Vec& x, double alpha);

/// Thrown when an iterative solve fails to reach the requested tolerance.
class SolveFailure : public std::runtime_error {
public:
  SolveFailure(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

private:
  double residual_;
};

/// Compressed-row sparse matrix. Column indices are sorted within each row
/// and hold no duplicates.
struct SparseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::int64_t> row_offsets;  // size rows+1
  std::vector<std::int32_t> col_indices;
  std::vector<double> values;

  std::int64_t nnz() const { return static_cast<std::int64_t>(values.size()); }
  bool empty() const { return rows == 0 || cols == 0; }

  void multiply(const Vec& x, Vec& y) const;                  // y = A x
  void multiply_add(const Vec& x, Vec& y, double alpha) const;  // y += alpha*A x
  Vec diagonal() const;
  SparseMatrix transposed() const;
  double value_sum() const;
  double max_abs() const;

  static SparseMatrix identity(int n);
};

/// Coordinate-format staging buffer; duplicates are summed at finalization.
class CooBuilder {
public:
  CooBuilder() = default;
  explicit CooBuilder(std::size_t reserve) { entries_.reserve(reserve); }

  void add(int row, int col, double value) {
    if (value != 0.0) entries_.push_back({row, col, value});
  }
  void append(const CooBuilder& other) {
    entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
  }
  SparseMatrix finalize(int rows, int cols);

private:
  struct Entry {
    int row;
    int col;
    double value;
  };
  std::vector<Entry> entries_;
};

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
  std::vector<double> residual_history;
};

/// Conjugate gradients with diagonal preconditioning. A must be SPD.
/// On return ||A x - b|| <= tol * ||b||; throws SolveFailure otherwise.
SolveReport solve_spd(const SparseMatrix& A, const Vec& b, Vec& x, double tol = 1e-10,
                      int maxit = 2000);

/// Restarted GMRES with diagonal right preconditioning for general
/// nonsingular A. Same residual contract as solve_spd.
SolveReport solve_general(const SparseMatrix& A, const Vec& b, Vec& x, double tol = 1e-10,
                          int maxit = 2000, int restart = 40);

/// GMRES with persistent work buffers, for repeated solves against one
/// matrix (the time stepper calls this every step).
class GmresSolver {
public:
  GmresSolver(double tol, int maxit, int restart);
  void set_matrix(const SparseMatrix& A);  // caches the Jacobi preconditioner
  /// Solves A x = b starting from the incoming x.
  SolveReport solve(const Vec& b, Vec& x);

private:
  const SparseMatrix* A_ = nullptr;
  double tol_;
  int maxit_;
  int restart_;
  Vec dinv_;
  std::vector<Vec> V_;
  std::vector<Vec> H_;
  Vec cs_, sn_, g_, w_, scratch_;
};

/// Diagonal matrix of row sums. Rejects rows with non-positive sums.
SparseMatrix lump(const SparseMatrix& M);

}  // namespace trim

#endif
