#pragma once

#include <cstdint>
#include <vector>

#include "mcontact/expr.hpp"

namespace mcontact {

// Dense matrix of expressions, row major.
class ExprMatrix {
 public:
  ExprMatrix() = default;
  ExprMatrix(int rows, int cols);  // zero filled

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Expr& at(int r, int c) { return data_.at(static_cast<std::size_t>(r) * cols_ + c); }
  const Expr& at(int r, int c) const {
    return data_.at(static_cast<std::size_t>(r) * cols_ + c);
  }
  void append_row(std::vector<Expr> row);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Expr> data_;
};

// Gauss-Jordan elimination over the expression field. Pivots must be provably
// nonzero; a column skipped while holding entries of unknown zero-ness makes
// the result uncertain.
struct Elimination {
  ExprMatrix rref;             // unit pivots, pivot columns cleared elsewhere
  std::vector<int> pivot_cols;
  bool certain = true;
  int rank() const { return static_cast<int>(pivot_cols.size()); }
};

// pivot_limit < 0 means every column may carry a pivot; otherwise only
// columns [0, pivot_limit) may (used for augmented systems)
Elimination eliminate(const ExprMatrix& m, const ProbeOptions& opts = {},
                      int pivot_limit = -1);

struct RankResult {
  int value = 0;
  bool certain = true;
};
RankResult rank(const ExprMatrix& m, const ProbeOptions& opts = {});

// Right null space basis; vector k has a 1 in the k-th free column. The
// uncertainty flag, when requested, mirrors the elimination's.
std::vector<std::vector<Expr>> null_space(const ExprMatrix& m,
                                          const ProbeOptions& opts = {},
                                          bool* certain = nullptr);

struct LinearSolution {
  bool solvable = false;
  bool certain = true;                          // verdict backed by proven zero tests
  std::vector<Expr> particular;                 // free coordinates zeroed
  std::vector<std::vector<Expr>> kernel;
};
LinearSolution solve_linear(const ExprMatrix& a, const std::vector<Expr>& rhs,
                            const ProbeOptions& opts = {});

// Splits affine rows over unknown symbols so that row = a * u + b. Throws
// StructureError when some row depends nonlinearly on an unknown.
void linearize(const std::vector<Expr>& rows, const std::vector<Expr>& unknowns,
               ExprMatrix& a, std::vector<Expr>& b);

// Rank of the matrix evaluated at seeded random points (maximum over trials);
// diagnostic fallback when symbolic pivoting stalls.
int numeric_rank(const ExprMatrix& m, std::uint64_t seed = 0x6d756c7469ULL,
                 int trials = 5, double tol = 1e-9);

int expr_size(const Expr& e);

}  // namespace mcontact
