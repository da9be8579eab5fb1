#include "mcontact/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

namespace mcontact {

ExprMatrix::ExprMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
  data_.assign(static_cast<std::size_t>(rows) * cols, Expr::integer(0));
}

void ExprMatrix::append_row(std::vector<Expr> row) {
  if (cols_ == 0 && rows_ == 0) cols_ = static_cast<int>(row.size());
  if (static_cast<int>(row.size()) != cols_)
    throw StructureError("appended row has the wrong number of columns");
  for (auto& e : row) data_.push_back(std::move(e));
  ++rows_;
}

int expr_size(const Expr& e) {
  int n = 1;
  for (const Expr& a : e.node().args) n += expr_size(a);
  return n;
}

Elimination eliminate(const ExprMatrix& m, const ProbeOptions& opts, int pivot_limit) {
  Elimination out;
  out.rref = m;
  ExprMatrix& a = out.rref;
  const int rows = a.rows(), cols = a.cols();
  const int limit = pivot_limit < 0 ? cols : pivot_limit;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) a.at(r, c) = simplify(a.at(r, c));

  int r = 0;
  for (int col = 0; col < limit && r < rows; ++col) {
    int best = -1, best_size = 0;
    bool unknown_here = false;
    for (int i = r; i < rows; ++i) {
      const Expr& e = a.at(i, col);
      if (e.is_zero_literal()) continue;
      switch (is_zero(e, opts)) {
        case ZeroTest::Zero:
          a.at(i, col) = Expr::integer(0);  // provably zero, keep the matrix clean
          break;
        case ZeroTest::Unknown:
          unknown_here = true;
          break;
        case ZeroTest::NonZero: {
          int size = expr_size(e);
          if (best < 0 || size < best_size) {
            best = i;
            best_size = size;
          }
          break;
        }
      }
    }
    if (best < 0) {
      if (unknown_here) out.certain = false;
      continue;
    }
    if (best != r)
      for (int c = 0; c < cols; ++c) std::swap(a.at(r, c), a.at(best, c));
    Expr pivot = a.at(r, col);
    for (int c = 0; c < cols; ++c)
      a.at(r, c) = c == col ? Expr::integer(1) : simplify(a.at(r, c) / pivot);
    for (int i = 0; i < rows; ++i) {
      if (i == r) continue;
      Expr f = a.at(i, col);
      if (f.is_zero_literal()) continue;
      for (int c = 0; c < cols; ++c)
        a.at(i, c) = c == col ? Expr::integer(0) : simplify(a.at(i, c) - f * a.at(r, c));
    }
    out.pivot_cols.push_back(col);
    ++r;
  }
  return out;
}

RankResult rank(const ExprMatrix& m, const ProbeOptions& opts) {
  Elimination e = eliminate(m, opts);
  return {e.rank(), e.certain};
}

std::vector<std::vector<Expr>> null_space(const ExprMatrix& m, const ProbeOptions& opts,
                                          bool* certain) {
  Elimination e = eliminate(m, opts);
  if (certain) *certain = e.certain;
  std::set<int> pivots(e.pivot_cols.begin(), e.pivot_cols.end());
  std::vector<std::vector<Expr>> basis;
  for (int j = 0; j < m.cols(); ++j) {
    if (pivots.count(j)) continue;
    std::vector<Expr> v(m.cols(), Expr::integer(0));
    v[j] = Expr::integer(1);
    for (std::size_t k = 0; k < e.pivot_cols.size(); ++k)
      v[e.pivot_cols[k]] = simplify(-e.rref.at(static_cast<int>(k), j));
    basis.push_back(std::move(v));
  }
  return basis;
}

LinearSolution solve_linear(const ExprMatrix& a, const std::vector<Expr>& rhs,
                            const ProbeOptions& opts) {
  if (static_cast<int>(rhs.size()) != a.rows())
    throw StructureError("right hand side size does not match the matrix");
  ExprMatrix aug(a.rows(), a.cols() + 1);
  for (int r = 0; r < a.rows(); ++r) {
    for (int c = 0; c < a.cols(); ++c) aug.at(r, c) = a.at(r, c);
    aug.at(r, a.cols()) = rhs[r];
  }
  Elimination e = eliminate(aug, opts, a.cols());

  LinearSolution out;
  out.certain = e.certain;
  out.solvable = true;
  // rows without a pivot must have vanishing right hand side
  for (int r = e.rank(); r < a.rows(); ++r) {
    switch (is_zero(e.rref.at(r, a.cols()), opts)) {
      case ZeroTest::Zero: break;
      case ZeroTest::NonZero:
        out.solvable = false;
        return out;
      case ZeroTest::Unknown:
        out.certain = false;
        break;
    }
  }
  out.particular.assign(a.cols(), Expr::integer(0));
  for (std::size_t k = 0; k < e.pivot_cols.size(); ++k)
    out.particular[e.pivot_cols[k]] = e.rref.at(static_cast<int>(k), a.cols());
  std::set<int> pivots(e.pivot_cols.begin(), e.pivot_cols.end());
  for (int j = 0; j < a.cols(); ++j) {
    if (pivots.count(j)) continue;
    std::vector<Expr> v(a.cols(), Expr::integer(0));
    v[j] = Expr::integer(1);
    for (std::size_t k = 0; k < e.pivot_cols.size(); ++k)
      v[e.pivot_cols[k]] = simplify(-e.rref.at(static_cast<int>(k), j));
    out.kernel.push_back(std::move(v));
  }
  return out;
}

int numeric_rank(const ExprMatrix& m, std::uint64_t seed, int trials, double tol) {
  int best = 0;
  std::set<SymbolId> syms;
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) collect_free_symbols(m.at(r, c), syms);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  int done = 0, attempts = 0;
  while (done < trials && attempts < trials + 20) {
    ++attempts;
    std::map<SymbolId, double> bindings;
    for (SymbolId id : syms) {
      double v = mag(rng);
      if (rng() & 1) v = -v;
      bindings[id] = v;
    }
    std::vector<std::vector<double>> num(m.rows(), std::vector<double>(m.cols()));
    bool ok = true;
    double scale = 0;
    for (int r = 0; r < m.rows() && ok; ++r)
      for (int c = 0; c < m.cols() && ok; ++c) {
        try {
          num[r][c] = eval_probe(m.at(r, c), bindings, seed + attempts);
        } catch (const EvalError&) {
          ok = false;
          break;
        }
        if (!std::isfinite(num[r][c])) ok = false;
        scale = std::max(scale, std::abs(num[r][c]));
      }
    if (!ok) continue;
    ++done;
    double cut = tol * std::max(1.0, scale);
    int rank = 0;
    for (int col = 0; col < m.cols() && rank < m.rows(); ++col) {
      int piv = -1;
      double pmax = cut;
      for (int i = rank; i < m.rows(); ++i)
        if (std::abs(num[i][col]) > pmax) {
          piv = i;
          pmax = std::abs(num[i][col]);
        }
      if (piv < 0) continue;
      std::swap(num[rank], num[piv]);
      for (int i = 0; i < m.rows(); ++i) {
        if (i == rank) continue;
        double f = num[i][col] / num[rank][col];
        if (f == 0) continue;
        for (int c = col; c < m.cols(); ++c) num[i][c] -= f * num[rank][c];
      }
      ++rank;
    }
    best = std::max(best, rank);
  }
  return best;
}

void linearize(const std::vector<Expr>& rows, const std::vector<Expr>& unknowns,
               ExprMatrix& a, std::vector<Expr>& b) {
  std::map<SymbolId, Expr> zeros;
  for (const Expr& u : unknowns) zeros[u.node().symbol] = Expr::number(0);
  for (const Expr& r : rows) {
    std::vector<Expr> row;
    for (const Expr& u : unknowns) {
      Expr cu = simplify(differentiate(r, u.node().symbol));
      for (const Expr& v : unknowns)
        if (depends_on(cu, v.node().symbol))
          throw StructureError("equations are not affine in the unknowns");
      row.push_back(std::move(cu));
    }
    a.append_row(std::move(row));
    b.push_back(simplify(substitute(r, zeros)));
  }
}

}  // namespace mcontact
