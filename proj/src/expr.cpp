#include "mcontact/expr.hpp"

#include "node_memo.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <mutex>
#include <sstream>
#include <unordered_map>

namespace mcontact {

// ---------------------------------------------------------------------------
// symbol table
// ---------------------------------------------------------------------------

namespace {
struct SymbolTable {
  std::mutex mutex;
  std::vector<std::string> names;
  std::unordered_map<std::string, SymbolId> ids;
};
SymbolTable& symtab() {
  static SymbolTable t;
  return t;
}
}  // namespace

SymbolId intern_symbol(const std::string& name) {
  auto& t = symtab();
  std::lock_guard<std::mutex> lock(t.mutex);
  auto it = t.ids.find(name);
  if (it != t.ids.end()) return it->second;
  SymbolId id = static_cast<SymbolId>(t.names.size());
  t.names.push_back(name);
  t.ids.emplace(name, id);
  return id;
}

const std::string& symbol_name(SymbolId id) {
  auto& t = symtab();
  std::lock_guard<std::mutex> lock(t.mutex);
  return t.names.at(id);
}

// ---------------------------------------------------------------------------
// construction with light normalization
// ---------------------------------------------------------------------------

namespace {
const Expr& zero_expr() {
  static const Expr z = Expr::number(0);
  return z;
}
const Expr& one_expr() {
  static const Expr o = Expr::number(1);
  return o;
}

bool rational_sqrt(const mpq_class& q, mpq_class& root) {
  if (q < 0) return false;
  mpz_class num = q.get_num(), den = q.get_den();
  mpz_class rn, rd;
  if (mpz_root(rn.get_mpz_t(), num.get_mpz_t(), 2) == 0) return false;
  if (mpz_root(rd.get_mpz_t(), den.get_mpz_t(), 2) == 0) return false;
  root = mpq_class(rn, rd);
  root.canonicalize();
  return true;
}
}  // namespace

Expr Expr::make(ExprNode&& n) {
  return Expr(std::make_shared<const ExprNode>(std::move(n)));
}

Expr::Expr() : node_(zero_expr().node_) {}

bool Expr::is_zero_literal() const {
  return node_->kind == ExprKind::Number && node_->number == 0;
}
bool Expr::is_one_literal() const {
  return node_->kind == ExprKind::Number && node_->number == 1;
}

Expr Expr::number(mpq_class q) {
  q.canonicalize();
  ExprNode n;
  n.kind = ExprKind::Number;
  n.number = std::move(q);
  return make(std::move(n));
}

Expr Expr::integer(long v) { return number(mpq_class(v)); }

Expr Expr::symbol(const std::string& name) { return symbol(intern_symbol(name)); }

Expr Expr::symbol(SymbolId id) {
  ExprNode n;
  n.kind = ExprKind::Symbol;
  n.symbol = id;
  return make(std::move(n));
}

Expr Expr::add(std::vector<Expr> terms) {
  std::vector<Expr> flat;
  mpq_class constant = 0;
  for (auto& t : terms) {
    if (t.kind() == ExprKind::Add) {
      for (const auto& c : t.node().args) {
        if (c.is_number())
          constant += c.number_value();
        else
          flat.push_back(c);
      }
    } else if (t.is_number()) {
      constant += t.number_value();
    } else {
      flat.push_back(std::move(t));
    }
  }
  if (constant != 0) flat.insert(flat.begin(), number(constant));
  if (flat.empty()) return zero_expr();
  if (flat.size() == 1) return flat[0];
  ExprNode n;
  n.kind = ExprKind::Add;
  n.args = std::move(flat);
  return make(std::move(n));
}

Expr Expr::mul(std::vector<Expr> factors) {
  std::vector<Expr> flat;
  mpq_class coeff = 1;
  for (auto& f : factors) {
    if (f.kind() == ExprKind::Mul) {
      for (const auto& c : f.node().args) {
        if (c.is_number())
          coeff *= c.number_value();
        else
          flat.push_back(c);
      }
    } else if (f.is_number()) {
      coeff *= f.number_value();
    } else {
      flat.push_back(std::move(f));
    }
  }
  if (coeff == 0) return zero_expr();
  if (coeff != 1) flat.insert(flat.begin(), number(coeff));
  if (flat.empty()) return one_expr();
  if (flat.size() == 1) return flat[0];
  ExprNode n;
  n.kind = ExprKind::Mul;
  n.args = std::move(flat);
  return make(std::move(n));
}

Expr Expr::pow(Expr base, long exponent) {
  if (exponent == 0) return one_expr();
  if (exponent == 1) return base;
  if (base.is_number()) {
    const mpq_class& q = base.number_value();
    if (q == 0) {
      if (exponent < 0) throw EvalError("division by zero in constant power");
      return zero_expr();
    }
    mpq_class r = 1;
    mpq_class b = q;
    long e = exponent;
    if (e < 0) {
      b = mpq_class(1) / b;  // stays canonical, unlike raw (den, num) construction
      e = -e;
    }
    for (long i = 0; i < e; ++i) r *= b;
    return number(r);
  }
  if (base.kind() == ExprKind::Pow) {
    long inner = base.node().exponent;
    return pow(base.node().args[0], inner * exponent);
  }
  if (base.kind() == ExprKind::Mul) {
    std::vector<Expr> parts;
    parts.reserve(base.node().args.size());
    for (const auto& f : base.node().args) parts.push_back(pow(f, exponent));
    return mul(std::move(parts));
  }
  ExprNode n;
  n.kind = ExprKind::Pow;
  n.exponent = exponent;
  n.args = {std::move(base)};
  return make(std::move(n));
}

bool is_elementary_function(const std::string& name) {
  return name == "sin" || name == "cos" || name == "exp" || name == "log" ||
         name == "sqrt" || name == "sinh" || name == "cosh" || name == "tanh";
}

Expr Expr::call(std::string fn, Expr arg) {
  if (!is_elementary_function(fn))
    throw std::invalid_argument("unknown elementary function: " + fn);
  if (arg.is_number()) {
    const mpq_class& q = arg.number_value();
    if (q == 0) {
      if (fn == "sin" || fn == "sinh" || fn == "tanh") return zero_expr();
      if (fn == "cos" || fn == "cosh" || fn == "exp") return one_expr();
      if (fn == "sqrt") return zero_expr();
    }
    if (q == 1 && fn == "log") return zero_expr();
    if (fn == "sqrt") {
      mpq_class root;
      if (rational_sqrt(q, root)) return number(root);
    }
  }
  ExprNode n;
  n.kind = ExprKind::Call;
  n.name = std::move(fn);
  n.args = {std::move(arg)};
  return make(std::move(n));
}

Expr Expr::param(std::string fn, std::vector<Expr> args, std::vector<int> deriv) {
  if (deriv.empty()) deriv.assign(args.size(), 0);
  if (deriv.size() != args.size())
    throw std::invalid_argument("parameter derivative orders must match argument count");
  ExprNode n;
  n.kind = ExprKind::Param;
  n.name = std::move(fn);
  n.deriv = std::move(deriv);
  n.args = std::move(args);
  return make(std::move(n));
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::add({a, b}); }
Expr operator-(const Expr& a, const Expr& b) {
  return Expr::add({a, Expr::mul({Expr::integer(-1), b})});
}
Expr operator*(const Expr& a, const Expr& b) { return Expr::mul({a, b}); }
Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_zero_literal()) throw EvalError("division by zero");
  return Expr::mul({a, Expr::pow(b, -1)});
}
Expr operator-(const Expr& a) { return Expr::mul({Expr::integer(-1), a}); }

// ---------------------------------------------------------------------------
// comparison
// ---------------------------------------------------------------------------

namespace {
int kind_rank(ExprKind k) {
  switch (k) {
    case ExprKind::Number: return 0;
    case ExprKind::Symbol: return 1;
    case ExprKind::Call: return 2;
    case ExprKind::Param: return 3;
    case ExprKind::Pow: return 4;
    case ExprKind::Mul: return 5;
    case ExprKind::Add: return 6;
  }
  return 7;
}

int compare_vectors(const std::vector<Expr>& a, const std::vector<Expr>& b) {
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    int c = compare(a[i], b[i]);
    if (c != 0) return c;
  }
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  return 0;
}
}  // namespace

int compare(const Expr& a, const Expr& b) {
  if (a.id() == b.id()) return 0;
  const ExprNode& x = a.node();
  const ExprNode& y = b.node();
  int rx = kind_rank(x.kind), ry = kind_rank(y.kind);
  if (rx != ry) return rx < ry ? -1 : 1;
  switch (x.kind) {
    case ExprKind::Number: {
      int c = cmp(x.number, y.number);
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case ExprKind::Symbol: {
      const std::string& nx = symbol_name(x.symbol);
      const std::string& ny = symbol_name(y.symbol);
      int c = nx.compare(ny);
      return c < 0 ? -1 : (c > 0 ? 1 : 0);
    }
    case ExprKind::Call: {
      int c = x.name.compare(y.name);
      if (c != 0) return c < 0 ? -1 : 1;
      return compare_vectors(x.args, y.args);
    }
    case ExprKind::Param: {
      int c = x.name.compare(y.name);
      if (c != 0) return c < 0 ? -1 : 1;
      if (x.deriv != y.deriv) return x.deriv < y.deriv ? -1 : 1;
      return compare_vectors(x.args, y.args);
    }
    case ExprKind::Pow: {
      int c = compare(x.args[0], y.args[0]);
      if (c != 0) return c;
      if (x.exponent != y.exponent) return x.exponent < y.exponent ? -1 : 1;
      return 0;
    }
    case ExprKind::Mul:
    case ExprKind::Add:
      return compare_vectors(x.args, y.args);
  }
  return 0;
}

bool structurally_equal(const Expr& a, const Expr& b) { return compare(a, b) == 0; }

// ---------------------------------------------------------------------------
// simplify
// ---------------------------------------------------------------------------

namespace {
struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

// splits a normalized product into (numeric coefficient, residual factor)
std::pair<mpq_class, Expr> split_coefficient(const Expr& e) {
  if (e.is_number()) return {e.number_value(), one_expr()};
  if (e.kind() == ExprKind::Mul) {
    const auto& args = e.node().args;
    if (!args.empty() && args[0].is_number()) {
      std::vector<Expr> rest(args.begin() + 1, args.end());
      return {args[0].number_value(), Expr::mul(std::move(rest))};
    }
  }
  return {mpq_class(1), e};
}

Expr simplify_impl(const Expr& e, NodeMemo<Expr>& memo) {
  if (const Expr* hit = memo.find(e)) return *hit;
  Expr out = e;
  switch (e.kind()) {
    case ExprKind::Number:
    case ExprKind::Symbol:
      break;
    case ExprKind::Add: {
      std::map<Expr, mpq_class, ExprLess> terms;
      mpq_class constant = 0;
      // constructor flattening may expose fresh Adds after child simplification
      std::vector<Expr> stack(e.node().args.begin(), e.node().args.end());
      for (std::size_t i = 0; i < stack.size(); ++i) {
        Expr c = simplify_impl(stack[i], memo);
        if (c.kind() == ExprKind::Add) {
          for (const auto& sub : c.node().args) stack.push_back(sub);
          continue;
        }
        if (c.is_number()) {
          constant += c.number_value();
          continue;
        }
        auto [coeff, key] = split_coefficient(c);
        terms[key] += coeff;
      }
      std::vector<Expr> parts;
      if (constant != 0) parts.push_back(Expr::number(constant));
      for (const auto& [key, coeff] : terms) {
        if (coeff == 0) continue;
        parts.push_back(Expr::mul({Expr::number(coeff), key}));
      }
      out = Expr::add(std::move(parts));
      break;
    }
    case ExprKind::Mul: {
      std::map<Expr, long, ExprLess> factors;
      mpq_class coeff = 1;
      std::vector<Expr> stack(e.node().args.begin(), e.node().args.end());
      bool vanished = false;
      for (std::size_t i = 0; i < stack.size() && !vanished; ++i) {
        Expr c = simplify_impl(stack[i], memo);
        if (c.kind() == ExprKind::Mul) {
          for (const auto& sub : c.node().args) stack.push_back(sub);
          continue;
        }
        if (c.is_number()) {
          if (c.number_value() == 0) vanished = true;
          coeff *= c.number_value();
          continue;
        }
        if (c.kind() == ExprKind::Pow)
          factors[c.node().args[0]] += c.node().exponent;
        else
          factors[c] += 1;
      }
      if (vanished) {
        out = zero_expr();
        break;
      }
      // scalar multiples of a lone sum distribute so that subtraction cancels
      if (coeff != 1 && factors.size() == 1 && factors.begin()->second == 1 &&
          factors.begin()->first.kind() == ExprKind::Add) {
        std::vector<Expr> spread;
        for (const auto& term : factors.begin()->first.node().args)
          spread.push_back(Expr::mul({Expr::number(coeff), term}));
        out = simplify_impl(Expr::add(std::move(spread)), memo);
        break;
      }
      std::vector<Expr> parts;
      if (coeff != 1) parts.push_back(Expr::number(coeff));
      for (const auto& [base, ex] : factors) {
        if (ex == 0) continue;
        parts.push_back(Expr::pow(base, ex));
      }
      out = Expr::mul(std::move(parts));
      break;
    }
    case ExprKind::Pow:
      out = Expr::pow(simplify_impl(e.node().args[0], memo), e.node().exponent);
      break;
    case ExprKind::Call:
      out = Expr::call(e.node().name, simplify_impl(e.node().args[0], memo));
      break;
    case ExprKind::Param: {
      std::vector<Expr> args;
      args.reserve(e.node().args.size());
      for (const auto& a : e.node().args) args.push_back(simplify_impl(a, memo));
      out = Expr::param(e.node().name, std::move(args), e.node().deriv);
      break;
    }
  }
  memo.put(e, out);
  return out;
}
}  // namespace

Expr simplify(const Expr& e) {
  NodeMemo<Expr> memo;
  Expr s = simplify_impl(e, memo);
  // nested collection can surface new like terms (e.g. x*x -> x^2 inside sums)
  NodeMemo<Expr> memo2;
  Expr s2 = simplify_impl(s, memo2);
  return s2;
}

// ---------------------------------------------------------------------------
// differentiate / substitute / symbols
// ---------------------------------------------------------------------------

namespace {
Expr diff_impl(const Expr& e, SymbolId v, NodeMemo<Expr>& memo) {
  if (const Expr* hit = memo.find(e)) return *hit;
  Expr out;
  switch (e.kind()) {
    case ExprKind::Number:
      out = zero_expr();
      break;
    case ExprKind::Symbol:
      out = (e.node().symbol == v) ? one_expr() : zero_expr();
      break;
    case ExprKind::Add: {
      std::vector<Expr> parts;
      for (const auto& a : e.node().args) parts.push_back(diff_impl(a, v, memo));
      out = Expr::add(std::move(parts));
      break;
    }
    case ExprKind::Mul: {
      std::vector<Expr> parts;
      const auto& args = e.node().args;
      for (std::size_t i = 0; i < args.size(); ++i) {
        Expr di = diff_impl(args[i], v, memo);
        if (di.is_zero_literal()) continue;
        std::vector<Expr> prod;
        prod.push_back(di);
        for (std::size_t j = 0; j < args.size(); ++j)
          if (j != i) prod.push_back(args[j]);
        parts.push_back(Expr::mul(std::move(prod)));
      }
      out = Expr::add(std::move(parts));
      break;
    }
    case ExprKind::Pow: {
      const Expr& base = e.node().args[0];
      long n = e.node().exponent;
      Expr db = diff_impl(base, v, memo);
      if (db.is_zero_literal())
        out = zero_expr();
      else
        out = Expr::mul({Expr::integer(n), Expr::pow(base, n - 1), db});
      break;
    }
    case ExprKind::Call: {
      const Expr& arg = e.node().args[0];
      Expr da = diff_impl(arg, v, memo);
      if (da.is_zero_literal()) {
        out = zero_expr();
        break;
      }
      const std::string& fn = e.node().name;
      Expr outer;
      if (fn == "sin")
        outer = Expr::call("cos", arg);
      else if (fn == "cos")
        outer = -Expr::call("sin", arg);
      else if (fn == "sinh")
        outer = Expr::call("cosh", arg);
      else if (fn == "cosh")
        outer = Expr::call("sinh", arg);
      else if (fn == "tanh")
        outer = Expr::integer(1) - Expr::pow(Expr::call("tanh", arg), 2);
      else if (fn == "exp")
        outer = e;
      else if (fn == "log")
        outer = Expr::pow(arg, -1);
      else  // sqrt
        outer = Expr::mul({Expr::number(mpq_class(1, 2)), Expr::pow(Expr::call("sqrt", arg), -1)});
      out = Expr::mul({outer, da});
      break;
    }
    case ExprKind::Param: {
      std::vector<Expr> parts;
      const auto& args = e.node().args;
      for (std::size_t i = 0; i < args.size(); ++i) {
        Expr da = diff_impl(args[i], v, memo);
        if (da.is_zero_literal()) continue;
        std::vector<int> d = e.node().deriv;
        d[i] += 1;
        parts.push_back(Expr::mul({Expr::param(e.node().name, args, std::move(d)), da}));
      }
      out = Expr::add(std::move(parts));
      break;
    }
  }
  memo.put(e, out);
  return out;
}
}  // namespace

Expr differentiate(const Expr& e, SymbolId v) {
  NodeMemo<Expr> memo;
  return simplify(diff_impl(e, v, memo));
}

Expr differentiate(const Expr& e, const std::string& v) {
  return differentiate(e, intern_symbol(v));
}

namespace {
Expr subst_impl(const Expr& e, const std::map<SymbolId, Expr>& map,
                NodeMemo<Expr>& memo) {
  if (const Expr* hit = memo.find(e)) return *hit;
  Expr out = e;
  switch (e.kind()) {
    case ExprKind::Number:
      break;
    case ExprKind::Symbol: {
      auto f = map.find(e.node().symbol);
      if (f != map.end()) out = f->second;
      break;
    }
    case ExprKind::Add:
    case ExprKind::Mul: {
      std::vector<Expr> parts;
      parts.reserve(e.node().args.size());
      for (const auto& a : e.node().args) parts.push_back(subst_impl(a, map, memo));
      out = (e.kind() == ExprKind::Add) ? Expr::add(std::move(parts)) : Expr::mul(std::move(parts));
      break;
    }
    case ExprKind::Pow:
      out = Expr::pow(subst_impl(e.node().args[0], map, memo), e.node().exponent);
      break;
    case ExprKind::Call:
      out = Expr::call(e.node().name, subst_impl(e.node().args[0], map, memo));
      break;
    case ExprKind::Param: {
      std::vector<Expr> args;
      args.reserve(e.node().args.size());
      for (const auto& a : e.node().args) args.push_back(subst_impl(a, map, memo));
      out = Expr::param(e.node().name, std::move(args), e.node().deriv);
      break;
    }
  }
  memo.put(e, out);
  return out;
}
}  // namespace

Expr substitute(const Expr& e, const std::map<SymbolId, Expr>& map) {
  if (map.empty()) return e;
  NodeMemo<Expr> memo;
  return simplify(subst_impl(e, map, memo));
}

void collect_free_symbols(const Expr& e, std::set<SymbolId>& out) {
  switch (e.kind()) {
    case ExprKind::Number:
      break;
    case ExprKind::Symbol:
      out.insert(e.node().symbol);
      break;
    default:
      for (const auto& a : e.node().args) collect_free_symbols(a, out);
  }
}

std::set<SymbolId> free_symbols(const Expr& e) {
  std::set<SymbolId> out;
  collect_free_symbols(e, out);
  return out;
}

bool depends_on(const Expr& e, SymbolId v) {
  switch (e.kind()) {
    case ExprKind::Number:
      return false;
    case ExprKind::Symbol:
      return e.node().symbol == v;
    default:
      for (const auto& a : e.node().args)
        if (depends_on(a, v)) return true;
      return false;
  }
}

// ---------------------------------------------------------------------------
// printing
// ---------------------------------------------------------------------------

namespace {
// precedence levels: 1 sum, 2 product, 3 power, 4 atom
void print_rec(const Expr& e, int parent_prec, std::ostream& os);

bool negative_leading(const Expr& e) {
  if (e.is_number()) return e.number_value() < 0;
  if (e.kind() == ExprKind::Mul && e.node().args[0].is_number())
    return e.node().args[0].number_value() < 0;
  return false;
}

Expr negate_term(const Expr& e) { return simplify(-e); }

void print_number(const mpq_class& q, int parent_prec, std::ostream& os) {
  bool quotient = q.get_den() != 1;
  bool neg = q < 0;
  int prec = quotient ? 2 : (neg ? 1 : 4);
  bool parens = prec < parent_prec;
  if (parens) os << '(';
  os << q.get_str();
  if (parens) os << ')';
}

void print_product(const mpq_class& coeff, const std::vector<Expr>& factors, int parent_prec,
                   std::ostream& os) {
  std::vector<const Expr*> num, den;
  for (const auto& f : factors) {
    if (f.kind() == ExprKind::Pow && f.node().exponent < 0)
      den.push_back(&f);
    else
      num.push_back(&f);
  }
  mpq_class c = coeff;
  bool neg = c < 0;
  if (neg) c = -c;
  bool parens = (2 < parent_prec) || (neg && 1 < parent_prec);
  if (parens) os << '(';
  if (neg) os << '-';
  // numerator
  bool emitted = false;
  mpz_class cnum = c.get_num(), cden = c.get_den();
  if (cnum != 1 || num.empty()) {
    os << cnum.get_str();
    emitted = true;
  }
  for (const auto* f : num) {
    if (emitted) os << '*';
    print_rec(*f, 2, os);
    emitted = true;
  }
  // denominator
  std::size_t den_items = den.size() + (cden != 1 ? 1 : 0);
  if (den_items > 0) {
    os << '/';
    if (den_items > 1) os << '(';
    bool first = true;
    if (cden != 1) {
      os << cden.get_str();
      first = false;
    }
    for (const auto* f : den) {
      if (!first) os << '*';
      print_rec(Expr::pow((*f).node().args[0], -(*f).node().exponent), 3, os);
      first = false;
    }
    if (den_items > 1) os << ')';
  }
  if (parens) os << ')';
}

void print_rec(const Expr& e, int parent_prec, std::ostream& os) {
  switch (e.kind()) {
    case ExprKind::Number:
      print_number(e.number_value(), parent_prec, os);
      break;
    case ExprKind::Symbol:
      os << symbol_name(e.node().symbol);
      break;
    case ExprKind::Add: {
      bool parens = 1 < parent_prec;
      if (parens) os << '(';
      bool first = true;
      for (const auto& t : e.node().args) {
        if (!first && negative_leading(t)) {
          os << " - ";
          print_rec(negate_term(t), 2, os);
        } else {
          if (!first) os << " + ";
          print_rec(t, first ? 1 : 2, os);
        }
        first = false;
      }
      if (parens) os << ')';
      break;
    }
    case ExprKind::Mul: {
      const auto& args = e.node().args;
      mpq_class coeff = 1;
      std::vector<Expr> rest;
      for (const auto& a : args) {
        if (a.is_number())
          coeff *= a.number_value();
        else
          rest.push_back(a);
      }
      print_product(coeff, rest, parent_prec, os);
      break;
    }
    case ExprKind::Pow: {
      long n = e.node().exponent;
      if (n < 0) {
        print_product(1, {e}, parent_prec, os);
        break;
      }
      bool parens = 3 < parent_prec;
      if (parens) os << '(';
      print_rec(e.node().args[0], 4, os);
      os << '^' << n;
      if (parens) os << ')';
      break;
    }
    case ExprKind::Call:
      os << e.node().name << '(';
      print_rec(e.node().args[0], 1, os);
      os << ')';
      break;
    case ExprKind::Param: {
      const auto& d = e.node().deriv;
      bool multi = e.node().args.size() > 1;
      bool has_deriv = std::any_of(d.begin(), d.end(), [](int k) { return k > 0; });
      if (multi && has_deriv) {
        os << "D[" << e.node().name << ';';
        for (std::size_t i = 0; i < d.size(); ++i) {
          if (i) os << ',';
          os << d[i];
        }
        os << ']';
      } else {
        os << e.node().name;
        if (has_deriv)
          for (int k = 0; k < d[0]; ++k) os << '\'';
      }
      os << '(';
      for (std::size_t i = 0; i < e.node().args.size(); ++i) {
        if (i) os << ',';
        print_rec(e.node().args[i], 1, os);
      }
      os << ')';
      break;
    }
  }
}
}  // namespace

std::string to_string(const Expr& e) {
  std::ostringstream os;
  print_rec(simplify(e), 0, os);
  return os.str();
}

// ---------------------------------------------------------------------------
// latex printing
// ---------------------------------------------------------------------------

namespace {
const std::set<std::string>& greek_names() {
  static const std::set<std::string> g = {
      "alpha", "beta",  "gamma", "delta", "epsilon", "zeta", "eta",   "theta",
      "iota",  "kappa", "lambda", "mu",   "nu",      "xi",   "pi",    "rho",
      "sigma", "tau",   "upsilon", "phi", "chi",     "psi",  "omega", "Gamma",
      "Delta", "Theta", "Lambda", "Xi",   "Pi",      "Sigma", "Phi",  "Psi", "Omega"};
  return g;
}

std::string latex_name(const std::string& name) {
  std::string head = name, sub;
  auto us = name.find('_');
  if (us != std::string::npos) {
    head = name.substr(0, us);
    sub = name.substr(us + 1);
  }
  std::string out = greek_names().count(head) ? "\\" + head : head;
  if (!sub.empty()) {
    for (auto& c : sub)
      if (c == '_') c = ' ';
    out += "_{" + sub + "}";
  }
  return out;
}

void latex_rec(const Expr& e, int parent_prec, std::ostream& os);

void latex_product(const mpq_class& coeff, const std::vector<Expr>& factors, int parent_prec,
                   std::ostream& os) {
  std::vector<const Expr*> num, den;
  for (const auto& f : factors) {
    if (f.kind() == ExprKind::Pow && f.node().exponent < 0)
      den.push_back(&f);
    else
      num.push_back(&f);
  }
  mpq_class c = coeff;
  bool neg = c < 0;
  if (neg) c = -c;
  bool parens = neg && 1 < parent_prec;
  if (parens) os << "\\left(";
  if (neg) os << '-';
  std::ostringstream nums, dens;
  bool emitted = false;
  if (c.get_num() != 1 || num.empty()) {
    nums << c.get_num().get_str();
    emitted = true;
  }
  for (const auto* f : num) {
    if (emitted) nums << " ";
    latex_rec(*f, 2, nums);
    emitted = true;
  }
  bool first = true;
  if (c.get_den() != 1) {
    dens << c.get_den().get_str();
    first = false;
  }
  for (const auto* f : den) {
    if (!first) dens << " ";
    latex_rec(Expr::pow((*f).node().args[0], -(*f).node().exponent), 2, dens);
    first = false;
  }
  if (dens.str().empty())
    os << nums.str();
  else
    os << "\\frac{" << nums.str() << "}{" << dens.str() << "}";
  if (parens) os << "\\right)";
}

void latex_rec(const Expr& e, int parent_prec, std::ostream& os) {
  switch (e.kind()) {
    case ExprKind::Number: {
      const mpq_class& q = e.number_value();
      if (q.get_den() == 1) {
        bool parens = q < 0 && 1 < parent_prec;
        if (parens) os << "\\left(";
        os << q.get_str();
        if (parens) os << "\\right)";
      } else {
        latex_product(q, {}, parent_prec, os);
      }
      break;
    }
    case ExprKind::Symbol:
      os << latex_name(symbol_name(e.node().symbol));
      break;
    case ExprKind::Add: {
      bool parens = 1 < parent_prec;
      if (parens) os << "\\left(";
      bool first = true;
      for (const auto& t : e.node().args) {
        if (!first && negative_leading(t)) {
          os << " - ";
          latex_rec(negate_term(t), 1, os);
        } else {
          if (!first) os << " + ";
          latex_rec(t, first ? 1 : 2, os);
        }
        first = false;
      }
      if (parens) os << "\\right)";
      break;
    }
    case ExprKind::Mul: {
      mpq_class coeff = 1;
      std::vector<Expr> rest;
      for (const auto& a : e.node().args) {
        if (a.is_number())
          coeff *= a.number_value();
        else
          rest.push_back(a);
      }
      latex_product(coeff, rest, parent_prec, os);
      break;
    }
    case ExprKind::Pow: {
      long n = e.node().exponent;
      if (n < 0) {
        latex_product(1, {e}, parent_prec, os);
        break;
      }
      os << "{";
      latex_rec(e.node().args[0], 4, os);
      os << "}^{" << n << "}";
      break;
    }
    case ExprKind::Call:
      if (e.node().name == "sqrt") {
        os << "\\sqrt{";
        latex_rec(e.node().args[0], 1, os);
        os << "}";
      } else {
        os << "\\" << e.node().name << "\\left(";
        latex_rec(e.node().args[0], 1, os);
        os << "\\right)";
      }
      break;
    case ExprKind::Param: {
      const auto& d = e.node().deriv;
      bool has_deriv = std::any_of(d.begin(), d.end(), [](int k) { return k > 0; });
      bool multi = e.node().args.size() > 1;
      os << latex_name(e.node().name);
      if (has_deriv) {
        if (multi) {
          os << "^{(";
          for (std::size_t i = 0; i < d.size(); ++i) {
            if (i) os << ',';
            os << d[i];
          }
          os << ")}";
        } else {
          for (int k = 0; k < d[0]; ++k) os << '\'';
        }
      }
      os << "\\left(";
      for (std::size_t i = 0; i < e.node().args.size(); ++i) {
        if (i) os << ',';
        latex_rec(e.node().args[i], 1, os);
      }
      os << "\\right)";
      break;
    }
  }
}
}  // namespace

std::string to_latex(const Expr& e) {
  std::ostringstream os;
  latex_rec(simplify(e), 0, os);
  return os.str();
}

// ---------------------------------------------------------------------------
// parsing
// ---------------------------------------------------------------------------

namespace {
struct Token {
  enum Type { Number, Name, Op, End } type;
  std::string text;
  mpq_class value;
  std::size_t pos;
};

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) { advance(); }
  const Token& peek() const { return tok_; }
  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    tok_.pos = i_;
    if (i_ >= s_.size()) {
      tok_.type = Token::End;
      tok_.text.clear();
      return;
    }
    char c = s_[i_];
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_ + 1])))) {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i_;
      while (j < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_'))
        ++j;
      while (j < s_.size() && s_[j] == '\'') ++j;  // derivative marks
      tok_.type = Token::Name;
      tok_.text = s_.substr(i_, j - i_);
      i_ = j;
      return;
    }
    static const std::string ops = "+-*/^(),;[]=";
    if (ops.find(c) != std::string::npos) {
      tok_.type = Token::Op;
      tok_.text = std::string(1, c);
      ++i_;
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", i_);
  }

  void lex_number() {
    std::size_t start = i_;
    while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
    std::string intpart = s_.substr(start, i_ - start);
    std::string fracpart;
    if (i_ < s_.size() && s_[i_] == '.') {
      ++i_;
      std::size_t fs = i_;
      while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
      fracpart = s_.substr(fs, i_ - fs);
    }
    long exp10 = 0;
    if (i_ < s_.size() && (s_[i_] == 'e' || s_[i_] == 'E')) {
      std::size_t save = i_;
      std::size_t j = i_ + 1;
      bool negexp = false;
      if (j < s_.size() && (s_[j] == '+' || s_[j] == '-')) {
        negexp = s_[j] == '-';
        ++j;
      }
      if (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) {
        std::size_t ds = j;
        while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
        exp10 = std::stol(s_.substr(ds, j - ds));
        if (negexp) exp10 = -exp10;
        i_ = j;
      } else {
        i_ = save;  // 'e' belongs to a following name
      }
    }
    if (intpart.empty() && fracpart.empty())
      throw ParseError("malformed number", start);
    mpz_class digits((intpart + fracpart).empty() ? "0" : intpart + fracpart);
    long shift = exp10 - static_cast<long>(fracpart.size());
    mpq_class v(digits);
    if (shift > 0) {
      mpz_class p;
      mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(shift));
      v *= mpq_class(p);
    } else if (shift < 0) {
      mpz_class p;
      mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(-shift));
      v /= mpq_class(p);
    }
    v.canonicalize();
    tok_.type = Token::Number;
    tok_.value = v;
    tok_.text = s_.substr(start, i_ - start);
  }

  const std::string& s_;
  std::size_t i_ = 0;
  Token tok_;
};

class Parser {
 public:
  Parser(const std::string& text, const ParseContext& ctx) : lex_(text), ctx_(ctx) {}

  Expr parse() {
    Expr e = parse_sum();
    if (lex_.peek().type != Token::End)
      throw ParseError("unexpected trailing input '" + lex_.peek().text + "'", lex_.peek().pos);
    return simplify(e);
  }

 private:
  bool is_op(const char* o) const {
    return lex_.peek().type == Token::Op && lex_.peek().text == o;
  }

  void expect(const char* o) {
    if (!is_op(o))
      throw ParseError(std::string("expected '") + o + "'", lex_.peek().pos);
    lex_.next();
  }

  Expr parse_sum() {
    Expr e = parse_term();
    while (is_op("+") || is_op("-")) {
      bool plus = lex_.next().text == "+";
      Expr rhs = parse_term();
      e = plus ? e + rhs : e - rhs;
    }
    return e;
  }

  Expr parse_term() {
    Expr e = parse_unary();
    while (is_op("*") || is_op("/")) {
      std::size_t pos = lex_.peek().pos;
      bool times = lex_.next().text == "*";
      Expr rhs = parse_unary();
      if (!times && rhs.is_zero_literal()) throw ParseError("division by zero", pos);
      e = times ? e * rhs : e / rhs;
    }
    return e;
  }

  Expr parse_unary() {
    bool neg = false;
    while (is_op("-") || is_op("+")) {
      if (lex_.next().text == "-") neg = !neg;
    }
    Expr e = parse_power();
    return neg ? -e : e;
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (is_op("^")) {
      std::size_t pos = lex_.peek().pos;
      lex_.next();
      Expr e = parse_exponent_operand();
      Expr se = simplify(e);
      if (!se.is_number() || se.number_value().get_den() != 1)
        throw ParseError("exponent must be an integer constant", pos);
      long n = static_cast<long>(se.number_value().get_num().get_si());
      return Expr::pow(base, n);
    }
    return base;
  }

  // exponent operand: signed atom or parenthesized expression (right assoc via recursion)
  Expr parse_exponent_operand() {
    bool neg = false;
    while (is_op("-") || is_op("+")) {
      if (lex_.next().text == "-") neg = !neg;
    }
    Expr e = parse_power();
    return neg ? -e : e;
  }

  Expr parse_atom() {
    const Token& t = lex_.peek();
    if (t.type == Token::Number) {
      return Expr::number(lex_.next().value);
    }
    if (is_op("(")) {
      lex_.next();
      Expr e = parse_sum();
      expect(")");
      return e;
    }
    if (t.type == Token::Name) {
      Token name = lex_.next();
      // explicit derivative syntax for multi-argument parameters
      if (name.text == "D" && is_op("[")) return parse_multiarg_derivative(name.pos);
      std::string base = name.text;
      int primes = 0;
      while (!base.empty() && base.back() == '\'') {
        base.pop_back();
        ++primes;
      }
      if (is_op("(")) {
        int arity = ctx_.function_arity ? ctx_.function_arity(base) : -1;
        bool elementary = is_elementary_function(base);
        if (!elementary && arity < 0)
          throw ParseError("unknown function '" + base + "'", name.pos);
        lex_.next();
        std::vector<Expr> args;
        if (!is_op(")")) {
          args.push_back(parse_sum());
          while (is_op(",")) {
            lex_.next();
            args.push_back(parse_sum());
          }
        }
        expect(")");
        if (elementary) {
          if (primes > 0)
            throw ParseError("derivative marks are only defined for parameter functions",
                             name.pos);
          if (args.size() != 1)
            throw ParseError("function '" + base + "' takes one argument", name.pos);
          return Expr::call(base, args[0]);
        }
        if (static_cast<int>(args.size()) != arity)
          throw ParseError("function '" + base + "' expects " + std::to_string(arity) +
                               " argument(s)",
                           name.pos);
        std::vector<int> deriv(args.size(), 0);
        if (primes > 0) {
          if (args.size() != 1)
            throw ParseError("derivative marks require a single-argument function", name.pos);
          deriv[0] = primes;
        }
        return Expr::param(base, std::move(args), std::move(deriv));
      }
      if (primes > 0)
        throw ParseError("derivative marks require a function application", name.pos);
      if (!ctx_.is_symbol || !ctx_.is_symbol(base))
        throw ParseError("undeclared symbol '" + base + "'", name.pos);
      return Expr::symbol(base);
    }
    throw ParseError("expected an expression", t.pos);
  }

  Expr parse_multiarg_derivative(std::size_t pos) {
    expect("[");
    const Token& nt = lex_.peek();
    if (nt.type != Token::Name) throw ParseError("expected function name in D[...]", nt.pos);
    std::string fname = lex_.next().text;
    int arity = ctx_.function_arity ? ctx_.function_arity(fname) : -1;
    if (arity < 0) throw ParseError("unknown function '" + fname + "'", pos);
    expect(";");
    std::vector<int> deriv;
    while (true) {
      const Token& dt = lex_.peek();
      if (dt.type != Token::Number || dt.value.get_den() != 1)
        throw ParseError("expected integer derivative order", dt.pos);
      deriv.push_back(static_cast<int>(lex_.next().value.get_num().get_si()));
      if (is_op(","))
        lex_.next();
      else
        break;
    }
    expect("]");
    expect("(");
    std::vector<Expr> args;
    if (!is_op(")")) {
      args.push_back(parse_sum());
      while (is_op(",")) {
        lex_.next();
        args.push_back(parse_sum());
      }
    }
    expect(")");
    if (static_cast<int>(args.size()) != arity || deriv.size() != args.size())
      throw ParseError("derivative orders must match the function arity", pos);
    return Expr::param(fname, std::move(args), std::move(deriv));
  }

  Lexer lex_;
  const ParseContext& ctx_;
};
}  // namespace

Expr parse_expr(const std::string& text, const ParseContext& ctx) {
  Parser p(text, ctx);
  return p.parse();
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

namespace {
// owns the body so its node address stays unique for the cache's lifetime
struct DerivKey {
  Expr body;
  std::vector<int> deriv;
  bool operator<(const DerivKey& o) const {
    if (body.id() != o.body.id()) return body.id() < o.body.id();
    return deriv < o.deriv;
  }
};

double eval_impl(const Expr& e, const std::map<SymbolId, double>& bindings,
                 const ParamTable& params, std::map<DerivKey, Expr>& deriv_cache) {
  switch (e.kind()) {
    case ExprKind::Number:
      return e.number_value().get_d();
    case ExprKind::Symbol: {
      auto it = bindings.find(e.node().symbol);
      if (it == bindings.end()) {
        if (symbol_name(e.node().symbol) == "pi") return M_PI;
        throw EvalError("unbound symbol '" + symbol_name(e.node().symbol) + "'");
      }
      return it->second;
    }
    case ExprKind::Add: {
      double s = 0;
      for (const auto& a : e.node().args) s += eval_impl(a, bindings, params, deriv_cache);
      return s;
    }
    case ExprKind::Mul: {
      double p = 1;
      for (const auto& a : e.node().args) p *= eval_impl(a, bindings, params, deriv_cache);
      return p;
    }
    case ExprKind::Pow: {
      double b = eval_impl(e.node().args[0], bindings, params, deriv_cache);
      long n = e.node().exponent;
      if (b == 0 && n < 0) throw EvalError("division by zero");
      return std::pow(b, static_cast<double>(n));
    }
    case ExprKind::Call: {
      double a = eval_impl(e.node().args[0], bindings, params, deriv_cache);
      const std::string& fn = e.node().name;
      if (fn == "sin") return std::sin(a);
      if (fn == "cos") return std::cos(a);
      if (fn == "sinh") return std::sinh(a);
      if (fn == "cosh") return std::cosh(a);
      if (fn == "tanh") return std::tanh(a);
      if (fn == "exp") return std::exp(a);
      if (fn == "log") {
        if (a <= 0) throw EvalError("log of a non-positive value");
        return std::log(a);
      }
      if (a < 0) throw EvalError("sqrt of a negative value");
      return std::sqrt(a);
    }
    case ExprKind::Param: {
      auto it = params.find(e.node().name);
      if (it == params.end())
        throw EvalError("no numeric implementation for parameter '" + e.node().name + "'");
      const ParamImpl& impl = it->second;
      if (impl.formal_args.size() != e.node().args.size())
        throw EvalError("parameter arity mismatch for '" + e.node().name + "'");
      DerivKey key{impl.body, e.node().deriv};
      auto cit = deriv_cache.find(key);
      if (cit == deriv_cache.end()) {
        Expr body = impl.body;
        for (std::size_t i = 0; i < impl.formal_args.size(); ++i)
          for (int k = 0; k < e.node().deriv[i]; ++k)
            body = differentiate(body, impl.formal_args[i]);
        cit = deriv_cache.emplace(key, body).first;
      }
      std::map<SymbolId, double> inner;
      for (std::size_t i = 0; i < impl.formal_args.size(); ++i)
        inner[impl.formal_args[i]] =
            eval_impl(e.node().args[i], bindings, params, deriv_cache);
      return eval_impl(cit->second, inner, params, deriv_cache);
    }
  }
  throw EvalError("unreachable expression kind");
}
}  // namespace

double evaluate(const Expr& e, const std::map<SymbolId, double>& bindings,
                const ParamTable& params) {
  static thread_local std::map<DerivKey, Expr> deriv_cache;
  if (deriv_cache.size() > 4096) deriv_cache.clear();
  return eval_impl(e, bindings, params, deriv_cache);
}

}  // namespace mcontact
