#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcontact {

struct ParseError : std::runtime_error {
  std::size_t position;
  ParseError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"), position(pos) {}
};

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StructureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Symbols are interned globally; identity is the name, ids are stable within a process.
using SymbolId = std::uint32_t;
SymbolId intern_symbol(const std::string& name);
const std::string& symbol_name(SymbolId id);

enum class ExprKind : std::uint8_t { Number, Symbol, Add, Mul, Pow, Call, Param };

class Expr;

struct ExprNode {
  ExprKind kind;
  mpq_class number;            // Number
  SymbolId symbol = 0;         // Symbol
  std::string name;            // Call: sin/cos/exp/log/sqrt; Param: function name
  std::vector<int> deriv;      // Param: per-argument partial orders (same length as args)
  long exponent = 0;           // Pow (integer exponents only)
  std::vector<Expr> args;      // Add/Mul operands, Pow base at [0], Call arg at [0], Param args
};

// Immutable expression handle. All building functions perform light local
// normalization (flattening, numeric folding, dropping 0/1); deep
// canonical ordering lives in simplify().
class Expr {
 public:
  Expr();  // zero
  static Expr number(mpq_class q);
  static Expr integer(long n);
  static Expr symbol(const std::string& name);
  static Expr symbol(SymbolId id);
  static Expr add(std::vector<Expr> terms);
  static Expr mul(std::vector<Expr> factors);
  static Expr pow(Expr base, long exponent);
  static Expr call(std::string fn, Expr arg);
  static Expr param(std::string fn, std::vector<Expr> args, std::vector<int> deriv = {});

  const ExprNode& node() const { return *node_; }
  ExprKind kind() const { return node_->kind; }
  bool is_number() const { return node_->kind == ExprKind::Number; }
  bool is_zero_literal() const;
  bool is_one_literal() const;
  const mpq_class& number_value() const { return node_->number; }

  const void* id() const { return node_.get(); }

 private:
  explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}
  static Expr make(ExprNode&& n);
  std::shared_ptr<const ExprNode> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

// Deterministic total order (by kind, then content; symbols by name).
int compare(const Expr& a, const Expr& b);
bool structurally_equal(const Expr& a, const Expr& b);

// Full recursive normalization: sorted operands, like terms/factors collected,
// exact numeric folding. Idempotent.
Expr simplify(const Expr& e);

Expr differentiate(const Expr& e, SymbolId v);
Expr differentiate(const Expr& e, const std::string& v);

Expr substitute(const Expr& e, const std::map<SymbolId, Expr>& map);

void collect_free_symbols(const Expr& e, std::set<SymbolId>& out);
std::set<SymbolId> free_symbols(const Expr& e);
bool depends_on(const Expr& e, SymbolId v);

std::string to_string(const Expr& e);
std::string to_latex(const Expr& e);

// Names the parser may resolve; callables must be total.
struct ParseContext {
  std::function<bool(const std::string&)> is_symbol;
  // arity of a registered opaque function, or -1 if not registered
  std::function<int(const std::string&)> function_arity;
};

bool is_elementary_function(const std::string& name);

Expr parse_expr(const std::string& text, const ParseContext& ctx);

// Numeric implementation of an opaque parameter function: body in formal args.
// Derivative applications evaluate by differentiating the body.
struct ParamImpl {
  std::vector<SymbolId> formal_args;
  Expr body;
};
using ParamTable = std::map<std::string, ParamImpl>;

double evaluate(const Expr& e, const std::map<SymbolId, double>& bindings,
                const ParamTable& params = {});

// Probe evaluation: like evaluate, but opaque parameter applications take
// deterministic seeded pseudo-random values instead of needing bodies.
double eval_probe(const Expr& e, const std::map<SymbolId, double>& bindings,
                  std::uint64_t seed);

enum class ZeroTest { Zero, NonZero, Unknown };

struct ProbeOptions {
  std::uint64_t seed = 0x6d756c7469ULL;
  int points = 8;          // random points per test
  double eps = 1e-9;       // |value| above this counts as a nonzero witness
  int max_retries = 64;    // resamples on domain errors
};

// Zero iff the canonical rational form vanishes identically; NonZero on a
// numeric witness (opaque parameter applications valued by a seeded hash);
// Unknown otherwise.
ZeroTest is_zero(const Expr& e, const ProbeOptions& opts = {});
ZeroTest is_zero_seeded(const Expr& e, std::uint64_t seed);

// Convenience equality through is_zero(a - b).
ZeroTest equal_test(const Expr& a, const Expr& b, const ProbeOptions& opts = {});

}  // namespace mcontact
