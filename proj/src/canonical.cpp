#include <algorithm>
#include <cmath>
#include <cstring>
#include <optional>
#include <random>
#include <unordered_map>

#include "mcontact/expr.hpp"
#include "node_memo.hpp"

// Canonical rational form: every expression is rewritten as an expanded
// polynomial quotient over "atoms" (symbols plus elementary/opaque function
// applications with canonicalized arguments). Identically-zero numerators
// decide Zero; a seeded numeric probe decides NonZero; everything else is
// Unknown. Rewrites applied during normalization: sin(u)^2 -> 1 - cos(u)^2,
// sqrt(u)^2 -> u, exp(a)*exp(b) -> exp(a+b).

namespace mcontact {
namespace {

using Mono = std::vector<std::pair<int, int>>;  // sorted (atom id, exponent > 0)

struct Poly {
  std::map<Mono, mpq_class> terms;  // nonzero coefficients only
  bool zero() const { return terms.empty(); }
};

Poly poly_const(const mpq_class& q) {
  Poly p;
  if (q != 0) p.terms[{}] = q;
  return p;
}

Poly poly_atom(int id) {
  Poly p;
  p.terms[{{id, 1}}] = 1;
  return p;
}

void poly_accumulate(Poly& p, const Mono& m, const mpq_class& c) {
  auto it = p.terms.find(m);
  if (it == p.terms.end()) {
    if (c != 0) p.terms.emplace(m, c);
    return;
  }
  it->second += c;
  if (it->second == 0) p.terms.erase(it);
}

Poly poly_add(const Poly& a, const Poly& b) {
  Poly r = a;
  for (const auto& [m, c] : b.terms) poly_accumulate(r, m, c);
  return r;
}

Mono mono_mul(const Mono& a, const Mono& b) {
  Mono r;
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      r.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      r.push_back(b[j++]);
    } else {
      r.emplace_back(a[i].first, a[i].second + b[j].second);
      ++i;
      ++j;
    }
  }
  return r;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly r;
  for (const auto& [ma, ca] : a.terms)
    for (const auto& [mb, cb] : b.terms) poly_accumulate(r, mono_mul(ma, mb), ca * cb);
  return r;
}

struct Frac {
  Poly num, den;  // den is a nonzero polynomial
};

struct AtomInfo {
  Expr rep;                    // normalized representative (identity + printing)
  bool is_exp = false, is_sin = false, is_sqrt = false;
  Expr arg;                    // canonical-rebuilt argument (elementary atoms)
  std::optional<Frac> arg_frac;  // cached canonical form of arg (sqrt atoms)
};

struct Ctx {
  std::vector<AtomInfo> atoms;
  std::map<std::string, int> index;

  int atom(AtomInfo info) {
    std::string key = to_string(info.rep);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(atoms.size());
    atoms.push_back(std::move(info));
    index.emplace(std::move(key), id);
    return id;
  }
};

Frac frac_const(const mpq_class& q) { return {poly_const(q), poly_const(1)}; }
Frac frac_poly(Poly p) { return {std::move(p), poly_const(1)}; }

bool poly_equal(const Poly& a, const Poly& b) {
  return a.terms.size() == b.terms.size() &&
         std::equal(a.terms.begin(), a.terms.end(), b.terms.begin(),
                    [](const auto& x, const auto& y) {
                      return x.first == y.first && x.second == y.second;
                    });
}

// divide out the common rational content and any monomial factor shared by
// every term of both polynomials; scale so den's leading coefficient is 1
Frac reduce(Frac f) {
  if (f.den.zero()) throw EvalError("division by an identically zero expression");
  if (f.num.zero()) return frac_const(0);
  auto common_mono = [](const Poly& p) {
    Mono acc;
    bool first = true;
    for (const auto& [m, c] : p.terms) {
      (void)c;
      if (first) {
        acc = m;
        first = false;
        continue;
      }
      Mono next;
      std::size_t i = 0, j = 0;
      while (i < acc.size() && j < m.size()) {
        if (acc[i].first < m[j].first)
          ++i;
        else if (m[j].first < acc[i].first)
          ++j;
        else {
          next.emplace_back(acc[i].first, std::min(acc[i].second, m[j].second));
          ++i;
          ++j;
        }
      }
      acc = std::move(next);
      if (acc.empty()) break;
    }
    return acc;
  };
  Mono gn = common_mono(f.num), gd = common_mono(f.den);
  Mono g;
  {
    std::size_t i = 0, j = 0;
    while (i < gn.size() && j < gd.size()) {
      if (gn[i].first < gd[j].first)
        ++i;
      else if (gd[j].first < gn[i].first)
        ++j;
      else {
        g.emplace_back(gn[i].first, std::min(gn[i].second, gd[j].second));
        ++i;
        ++j;
      }
    }
  }
  if (!g.empty()) {
    auto strip = [&g](const Poly& p) {
      Poly r;
      for (const auto& [m, c] : p.terms) {
        Mono out;
        std::size_t i = 0, j = 0;
        while (i < m.size()) {
          if (j < g.size() && m[i].first == g[j].first) {
            int e = m[i].second - g[j].second;
            if (e > 0) out.emplace_back(m[i].first, e);
            ++i;
            ++j;
          } else {
            out.push_back(m[i]);
            ++i;
          }
        }
        r.terms.emplace(std::move(out), c);
      }
      return r;
    };
    f.num = strip(f.num);
    f.den = strip(f.den);
  }
  mpq_class lead = f.den.terms.begin()->second;
  if (lead != 1) {
    for (auto& [m, c] : f.num.terms) c /= lead;
    for (auto& [m, c] : f.den.terms) c /= lead;
  }
  if (poly_equal(f.num, f.den)) return frac_const(1);
  return f;
}

constexpr int kMaxNormalizeDepth = 4;

Frac normalize_poly(const Poly& p, Ctx& ctx, int depth);

Frac frac_add(const Frac& a, const Frac& b, Ctx& ctx, int depth) {
  if (poly_equal(a.den, b.den)) return reduce({poly_add(a.num, b.num), a.den});
  Poly num = poly_add(poly_mul(a.num, b.den), poly_mul(b.num, a.den));
  Poly den = poly_mul(a.den, b.den);
  if (depth < kMaxNormalizeDepth) {
    Frac fn = normalize_poly(num, ctx, depth + 1);
    Frac fd = normalize_poly(den, ctx, depth + 1);
    return reduce({poly_mul(fn.num, fd.den), poly_mul(fn.den, fd.num)});
  }
  return reduce({std::move(num), std::move(den)});
}

Frac frac_mul(const Frac& a, const Frac& b, Ctx& ctx, int depth) {
  Poly num = poly_mul(a.num, b.num);
  Poly den = poly_mul(a.den, b.den);
  if (depth < kMaxNormalizeDepth) {
    Frac fn = normalize_poly(num, ctx, depth + 1);
    Frac fd = normalize_poly(den, ctx, depth + 1);
    return reduce({poly_mul(fn.num, fd.den), poly_mul(fn.den, fd.num)});
  }
  return reduce({std::move(num), std::move(den)});
}

Poly poly_of_mono(const Mono& m) {
  Poly p;
  p.terms[m] = 1;
  return p;
}

Frac normalize_mono_impl(const Mono& m, Ctx& ctx, int depth) {
  if (depth < kMaxNormalizeDepth) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      const AtomInfo& a = ctx.atoms[m[i].first];
      if (a.is_sin && m[i].second >= 2) {
        Mono rest = m;
        if (rest[i].second > 2)
          rest[i].second -= 2;
        else
          rest.erase(rest.begin() + i);
        // sin(u)^2 -> 1 - cos(u)^2
        int cos_id = ctx.atom({Expr::call("cos", a.arg), false, false, false, a.arg, {}});
        Frac f_rest = normalize_mono_impl(rest, ctx, depth + 1);
        Mono cos2 = mono_mul(rest, {{cos_id, 2}});
        std::sort(cos2.begin(), cos2.end());
        Frac f_cos = normalize_mono_impl(cos2, ctx, depth + 1);
        Frac neg = f_cos;
        Poly minus_one = poly_const(-1);
        neg.num = poly_mul(neg.num, minus_one);
        return frac_add(f_rest, neg, ctx, depth + 1);
      }
      if (a.is_sqrt && m[i].second >= 2 && a.arg_frac) {
        Mono rest = m;
        if (rest[i].second > 2)
          rest[i].second -= 2;
        else
          rest.erase(rest.begin() + i);
        Frac f_rest = normalize_mono_impl(rest, ctx, depth + 1);
        return frac_mul(f_rest, *a.arg_frac, ctx, depth + 1);
      }
    }
    // merge exponential atoms: exp(u)^j * exp(v)^k -> exp(j*u + k*v)
    std::vector<std::size_t> exps;
    for (std::size_t i = 0; i < m.size(); ++i)
      if (ctx.atoms[m[i].first].is_exp) exps.push_back(i);
    bool needs_merge =
        exps.size() > 1 || (exps.size() == 1 && m[exps[0]].second != 1);
    if (needs_merge) {
      std::vector<Expr> parts;
      for (std::size_t i : exps)
        parts.push_back(Expr::mul({Expr::integer(m[i].second), ctx.atoms[m[i].first].arg}));
      Expr combined = simplify(Expr::add(std::move(parts)));
      Mono rest;
      for (std::size_t i = 0; i < m.size(); ++i)
        if (!ctx.atoms[m[i].first].is_exp) rest.push_back(m[i]);
      Frac f_rest = normalize_mono_impl(rest, ctx, depth + 1);
      Expr rebuilt = Expr::call("exp", combined);
      if (rebuilt.is_one_literal()) return f_rest;
      int id = ctx.atom({rebuilt, true, false, false, combined, {}});
      return frac_mul(f_rest, frac_poly(poly_atom(id)), ctx, depth + 1);
    }
  }
  return frac_poly(poly_of_mono(m));
}

Frac normalize_poly(const Poly& p, Ctx& ctx, int depth) {
  Frac acc = frac_const(0);
  for (const auto& [m, c] : p.terms) {
    Frac f = normalize_mono_impl(m, ctx, depth);
    Poly coeff = poly_const(c);
    f.num = poly_mul(f.num, coeff);
    acc = frac_add(acc, f, ctx, depth);
  }
  return acc;
}

Frac frac_pow(const Frac& f, long n, Ctx& ctx) {
  if (n == 0) return frac_const(1);
  Frac base = f;
  if (n < 0) {
    if (f.num.zero()) throw EvalError("division by an identically zero expression");
    base = {f.den, f.num};
    n = -n;
  }
  Frac r = frac_const(1);
  for (long i = 0; i < n; ++i) r = frac_mul(r, base, ctx, 0);
  return r;
}

Expr poly_to_expr(const Poly& p, const Ctx& ctx) {
  std::vector<Expr> terms;
  for (const auto& [m, c] : p.terms) {
    std::vector<Expr> factors;
    factors.push_back(Expr::number(c));
    for (const auto& [id, e] : m) factors.push_back(Expr::pow(ctx.atoms[id].rep, e));
    terms.push_back(Expr::mul(std::move(factors)));
  }
  return simplify(Expr::add(std::move(terms)));
}

Expr frac_to_expr(const Frac& f, const Ctx& ctx) {
  Expr n = poly_to_expr(f.num, ctx);
  if (f.den.terms.size() == 1 && f.den.terms.begin()->first.empty() &&
      f.den.terms.begin()->second == 1)
    return n;
  return simplify(n / poly_to_expr(f.den, ctx));
}

Frac canonical(const Expr& e, Ctx& ctx, NodeMemo<Frac>& memo) {
  if (const Frac* hit = memo.find(e)) return *hit;
  Frac out;
  switch (e.kind()) {
    case ExprKind::Number:
      out = frac_const(e.number_value());
      break;
    case ExprKind::Symbol:
      out = frac_poly(poly_atom(ctx.atom({e, false, false, false, {}, {}})));
      break;
    case ExprKind::Add: {
      out = frac_const(0);
      for (const auto& a : e.node().args)
        out = frac_add(out, canonical(a, ctx, memo), ctx, 0);
      break;
    }
    case ExprKind::Mul: {
      out = frac_const(1);
      for (const auto& a : e.node().args)
        out = frac_mul(out, canonical(a, ctx, memo), ctx, 0);
      break;
    }
    case ExprKind::Pow:
      out = frac_pow(canonical(e.node().args[0], ctx, memo), e.node().exponent, ctx);
      break;
    case ExprKind::Call: {
      Frac fa = canonical(e.node().args[0], ctx, memo);
      Expr arg = frac_to_expr(fa, ctx);
      Expr rebuilt = Expr::call(e.node().name, arg);
      if (rebuilt.kind() != ExprKind::Call) {
        out = canonical(rebuilt, ctx, memo);  // literal fold produced a number
        break;
      }
      AtomInfo info;
      info.rep = rebuilt;
      info.arg = arg;
      const std::string& fn = rebuilt.node().name;
      info.is_exp = fn == "exp";
      info.is_sin = fn == "sin";
      info.is_sqrt = fn == "sqrt";
      if (info.is_sqrt) info.arg_frac = fa;
      out = frac_poly(poly_atom(ctx.atom(std::move(info))));
      break;
    }
    case ExprKind::Param: {
      std::vector<Expr> args;
      args.reserve(e.node().args.size());
      for (const auto& a : e.node().args)
        args.push_back(frac_to_expr(canonical(a, ctx, memo), ctx));
      Expr rebuilt = Expr::param(e.node().name, std::move(args), e.node().deriv);
      out = frac_poly(poly_atom(ctx.atom({rebuilt, false, false, false, {}, {}})));
      break;
    }
  }
  memo.put(e, out);
  return out;
}

bool canonical_is_zero(const Expr& e) {
  Ctx ctx;
  NodeMemo<Frac> memo;
  Frac f = canonical(e, ctx, memo);
  return f.num.zero();
}

// ---------------------------------------------------------------------------
// numeric probing
// ---------------------------------------------------------------------------

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_bytes(std::uint64_t h, const void* data, std::size_t n) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) h = mix64(h ^ p[i]);
  return h;
}

// deterministic pseudo-random value in [-2,-0.5] u [0.5,2] for an opaque
// parameter application; same application (name, orders, argument values,
// seed) always maps to the same value
double param_probe_value(const std::string& name, const std::vector<int>& deriv,
                         const std::vector<double>& args, std::uint64_t seed) {
  std::uint64_t h = mix64(seed ^ 0x70726f6265ULL);
  h = hash_bytes(h, name.data(), name.size());
  for (int d : deriv) h = hash_bytes(h, &d, sizeof(d));
  for (double a : args) h = hash_bytes(h, &a, sizeof(a));
  double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  double mag = 0.5 + 1.5 * u;
  return (mix64(h) & 1) ? -mag : mag;
}

}  // namespace

double eval_probe(const Expr& e, const std::map<SymbolId, double>& bindings,
                  std::uint64_t seed) {
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
      for (const auto& a : e.node().args) s += eval_probe(a, bindings, seed);
      return s;
    }
    case ExprKind::Mul: {
      double p = 1;
      for (const auto& a : e.node().args) p *= eval_probe(a, bindings, seed);
      return p;
    }
    case ExprKind::Pow: {
      double b = eval_probe(e.node().args[0], bindings, seed);
      long n = e.node().exponent;
      if (std::abs(b) < 1e-300 && n < 0) throw EvalError("division by zero in probe");
      return std::pow(b, static_cast<double>(n));
    }
    case ExprKind::Call: {
      double a = eval_probe(e.node().args[0], bindings, seed);
      const std::string& fn = e.node().name;
      if (fn == "sin") return std::sin(a);
      if (fn == "cos") return std::cos(a);
      if (fn == "tanh") return std::tanh(a);
      if (fn == "sinh" || fn == "cosh") {
        if (std::abs(a) > 500) throw EvalError("probe overflow");
        return fn == "sinh" ? std::sinh(a) : std::cosh(a);
      }
      if (fn == "exp") {
        if (a > 500) throw EvalError("probe overflow");
        return std::exp(a);
      }
      if (fn == "log") {
        if (a <= 0) throw EvalError("probe domain error");
        return std::log(a);
      }
      if (a < 0) throw EvalError("probe domain error");
      return std::sqrt(a);
    }
    case ExprKind::Param: {
      std::vector<double> args;
      args.reserve(e.node().args.size());
      for (const auto& a : e.node().args) args.push_back(eval_probe(a, bindings, seed));
      return param_probe_value(e.node().name, e.node().deriv, args, seed);
    }
  }
  throw EvalError("unreachable expression kind");
}

ZeroTest is_zero(const Expr& e, const ProbeOptions& opts) {
  Expr s = simplify(e);
  if (s.is_number()) return s.is_zero_literal() ? ZeroTest::Zero : ZeroTest::NonZero;
  bool canonical_ok = true;
  try {
    if (canonical_is_zero(s)) return ZeroTest::Zero;
  } catch (const EvalError&) {
    canonical_ok = false;
  }
  (void)canonical_ok;
  std::set<SymbolId> syms = free_symbols(s);
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  int produced = 0, attempts = 0;
  while (produced < opts.points && attempts < opts.points + opts.max_retries) {
    ++attempts;
    std::map<SymbolId, double> bindings;
    for (SymbolId id : syms) {
      if (symbol_name(id) == "pi") {
        bindings[id] = M_PI;
        continue;
      }
      double v = mag(rng);
      if (rng() & 1) v = -v;
      bindings[id] = v;
    }
    double v;
    try {
      v = eval_probe(s, bindings, opts.seed);
    } catch (const EvalError&) {
      continue;
    }
    if (!std::isfinite(v)) continue;
    ++produced;
    if (std::abs(v) > opts.eps) return ZeroTest::NonZero;
  }
  return ZeroTest::Unknown;
}

ZeroTest is_zero_seeded(const Expr& e, std::uint64_t seed) {
  ProbeOptions opts;
  opts.seed = seed;
  return is_zero(e, opts);
}

ZeroTest equal_test(const Expr& a, const Expr& b, const ProbeOptions& opts) {
  return is_zero(a - b, opts);
}

}  // namespace mcontact
