#include "mcontact/form.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <utility>

namespace mcontact {

namespace {

bool is_structural_zero(const Expr& e) { return e.is_zero_literal(); }

// sorts in place, returns permutation parity (+1/-1) or 0 on repeated index
int sort_with_parity(std::vector<int>& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    int v = idx[i];
    std::size_t j = i;
    while (j > 0 && idx[j - 1] > v) {
      idx[j] = idx[j - 1];
      --j;
      sign = -sign;
    }
    idx[j] = v;
  }
  for (std::size_t i = 1; i < idx.size(); ++i)
    if (idx[i] == idx[i - 1]) return 0;
  return sign;
}

void require_same_chart(const Chart& a, const Chart& b, const char* op) {
  if (!a.same_as(b))
    throw StructureError(std::string(op) + ": operands live on different charts");
}

}  // namespace

VectorField VectorField::zero(const Chart& c) {
  return {c, std::vector<Expr>(c.dim(), Expr::integer(0))};
}

VectorField VectorField::coordinate(const Chart& c, int index) {
  VectorField x = zero(c);
  x.components.at(index) = Expr::integer(1);
  return x;
}

bool VectorField::vertical() const {
  for (int mu = 0; mu < chart.m(); ++mu)
    if (!is_structural_zero(simplify(components[chart.base_coord(mu)]))) return false;
  return true;
}

VectorField operator+(const VectorField& a, const VectorField& b) {
  require_same_chart(a.chart, b.chart, "vector field sum");
  VectorField r{a.chart, {}};
  r.components.reserve(a.components.size());
  for (std::size_t i = 0; i < a.components.size(); ++i)
    r.components.push_back(simplify(a.components[i] + b.components[i]));
  return r;
}

VectorField operator*(const Expr& f, const VectorField& x) {
  VectorField r{x.chart, {}};
  r.components.reserve(x.components.size());
  for (const Expr& c : x.components) r.components.push_back(simplify(f * c));
  return r;
}

Form::Form(Chart chart, int degree) : chart_(std::move(chart)), degree_(degree) {
  if (degree_ < 0) throw StructureError("form degree must be non-negative");
}

Form Form::scalar(Chart chart, Expr value) {
  Form f(std::move(chart), 0);
  f.add_term({}, std::move(value));
  return f;
}

void Form::add_term(std::vector<int> indices, Expr coeff) {
  if (static_cast<int>(indices.size()) != degree_)
    throw StructureError("form term arity does not match form degree");
  for (int i : indices)
    if (i < 0 || i >= chart_.dim())
      throw StructureError("form term index out of chart range");
  int sign = sort_with_parity(indices);
  if (sign == 0) return;
  Expr add = sign < 0 ? (-coeff) : coeff;
  auto it = terms_.find(indices);
  Expr merged = it == terms_.end() ? simplify(add) : simplify(it->second + add);
  if (is_structural_zero(merged))
    terms_.erase(indices);
  else
    terms_[std::move(indices)] = std::move(merged);
}

Expr Form::coefficient(const std::vector<int>& indices) const {
  std::vector<int> key = indices;
  int sign = sort_with_parity(key);
  if (sign == 0) return Expr::integer(0);
  auto it = terms_.find(key);
  if (it == terms_.end()) return Expr::integer(0);
  return sign < 0 ? simplify(-it->second) : it->second;
}

Expr Form::scalar_value() const {
  if (degree_ != 0) throw StructureError("scalar_value on a form of positive degree");
  return coefficient({});
}

Form operator+(const Form& a, const Form& b) {
  require_same_chart(a.chart(), b.chart(), "form sum");
  if (a.degree() != b.degree())
    throw StructureError("form sum: mixed degrees");
  Form r = a;
  for (const auto& [idx, coeff] : b.terms()) r.add_term(idx, coeff);
  return r;
}

Form operator-(const Form& a, const Form& b) { return a + (-b); }

Form operator-(const Form& a) {
  Form r(a.chart(), a.degree());
  for (const auto& [idx, coeff] : a.terms()) r.add_term(idx, -coeff);
  return r;
}

Form operator*(const Expr& f, const Form& a) {
  Form r(a.chart(), a.degree());
  for (const auto& [idx, coeff] : a.terms()) r.add_term(idx, f * coeff);
  return r;
}

Form wedge(const Form& a, const Form& b) {
  require_same_chart(a.chart(), b.chart(), "wedge");
  Form r(a.chart(), a.degree() + b.degree());
  for (const auto& [ia, ca] : a.terms()) {
    for (const auto& [ib, cb] : b.terms()) {
      std::vector<int> idx = ia;
      idx.insert(idx.end(), ib.begin(), ib.end());
      r.add_term(std::move(idx), ca * cb);
    }
  }
  return r;
}

Form exterior_derivative(const Form& a) {
  Form r(a.chart(), a.degree() + 1);
  const int dim = a.chart().dim();
  for (const auto& [idx, coeff] : a.terms()) {
    for (int j = 0; j < dim; ++j) {
      if (!depends_on(coeff, a.chart().coord_symbol(j))) continue;
      Expr dj = simplify(differentiate(coeff, a.chart().coord_symbol(j)));
      if (is_structural_zero(dj)) continue;
      std::vector<int> extended;
      extended.reserve(idx.size() + 1);
      extended.push_back(j);
      extended.insert(extended.end(), idx.begin(), idx.end());
      r.add_term(std::move(extended), std::move(dj));
    }
  }
  return r;
}

Form contract(const Form& a, const VectorField& x) {
  require_same_chart(a.chart(), x.chart, "contraction");
  if (a.degree() == 0)
    throw StructureError("contraction of a scalar form");
  Form r(a.chart(), a.degree() - 1);
  for (const auto& [idx, coeff] : a.terms()) {
    for (std::size_t p = 0; p < idx.size(); ++p) {
      const Expr& comp = x.components[idx[p]];
      if (is_structural_zero(comp)) continue;
      Expr c = coeff * comp;
      if (p % 2 == 1) c = -c;
      std::vector<int> rest;
      rest.reserve(idx.size() - 1);
      for (std::size_t q = 0; q < idx.size(); ++q)
        if (q != p) rest.push_back(idx[q]);
      r.add_term(std::move(rest), std::move(c));
    }
  }
  return r;
}

Form contract(const Form& a, const MultiVector& x) {
  Form r = a;
  for (const VectorField& f : x.factors) r = contract(r, f);
  return r;
}

VectorField lie_bracket(const VectorField& x, const VectorField& y) {
  require_same_chart(x.chart, y.chart, "Lie bracket");
  const Chart& c = x.chart;
  VectorField r = VectorField::zero(c);
  for (int a = 0; a < c.dim(); ++a) {
    Expr acc = Expr::integer(0);
    for (int b = 0; b < c.dim(); ++b) {
      SymbolId zb = c.coord_symbol(b);
      if (!is_structural_zero(x.components[b]) && depends_on(y.components[a], zb))
        acc = acc + x.components[b] * differentiate(y.components[a], zb);
      if (!is_structural_zero(y.components[b]) && depends_on(x.components[a], zb))
        acc = acc - y.components[b] * differentiate(x.components[a], zb);
    }
    r.components[a] = simplify(acc);
  }
  return r;
}

Form dbar(const Form& a, const Form& sigma) {
  if (sigma.degree() != 1)
    throw StructureError("twisted differential needs a 1-form twist");
  return exterior_derivative(a) + wedge(sigma, a);
}

Form volume_form(const Chart& c) {
  Form v(c, c.m());
  std::vector<int> idx;
  idx.reserve(c.m());
  for (int mu = 0; mu < c.m(); ++mu) idx.push_back(c.base_coord(mu));
  v.add_term(std::move(idx), Expr::integer(1));
  return v;
}

Form contracted_volume(const Chart& c, int mu) {
  return contract(volume_form(c), VectorField::coordinate(c, c.base_coord(mu)));
}

ZeroTest form_is_zero(const Form& a, const ProbeOptions& opts) {
  bool unknown = false;
  for (const auto& [idx, coeff] : a.terms()) {
    switch (is_zero(coeff, opts)) {
      case ZeroTest::NonZero: return ZeroTest::NonZero;
      case ZeroTest::Unknown: unknown = true; break;
      case ZeroTest::Zero: break;
    }
  }
  return unknown ? ZeroTest::Unknown : ZeroTest::Zero;
}

ZeroTest vector_field_is_zero(const VectorField& x, const ProbeOptions& opts) {
  bool unknown = false;
  for (const Expr& comp : x.components) {
    switch (is_zero(comp, opts)) {
      case ZeroTest::NonZero: return ZeroTest::NonZero;
      case ZeroTest::Unknown: unknown = true; break;
      case ZeroTest::Zero: break;
    }
  }
  return unknown ? ZeroTest::Unknown : ZeroTest::Zero;
}

namespace {

// true when the printed coefficient should carry a leading minus we can hoist
bool hoist_minus(const Expr& e) {
  if (e.kind() == ExprKind::Number) return e.number_value() < 0;
  if (e.kind() == ExprKind::Mul)
    for (const Expr& f : e.node().args)
      if (f.kind() == ExprKind::Number) return f.number_value() < 0;
  return false;
}

bool needs_parens_as_factor(const Expr& e) {
  return e.kind() == ExprKind::Add;
}

std::string chain_string(const Chart& c, const std::vector<int>& idx) {
  std::string out;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) out += "^";
    out += "d" + c.coordinate(idx[i]).name;
  }
  return out;
}

// display order puts fiber differentials before base ones (du^dx, ds^dx);
// the parity of that shuffle moves into the printed coefficient
std::pair<std::vector<int>, int> display_indices(const Chart& c,
                                                 const std::vector<int>& idx) {
  std::vector<int> fiber, base;
  int sign = 1;
  for (std::size_t p = 0; p < idx.size(); ++p) {
    if (c.coordinate(idx[p]).role == Role::Base) {
      base.push_back(idx[p]);
    } else {
      // hops over every base index already seen
      if (base.size() % 2 == 1) sign = -sign;
      fiber.push_back(idx[p]);
    }
  }
  fiber.insert(fiber.end(), base.begin(), base.end());
  return {std::move(fiber), sign};
}

}  // namespace

std::string to_string(const Form& a) {
  if (a.terms().empty()) return "0";
  std::vector<std::pair<std::vector<int>, Expr>> display;
  for (const auto& [idx, coeff] : a.terms()) {
    auto [shown, sign] = display_indices(a.chart(), idx);
    display.emplace_back(std::move(shown),
                         sign < 0 ? simplify(-coeff) : coeff);
  }
  std::sort(display.begin(), display.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  std::ostringstream out;
  bool first = true;
  for (const auto& [idx, coeff] : display) {
    Expr c = coeff;
    bool neg = hoist_minus(c);
    if (neg) c = simplify(-c);
    if (first)
      out << (neg ? "-" : "");
    else
      out << (neg ? " - " : " + ");
    first = false;
    std::string cs = to_string(c);
    bool unit = c.is_one_literal();
    if (idx.empty()) {
      out << (neg && needs_parens_as_factor(c) ? "(" + cs + ")" : cs);
    } else {
      if (!unit) {
        if (needs_parens_as_factor(c)) cs = "(" + cs + ")";
        out << cs << " * ";
      }
      out << chain_string(a.chart(), idx);
    }
  }
  return out.str();
}

std::string to_string(const VectorField& x) {
  std::ostringstream out;
  bool first = true;
  for (int i = 0; i < x.chart.dim(); ++i) {
    Expr c = simplify(x.components[i]);
    if (is_structural_zero(c)) continue;
    bool neg = hoist_minus(c);
    if (neg) c = simplify(-c);
    if (first)
      out << (neg ? "-" : "");
    else
      out << (neg ? " - " : " + ");
    first = false;
    std::string cs = to_string(c);
    bool unit = c.is_one_literal();
    if (!unit) {
      if (needs_parens_as_factor(c)) cs = "(" + cs + ")";
      out << cs << " * ";
    }
    out << "d/d" << x.chart.coordinate(i).name;
  }
  if (first) return "0";
  return out.str();
}

namespace {

struct Summand {
  int sign;
  std::string text;
};

std::vector<Summand> split_summands(const std::string& s) {
  std::vector<Summand> out;
  int depth = 0;
  int sign = 1;
  std::string cur;
  auto flush = [&](int next_sign) {
    std::string t = cur;
    // trim
    auto b = t.find_first_not_of(" \t\r\n");
    auto e = t.find_last_not_of(" \t\r\n");
    if (b == std::string::npos)
      t.clear();
    else
      t = t.substr(b, e - b + 1);
    if (!t.empty()) out.push_back({sign, t});
    cur.clear();
    sign = next_sign;
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth == 0 && (c == '+' || c == '-')) {
      std::string trimmed = cur;
      auto b = trimmed.find_first_not_of(" \t\r\n");
      bool empty_so_far = (b == std::string::npos);
      bool scientific = false;
      if (i >= 2 && (s[i - 1] == 'e' || s[i - 1] == 'E') &&
          std::isdigit(static_cast<unsigned char>(s[i - 2])) && i + 1 < s.size() &&
          std::isdigit(static_cast<unsigned char>(s[i + 1])))
        scientific = true;
      if (empty_so_far) {
        if (c == '-') sign = -sign;
        continue;
      }
      if (!scientific) {
        flush(c == '-' ? -1 : 1);
        continue;
      }
    }
    cur += c;
  }
  flush(1);
  return out;
}

std::vector<std::string> split_factors(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  auto flush = [&]() {
    auto b = cur.find_first_not_of(" \t\r\n");
    auto e = cur.find_last_not_of(" \t\r\n");
    if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
    cur.clear();
  };
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth == 0 && c == '*') {
      flush();
      continue;
    }
    cur += c;
  }
  flush();
  return out;
}

std::vector<std::string> split_wedge(const std::string& s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  auto flush = [&]() {
    auto b = cur.find_first_not_of(" \t\r\n");
    auto e = cur.find_last_not_of(" \t\r\n");
    if (b != std::string::npos)
      out.push_back(cur.substr(b, e - b + 1));
    else
      out.push_back("");
    cur.clear();
  };
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth == 0 && c == '^') {
      flush();
      continue;
    }
    cur += c;
  }
  flush();
  return out;
}

// a factor is a differential chain iff every ^-piece is d<known coordinate>
bool differential_chain(const std::string& factor, const Chart& chart,
                        std::vector<int>* indices) {
  std::vector<std::string> pieces = split_wedge(factor);
  std::vector<int> idx;
  for (const std::string& p : pieces) {
    if (p.size() < 2 || p[0] != 'd') return false;
    int i = chart.index_of(p.substr(1));
    if (i < 0) return false;
    idx.push_back(i);
  }
  *indices = std::move(idx);
  return true;
}

}  // namespace

Form parse_form(const std::string& text, const Chart& chart) {
  std::vector<Summand> summands = split_summands(text);
  if (summands.empty())
    return Form::scalar(chart, Expr::integer(0));
  int degree = -1;
  std::vector<std::pair<std::vector<int>, Expr>> pending;
  for (const Summand& sm : summands) {
    std::vector<int> indices;
    Expr coeff = Expr::integer(sm.sign);
    bool have_chain = false;
    for (const std::string& factor : split_factors(sm.text)) {
      std::vector<int> idx;
      if (differential_chain(factor, chart, &idx)) {
        have_chain = true;
        indices.insert(indices.end(), idx.begin(), idx.end());
      } else {
        coeff = coeff * chart.parse(factor);
      }
    }
    (void)have_chain;
    int d = static_cast<int>(indices.size());
    coeff = simplify(coeff);
    if (is_structural_zero(coeff) && d == 0) continue;  // bare "0" summand
    if (degree < 0) degree = d;
    if (d != degree)
      throw ParseError("form has terms of mixed degree", 0);
    pending.emplace_back(std::move(indices), std::move(coeff));
  }
  if (degree < 0) degree = 0;
  Form f(chart, degree);
  for (auto& [idx, coeff] : pending) f.add_term(std::move(idx), std::move(coeff));
  return f;
}

}  // namespace mcontact
