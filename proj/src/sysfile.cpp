#include "mcontact/sysfile.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "mcontact/hamiltonian.hpp"

namespace mcontact {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

bool valid_name(const std::string& s) {
  if (s.empty() || (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_'))
    return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

struct Line {
  int number;
  std::string key;
  std::string value;
};

[[noreturn]] void fail(const std::string& where, int line, const std::string& msg) {
  throw SystemFileError(where + ":" + std::to_string(line) + ": " + msg);
}

// context for expressions that may only mention the given symbols
ParseContext fixed_symbols(std::set<std::string> allowed) {
  ParseContext ctx;
  ctx.is_symbol = [allowed = std::move(allowed)](const std::string& s) {
    return s == "pi" || allowed.count(s) > 0;
  };
  ctx.function_arity = [](const std::string&) { return -1; };
  return ctx;
}

double numeric_value(const std::string& where, const Line& ln) {
  try {
    const Expr e = parse_expr(ln.value, fixed_symbols({}));
    return evaluate(e, {});
  } catch (const std::exception& ex) {
    fail(where, ln.number, "bad numeric value for '" + ln.key + "': " + ex.what());
  }
}

int integer_value(const std::string& where, const Line& ln) {
  const double v = numeric_value(where, ln);
  const int n = static_cast<int>(v);
  if (static_cast<double>(n) != v) fail(where, ln.number, "'" + ln.key + "' must be an integer");
  return n;
}

}  // namespace

SystemFile parse_system(const std::string& text, const std::string& display_name) {
  std::map<std::string, std::vector<Line>> sections;
  std::set<std::string> seen_sections;
  {
    static const std::set<std::string> known{"chart", "parameters", "lagrangian",
                                            "hamiltonian", "simulation"};
    std::istringstream in(text);
    std::string raw;
    std::string current;  // empty: file header
    int number = 0;
    while (std::getline(in, raw)) {
      ++number;
      const std::size_t hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      const std::string line = trim(raw);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail(display_name, number, "unterminated section header");
        current = trim(line.substr(1, line.size() - 2));
        if (!known.count(current)) fail(display_name, number, "unknown section [" + current + "]");
        if (!seen_sections.insert(current).second)
          fail(display_name, number, "duplicate section [" + current + "]");
        continue;
      }
      const std::size_t eq = line.find('=');
      std::string key = trim(eq == std::string::npos ? line : line.substr(0, eq));
      std::string value = eq == std::string::npos ? "" : trim(line.substr(eq + 1));
      if (key.empty()) fail(display_name, number, "missing key");
      sections[current].push_back({number, std::move(key), std::move(value)});
    }
  }

  SystemFile out;
  for (const Line& ln : sections[""]) {
    if (ln.key == "name")
      out.name = ln.value;
    else
      fail(display_name, ln.number, "unexpected key '" + ln.key + "' outside a section");
  }

  // chart block
  int m = 0;
  std::vector<std::string> base, fields;
  if (!seen_sections.count("chart")) throw SystemFileError(display_name + ": missing [chart]");
  for (const Line& ln : sections["chart"]) {
    if (ln.key == "m") {
      m = integer_value(display_name, ln);
    } else if (ln.key == "base") {
      base = split_words(ln.value);
    } else if (ln.key == "fields") {
      fields = split_words(ln.value);
    } else {
      fail(display_name, ln.number, "unknown chart key '" + ln.key + "'");
    }
  }

  // parameters: constants (name = number), implemented functions
  // (name(args) = body), or declared opaque functions (name(args))
  std::set<std::string> scalar_params;
  std::map<std::string, int> param_functions;
  struct PendingFn {
    Line line;
    std::string fn;
    std::vector<std::string> formals;
  };
  std::vector<PendingFn> with_bodies;
  for (const Line& ln : sections["parameters"]) {
    const std::size_t open = ln.key.find('(');
    if (open == std::string::npos) {
      if (!valid_name(ln.key)) fail(display_name, ln.number, "bad parameter name '" + ln.key + "'");
      if (ln.value.empty()) fail(display_name, ln.number, "parameter '" + ln.key + "' needs a value");
      scalar_params.insert(ln.key);
      out.param_values[ln.key] = numeric_value(display_name, ln);
      continue;
    }
    if (ln.key.back() != ')')
      fail(display_name, ln.number, "malformed function parameter '" + ln.key + "'");
    const std::string fn = trim(ln.key.substr(0, open));
    if (!valid_name(fn)) fail(display_name, ln.number, "bad function name '" + fn + "'");
    std::vector<std::string> formals;
    {
      std::string args = ln.key.substr(open + 1, ln.key.size() - open - 2);
      for (std::size_t b = 0; b <= args.size();) {
        std::size_t c = args.find(',', b);
        if (c == std::string::npos) c = args.size();
        const std::string a = trim(args.substr(b, c - b));
        if (!a.empty()) formals.push_back(a);
        b = c + 1;
      }
    }
    if (formals.empty())
      fail(display_name, ln.number, "function '" + fn + "' needs at least one argument");
    for (const std::string& a : formals)
      if (!valid_name(a)) fail(display_name, ln.number, "bad argument name '" + a + "'");
    param_functions[fn] = static_cast<int>(formals.size());
    if (ln.value.empty()) {
      out.declared_functions.insert(fn);
    } else {
      with_bodies.push_back({ln, fn, std::move(formals)});
    }
  }
  for (const PendingFn& p : with_bodies) {
    try {
      std::set<std::string> allowed(p.formals.begin(), p.formals.end());
      ParamImpl impl;
      impl.body = parse_expr(p.line.value, fixed_symbols(std::move(allowed)));
      for (const std::string& a : p.formals) impl.formal_args.push_back(intern_symbol(a));
      out.params[p.fn] = std::move(impl);
    } catch (const ParseError& ex) {
      fail(display_name, p.line.number, std::string("in the body of '") + p.fn + "': " + ex.what());
    }
  }

  // the velocity chart carries the declared names; structural complaints about
  // them are file problems, so they surface as parse errors
  try {
    out.velocity_chart = make_lagrangian_chart(m, base, fields, scalar_params, param_functions);
  } catch (const std::exception& ex) {
    throw SystemFileError(display_name + ": bad chart block: " + ex.what());
  }

  const bool has_l = seen_sections.count("lagrangian") > 0;
  const bool has_h = seen_sections.count("hamiltonian") > 0;
  if (has_l == has_h)
    throw SystemFileError(display_name + ": need exactly one of [lagrangian] or [hamiltonian]");
  out.is_hamiltonian = has_h;
  out.chart = has_h ? momentum_chart(out.velocity_chart) : out.velocity_chart;

  bool have_density = false;
  for (const Line& ln : sections[has_h ? "hamiltonian" : "lagrangian"]) {
    if (ln.key != "density") fail(display_name, ln.number, "unknown key '" + ln.key + "'");
    try {
      out.density = out.chart.parse(ln.value);
      have_density = true;
    } catch (const ParseError& ex) {
      fail(display_name, ln.number, std::string("in the density: ") + ex.what());
    }
  }
  if (!have_density)
    throw SystemFileError(display_name + ": the density entry is missing");

  // simulation block
  out.has_simulation = seen_sections.count("simulation") > 0;
  std::set<std::string> base_and_params(base.begin(), base.end());
  base_and_params.insert(scalar_params.begin(), scalar_params.end());
  for (const Line& ln : sections["simulation"]) {
    if (ln.key == "t_end") {
      out.sim.t_end = numeric_value(display_name, ln);
    } else if (ln.key == "dt") {
      out.sim.dt = numeric_value(display_name, ln);
    } else if (ln.key == "points") {
      out.sim.points = integer_value(display_name, ln);
    } else if (ln.key == "x0") {
      out.sim.x0 = numeric_value(display_name, ln);
    } else if (ln.key == "length") {
      out.sim.length = numeric_value(display_name, ln);
    } else if (ln.key == "stride") {
      out.sim.stride = integer_value(display_name, ln);
    } else if (ln.key == "bc") {
      if (ln.value == "periodic")
        out.sim.bc = Boundary::Periodic;
      else if (ln.value == "dirichlet0")
        out.sim.bc = Boundary::Dirichlet0;
      else
        fail(display_name, ln.number, "bc must be 'periodic' or 'dirichlet0'");
    } else if (ln.key.rfind("initial ", 0) == 0) {
      const std::string coord = trim(ln.key.substr(8));
      if (!out.chart.has(coord) && !out.velocity_chart.has(coord))
        fail(display_name, ln.number, "initial data for unknown coordinate '" + coord + "'");
      try {
        out.sim.initial[coord] = parse_expr(ln.value, fixed_symbols(base_and_params));
      } catch (const ParseError& ex) {
        fail(display_name, ln.number,
             std::string("in the initial data for '") + coord + "': " + ex.what());
      }
    } else {
      fail(display_name, ln.number, "unknown simulation key '" + ln.key + "'");
    }
  }
  if (out.has_simulation && !(out.sim.dt > 0))
    throw SystemFileError(display_name + ": the simulation block needs dt > 0");

  if (out.name.empty()) out.name = display_name;
  return out;
}

SystemFile load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SystemFileError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_system(buf.str(), path);
}

}  // namespace mcontact
