#pragma once

#include <string>

#include "mcontact/chart.hpp"

namespace mcontact {

// fresh symbol whose name cannot shadow a chart coordinate or parameter
inline Expr mint_unknown(const Chart& c, std::string name) {
  while (c.has(name) || c.param_symbols().count(name) || c.param_functions().count(name))
    name += "_";
  return Expr::symbol(intern_symbol(name));
}

}  // namespace mcontact
