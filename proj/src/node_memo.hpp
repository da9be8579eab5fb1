#pragma once

#include <unordered_map>
#include <vector>

#include "mcontact/expr.hpp"

namespace mcontact {

// Memo for DAG traversals keyed by node address. Keys are pinned so a cached
// node cannot be freed and its address handed to a fresh node mid-traversal.
template <typename V>
struct NodeMemo {
  std::unordered_map<const void*, V> map;
  std::vector<Expr> pins;

  const V* find(const Expr& e) const {
    auto it = map.find(e.id());
    return it == map.end() ? nullptr : &it->second;
  }
  void put(const Expr& e, V v) {
    pins.push_back(e);
    map.emplace(e.id(), std::move(v));
  }
};

}  // namespace mcontact
