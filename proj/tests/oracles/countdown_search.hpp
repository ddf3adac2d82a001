#pragma once

// Exhaustive Countdown search: every way of combining all operands with
// + - * / under the rules (positive integers below the limit, exact
// division). Returns the set of reachable final values.

#include <algorithm>
#include <optional>
#include <set>
#include <vector>

namespace oracle {

inline constexpr int kLimit = 100;

inline void combine_all(std::vector<int> pool, std::set<int>& out) {
  if (pool.size() == 1) {
    out.insert(pool[0]);
    return;
  }
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (i == j) continue;
      const int a = pool[i], b = pool[j];
      std::vector<int> rest;
      for (std::size_t k = 0; k < pool.size(); ++k)
        if (k != i && k != j) rest.push_back(pool[k]);
      int cand[4] = {a + b, a - b, a * b, (b != 0 && a % b == 0) ? a / b : 0};
      for (int r : cand) {
        if (r <= 0 || r >= kLimit) continue;
        auto next = rest;
        next.push_back(r);
        combine_all(next, out);
      }
    }
  }
}

inline std::set<int> reachable(const std::vector<int>& operands) {
  std::set<int> out;
  for (int x : operands)
    if (x <= 0 || x >= kLimit) return out;
  combine_all(operands, out);
  return out;
}

// Re-evaluates a stored tree node by node, collecting its leaves. Any rule
// break gives nullopt.
template <typename Nodes>
std::optional<int> eval_tree(const Nodes& nodes, int at, std::vector<int>& leaves) {
  if (at < 0 || at >= static_cast<int>(nodes.size())) return std::nullopt;
  const auto& n = nodes[at];
  if (n.lhs < 0) {
    leaves.push_back(n.value);
    if (n.value <= 0 || n.value >= kLimit) return std::nullopt;
    return n.value;
  }
  if (n.lhs >= at || n.rhs >= at) return std::nullopt;
  const auto a = eval_tree(nodes, n.lhs, leaves);
  const auto b = eval_tree(nodes, n.rhs, leaves);
  if (!a || !b) return std::nullopt;
  int r = 0;
  switch (static_cast<char>(n.op)) {
    case '+': r = *a + *b; break;
    case '-': r = *a - *b; break;
    case '*': r = *a * *b; break;
    case '/':
      if (*a % *b) return std::nullopt;
      r = *a / *b;
      break;
    default: return std::nullopt;
  }
  if (r <= 0 || r >= kLimit) return std::nullopt;
  return r;
}

}  // namespace oracle
