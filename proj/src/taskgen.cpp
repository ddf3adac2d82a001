#include "mtplab/taskgen.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "mtplab/error.hpp"
#include "text.hpp"

namespace mtplab {

namespace {

using Rng = std::mt19937_64;

std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

void fail(const std::string& what) { throw Error(Errc::parse, what); }

struct Degrees {
  std::map<NodeId, std::size_t> in, out;
  std::map<NodeId, std::vector<NodeId>> children;
};

Degrees degrees_of(const std::vector<Edge>& edges) {
  Degrees d;
  for (const Edge& e : edges) {
    ++d.out[e.from];
    ++d.in[e.to];
    d.children[e.from].push_back(e.to);
  }
  return d;
}

std::size_t count_or_zero(const std::map<NodeId, std::size_t>& m, NodeId k) {
  auto it = m.find(k);
  return it == m.end() ? 0 : it->second;
}

std::set<NodeId> reachable_from(const Degrees& d, NodeId start) {
  std::set<NodeId> seen{start};
  std::vector<NodeId> stack{start};
  while (!stack.empty()) {
    const NodeId n = stack.back();
    stack.pop_back();
    auto it = d.children.find(n);
    if (it == d.children.end()) continue;
    for (NodeId c : it->second)
      if (seen.insert(c).second) stack.push_back(c);
  }
  return seen;
}

void validate_star(const GraphInstance& g, const Degrees& d) {
  if (g.edges.empty()) fail("star graph has no edges");
  if (count_or_zero(d.in, g.start) != 0) fail("start node has an incoming edge");
  for (const auto& [node, deg] : d.in) {
    if (deg > 1) fail("node " + std::to_string(node) + " has in-degree " + std::to_string(deg));
  }
  for (const auto& [node, deg] : d.out) {
    if (node != g.start && deg > 1) {
      fail("node " + std::to_string(node) + " has out-degree " + std::to_string(deg));
    }
  }
}

void validate_tree(const GraphInstance& g, const Degrees& d) {
  if (count_or_zero(d.in, g.start) != 0) fail("root has an incoming edge");
  for (const auto& [node, deg] : d.in) {
    if (deg > 1) fail("node " + std::to_string(node) + " has two parents");
  }
  for (const auto& [node, deg] : d.out) {
    if (deg != 2) fail("internal node " + std::to_string(node) + " does not have two children");
  }
  // Complete: every leaf sits at the same depth and the node count is 2^depth - 1.
  std::map<NodeId, std::size_t> depth{{g.start, 1}};
  std::vector<NodeId> stack{g.start};
  std::set<std::size_t> leaf_depths;
  while (!stack.empty()) {
    const NodeId n = stack.back();
    stack.pop_back();
    auto it = d.children.find(n);
    if (it == d.children.end()) {
      leaf_depths.insert(depth[n]);
      continue;
    }
    for (NodeId c : it->second) {
      depth[c] = depth[n] + 1;
      stack.push_back(c);
    }
  }
  if (leaf_depths.size() != 1) fail("binary tree is not complete");
  const std::size_t levels = *leaf_depths.begin();
  if (depth.size() != (std::size_t{1} << levels) - 1) fail("binary tree node count mismatch");
  if (d.children.count(g.end) != 0) fail("end node is not a leaf");
}

}  // namespace

std::size_t GraphInstance::path_count() const {
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [&](const Edge& e) { return e.from == start; }));
}

StarInstance gen_star(std::size_t path_count, std::size_t path_len, std::size_t node_count,
                      std::uint64_t seed) {
  if (path_count == 0 || path_len < 2) {
    throw Error(Errc::capacity, "star graph needs at least one path of two nodes");
  }
  const std::size_t needed = path_count * (path_len - 1) + 1;
  if (needed > node_count) {
    throw Error(Errc::capacity, "star graph needs " + std::to_string(needed) +
                                    " distinct labels but only " + std::to_string(node_count) +
                                    " are available");
  }
  Rng rng(seed);
  std::vector<NodeId> labels(node_count);
  std::iota(labels.begin(), labels.end(), NodeId{1});
  std::shuffle(labels.begin(), labels.end(), rng);

  StarInstance g;
  g.kind = GraphKind::star;
  g.node_count = node_count;
  g.start = labels[0];
  const std::size_t target = uniform_index(rng, path_count);
  std::size_t next = 1;
  for (std::size_t p = 0; p < path_count; ++p) {
    NodeId prev = g.start;
    std::vector<NodeId> walk{g.start};
    for (std::size_t k = 1; k < path_len; ++k) {
      const NodeId n = labels[next++];
      g.edges.push_back({prev, n});
      walk.push_back(n);
      prev = n;
    }
    if (p == target) {
      g.path = walk;
      g.end = prev;
    }
  }
  std::shuffle(g.edges.begin(), g.edges.end(), rng);
  return g;
}

TreeInstance gen_binary_tree(std::size_t depth, std::uint64_t seed) {
  if (depth == 0) throw Error(Errc::capacity, "binary tree depth must be at least 1");
  if (depth > 20) throw Error(Errc::capacity, "binary tree depth above 20 is not supported");
  const std::size_t n = (std::size_t{1} << depth) - 1;
  Rng rng(seed);
  std::vector<NodeId> labels(n);
  std::iota(labels.begin(), labels.end(), NodeId{1});
  std::shuffle(labels.begin(), labels.end(), rng);

  // Heap layout: slot k has children 2k+1, 2k+2.
  TreeInstance g;
  g.kind = GraphKind::tree;
  g.node_count = n;
  g.start = labels[0];
  for (std::size_t k = 0; 2 * k + 2 < n; ++k) {
    g.edges.push_back({labels[k], labels[2 * k + 1]});
    g.edges.push_back({labels[k], labels[2 * k + 2]});
  }
  const std::size_t first_leaf = (n - 1) / 2;
  std::size_t slot = first_leaf + uniform_index(rng, n - first_leaf);
  g.end = labels[slot];
  std::vector<NodeId> reversed{g.end};
  while (slot != 0) {
    slot = (slot - 1) / 2;
    reversed.push_back(labels[slot]);
  }
  g.path.assign(reversed.rbegin(), reversed.rend());
  std::shuffle(g.edges.begin(), g.edges.end(), rng);
  return g;
}

std::optional<std::vector<NodeId>> walk_path(const std::vector<Edge>& edges, NodeId start,
                                             NodeId end) {
  std::map<NodeId, std::vector<NodeId>> children;
  for (const Edge& e : edges) children[e.from].push_back(e.to);

  std::vector<std::vector<NodeId>> found;
  std::vector<NodeId> current{start};
  std::set<NodeId> on_path{start};
  // Depth-first enumeration of simple paths; stops once ambiguity is proven.
  auto dfs = [&](auto&& self, NodeId node) -> void {
    if (found.size() > 1) return;
    if (node == end) {
      found.push_back(current);
      return;
    }
    auto it = children.find(node);
    if (it == children.end()) return;
    for (NodeId c : it->second) {
      if (on_path.count(c)) continue;
      current.push_back(c);
      on_path.insert(c);
      self(self, c);
      on_path.erase(c);
      current.pop_back();
    }
  };
  dfs(dfs, start);
  if (found.size() != 1) return std::nullopt;
  return found.front();
}

void validate_graph(const GraphInstance& g) {
  auto in_range = [&](NodeId n) { return n >= 1 && n <= g.node_count; };
  if (!in_range(g.start) || !in_range(g.end)) fail("prompt node outside [1..node_count]");
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const Edge& e : g.edges) {
    if (!in_range(e.from) || !in_range(e.to)) {
      fail("edge " + std::to_string(e.from) + "," + std::to_string(e.to) +
           " uses a label outside [1..node_count]");
    }
    if (e.from == e.to) fail("self-loop on node " + std::to_string(e.from));
    if (!seen.insert({e.from, e.to}).second) fail("duplicate edge");
  }
  const Degrees d = degrees_of(g.edges);
  if (g.kind == GraphKind::star) {
    validate_star(g, d);
  } else {
    validate_tree(g, d);
  }
  const auto reach = reachable_from(d, g.start);
  for (const Edge& e : g.edges) {
    if (!reach.count(e.from)) fail("edge not reachable from the start node");
  }
  const auto walk = walk_path(g.edges, g.start, g.end);
  if (!walk) fail("no unique path from start to end");
  if (*walk != g.path) fail("stored path differs from the walk along the edges");
}

std::string serialize(const GraphInstance& g, PromptOrder order) {
  std::string out;
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    if (i) out += " | ";
    out += std::to_string(g.edges[i].from) + "," + std::to_string(g.edges[i].to);
  }
  const auto [first, second] = order == PromptOrder::start_end ? std::pair{g.start, g.end}
                                                               : std::pair{g.end, g.start};
  out += " / " + std::to_string(first) + "," + std::to_string(second);
  out += " = " + text::join(g.path, ",");
  return out;
}

GraphInstance parse_graph(std::string_view line, GraphKind kind, PromptOrder order,
                          std::optional<std::size_t> node_count) {
  const text::Piece whole{line, 0};
  const auto [edge_part, rest] = text::split_once(whole, " / ");
  const auto [prompt_part, path_part] = text::split_once(rest, " = ");

  GraphInstance g;
  g.kind = kind;
  if (!edge_part.text.empty()) {
    for (const text::Piece& pair : text::split(edge_part, " | ")) {
      const auto ends = text::parse_int_list<NodeId>(pair);
      if (ends.size() != 2) throw ParseError(pair.offset, "edge must be 'u,v'");
      g.edges.push_back({ends[0], ends[1]});
    }
  }
  const auto prompt = text::parse_int_list<NodeId>(prompt_part);
  if (prompt.size() != 2) throw ParseError(prompt_part.offset, "prompt must be two nodes");
  if (order == PromptOrder::start_end) {
    g.start = prompt[0];
    g.end = prompt[1];
  } else {
    g.end = prompt[0];
    g.start = prompt[1];
  }
  g.path = text::parse_int_list<NodeId>(path_part);

  NodeId largest = std::max(g.start, g.end);
  for (const Edge& e : g.edges) largest = std::max({largest, e.from, e.to});
  for (NodeId n : g.path) largest = std::max(largest, n);
  g.node_count = node_count.value_or(largest);

  try {
    validate_graph(g);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(path_part.offset, e.what());
  }
  return g;
}

// ---------------------------------------------------------------- Countdown

std::optional<int> apply_op(ArithOp op, int lhs, int rhs) {
  long long r = 0;
  switch (op) {
    case ArithOp::add: r = static_cast<long long>(lhs) + rhs; break;
    case ArithOp::sub: r = static_cast<long long>(lhs) - rhs; break;
    case ArithOp::mul: r = static_cast<long long>(lhs) * rhs; break;
    case ArithOp::div:
      if (rhs == 0 || lhs % rhs != 0) return std::nullopt;
      r = lhs / rhs;
      break;
  }
  if (r <= 0 || r >= kCountdownLimit) return std::nullopt;
  return static_cast<int>(r);
}

CountdownExpr CountdownExpr::leaf(int value) {
  CountdownExpr e;
  e.nodes_.push_back({value, ArithOp::add, -1, -1});
  return e;
}

CountdownExpr CountdownExpr::combine(const CountdownExpr& lhs, ArithOp op,
                                     const CountdownExpr& rhs) {
  CountdownExpr e;
  e.nodes_ = lhs.nodes_;
  const int shift = static_cast<int>(lhs.nodes_.size());
  for (Node n : rhs.nodes_) {
    if (!n.leaf()) {
      n.lhs += shift;
      n.rhs += shift;
    }
    e.nodes_.push_back(n);
  }
  e.nodes_.push_back({0, op, lhs.root(), shift + rhs.root()});
  return e;
}

std::vector<int> CountdownExpr::leaves() const {
  std::vector<int> out;
  for (const Node& n : nodes_)
    if (n.leaf()) out.push_back(n.value);
  return out;
}

std::optional<int> CountdownExpr::evaluate() const {
  if (nodes_.empty()) fail("empty expression");
  std::vector<int> uses(nodes_.size(), 0);
  std::vector<std::optional<int>> value(nodes_.size());
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const Node& n = nodes_[k];
    if (n.leaf()) {
      if (n.rhs >= 0) fail("leaf with a child");
      value[k] = n.value;
      continue;
    }
    const int self = static_cast<int>(k);
    if (n.lhs >= self || n.rhs < 0 || n.rhs >= self) fail("operator child out of order");
    ++uses[n.lhs];
    ++uses[n.rhs];
    if (value[n.lhs] && value[n.rhs]) value[k] = apply_op(n.op, *value[n.lhs], *value[n.rhs]);
  }
  for (std::size_t k = 0; k + 1 < nodes_.size(); ++k) {
    if (uses[k] != 1) fail("expression node used " + std::to_string(uses[k]) + " times");
  }
  if (uses.back() != 0) fail("root used as a child");
  for (const Node& n : nodes_) {
    if (n.leaf() && (n.value <= 0 || n.value >= kCountdownLimit)) return std::nullopt;
  }
  return value.back();
}

std::string CountdownExpr::to_infix() const {
  auto render = [&](auto&& self, int k) -> std::string {
    const Node& n = nodes_[static_cast<std::size_t>(k)];
    if (n.leaf()) return std::to_string(n.value);
    return "(" + self(self, n.lhs) + static_cast<char>(n.op) + self(self, n.rhs) + ")";
  };
  return render(render, root());
}

CountdownExpr CountdownExpr::parse_infix(std::string_view text) {
  std::size_t pos = 0;
  auto parse = [&](auto&& self) -> CountdownExpr {
    if (pos >= text.size()) throw ParseError(pos, "unexpected end of expression");
    if (text[pos] == '(') {
      ++pos;
      CountdownExpr lhs = self(self);
      if (pos >= text.size()) throw ParseError(pos, "missing operator");
      const char c = text[pos];
      if (c != '+' && c != '-' && c != '*' && c != '/') {
        throw ParseError(pos, std::string("unknown operator '") + c + "'");
      }
      ++pos;
      CountdownExpr rhs = self(self);
      if (pos >= text.size() || text[pos] != ')') throw ParseError(pos, "expected ')'");
      ++pos;
      return combine(lhs, static_cast<ArithOp>(c), rhs);
    }
    const std::size_t begin = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    return leaf(text::parse_int<int>({text.substr(begin, pos - begin), begin}));
  };
  CountdownExpr e = parse(parse);
  if (pos != text.size()) throw ParseError(pos, "trailing characters after expression");
  return e;
}

CountdownInstance gen_countdown(std::size_t operand_count, std::uint64_t seed) {
  if (operand_count < 2) throw Error(Errc::capacity, "countdown needs at least two operands");
  Rng rng(seed);
  std::uniform_int_distribution<int> operand(1, kCountdownLimit - 1);
  constexpr ArithOp kOps[] = {ArithOp::add, ArithOp::sub, ArithOp::mul, ArithOp::div};
  constexpr int kRestarts = 10000;
  constexpr int kTriesPerMerge = 200;

  for (int restart = 0; restart < kRestarts; ++restart) {
    std::vector<CountdownExpr> pool;
    std::vector<int> values;
    for (std::size_t k = 0; k < operand_count; ++k) {
      values.push_back(operand(rng));
      pool.push_back(CountdownExpr::leaf(values.back()));
    }
    bool stuck = false;
    while (pool.size() > 1 && !stuck) {
      stuck = true;
      for (int attempt = 0; attempt < kTriesPerMerge; ++attempt) {
        const std::size_t i = uniform_index(rng, pool.size());
        std::size_t j = uniform_index(rng, pool.size() - 1);
        if (j >= i) ++j;
        const ArithOp op = kOps[uniform_index(rng, 4)];
        const auto r = apply_op(op, values[i], values[j]);
        if (!r) continue;
        CountdownExpr merged = CountdownExpr::combine(pool[i], op, pool[j]);
        const std::size_t hi = std::max(i, j), lo = std::min(i, j);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(hi));
        values.erase(values.begin() + static_cast<std::ptrdiff_t>(hi));
        pool[lo] = std::move(merged);
        values[lo] = *r;
        stuck = false;
        break;
      }
    }
    if (stuck) continue;
    CountdownInstance c;
    c.solution = std::move(pool.front());
    c.target = values.front();
    c.operands = c.solution.leaves();
    std::sort(c.operands.begin(), c.operands.end());
    return c;
  }
  throw Error(Errc::generation, "countdown sampling budget exhausted");
}

bool verify_countdown(const CountdownInstance& instance) {
  const auto value = instance.solution.evaluate();
  if (!value || *value != instance.target) return false;
  if (instance.target <= 0 || instance.target >= kCountdownLimit) return false;
  auto used = instance.solution.leaves();
  auto given = instance.operands;
  std::sort(used.begin(), used.end());
  std::sort(given.begin(), given.end());
  return used == given;
}

std::string serialize(const CountdownInstance& c) {
  return text::join(c.operands, ",") + " / " + std::to_string(c.target) + " = " +
         c.solution.to_infix();
}

CountdownInstance parse_countdown(std::string_view line) {
  const text::Piece whole{line, 0};
  const auto [operand_part, rest] = text::split_once(whole, " / ");
  const auto [target_part, expr_part] = text::split_once(rest, " = ");
  CountdownInstance c;
  c.operands = text::parse_int_list<int>(operand_part);
  c.target = text::parse_int<int>(target_part);
  try {
    c.solution = CountdownExpr::parse_infix(expr_part.text);
  } catch (const ParseError& e) {
    throw ParseError(expr_part.offset + e.position(), "malformed expression");
  }
  if (!verify_countdown(c)) {
    throw ParseError(expr_part.offset, "expression does not reach the target under the rules");
  }
  return c;
}

// -------------------------------------------------------------------- 3-SAT

namespace {

bool literal_true(int lit, const std::vector<bool>& a) {
  const bool v = a[static_cast<std::size_t>(std::abs(lit) - 1)];
  return lit > 0 ? v : !v;
}

void check_clause(const Clause& c, int var_count) {
  std::set<int> vars;
  for (int lit : c) {
    if (lit == 0 || std::abs(lit) > var_count) {
      throw Error(Errc::invalid_argument, "literal " + std::to_string(lit) + " out of range");
    }
    if (!vars.insert(std::abs(lit)).second) {
      throw Error(Errc::invalid_argument, "clause repeats variable " + std::to_string(std::abs(lit)));
    }
  }
}

}  // namespace

SatInstance gen_sat(std::uint64_t seed, int var_count, int clause_count) {
  if (var_count < 3 || clause_count < 0) {
    throw Error(Errc::capacity, "3-SAT needs at least three variables");
  }
  Rng rng(seed);
  SatInstance s;
  s.var_count = var_count;
  std::bernoulli_distribution coin(0.5);
  for (int k = 0; k < var_count; ++k) s.witness.push_back(coin(rng));

  std::vector<int> vars(static_cast<std::size_t>(var_count));
  std::iota(vars.begin(), vars.end(), 1);
  for (int c = 0; c < clause_count; ++c) {
    // Partial Fisher-Yates for three distinct variables.
    for (std::size_t k = 0; k < 3; ++k) {
      const std::size_t pick = k + uniform_index(rng, vars.size() - k);
      std::swap(vars[k], vars[pick]);
    }
    Clause clause(3);
    do {
      for (std::size_t k = 0; k < 3; ++k) clause[k] = coin(rng) ? vars[k] : -vars[k];
    } while (std::none_of(clause.begin(), clause.end(),
                          [&](int lit) { return literal_true(lit, s.witness); }));
    s.clauses.push_back(clause);
  }
  return s;
}

bool verify_sat(const SatInstance& instance, const std::vector<bool>& assignment) {
  if (assignment.size() != static_cast<std::size_t>(instance.var_count)) {
    throw Error(Errc::invalid_argument, "assignment has " + std::to_string(assignment.size()) +
                                            " values for " + std::to_string(instance.var_count) +
                                            " variables");
  }
  for (const Clause& c : instance.clauses) {
    check_clause(c, instance.var_count);
    if (std::none_of(c.begin(), c.end(), [&](int lit) { return literal_true(lit, assignment); })) {
      return false;
    }
  }
  return true;
}

std::string serialize(const SatInstance& s) {
  std::string out;
  for (std::size_t i = 0; i < s.clauses.size(); ++i) {
    if (i) out += " | ";
    out += text::join(s.clauses[i], ",");
  }
  std::vector<int> bits(s.witness.begin(), s.witness.end());
  out += " / " + std::to_string(s.var_count) + " = " + text::join(bits, ",");
  return out;
}

SatInstance parse_sat(std::string_view line) {
  const text::Piece whole{line, 0};
  const auto [clause_part, rest] = text::split_once(whole, " / ");
  const auto [count_part, witness_part] = text::split_once(rest, " = ");
  SatInstance s;
  s.var_count = text::parse_int<int>(count_part);
  if (s.var_count <= 0) throw ParseError(count_part.offset, "variable count must be positive");
  if (!clause_part.text.empty()) {
    for (const text::Piece& c : text::split(clause_part, " | ")) {
      s.clauses.push_back(text::parse_int_list<int>(c));
      try {
        check_clause(s.clauses.back(), s.var_count);
      } catch (const Error& e) {
        throw ParseError(c.offset, e.what());
      }
    }
  }
  for (const text::Piece& bit : text::split(witness_part, ",")) {
    const int b = text::parse_int<int>(bit);
    if (b != 0 && b != 1) throw ParseError(bit.offset, "witness bits must be 0 or 1");
    s.witness.push_back(b == 1);
  }
  if (s.witness.size() != static_cast<std::size_t>(s.var_count)) {
    throw ParseError(witness_part.offset, "witness length differs from the variable count");
  }
  if (!verify_sat(s, s.witness)) {
    throw ParseError(witness_part.offset, "witness does not satisfy the formula");
  }
  return s;
}

std::optional<TaskKind> task_from_name(std::string_view name) {
  if (name == "star") return TaskKind::star;
  if (name == "tree") return TaskKind::tree;
  if (name == "countdown") return TaskKind::countdown;
  if (name == "sat") return TaskKind::sat;
  return std::nullopt;
}

const char* task_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::star: return "star";
    case TaskKind::tree: return "tree";
    case TaskKind::countdown: return "countdown";
    case TaskKind::sat: return "sat";
  }
  return "?";
}

}  // namespace mtplab
