#pragma once

// Generators, validators and one-line text formats for the four planning
// tasks: star graphs, complete binary trees, Countdown and planted 3-SAT.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mtplab {

using NodeId = std::uint32_t;  // labels are 1-based

struct Edge {
  NodeId from = 0;
  NodeId to = 0;
  bool operator==(const Edge&) const = default;
};

enum class GraphKind { star, tree };

struct GraphInstance {
  GraphKind kind = GraphKind::star;
  std::size_t node_count = 0;  // label universe [1..node_count]
  std::vector<Edge> edges;
  NodeId start = 0;
  NodeId end = 0;
  std::vector<NodeId> path;  // start .. end

  std::size_t path_count() const;  // out-degree of start
  std::size_t path_len() const { return path.size(); }
  bool operator==(const GraphInstance&) const = default;
};

using StarInstance = GraphInstance;
using TreeInstance = GraphInstance;

StarInstance gen_star(std::size_t path_count, std::size_t path_len, std::size_t node_count,
                      std::uint64_t seed);
TreeInstance gen_binary_tree(std::size_t depth, std::uint64_t seed);

// Unique walk start -> end following out-edges, or nullopt if none exists or
// the walk is ambiguous.
std::optional<std::vector<NodeId>> walk_path(const std::vector<Edge>& edges, NodeId start,
                                             NodeId end);

// Throws Error(Errc::parse) describing the first violated invariant.
void validate_graph(const GraphInstance& g);

// Which prompt node comes first after " / ". The disentangled pipeline puts
// the end node first; exported text uses start first.
enum class PromptOrder { start_end, end_start };

std::string serialize(const GraphInstance& g, PromptOrder order = PromptOrder::start_end);
// node_count defaults to the largest label seen when not given.
GraphInstance parse_graph(std::string_view line, GraphKind kind,
                          PromptOrder order = PromptOrder::start_end,
                          std::optional<std::size_t> node_count = std::nullopt);

// ---------------------------------------------------------------- Countdown

inline constexpr int kCountdownLimit = 100;  // operands, target and intermediates stay below

enum class ArithOp : char { add = '+', sub = '-', mul = '*', div = '/' };

// Applies op under the Countdown rules: result must be a positive integer
// below the limit, and division must be exact.
std::optional<int> apply_op(ArithOp op, int lhs, int rhs);

class CountdownExpr {
 public:
  struct Node {
    int value = 0;  // leaves only
    ArithOp op = ArithOp::add;
    int lhs = -1;
    int rhs = -1;
    bool leaf() const { return lhs < 0; }
    bool operator==(const Node&) const = default;
  };

  static CountdownExpr leaf(int value);
  static CountdownExpr combine(const CountdownExpr& lhs, ArithOp op, const CountdownExpr& rhs);

  const std::vector<Node>& nodes() const { return nodes_; }
  int root() const { return static_cast<int>(nodes_.size()) - 1; }
  std::vector<int> leaves() const;
  // Throws Error(Errc::parse) for a structurally broken tree; returns
  // nullopt when a rule is violated.
  std::optional<int> evaluate() const;
  // Fully parenthesised infix, e.g. "((97-40)/(14-11))".
  std::string to_infix() const;
  static CountdownExpr parse_infix(std::string_view text);

  bool operator==(const CountdownExpr&) const = default;

 private:
  std::vector<Node> nodes_;  // children precede parents; root is last
};

struct CountdownInstance {
  std::vector<int> operands;  // ascending
  int target = 0;
  CountdownExpr solution;
  bool operator==(const CountdownInstance&) const = default;
};

CountdownInstance gen_countdown(std::size_t operand_count, std::uint64_t seed);
bool verify_countdown(const CountdownInstance& instance);

std::string serialize(const CountdownInstance& c);
CountdownInstance parse_countdown(std::string_view line);

// -------------------------------------------------------------------- 3-SAT

inline constexpr int kSatVariables = 7;
inline constexpr int kSatClauses = 45;

// Signed literals, |lit| in [1..var_count]. Generated clauses have exactly
// three distinct variables; the verifier accepts any width.
using Clause = std::vector<int>;

struct SatInstance {
  int var_count = kSatVariables;
  std::vector<Clause> clauses;
  std::vector<bool> witness;
  bool operator==(const SatInstance&) const = default;
};

SatInstance gen_sat(std::uint64_t seed, int var_count = kSatVariables,
                    int clause_count = kSatClauses);
bool verify_sat(const SatInstance& instance, const std::vector<bool>& assignment);

std::string serialize(const SatInstance& s);
SatInstance parse_sat(std::string_view line);

// ---------------------------------------------------------------- datasets

enum class TaskKind { star, tree, countdown, sat };

std::optional<TaskKind> task_from_name(std::string_view name);
const char* task_name(TaskKind kind);

}  // namespace mtplab
