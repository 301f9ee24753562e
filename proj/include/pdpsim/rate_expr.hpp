#pragma once

#include "pdpsim/types.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace pdpsim::rate_expr {

enum class NodeKind { Number, Identifier, Negate, Add, Sub, Mul, Div, Pow, Call };
enum class Builtin { Exp, Hill };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind;
  double value = 0.0;           // Number
  std::string name;             // Identifier
  Builtin builtin = Builtin::Exp;  // Call
  std::vector<NodePtr> args;    // operands / call arguments
};

/// Immutable scalar expression over named species and parameters.
class RateExpr {
 public:
  RateExpr() = default;
  explicit RateExpr(NodePtr root) : root_(std::move(root)) {}

  const NodePtr& root() const { return root_; }
  bool empty() const { return root_ == nullptr; }

  /// Names of all identifiers appearing in the expression, sorted, unique.
  std::vector<std::string> identifiers() const;

  bool structurally_equal(const RateExpr& other) const;

 private:
  NodePtr root_;
};

/// Name -> value environment for evaluation. Species and parameters share
/// one namespace; the model layer guarantees uniqueness.
struct Binding {
  std::map<std::string, double> values;

  double lookup(const std::string& name) const;
};

/// Parses the concrete syntax: numbers, identifiers, + - * / ^ (with ^
/// right-associative and binding tighter than unary minus), parentheses,
/// and calls of exp(x) and hill(x, K, n). Whitespace-insensitive.
/// Throws ParseError with a 1-based character position.
RateExpr parse_rate_expr(const std::string& text);

/// Canonical fully-parenthesized rendering; parse(print(e)) is structurally
/// identical to e.
std::string print_rate_expr(const RateExpr& expr);

/// Evaluates with standard real arithmetic; hill(x,K,n) = x^n / (K^n + x^n).
/// Throws DomainError on division by zero, 0^negative, or any non-finite
/// intermediate. Negative results are legal here; the propensity layer
/// rejects them.
double eval_rate(const RateExpr& expr, const Binding& binding);

struct Interval {
  double lo;
  double hi;
};

/// Max over grid-adjacent pairs of |delta f| / |delta input| on a tensor
/// grid over the given box; a lower bound on the Lipschitz constant.
/// Diagnostic only.
double lipschitz_probe(const RateExpr& expr,
                       const std::map<std::string, Interval>& box, int grid);

/// Expression compiled against a fixed slot layout: identifiers become
/// indices into a state vector, parameters fold to constants. This is the
/// hot evaluation path used by the simulators; it never allocates.
class CompiledExpr {
 public:
  CompiledExpr() = default;

  /// slot_of maps a species name to its index in the state vector passed to
  /// eval(); names present in params instead fold to constants. Unknown
  /// identifiers throw ModelError.
  static CompiledExpr compile(const RateExpr& expr,
                              const std::map<std::string, int>& slot_of,
                              const std::map<std::string, double>& params);

  double eval(const VecXd& state) const;

  /// Species slots the expression actually reads.
  const std::vector<int>& used_slots() const { return used_slots_; }

 private:
  // Post-order instruction tape.
  enum class Op : std::uint8_t { PushConst, PushSlot, Neg, Add, Sub, Mul, Div, Pow, Exp, Hill };
  struct Instr {
    Op op;
    int slot = 0;
    double value = 0.0;
  };

  std::vector<Instr> tape_;
  std::vector<int> used_slots_;
  int max_depth_ = 0;
};

}  // namespace pdpsim::rate_expr
