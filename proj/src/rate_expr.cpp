#include "pdpsim/rate_expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

namespace pdpsim::rate_expr {

namespace {

NodePtr make_number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Number;
  n->value = v;
  return n;
}

NodePtr make_ident(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Identifier;
  n->name = std::move(name);
  return n;
}

NodePtr make_unary(NodeKind k, NodePtr a) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->args = {std::move(a)};
  return n;
}

NodePtr make_binary(NodeKind k, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->args = {std::move(a), std::move(b)};
  return n;
}

// Recursive-descent parser. Grammar (1-based error positions):
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' factor)?          (right-associative)
//   atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  RateExpr parse() {
    skip_ws();
    if (at_end()) fail("empty expression");
    NodePtr e = parse_expr();
    skip_ws();
    if (!at_end()) fail("unexpected trailing input");
    return RateExpr(std::move(e));
  }

 private:
  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      skip_ws();
      if (accept('+')) {
        lhs = make_binary(NodeKind::Add, std::move(lhs), parse_term());
      } else if (accept('-')) {
        lhs = make_binary(NodeKind::Sub, std::move(lhs), parse_term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_factor();
    for (;;) {
      skip_ws();
      if (accept('*')) {
        lhs = make_binary(NodeKind::Mul, std::move(lhs), parse_factor());
      } else if (accept('/')) {
        lhs = make_binary(NodeKind::Div, std::move(lhs), parse_factor());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_factor() {
    skip_ws();
    if (accept('-')) return make_unary(NodeKind::Negate, parse_factor());
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    skip_ws();
    if (accept('^')) return make_binary(NodeKind::Pow, std::move(base), parse_factor());
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (at_end()) fail("expected a value");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      skip_ws();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string name = parse_ident_name();
      skip_ws();
      if (!at_end() && text_[pos_] == '(') {
        return parse_call(name);
      }
      return make_ident(std::move(name));
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    while (!at_end() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                         text_[pos_] == '.')) {
      ++pos_;
    }
    if (!at_end() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (!at_end() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (at_end() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        pos_ = mark;  // 'e' belongs to a following identifier, not this literal
      } else {
        while (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    const std::string token = text_.substr(start, pos_ - start);
    try {
      std::size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      return make_number(v);
    } catch (const std::exception&) {
      pos_ = start;
      fail("malformed number '" + token + "'");
    }
  }

  std::string parse_ident_name() {
    const std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                         text_[pos_] == '_')) {
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  NodePtr parse_call(const std::string& name) {
    Builtin builtin;
    std::size_t arity;
    if (name == "exp") {
      builtin = Builtin::Exp;
      arity = 1;
    } else if (name == "hill") {
      builtin = Builtin::Hill;
      arity = 3;
    } else {
      pos_ -= name.size();
      fail("unknown function '" + name + "'");
    }
    expect('(');
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Call;
    n->builtin = builtin;
    n->args.push_back(parse_expr());
    while (true) {
      skip_ws();
      if (accept(',')) {
        n->args.push_back(parse_expr());
      } else {
        break;
      }
    }
    expect(')');
    if (n->args.size() != arity) {
      fail(name + " takes " + std::to_string(arity) + " argument(s), got " +
           std::to_string(n->args.size()));
    }
    return n;
  }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end() const { return pos_ >= text_.size(); }
  bool accept(char c) {
    if (!at_end() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    skip_ws();
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }
  [[noreturn]] void fail(const std::string& what) {
    throw ParseError("syntax error at position " + std::to_string(pos_ + 1) + ": " + what,
                     pos_ + 1);
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

void collect_identifiers(const NodePtr& node, std::set<std::string>& out) {
  if (!node) return;
  if (node->kind == NodeKind::Identifier) out.insert(node->name);
  for (const auto& a : node->args) collect_identifiers(a, out);
}

bool nodes_equal(const NodePtr& a, const NodePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case NodeKind::Number:
      return a->value == b->value;
    case NodeKind::Identifier:
      return a->name == b->name;
    case NodeKind::Call:
      if (a->builtin != b->builtin) return false;
      break;
    default:
      break;
  }
  if (a->args.size() != b->args.size()) return false;
  for (std::size_t i = 0; i < a->args.size(); ++i) {
    if (!nodes_equal(a->args[i], b->args[i])) return false;
  }
  return true;
}

void print_node(const NodePtr& node, std::ostringstream& out) {
  switch (node->kind) {
    case NodeKind::Number: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", node->value);
      out << buf;
      return;
    }
    case NodeKind::Identifier:
      out << node->name;
      return;
    case NodeKind::Negate:
      out << "(-";
      print_node(node->args[0], out);
      out << ")";
      return;
    case NodeKind::Call:
      out << (node->builtin == Builtin::Exp ? "exp(" : "hill(");
      for (std::size_t i = 0; i < node->args.size(); ++i) {
        if (i > 0) out << ", ";
        print_node(node->args[i], out);
      }
      out << ")";
      return;
    default:
      break;
  }
  const char* op = nullptr;
  switch (node->kind) {
    case NodeKind::Add: op = " + "; break;
    case NodeKind::Sub: op = " - "; break;
    case NodeKind::Mul: op = " * "; break;
    case NodeKind::Div: op = " / "; break;
    case NodeKind::Pow: op = " ^ "; break;
    default: op = " ? "; break;
  }
  out << "(";
  print_node(node->args[0], out);
  out << op;
  print_node(node->args[1], out);
  out << ")";
}

double checked_pow(double base, double expo) {
  if (base == 0.0 && expo < 0.0) throw DomainError("0 raised to a negative power");
  const double v = std::pow(base, expo);
  if (!std::isfinite(v)) {
    throw DomainError("non-finite result of " + std::to_string(base) + " ^ " +
                      std::to_string(expo));
  }
  return v;
}

double checked_hill(double x, double k, double n) {
  const double xn = checked_pow(x, n);
  const double kn = checked_pow(k, n);
  const double denom = kn + xn;
  if (denom == 0.0) throw DomainError("hill denominator K^n + x^n is zero");
  return xn / denom;
}

double eval_node(const NodePtr& node, const Binding& binding) {
  switch (node->kind) {
    case NodeKind::Number:
      return node->value;
    case NodeKind::Identifier:
      return binding.lookup(node->name);
    case NodeKind::Negate:
      return -eval_node(node->args[0], binding);
    case NodeKind::Add:
      return eval_node(node->args[0], binding) + eval_node(node->args[1], binding);
    case NodeKind::Sub:
      return eval_node(node->args[0], binding) - eval_node(node->args[1], binding);
    case NodeKind::Mul:
      return eval_node(node->args[0], binding) * eval_node(node->args[1], binding);
    case NodeKind::Div: {
      const double denom = eval_node(node->args[1], binding);
      if (denom == 0.0) throw DomainError("division by zero");
      return eval_node(node->args[0], binding) / denom;
    }
    case NodeKind::Pow:
      return checked_pow(eval_node(node->args[0], binding),
                         eval_node(node->args[1], binding));
    case NodeKind::Call:
      if (node->builtin == Builtin::Exp) {
        const double v = std::exp(eval_node(node->args[0], binding));
        if (!std::isfinite(v)) throw DomainError("exp overflow");
        return v;
      }
      return checked_hill(eval_node(node->args[0], binding),
                          eval_node(node->args[1], binding),
                          eval_node(node->args[2], binding));
  }
  throw DomainError("corrupt expression node");
}

}  // namespace

double Binding::lookup(const std::string& name) const {
  auto it = values.find(name);
  if (it == values.end()) throw ModelError("unbound identifier '" + name + "'");
  return it->second;
}

std::vector<std::string> RateExpr::identifiers() const {
  std::set<std::string> names;
  collect_identifiers(root_, names);
  return {names.begin(), names.end()};
}

bool RateExpr::structurally_equal(const RateExpr& other) const {
  return nodes_equal(root_, other.root_);
}

RateExpr parse_rate_expr(const std::string& text) {
  return Parser(text).parse();
}

std::string print_rate_expr(const RateExpr& expr) {
  if (expr.empty()) return "";
  std::ostringstream out;
  print_node(expr.root(), out);
  return out.str();
}

double eval_rate(const RateExpr& expr, const Binding& binding) {
  if (expr.empty()) throw DomainError("empty expression");
  return eval_node(expr.root(), binding);
}

double lipschitz_probe(const RateExpr& expr,
                       const std::map<std::string, Interval>& box, int grid) {
  if (grid < 2) throw ModelError("lipschitz_probe needs grid >= 2");
  std::vector<std::string> names = expr.identifiers();
  for (const auto& name : names) {
    auto it = box.find(name);
    if (it == box.end()) throw ModelError("lipschitz_probe: no interval for '" + name + "'");
    if (!(it->second.hi > it->second.lo)) {
      throw ModelError("lipschitz_probe: degenerate interval for '" + name + "'");
    }
  }
  const std::size_t dim = names.size();
  if (dim == 0) return 0.0;  // constant expression

  std::vector<double> lo(dim), step(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    const Interval& iv = box.at(names[d]);
    lo[d] = iv.lo;
    step[d] = (iv.hi - iv.lo) / (grid - 1);
  }

  // Evaluate on the full tensor grid.
  std::size_t total = 1;
  for (std::size_t d = 0; d < dim; ++d) total *= static_cast<std::size_t>(grid);
  std::vector<double> values(total);
  Binding binding;
  std::vector<int> idx(dim, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (std::size_t d = 0; d < dim; ++d) {
      idx[d] = static_cast<int>(rem % grid);
      rem /= grid;
    }
    for (std::size_t d = 0; d < dim; ++d) binding.values[names[d]] = lo[d] + idx[d] * step[d];
    values[flat] = eval_rate(expr, binding);
  }

  double best = 0.0;
  std::size_t stride = 1;
  for (std::size_t d = 0; d < dim; ++d) {
    for (std::size_t flat = 0; flat < total; ++flat) {
      const std::size_t coord = (flat / stride) % grid;
      if (coord + 1 >= static_cast<std::size_t>(grid)) continue;
      const double slope = std::abs(values[flat + stride] - values[flat]) / step[d];
      best = std::max(best, slope);
    }
    stride *= static_cast<std::size_t>(grid);
  }
  return best;
}

CompiledExpr CompiledExpr::compile(const RateExpr& expr,
                                   const std::map<std::string, int>& slot_of,
                                   const std::map<std::string, double>& params) {
  CompiledExpr compiled;
  std::set<int> used;

  // Emit post-order; track stack depth.
  int depth = 0;
  int max_depth = 0;
  auto push = [&](Instr instr, int delta) {
    compiled.tape_.push_back(instr);
    depth += delta;
    max_depth = std::max(max_depth, depth);
  };

  std::function<void(const NodePtr&)> emit = [&](const NodePtr& node) {
    switch (node->kind) {
      case NodeKind::Number:
        push({Op::PushConst, 0, node->value}, +1);
        return;
      case NodeKind::Identifier: {
        auto slot = slot_of.find(node->name);
        if (slot != slot_of.end()) {
          used.insert(slot->second);
          push({Op::PushSlot, slot->second, 0.0}, +1);
          return;
        }
        auto param = params.find(node->name);
        if (param != params.end()) {
          push({Op::PushConst, 0, param->second}, +1);
          return;
        }
        throw ModelError("unbound identifier '" + node->name + "' in rate expression");
      }
      case NodeKind::Negate:
        emit(node->args[0]);
        push({Op::Neg, 0, 0.0}, 0);
        return;
      case NodeKind::Add:
      case NodeKind::Sub:
      case NodeKind::Mul:
      case NodeKind::Div:
      case NodeKind::Pow: {
        emit(node->args[0]);
        emit(node->args[1]);
        Op op = Op::Add;
        if (node->kind == NodeKind::Sub) op = Op::Sub;
        if (node->kind == NodeKind::Mul) op = Op::Mul;
        if (node->kind == NodeKind::Div) op = Op::Div;
        if (node->kind == NodeKind::Pow) op = Op::Pow;
        push({op, 0, 0.0}, -1);
        return;
      }
      case NodeKind::Call:
        for (const auto& a : node->args) emit(a);
        if (node->builtin == Builtin::Exp) {
          push({Op::Exp, 0, 0.0}, 0);
        } else {
          push({Op::Hill, 0, 0.0}, -2);
        }
        return;
    }
  };
  if (expr.empty()) throw ModelError("cannot compile empty expression");
  emit(expr.root());
  compiled.max_depth_ = max_depth;
  compiled.used_slots_.assign(used.begin(), used.end());
  return compiled;
}

double CompiledExpr::eval(const VecXd& state) const {
  double local[64];
  std::vector<double> heap;
  double* stack = local;
  if (max_depth_ > 64) {
    heap.resize(static_cast<std::size_t>(max_depth_));
    stack = heap.data();
  }
  int top = 0;
  for (const Instr& instr : tape_) {
    switch (instr.op) {
      case Op::PushConst: stack[top++] = instr.value; break;
      case Op::PushSlot: stack[top++] = state[instr.slot]; break;
      case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
      case Op::Add: stack[top - 2] += stack[top - 1]; --top; break;
      case Op::Sub: stack[top - 2] -= stack[top - 1]; --top; break;
      case Op::Mul: stack[top - 2] *= stack[top - 1]; --top; break;
      case Op::Div: {
        if (stack[top - 1] == 0.0) throw DomainError("division by zero");
        stack[top - 2] /= stack[top - 1];
        --top;
        break;
      }
      case Op::Pow:
        stack[top - 2] = checked_pow(stack[top - 2], stack[top - 1]);
        --top;
        break;
      case Op::Exp: {
        const double v = std::exp(stack[top - 1]);
        if (!std::isfinite(v)) throw DomainError("exp overflow");
        stack[top - 1] = v;
        break;
      }
      case Op::Hill:
        stack[top - 3] = checked_hill(stack[top - 3], stack[top - 2], stack[top - 1]);
        top -= 2;
        break;
    }
  }
  return stack[0];
}

}  // namespace pdpsim::rate_expr
