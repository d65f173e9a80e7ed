#pragma once
// Expression trees for switched-system vector fields.
//
// The expression language covers scalar formulas over the state variables
// x1..xn, time t, and the switching multiplier lam.  Supported syntax:
//
//   expr   := term (("+" | "-") term)*
//   term   := unary (("*" | "/") unary)*
//   unary  := "-" unary | power
//   power  := atom ("^" unary)?          (right associative)
//   atom   := number | ident | ident "(" expr ")" | "(" expr ")"
//
// "^" binds tighter than unary minus, so -x1^2 means -(x1^2).  The
// constants pi and e are folded to numeric literals at parse time.
// Functions: sin cos tan tanh exp log sqrt abs sign atan (one argument).
//
// Trees are immutable after construction.  Evaluation is exact-arithmetic
// double; first derivatives come from forward-mode dual numbers, so they
// are exact up to roundoff (no finite differencing).  sign and abs
// differentiate to their one-sided value from the right at the kink and
// set a non-smoothness flag there.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hidyn {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int position)
      : std::runtime_error(msg + " (at position " + std::to_string(position) + ")"),
        pos_(position) {}
  int position() const { return pos_; }

 private:
  int pos_;
};

class EvalError : public std::runtime_error {
 public:
  EvalError(const std::string& msg, int position)
      : std::runtime_error(msg + " (at position " + std::to_string(position) + ")"),
        pos_(position) {}
  int position() const { return pos_; }

 private:
  int pos_;
};

enum class VarKind : std::uint8_t { State, Time, Lambda };

struct VarRef {
  VarKind kind = VarKind::State;
  int index = 0;  // state slot, 0-based; unused for Time/Lambda

  static VarRef state(int i) { return {VarKind::State, i}; }
  static VarRef time() { return {VarKind::Time, 0}; }
  static VarRef lambda() { return {VarKind::Lambda, 0}; }
  bool operator==(const VarRef&) const = default;
};

struct Bindings {
  std::span<const double> x;
  double t = 0.0;
  double lam = 0.0;
};

// Value/derivative pair for forward-mode differentiation.
struct Dual {
  double v = 0.0;
  double d = 0.0;
};

enum class NodeKind : std::uint8_t { Number, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };

enum class FuncId : std::uint8_t { Sin, Cos, Tan, Tanh, Exp, Log, Sqrt, Abs, Sign, Atan };

struct ExprNode {
  NodeKind kind = NodeKind::Number;
  std::uint8_t aux = 0;   // FuncId for Call, VarKind for Variable
  std::int32_t a = -1;    // first child, or state index for Variable
  std::int32_t b = -1;    // second child
  double value = 0.0;     // Number payload
  std::int32_t pos = 0;   // source offset for error reporting
};

// Shortest-round-trip-safe formatting: 17 significant digits.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Expr {
 public:
  Expr() = default;

  // Parses text over x1..xn, t, lam.  Throws ParseError.
  static Expr parse(std::string_view text, int n);

  // Synthetic construction (used by the hidden-term decomposition).
  static Expr number(double v);
  static Expr variable(VarRef var, int dim);

  double eval(const Bindings& b) const { return eval_node(root_, b); }

  // d(expr)/d(var) at the bindings.  If the evaluation passes through the
  // kink of abs/sign, *smooth is cleared and the right-sided value is used.
  double deriv(const Bindings& b, VarRef var, bool* smooth = nullptr) const {
    bool sm = true;
    Dual r = deval_node(root_, b, var, sm);
    if (smooth) *smooth = sm;
    return r.d;
  }

  std::string print() const {
    std::string out;
    print_node(root_, out, 0);
    return out;
  }

  bool depends_on(VarRef var) const { return depends_node(root_, var); }
  bool subtree_depends_on(int node, VarRef var) const { return depends_node(node, var); }

  // True when no abs/sign is applied to a subtree that depends on var.
  bool smooth_in(VarRef var) const { return smooth_node(root_, var); }

  bool equals(const Expr& other) const { return equal_nodes(*this, root_, other, other.root_); }
  bool operator==(const Expr& other) const { return equals(other); }

  int dim() const { return dim_; }
  std::span<const ExprNode> nodes() const { return nodes_; }
  int root() const { return root_; }

  // Deep-copies the subtree rooted at node into a standalone expression.
  Expr subexpr(int node) const;

 private:
  friend class ExprBuilder;
  std::vector<ExprNode> nodes_;
  std::int32_t root_ = -1;
  int dim_ = 0;

  double eval_node(int i, const Bindings& b) const;
  Dual deval_node(int i, const Bindings& b, VarRef var, bool& smooth) const;
  void print_node(int i, std::string& out, int parent_prec) const;
  bool depends_node(int i, VarRef var) const;
  bool smooth_node(int i, VarRef var) const;
  static bool equal_nodes(const Expr& ea, int ia, const Expr& eb, int ib);
  int copy_into(std::vector<ExprNode>& dst, int i) const;
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

struct FuncEntry {
  std::string_view name;
  FuncId id;
};

inline constexpr FuncEntry kFuncTable[] = {
    {"sin", FuncId::Sin},   {"cos", FuncId::Cos},   {"tan", FuncId::Tan},
    {"tanh", FuncId::Tanh}, {"exp", FuncId::Exp},   {"log", FuncId::Log},
    {"sqrt", FuncId::Sqrt}, {"abs", FuncId::Abs},   {"sign", FuncId::Sign},
    {"atan", FuncId::Atan},
};

inline std::optional<FuncId> lookup_func(std::string_view name) {
  for (const auto& f : kFuncTable)
    if (f.name == name) return f.id;
  return std::nullopt;
}

inline const char* func_name(FuncId id) {
  return kFuncTable[static_cast<int>(id)].name.data();
}

class Parser {
 public:
  Parser(std::string_view text, int n, std::vector<ExprNode>& nodes)
      : text_(text), n_(n), nodes_(nodes) {}

  int parse() {
    skip_ws();
    int root = parse_expr();
    skip_ws();
    if (pos_ != static_cast<int>(text_.size()))
      throw ParseError("unexpected trailing input", pos_);
    return root;
  }

 private:
  std::string_view text_;
  int n_;
  std::vector<ExprNode>& nodes_;
  int pos_ = 0;

  int add(ExprNode nd) {
    nodes_.push_back(nd);
    return static_cast<int>(nodes_.size()) - 1;
  }

  void skip_ws() {
    while (pos_ < static_cast<int>(text_.size()) &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r' ||
            text_[pos_] == '\n'))
      ++pos_;
  }

  char peek() const {
    return pos_ < static_cast<int>(text_.size()) ? text_[pos_] : '\0';
  }

  bool accept(char c) {
    skip_ws();
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!accept(c)) throw ParseError(std::string("expected ") + what, pos_);
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      skip_ws();
      char c = peek();
      if (c != '+' && c != '-') return lhs;
      int op_pos = pos_;
      ++pos_;
      int rhs = parse_term();
      lhs = add({c == '+' ? NodeKind::Add : NodeKind::Sub, 0, lhs, rhs, 0.0, op_pos});
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    for (;;) {
      skip_ws();
      char c = peek();
      if (c != '*' && c != '/') return lhs;
      int op_pos = pos_;
      ++pos_;
      int rhs = parse_unary();
      lhs = add({c == '*' ? NodeKind::Mul : NodeKind::Div, 0, lhs, rhs, 0.0, op_pos});
    }
  }

  int parse_unary() {
    skip_ws();
    if (peek() == '-') {
      int op_pos = pos_;
      ++pos_;
      int child = parse_unary();
      return add({NodeKind::Negate, 0, child, -1, 0.0, op_pos});
    }
    return parse_power();
  }

  int parse_power() {
    int base = parse_atom();
    skip_ws();
    if (peek() == '^') {
      int op_pos = pos_;
      ++pos_;
      int expo = parse_unary();  // right associative, unary minus allowed
      return add({NodeKind::Pow, 0, base, expo, 0.0, op_pos});
    }
    return base;
  }

  int parse_atom() {
    skip_ws();
    int start = pos_;
    char c = peek();
    if (c == '(') {
      ++pos_;
      int inner = parse_expr();
      expect(')', "')'");
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') return parse_ident();
    if (c == '\0') throw ParseError("unexpected end of input", start);
    throw ParseError(std::string("unexpected character '") + c + "'", start);
  }

  int parse_number() {
    int start = pos_;
    // Validate the shape ourselves, then let strtod produce the value.
    int p = pos_;
    int len = static_cast<int>(text_.size());
    bool digits = false;
    while (p < len && text_[p] >= '0' && text_[p] <= '9') ++p, digits = true;
    if (p < len && text_[p] == '.') {
      ++p;
      while (p < len && text_[p] >= '0' && text_[p] <= '9') ++p, digits = true;
    }
    if (!digits) throw ParseError("malformed number", start);
    if (p < len && (text_[p] == 'e' || text_[p] == 'E')) {
      int q = p + 1;
      if (q < len && (text_[q] == '+' || text_[q] == '-')) ++q;
      if (q < len && text_[q] >= '0' && text_[q] <= '9') {
        while (q < len && text_[q] >= '0' && text_[q] <= '9') ++q;
        p = q;  // exponent is real; otherwise leave 'e' for the next token
      }
    }
    std::string lit(text_.substr(start, p - start));
    char* end = nullptr;
    double v = std::strtod(lit.c_str(), &end);
    if (end != lit.c_str() + lit.size()) throw ParseError("malformed number", start);
    pos_ = p;
    return add({NodeKind::Number, 0, -1, -1, v, start});
  }

  int parse_ident() {
    int start = pos_;
    int len = static_cast<int>(text_.size());
    int p = pos_;
    while (p < len && ((text_[p] >= 'a' && text_[p] <= 'z') ||
                       (text_[p] >= 'A' && text_[p] <= 'Z') ||
                       (text_[p] >= '0' && text_[p] <= '9') || text_[p] == '_'))
      ++p;
    std::string_view name = text_.substr(start, p - start);
    pos_ = p;
    skip_ws();

    if (peek() == '(') {
      auto fid = lookup_func(name);
      if (!fid)
        throw ParseError("unknown function '" + std::string(name) + "'", start);
      ++pos_;
      int arg = parse_expr();
      expect(')', "')' after function argument");
      return add({NodeKind::Call, static_cast<std::uint8_t>(*fid), arg, -1, 0.0, start});
    }

    if (lookup_func(name))
      throw ParseError("function '" + std::string(name) + "' needs an argument list", start);

    if (name == "t")
      return add({NodeKind::Variable, static_cast<std::uint8_t>(VarKind::Time), 0, -1, 0.0, start});
    if (name == "lam")
      return add({NodeKind::Variable, static_cast<std::uint8_t>(VarKind::Lambda), 0, -1, 0.0, start});
    if (name == "pi")
      return add({NodeKind::Number, 0, -1, -1, 3.14159265358979323846, start});
    if (name == "e")
      return add({NodeKind::Number, 0, -1, -1, 2.71828182845904523536, start});
    if (name.size() >= 2 && name[0] == 'x') {
      bool all_digits = true;
      for (std::size_t i = 1; i < name.size(); ++i)
        if (name[i] < '0' || name[i] > '9') all_digits = false;
      if (all_digits) {
        long idx = std::strtol(std::string(name.substr(1)).c_str(), nullptr, 10);
        if (idx >= 1 && idx <= n_)
          return add({NodeKind::Variable, static_cast<std::uint8_t>(VarKind::State),
                      static_cast<std::int32_t>(idx - 1), -1, 0.0, start});
        throw ParseError("state variable '" + std::string(name) + "' out of range (n=" +
                             std::to_string(n_) + ")",
                         start);
      }
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }
};

}  // namespace detail

inline Expr Expr::parse(std::string_view text, int n) {
  Expr e;
  e.dim_ = n;
  detail::Parser p(text, n, e.nodes_);
  e.root_ = p.parse();
  return e;
}

inline Expr Expr::number(double v) {
  Expr e;
  e.dim_ = 0;
  if (v < 0.0 || (v == 0.0 && std::signbit(v))) {
    // Keep literals non-negative so printed output re-parses to the same tree.
    e.nodes_.push_back({NodeKind::Number, 0, -1, -1, -v, 0});
    e.nodes_.push_back({NodeKind::Negate, 0, 0, -1, 0.0, 0});
    e.root_ = 1;
  } else {
    e.nodes_.push_back({NodeKind::Number, 0, -1, -1, v, 0});
    e.root_ = 0;
  }
  return e;
}

inline Expr Expr::variable(VarRef var, int dim) {
  Expr e;
  e.dim_ = dim;
  e.nodes_.push_back({NodeKind::Variable, static_cast<std::uint8_t>(var.kind),
                      var.index, -1, 0.0, 0});
  e.root_ = 0;
  return e;
}

inline Expr Expr::subexpr(int node) const {
  Expr e;
  e.dim_ = dim_;
  e.root_ = copy_into(e.nodes_, node);
  return e;
}

inline int Expr::copy_into(std::vector<ExprNode>& dst, int i) const {
  const ExprNode& nd = nodes_[i];
  ExprNode out = nd;
  if (nd.kind != NodeKind::Number && nd.kind != NodeKind::Variable) {
    if (nd.a >= 0) out.a = copy_into(dst, nd.a);
    if (nd.b >= 0) out.b = copy_into(dst, nd.b);
  }
  dst.push_back(out);
  return static_cast<int>(dst.size()) - 1;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

inline bool is_integer(double v) {
  return std::rint(v) == v && std::abs(v) < 9.0e15;
}

inline double pow_checked(double base, double expo, int pos) {
  if (base == 0.0 && expo < 0.0)
    throw EvalError("zero raised to a negative power", pos);
  if (base < 0.0 && !is_integer(expo))
    throw EvalError("negative base with non-integer exponent", pos);
  return std::pow(base, expo);
}

}  // namespace detail

inline double Expr::eval_node(int i, const Bindings& b) const {
  const ExprNode& nd = nodes_[i];
  switch (nd.kind) {
    case NodeKind::Number:
      return nd.value;
    case NodeKind::Variable:
      switch (static_cast<VarKind>(nd.aux)) {
        case VarKind::Time:
          return b.t;
        case VarKind::Lambda:
          return b.lam;
        case VarKind::State:
          if (nd.a < 0 || nd.a >= static_cast<std::int32_t>(b.x.size()))
            throw EvalError("state binding x" + std::to_string(nd.a + 1) + " missing", nd.pos);
          return b.x[nd.a];
      }
      return 0.0;
    case NodeKind::Negate:
      return -eval_node(nd.a, b);
    case NodeKind::Add:
      return eval_node(nd.a, b) + eval_node(nd.b, b);
    case NodeKind::Sub:
      return eval_node(nd.a, b) - eval_node(nd.b, b);
    case NodeKind::Mul:
      return eval_node(nd.a, b) * eval_node(nd.b, b);
    case NodeKind::Div: {
      double den = eval_node(nd.b, b);
      if (den == 0.0) throw EvalError("division by zero", nd.pos);
      return eval_node(nd.a, b) / den;
    }
    case NodeKind::Pow:
      return detail::pow_checked(eval_node(nd.a, b), eval_node(nd.b, b), nd.pos);
    case NodeKind::Call: {
      double a = eval_node(nd.a, b);
      switch (static_cast<FuncId>(nd.aux)) {
        case FuncId::Sin: return std::sin(a);
        case FuncId::Cos: return std::cos(a);
        case FuncId::Tan: return std::tan(a);
        case FuncId::Tanh: return std::tanh(a);
        case FuncId::Exp: return std::exp(a);
        case FuncId::Log:
          if (a <= 0.0) throw EvalError("log of non-positive value", nd.pos);
          return std::log(a);
        case FuncId::Sqrt:
          if (a < 0.0) throw EvalError("sqrt of negative value", nd.pos);
          return std::sqrt(a);
        case FuncId::Abs: return std::abs(a);
        case FuncId::Sign: return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
        case FuncId::Atan: return std::atan(a);
      }
      return 0.0;
    }
  }
  return 0.0;
}

inline Dual Expr::deval_node(int i, const Bindings& b, VarRef var, bool& smooth) const {
  const ExprNode& nd = nodes_[i];
  switch (nd.kind) {
    case NodeKind::Number:
      return {nd.value, 0.0};
    case NodeKind::Variable: {
      VarKind k = static_cast<VarKind>(nd.aux);
      double v;
      if (k == VarKind::Time)
        v = b.t;
      else if (k == VarKind::Lambda)
        v = b.lam;
      else {
        if (nd.a < 0 || nd.a >= static_cast<std::int32_t>(b.x.size()))
          throw EvalError("state binding x" + std::to_string(nd.a + 1) + " missing", nd.pos);
        v = b.x[nd.a];
      }
      bool match = (k == var.kind) && (k != VarKind::State || nd.a == var.index);
      return {v, match ? 1.0 : 0.0};
    }
    case NodeKind::Negate: {
      Dual a = deval_node(nd.a, b, var, smooth);
      return {-a.v, -a.d};
    }
    case NodeKind::Add: {
      Dual a = deval_node(nd.a, b, var, smooth), c = deval_node(nd.b, b, var, smooth);
      return {a.v + c.v, a.d + c.d};
    }
    case NodeKind::Sub: {
      Dual a = deval_node(nd.a, b, var, smooth), c = deval_node(nd.b, b, var, smooth);
      return {a.v - c.v, a.d - c.d};
    }
    case NodeKind::Mul: {
      Dual a = deval_node(nd.a, b, var, smooth), c = deval_node(nd.b, b, var, smooth);
      return {a.v * c.v, a.d * c.v + a.v * c.d};
    }
    case NodeKind::Div: {
      Dual a = deval_node(nd.a, b, var, smooth), c = deval_node(nd.b, b, var, smooth);
      if (c.v == 0.0) throw EvalError("division by zero", nd.pos);
      double v = a.v / c.v;
      return {v, (a.d - v * c.d) / c.v};
    }
    case NodeKind::Pow: {
      Dual a = deval_node(nd.a, b, var, smooth), c = deval_node(nd.b, b, var, smooth);
      if (c.d == 0.0) {
        double v = detail::pow_checked(a.v, c.v, nd.pos);
        double d = 0.0;
        if (a.d != 0.0 && c.v != 0.0)
          d = c.v * detail::pow_checked(a.v, c.v - 1.0, nd.pos) * a.d;
        return {v, d};
      }
      if (a.v <= 0.0)
        throw EvalError("power with variable exponent needs positive base", nd.pos);
      double v = std::pow(a.v, c.v);
      return {v, v * (c.d * std::log(a.v) + c.v * a.d / a.v)};
    }
    case NodeKind::Call: {
      Dual a = deval_node(nd.a, b, var, smooth);
      switch (static_cast<FuncId>(nd.aux)) {
        case FuncId::Sin: return {std::sin(a.v), std::cos(a.v) * a.d};
        case FuncId::Cos: return {std::cos(a.v), -std::sin(a.v) * a.d};
        case FuncId::Tan: {
          double c = std::cos(a.v);
          return {std::tan(a.v), a.d / (c * c)};
        }
        case FuncId::Tanh: {
          double th = std::tanh(a.v);
          return {th, (1.0 - th * th) * a.d};
        }
        case FuncId::Exp: {
          double v = std::exp(a.v);
          return {v, v * a.d};
        }
        case FuncId::Log:
          if (a.v <= 0.0) throw EvalError("log of non-positive value", nd.pos);
          return {std::log(a.v), a.d / a.v};
        case FuncId::Sqrt: {
          if (a.v < 0.0) throw EvalError("sqrt of negative value", nd.pos);
          double v = std::sqrt(a.v);
          if (a.d == 0.0) return {v, 0.0};
          if (a.v == 0.0) throw EvalError("sqrt derivative at zero", nd.pos);
          return {v, a.d / (2.0 * v)};
        }
        case FuncId::Abs: {
          if (a.v > 0.0) return {a.v, a.d};
          if (a.v < 0.0) return {-a.v, -a.d};
          smooth = false;          // kink: use the right-sided slope
          return {0.0, a.d};
        }
        case FuncId::Sign: {
          if (a.v == 0.0) smooth = false;
          double v = a.v > 0.0 ? 1.0 : (a.v < 0.0 ? -1.0 : 0.0);
          return {v, 0.0};         // piecewise constant away from the kink
        }
        case FuncId::Atan:
          return {std::atan(a.v), a.d / (1.0 + a.v * a.v)};
      }
      return {0.0, 0.0};
    }
  }
  return {0.0, 0.0};
}

// ---------------------------------------------------------------------------
// Printing (round-trips through parse to the identical tree)

inline void Expr::print_node(int i, std::string& out, int parent_min) const {
  // Precedence: Add/Sub 1, Mul/Div 2, Negate 3, Pow 4, atoms 5.
  const ExprNode& nd = nodes_[i];
  auto prec = [&](int j) -> int {
    switch (nodes_[j].kind) {
      case NodeKind::Add:
      case NodeKind::Sub: return 1;
      case NodeKind::Mul:
      case NodeKind::Div: return 2;
      case NodeKind::Negate: return 3;
      case NodeKind::Pow: return 4;
      default: return 5;
    }
  };
  (void)parent_min;
  auto emit_child = [&](int j, int min_prec) {
    if (prec(j) < min_prec) {
      out += '(';
      print_node(j, out, 0);
      out += ')';
    } else {
      print_node(j, out, 0);
    }
  };
  switch (nd.kind) {
    case NodeKind::Number:
      out += format_double(nd.value);
      break;
    case NodeKind::Variable:
      switch (static_cast<VarKind>(nd.aux)) {
        case VarKind::Time: out += 't'; break;
        case VarKind::Lambda: out += "lam"; break;
        case VarKind::State: out += 'x'; out += std::to_string(nd.a + 1); break;
      }
      break;
    case NodeKind::Negate:
      out += '-';
      emit_child(nd.a, 3);
      break;
    case NodeKind::Add:
      emit_child(nd.a, 1);
      out += " + ";
      emit_child(nd.b, 2);
      break;
    case NodeKind::Sub:
      emit_child(nd.a, 1);
      out += " - ";
      emit_child(nd.b, 2);
      break;
    case NodeKind::Mul:
      emit_child(nd.a, 2);
      out += '*';
      emit_child(nd.b, 3);
      break;
    case NodeKind::Div:
      emit_child(nd.a, 2);
      out += '/';
      emit_child(nd.b, 3);
      break;
    case NodeKind::Pow:
      emit_child(nd.a, 5);  // base must be an atom
      out += '^';
      emit_child(nd.b, 3);  // exponent may be unary/power
      break;
    case NodeKind::Call:
      out += detail::func_name(static_cast<FuncId>(nd.aux));
      out += '(';
      print_node(nd.a, out, 0);
      out += ')';
      break;
  }
}

inline bool Expr::depends_node(int i, VarRef var) const {
  const ExprNode& nd = nodes_[i];
  switch (nd.kind) {
    case NodeKind::Number:
      return false;
    case NodeKind::Variable: {
      VarKind k = static_cast<VarKind>(nd.aux);
      return k == var.kind && (k != VarKind::State || nd.a == var.index);
    }
    case NodeKind::Negate:
    case NodeKind::Call:
      return depends_node(nd.a, var);
    default:
      return depends_node(nd.a, var) || depends_node(nd.b, var);
  }
}

inline bool Expr::smooth_node(int i, VarRef var) const {
  const ExprNode& nd = nodes_[i];
  switch (nd.kind) {
    case NodeKind::Number:
    case NodeKind::Variable:
      return true;
    case NodeKind::Call: {
      FuncId f = static_cast<FuncId>(nd.aux);
      if ((f == FuncId::Abs || f == FuncId::Sign) && depends_node(nd.a, var)) return false;
      return smooth_node(nd.a, var);
    }
    case NodeKind::Negate:
      return smooth_node(nd.a, var);
    default:
      return smooth_node(nd.a, var) && smooth_node(nd.b, var);
  }
}

inline bool Expr::equal_nodes(const Expr& ea, int ia, const Expr& eb, int ib) {
  const ExprNode& a = ea.nodes_[ia];
  const ExprNode& b = eb.nodes_[ib];
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::Number:
      return a.value == b.value;
    case NodeKind::Variable:
      return a.aux == b.aux && (static_cast<VarKind>(a.aux) != VarKind::State || a.a == b.a);
    case NodeKind::Negate:
      return equal_nodes(ea, a.a, eb, b.a);
    case NodeKind::Call:
      return a.aux == b.aux && equal_nodes(ea, a.a, eb, b.a);
    default:
      return equal_nodes(ea, a.a, eb, b.a) && equal_nodes(ea, a.b, eb, b.b);
  }
}

// ---------------------------------------------------------------------------
// Synthetic combinators with literal folding.  Used when building the
// hidden-term decomposition; folding keeps printed results readable
// (e.g. the remainder of 2*lam^2 - 1 prints as "1", not "-1 + 2").

class ExprBuilder {
 public:
  static Expr make(std::vector<ExprNode>&& nodes, int root, int dim) {
    Expr e;
    e.nodes_ = std::move(nodes);
    e.root_ = root;
    e.dim_ = dim;
    return e;
  }
};

namespace detail {

inline std::optional<double> literal_value(const Expr& e) {
  auto ns = e.nodes();
  const ExprNode& r = ns[e.root()];
  if (r.kind == NodeKind::Number) return r.value;
  if (r.kind == NodeKind::Negate && ns[r.a].kind == NodeKind::Number) return -ns[r.a].value;
  return std::nullopt;
}

inline Expr combine(NodeKind kind, const Expr& a, const Expr& b) {
  std::vector<ExprNode> nodes(a.nodes().begin(), a.nodes().end());
  int off = static_cast<int>(nodes.size());
  for (ExprNode nd : b.nodes()) {
    if (nd.kind != NodeKind::Number && nd.kind != NodeKind::Variable) {
      if (nd.a >= 0) nd.a += off;
      if (nd.b >= 0) nd.b += off;
    }
    nodes.push_back(nd);
  }
  nodes.push_back({kind, 0, a.root(), b.root() + off, 0.0, 0});
  return ExprBuilder::make(std::move(nodes), static_cast<int>(nodes.size()) - 1,
                           std::max(a.dim(), b.dim()));
}

}  // namespace detail

inline Expr expr_neg(const Expr& a) {
  if (auto v = detail::literal_value(a)) return Expr::number(-*v);
  auto ns = a.nodes();
  if (ns[a.root()].kind == NodeKind::Negate) return a.subexpr(ns[a.root()].a);
  std::vector<ExprNode> nodes(ns.begin(), ns.end());
  nodes.push_back({NodeKind::Negate, 0, a.root(), -1, 0.0, 0});
  return ExprBuilder::make(std::move(nodes), static_cast<int>(nodes.size()) - 1, a.dim());
}

inline Expr expr_add(const Expr& a, const Expr& b) {
  auto va = detail::literal_value(a), vb = detail::literal_value(b);
  if (va && vb) return Expr::number(*va + *vb);
  if (va && *va == 0.0) return b;
  if (vb && *vb == 0.0) return a;
  return detail::combine(NodeKind::Add, a, b);
}

inline Expr expr_sub(const Expr& a, const Expr& b) {
  auto va = detail::literal_value(a), vb = detail::literal_value(b);
  if (va && vb) return Expr::number(*va - *vb);
  if (vb && *vb == 0.0) return a;
  if (va && *va == 0.0) return expr_neg(b);
  return detail::combine(NodeKind::Sub, a, b);
}

inline Expr expr_mul(const Expr& a, const Expr& b) {
  auto va = detail::literal_value(a), vb = detail::literal_value(b);
  if (va && vb) return Expr::number(*va * *vb);
  if (va && *va == 1.0) return b;
  if (vb && *vb == 1.0) return a;
  return detail::combine(NodeKind::Mul, a, b);
}

inline Expr expr_div(const Expr& a, const Expr& b) {
  auto va = detail::literal_value(a), vb = detail::literal_value(b);
  if (vb && *vb == 0.0) throw EvalError("division by zero in constant fold", 0);
  if (va && vb) return Expr::number(*va / *vb);
  if (vb && *vb == 1.0) return a;
  return detail::combine(NodeKind::Div, a, b);
}

inline Expr expr_pow_int(const Expr& a, int k) {
  if (k == 0) return Expr::number(1.0);
  if (k == 1) return a;
  std::vector<ExprNode> nodes(a.nodes().begin(), a.nodes().end());
  nodes.push_back({NodeKind::Number, 0, -1, -1, static_cast<double>(k), 0});
  nodes.push_back({NodeKind::Pow, 0, a.root(), static_cast<int>(nodes.size()) - 1, 0.0, 0});
  return ExprBuilder::make(std::move(nodes), static_cast<int>(nodes.size()) - 1, a.dim());
}

// ---------------------------------------------------------------------------
// Polynomial structure in lam.
//
// Returns symbolic coefficients c0..cd (in x,t) such that
//   e == sum_k c_k * lam^k  identically.
// Throws EvalError when e is not polynomial in lam (lam inside a function
// call, in a denominator, or in an exponent).

inline std::vector<Expr> lambda_coefficients(const Expr& e) {
  constexpr int kMaxDegree = 64;
  const VarRef lam = VarRef::lambda();

  struct Walker {
    const Expr& e;
    const VarRef lam;

    std::vector<Expr> walk(int i) {
      if (!e.subtree_depends_on(i, lam)) return {e.subexpr(i)};
      const ExprNode& nd = e.nodes()[i];
      switch (nd.kind) {
        case NodeKind::Variable:
          return {Expr::number(0.0), Expr::number(1.0)};
        case NodeKind::Negate: {
          auto c = walk(nd.a);
          for (auto& ci : c) ci = expr_neg(ci);
          return c;
        }
        case NodeKind::Add:
        case NodeKind::Sub: {
          auto ca = walk(nd.a);
          auto cb = walk(nd.b);
          std::size_t sz = std::max(ca.size(), cb.size());
          std::vector<Expr> out;
          out.reserve(sz);
          for (std::size_t k = 0; k < sz; ++k) {
            Expr l = k < ca.size() ? ca[k] : Expr::number(0.0);
            Expr r = k < cb.size() ? cb[k] : Expr::number(0.0);
            out.push_back(nd.kind == NodeKind::Add ? expr_add(l, r) : expr_sub(l, r));
          }
          return out;
        }
        case NodeKind::Mul: {
          auto ca = walk(nd.a);
          auto cb = walk(nd.b);
          if (ca.size() + cb.size() > kMaxDegree + 2)
            throw EvalError("polynomial degree in lam too large", nd.pos);
          std::vector<Expr> out(ca.size() + cb.size() - 1, Expr::number(0.0));
          for (std::size_t p = 0; p < ca.size(); ++p)
            for (std::size_t q = 0; q < cb.size(); ++q)
              out[p + q] = expr_add(out[p + q], expr_mul(ca[p], cb[q]));
          return out;
        }
        case NodeKind::Div: {
          if (e.subtree_depends_on(nd.b, lam))
            throw EvalError("lam in a denominator is not polynomial", nd.pos);
          auto ca = walk(nd.a);
          Expr den = e.subexpr(nd.b);
          for (auto& ci : ca) ci = expr_div(ci, den);
          return ca;
        }
        case NodeKind::Pow: {
          if (e.subtree_depends_on(nd.b, lam))
            throw EvalError("lam in an exponent is not polynomial", nd.pos);
          const ExprNode& en = e.nodes()[nd.b];
          if (en.kind != NodeKind::Number || !detail::is_integer(en.value) || en.value < 0.0)
            throw EvalError("lam-dependent base needs a non-negative integer exponent", nd.pos);
          int k = static_cast<int>(en.value);
          if (k > kMaxDegree) throw EvalError("polynomial degree in lam too large", nd.pos);
          auto ca = walk(nd.a);
          std::vector<Expr> out{Expr::number(1.0)};
          for (int rep = 0; rep < k; ++rep) {
            std::vector<Expr> nxt(out.size() + ca.size() - 1, Expr::number(0.0));
            for (std::size_t p = 0; p < out.size(); ++p)
              for (std::size_t q = 0; q < ca.size(); ++q)
                nxt[p + q] = expr_add(nxt[p + q], expr_mul(out[p], ca[q]));
            out = std::move(nxt);
            if (out.size() > kMaxDegree + 1)
              throw EvalError("polynomial degree in lam too large", nd.pos);
          }
          return out;
        }
        case NodeKind::Call:
          throw EvalError("lam inside a function call is not polynomial", nd.pos);
        default:
          throw EvalError("expression is not polynomial in lam", nd.pos);
      }
    }
  };

  Walker w{e, lam};
  auto c = w.walk(e.root());
  // Trim trailing zero literals.
  while (c.size() > 1) {
    auto v = detail::literal_value(c.back());
    if (v && *v == 0.0)
      c.pop_back();
    else
      break;
  }
  return c;
}

}  // namespace hidyn
