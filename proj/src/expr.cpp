#include "nastab/expr.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>

namespace nastab {

enum class NodeKind { kNumber, kTime, kVariable, kUnary, kBinary };

struct Node {
  NodeKind kind = NodeKind::kNumber;
  double value = 0.0;
  int index = 0;
  UnaryOp uop = UnaryOp::kNeg;
  BinaryOp bop = BinaryOp::kAdd;
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using NodePtr = std::shared_ptr<const Node>;

const char* unary_name(UnaryOp op) {
  switch (op) {
    case UnaryOp::kNeg: return "-";
    case UnaryOp::kAbs: return "abs";
    case UnaryOp::kSqrt: return "sqrt";
    case UnaryOp::kExp: return "exp";
    case UnaryOp::kLn: return "ln";
    case UnaryOp::kSin: return "sin";
    case UnaryOp::kCos: return "cos";
    case UnaryOp::kTanh: return "tanh";
  }
  return "?";
}

char binary_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::kAdd: return '+';
    case BinaryOp::kSub: return '-';
    case BinaryOp::kMul: return '*';
    case BinaryOp::kDiv: return '/';
    case BinaryOp::kPow: return '^';
    default: return '?';
  }
}

void print_node(const Node& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::kNumber: {
      char buf[40];
      if (n.value < 0 || std::signbit(n.value)) {
        std::snprintf(buf, sizeof buf, "(-%.17g)", -n.value);
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
      }
      out += buf;
      return;
    }
    case NodeKind::kTime:
      out += 't';
      return;
    case NodeKind::kVariable:
      out += 'x';
      out += std::to_string(n.index);
      return;
    case NodeKind::kUnary:
      if (n.uop == UnaryOp::kNeg) {
        out += "(-";
        print_node(*n.lhs, out);
        out += ')';
      } else {
        out += unary_name(n.uop);
        out += '(';
        print_node(*n.lhs, out);
        out += ')';
      }
      return;
    case NodeKind::kBinary:
      if (n.bop == BinaryOp::kMin || n.bop == BinaryOp::kMax) {
        out += n.bop == BinaryOp::kMin ? "min(" : "max(";
        print_node(*n.lhs, out);
        out += ',';
        print_node(*n.rhs, out);
        out += ')';
      } else {
        out += '(';
        print_node(*n.lhs, out);
        out += binary_symbol(n.bop);
        print_node(*n.rhs, out);
        out += ')';
      }
      return;
  }
}

std::string print(const Node& n) {
  std::string s;
  print_node(n, s);
  return s;
}

// Forward-mode scalar dual: value and one directional derivative.
struct Dual {
  double v;
  double d;
};

// x^k for integer k by repeated multiplication.
double int_power(double base, long k) {
  double r = 1.0;
  for (long i = 0; i < k; ++i) r *= base;
  return r;
}

bool integral_exponent(double b, long& k) {
  if (!(std::fabs(b) <= 1024.0) || b != std::nearbyint(b)) return false;
  k = static_cast<long>(b);
  return true;
}

double pow_value(const Node& n, double a, double b) {
  long k = 0;
  if (integral_exponent(b, k)) {
    if (k >= 0) return int_power(a, k);
    if (a == 0.0) throw DomainError("division by zero", print(n));
    return 1.0 / int_power(a, -k);
  }
  if (!(a > 0.0)) {
    throw DomainError("non-integer power of non-positive base", print(n));
  }
  return std::pow(a, b);
}

struct ScalarOps {
  using S = double;
  std::span<const double> x;
  double t;

  S time() const { return t; }
  S var(int i) const { return x[static_cast<std::size_t>(i - 1)]; }
  static S num(double v) { return v; }
};

struct DualOps {
  using S = Dual;
  std::span<const double> x;
  std::span<const double> dx;
  double t;
  double dt;

  S time() const { return {t, dt}; }
  S var(int i) const {
    auto k = static_cast<std::size_t>(i - 1);
    return {x[k], dx[k]};
  }
  static S num(double v) { return {v, 0.0}; }
};

double eval(const Node& n, const ScalarOps& ops) {
  switch (n.kind) {
    case NodeKind::kNumber: return n.value;
    case NodeKind::kTime: return ops.time();
    case NodeKind::kVariable: return ops.var(n.index);
    case NodeKind::kUnary: {
      const double a = eval(*n.lhs, ops);
      switch (n.uop) {
        case UnaryOp::kNeg: return -a;
        case UnaryOp::kAbs: return std::fabs(a);
        case UnaryOp::kSqrt:
          if (a < 0.0) throw DomainError("sqrt of negative value", print(n));
          return std::sqrt(a);
        case UnaryOp::kExp: return std::exp(a);
        case UnaryOp::kLn:
          if (!(a > 0.0)) throw DomainError("ln of non-positive value", print(n));
          return std::log(a);
        case UnaryOp::kSin: return std::sin(a);
        case UnaryOp::kCos: return std::cos(a);
        case UnaryOp::kTanh: return std::tanh(a);
      }
      break;
    }
    case NodeKind::kBinary: {
      const double a = eval(*n.lhs, ops);
      const double b = eval(*n.rhs, ops);
      switch (n.bop) {
        case BinaryOp::kAdd: return a + b;
        case BinaryOp::kSub: return a - b;
        case BinaryOp::kMul: return a * b;
        case BinaryOp::kDiv:
          if (b == 0.0) throw DomainError("division by zero", print(n));
          return a / b;
        case BinaryOp::kPow: return pow_value(n, a, b);
        case BinaryOp::kMin: return a < b ? a : b;
        case BinaryOp::kMax: return a > b ? a : b;
      }
      break;
    }
  }
  return 0.0;
}

// Kinks of abs/min/max take the positive-side (abs) or second-argument
// (min/max on ties) derivative.
Dual eval(const Node& n, const DualOps& ops) {
  switch (n.kind) {
    case NodeKind::kNumber: return {n.value, 0.0};
    case NodeKind::kTime: return ops.time();
    case NodeKind::kVariable: return ops.var(n.index);
    case NodeKind::kUnary: {
      const Dual a = eval(*n.lhs, ops);
      switch (n.uop) {
        case UnaryOp::kNeg: return {-a.v, -a.d};
        case UnaryOp::kAbs:
          return {std::fabs(a.v), a.v < 0.0 ? -a.d : a.d};
        case UnaryOp::kSqrt: {
          if (a.v < 0.0) throw DomainError("sqrt of negative value", print(n));
          const double r = std::sqrt(a.v);
          if (r == 0.0) {
            if (a.d != 0.0) {
              throw DomainError("sqrt not differentiable at 0", print(n));
            }
            return {0.0, 0.0};
          }
          return {r, a.d / (2.0 * r)};
        }
        case UnaryOp::kExp: {
          const double e = std::exp(a.v);
          return {e, e * a.d};
        }
        case UnaryOp::kLn:
          if (!(a.v > 0.0)) throw DomainError("ln of non-positive value", print(n));
          return {std::log(a.v), a.d / a.v};
        case UnaryOp::kSin: return {std::sin(a.v), std::cos(a.v) * a.d};
        case UnaryOp::kCos: return {std::cos(a.v), -std::sin(a.v) * a.d};
        case UnaryOp::kTanh: {
          const double th = std::tanh(a.v);
          return {th, (1.0 - th * th) * a.d};
        }
      }
      break;
    }
    case NodeKind::kBinary: {
      const Dual a = eval(*n.lhs, ops);
      const Dual b = eval(*n.rhs, ops);
      switch (n.bop) {
        case BinaryOp::kAdd: return {a.v + b.v, a.d + b.d};
        case BinaryOp::kSub: return {a.v - b.v, a.d - b.d};
        case BinaryOp::kMul: return {a.v * b.v, a.d * b.v + a.v * b.d};
        case BinaryOp::kDiv: {
          if (b.v == 0.0) throw DomainError("division by zero", print(n));
          const double q = a.v / b.v;
          return {q, (a.d - q * b.d) / b.v};
        }
        case BinaryOp::kPow: {
          const double r = pow_value(n, a.v, b.v);
          long k = 0;
          double d = 0.0;
          if (integral_exponent(b.v, k)) {
            if (k != 0 && a.d != 0.0) {
              const double lower = k - 1 >= 0
                                       ? int_power(a.v, k - 1)
                                       : pow_value(n, a.v, static_cast<double>(k - 1));
              d = static_cast<double>(k) * lower * a.d;
            }
            if (b.d != 0.0) {
              if (!(a.v > 0.0)) {
                throw DomainError("variable exponent needs positive base", print(n));
              }
              d += r * std::log(a.v) * b.d;
            }
          } else {
            d = r * (b.v * a.d / a.v + std::log(a.v) * b.d);
          }
          return {r, d};
        }
        case BinaryOp::kMin: return a.v < b.v ? a : b;
        case BinaryOp::kMax: return a.v > b.v ? a : b;
      }
      break;
    }
  }
  return {0.0, 0.0};
}

NodePtr make_number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::kNumber;
  n->value = v;
  return n;
}

NodePtr rebuild(const NodePtr& n,
                const std::function<NodePtr(const Node&)>& on_variable) {
  switch (n->kind) {
    case NodeKind::kNumber:
    case NodeKind::kTime:
      return n;
    case NodeKind::kVariable:
      return on_variable(*n);
    case NodeKind::kUnary: {
      auto copy = std::make_shared<Node>(*n);
      copy->lhs = rebuild(n->lhs, on_variable);
      return copy;
    }
    case NodeKind::kBinary: {
      auto copy = std::make_shared<Node>(*n);
      copy->lhs = rebuild(n->lhs, on_variable);
      copy->rhs = rebuild(n->rhs, on_variable);
      return copy;
    }
  }
  return n;
}

bool node_equal(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::kNumber:
      return std::memcmp(&a.value, &b.value, sizeof(double)) == 0;
    case NodeKind::kTime:
      return true;
    case NodeKind::kVariable:
      return a.index == b.index;
    case NodeKind::kUnary:
      return a.uop == b.uop && node_equal(*a.lhs, *b.lhs);
    case NodeKind::kBinary:
      return a.bop == b.bop && node_equal(*a.lhs, *b.lhs) &&
             node_equal(*a.rhs, *b.rhs);
  }
  return false;
}

bool any_time(const Node& n) {
  switch (n.kind) {
    case NodeKind::kTime: return true;
    case NodeKind::kUnary: return any_time(*n.lhs);
    case NodeKind::kBinary: return any_time(*n.lhs) || any_time(*n.rhs);
    default: return false;
  }
}

int max_var(const Node& n) {
  switch (n.kind) {
    case NodeKind::kVariable: return n.index;
    case NodeKind::kUnary: return max_var(*n.lhs);
    case NodeKind::kBinary: return std::max(max_var(*n.lhs), max_var(*n.rhs));
    default: return 0;
  }
}

}  // namespace

Expression::Expression() : root_(make_number(0.0)) {}

Expression Expression::constant(double value) {
  return Expression(make_number(value));
}

Expression Expression::time() {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::kTime;
  return Expression(std::move(n));
}

Expression Expression::variable(int index) {
  if (index < 1) throw std::invalid_argument("variable index must be >= 1");
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::kVariable;
  n->index = index;
  return Expression(std::move(n));
}

Expression Expression::unary(UnaryOp op, const Expression& arg) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::kUnary;
  n->uop = op;
  n->lhs = arg.root_;
  return Expression(std::move(n));
}

Expression Expression::binary(BinaryOp op, const Expression& lhs,
                              const Expression& rhs) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::kBinary;
  n->bop = op;
  n->lhs = lhs.root_;
  n->rhs = rhs.root_;
  return Expression(std::move(n));
}

double Expression::evaluate(EvalPoint p) const {
  return eval(*root_, ScalarOps{p.x, p.t});
}

double Expression::directional(EvalPoint p, double dt,
                               std::span<const double> dx) const {
  return value_and_directional(p, dt, dx).second;
}

std::pair<double, double> Expression::value_and_directional(
    EvalPoint p, double dt, std::span<const double> dx) const {
  const Dual r = eval(*root_, DualOps{p.x, dx, p.t, dt});
  return {r.v, r.d};
}

Gradient Expression::gradient(EvalPoint p) const {
  Gradient g;
  std::vector<double> seed(p.x.size(), 0.0);
  g.dt = eval(*root_, DualOps{p.x, seed, p.t, 1.0}).d;
  g.dx.resize(p.x.size());
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    seed[i] = 1.0;
    g.dx[i] = eval(*root_, DualOps{p.x, seed, p.t, 0.0}).d;
    seed[i] = 0.0;
  }
  return g;
}

std::string Expression::to_string() const { return print(*root_); }

bool Expression::uses_time() const { return any_time(*root_); }

int Expression::max_variable() const { return max_var(*root_); }

Expression Expression::rename_variables(std::span<const int> remap) const {
  return Expression(rebuild(root_, [&](const Node& v) -> NodePtr {
    auto copy = std::make_shared<Node>(v);
    copy->index = remap[static_cast<std::size_t>(v.index - 1)];
    return copy;
  }));
}

Expression Expression::substitute(std::span<const Expression> args) const {
  return Expression(rebuild(root_, [&](const Node& v) -> NodePtr {
    return args[static_cast<std::size_t>(v.index - 1)].root_;
  }));
}

bool Expression::structurally_equal(const Expression& other) const {
  return node_equal(*root_, *other.root_);
}

Expression operator+(const Expression& a, const Expression& b) {
  return Expression::binary(BinaryOp::kAdd, a, b);
}
Expression operator-(const Expression& a, const Expression& b) {
  return Expression::binary(BinaryOp::kSub, a, b);
}
Expression operator*(const Expression& a, const Expression& b) {
  return Expression::binary(BinaryOp::kMul, a, b);
}
Expression operator/(const Expression& a, const Expression& b) {
  return Expression::binary(BinaryOp::kDiv, a, b);
}

}  // namespace nastab
