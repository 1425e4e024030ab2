#pragma once

// Expression language for right-hand sides and certificate functions.
//
// Variables are `t` and `x1..xn`. Expressions are immutable trees shared
// through `std::shared_ptr<const Node>`; copies are cheap and evaluation
// touches no shared mutable state, so one expression can be evaluated from
// many threads at once.

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nastab {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : std::runtime_error(message + " at byte " + std::to_string(offset)),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Raised for ln/sqrt of an invalid argument, division by zero, or a
/// non-integer power of a non-positive base. `subexpression()` is the
/// printed form of the node that failed.
class DomainError : public std::runtime_error {
 public:
  DomainError(const std::string& message, std::string subexpression)
      : std::runtime_error(message + " in `" + subexpression + "`"),
        subexpression_(std::move(subexpression)) {}
  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

enum class UnaryOp { kNeg, kAbs, kSqrt, kExp, kLn, kSin, kCos, kTanh };
enum class BinaryOp { kAdd, kSub, kMul, kDiv, kPow, kMin, kMax };

struct Node;

/// A point (t, x) at which expressions are evaluated.
struct EvalPoint {
  double t = 0.0;
  std::span<const double> x;
};

struct Gradient {
  double dt = 0.0;
  std::vector<double> dx;
};

class Expression {
 public:
  Expression();  // the literal 0

  static Expression constant(double value);
  static Expression time();
  static Expression variable(int index);  // 1-based, as in `x1`
  static Expression unary(UnaryOp op, const Expression& arg);
  static Expression binary(BinaryOp op, const Expression& lhs,
                           const Expression& rhs);

  double evaluate(EvalPoint p) const;
  double evaluate(double t, std::span<const double> x) const {
    return evaluate(EvalPoint{t, x});
  }

  /// Forward-mode derivative along the direction (dt, dx): returns
  /// d/ds e(t + s*dt, x + s*dx) at s = 0. With dt = 1 and dx = f(t, x) this
  /// is the derivative of e along solutions of x' = f(t, x).
  double directional(EvalPoint p, double dt,
                     std::span<const double> dx) const;

  /// Value and directional derivative from a single dual pass.
  std::pair<double, double> value_and_directional(
      EvalPoint p, double dt, std::span<const double> dx) const;

  /// Full gradient, one dual pass per coordinate.
  Gradient gradient(EvalPoint p) const;

  /// Fully parenthesized source that parses back to the same tree.
  std::string to_string() const;

  bool uses_time() const;
  /// Largest variable index referenced, 0 if none.
  int max_variable() const;

  /// Copy with every `x_i` replaced by `x_{remap[i-1]}`.
  Expression rename_variables(std::span<const int> remap) const;
  /// Copy with every `x_i` replaced by the expression `args[i-1]`.
  Expression substitute(std::span<const Expression> args) const;

  bool structurally_equal(const Expression& other) const;

  const Node& root() const { return *root_; }

 private:
  explicit Expression(std::shared_ptr<const Node> root)
      : root_(std::move(root)) {}
  std::shared_ptr<const Node> root_;
};

Expression parse(std::string_view source, int dimension);

Expression operator+(const Expression& a, const Expression& b);
Expression operator-(const Expression& a, const Expression& b);
Expression operator*(const Expression& a, const Expression& b);
Expression operator/(const Expression& a, const Expression& b);

}  // namespace nastab
