// Recursive-descent parser for the expression grammar:
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := unary ('^' factor)?
//   unary  := '-' unary | atom
//   atom   := number | 't' | 'x' digits | func '(' expr (',' expr)? ')'
//           | '(' expr ')'
//
// Note that unary minus binds tighter than '^', so `-x1^2` is `(-x1)^2`.

#include <cctype>
#include <charconv>

#include "nastab/expr.hpp"

namespace nastab {
namespace {

class Parser {
 public:
  Parser(std::string_view src, int dimension) : src_(src), n_(dimension) {}

  Expression parse_all() {
    skip_ws();
    if (pos_ >= src_.size()) fail("empty expression");
    Expression e = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, pos_);
  }

  void skip_ws() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expression expr() {
    Expression lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = Expression::binary(BinaryOp::kAdd, lhs, term());
      } else if (accept('-')) {
        lhs = Expression::binary(BinaryOp::kSub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  Expression term() {
    Expression lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = Expression::binary(BinaryOp::kMul, lhs, factor());
      } else if (accept('/')) {
        lhs = Expression::binary(BinaryOp::kDiv, lhs, factor());
      } else {
        return lhs;
      }
    }
  }

  Expression factor() {
    Expression base = unary();
    if (accept('^')) return Expression::binary(BinaryOp::kPow, base, factor());
    return base;
  }

  Expression unary() {
    if (accept('-')) return Expression::unary(UnaryOp::kNeg, unary());
    return atom();
  }

  Expression number() {
    const char* first = src_.data() + pos_;
    const char* last = src_.data() + src_.size();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr == first) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return Expression::constant(v);
  }

  Expression atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return number();
    }
    if (accept('(')) {
      Expression inner = expr();
      expect(')');
      return inner;
    }
    if (!std::isalpha(static_cast<unsigned char>(c))) {
      fail(std::string("unexpected character '") + c + "'");
    }
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           std::isalnum(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
    const std::string_view ident = src_.substr(start, pos_ - start);
    if (ident == "t") return Expression::time();
    if (ident.size() > 1 && ident[0] == 'x' &&
        ident.find_first_not_of("0123456789", 1) == std::string_view::npos) {
      int index = 0;
      std::from_chars(ident.data() + 1, ident.data() + ident.size(), index);
      if (index < 1 || index > n_) {
        throw ParseError("variable index out of range: " + std::string(ident) +
                             " (dimension " + std::to_string(n_) + ")",
                         start);
      }
      return Expression::variable(index);
    }
    return call(ident, start);
  }

  Expression call(std::string_view name, std::size_t start) {
    static constexpr struct {
      std::string_view name;
      UnaryOp op;
    } kUnary[] = {{"abs", UnaryOp::kAbs}, {"sqrt", UnaryOp::kSqrt},
                  {"exp", UnaryOp::kExp}, {"ln", UnaryOp::kLn},
                  {"sin", UnaryOp::kSin}, {"cos", UnaryOp::kCos},
                  {"tanh", UnaryOp::kTanh}};
    for (const auto& u : kUnary) {
      if (u.name != name) continue;
      expect('(');
      Expression arg = expr();
      if (accept(',')) fail(std::string(name) + " takes one argument");
      expect(')');
      return Expression::unary(u.op, arg);
    }
    if (name == "min" || name == "max") {
      expect('(');
      Expression a = expr();
      if (!accept(',')) fail(std::string(name) + " takes two arguments");
      Expression b = expr();
      expect(')');
      return Expression::binary(name == "min" ? BinaryOp::kMin : BinaryOp::kMax,
                                a, b);
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view src_;
  int n_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression parse(std::string_view source, int dimension) {
  return Parser(source, dimension).parse_all();
}

}  // namespace nastab
