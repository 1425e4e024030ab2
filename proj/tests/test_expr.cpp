#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "corpus.hpp"
#include "nastab/expr.hpp"

using nastab::DomainError;
using nastab::Expression;
using nastab::parse;
using nastab::ParseError;

namespace {

double at(const Expression& e, double t, std::vector<double> x) {
  return e.evaluate(t, x);
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("precedence and associativity") {
  CHECK(at(parse("1 + 2 * 3", 1), 0, {0}) == 7.0);
  CHECK(at(parse("2 ^ 3 ^ 2", 1), 0, {0}) == 512.0);
  CHECK(at(parse("8 / 4 / 2", 1), 0, {0}) == 1.0);
  CHECK(at(parse("7 - 2 - 1", 1), 0, {0}) == 4.0);
  // unary minus binds tighter than ^
  CHECK(at(parse("-x1^2", 1), 0, {3}) == 9.0);
  CHECK(at(parse("-(x1^2)", 1), 0, {3}) == -9.0);
  CHECK(at(parse("2^-1", 1), 0, {0}) == 0.5);
  CHECK(at(parse("--x1", 1), 0, {4}) == 4.0);
}

TEST_CASE("functions, variables and time") {
  auto e = parse("min(x1, x2) + max(t, 1) * abs(-x3)", 3);
  CHECK(e.evaluate(2.0, std::vector<double>{1, 5, -2}) == doctest::Approx(5.0));
  CHECK(e.uses_time());
  CHECK(e.max_variable() == 3);
  CHECK(at(parse("sqrt(4) + ln(exp(2)) + tanh(0) + cos(0) + sin(0)", 1), 0, {0}) ==
        doctest::Approx(5.0));
  CHECK(at(parse("1.5e-1 * 10", 1), 0, {0}) == doctest::Approx(1.5));
  CHECK_FALSE(parse("x1 * 2", 1).uses_time());
}

TEST_CASE("parse errors carry the byte offset") {
  auto offset_of = [](const char* src, int n) -> long {
    try {
      parse(src, n);
    } catch (const ParseError& e) {
      return static_cast<long>(e.offset());
    }
    return -1;
  };
  CHECK(offset_of("x1 + x3", 2) == 5);
  CHECK(offset_of("x1 + foo(x1)", 1) == 5);
  CHECK(offset_of("x1 +", 1) == 4);
  CHECK(offset_of("", 1) == 0);
  CHECK(offset_of("(x1", 1) == 3);
  CHECK(offset_of("x1 x1", 1) == 3);
  CHECK(offset_of("min(x1)", 1) >= 0);
  CHECK(offset_of("sin(x1, x1)", 1) >= 0);
  CHECK(offset_of("x0", 1) == 0);

  try {
    parse("x1 + x3", 2);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("x3") != std::string::npos);
  }
}

TEST_CASE("domain errors name the subexpression") {
  CHECK_THROWS_AS(at(parse("ln(x1)", 1), 0, {-1}), DomainError);
  CHECK_THROWS_AS(at(parse("sqrt(x1 - 2)", 1), 0, {1}), DomainError);
  CHECK_THROWS_AS(at(parse("1 / x1", 1), 0, {0}), DomainError);
  CHECK_THROWS_AS(at(parse("x1 ^ 0.5", 1), 0, {-1}), DomainError);
  try {
    at(parse("x1 + ln(x1 - 3)", 1), 0, {1});
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(e.subexpression().find("ln") != std::string::npos);
    CHECK(e.subexpression().find("x1 + ") == std::string::npos);
  }
  // integer exponents never need a positive base
  CHECK(at(parse("x1 ^ 3", 1), 0, {-2}) == -8.0);
  CHECK(at(parse("x1 ^ -2", 1), 0, {-2}) == 0.25);
  CHECK(at(parse("x1 ^ 2.0", 1), 0, {-2}) == 4.0);
}

TEST_CASE("kink conventions take the right-hand derivative") {
  const std::vector<double> zero{0.0};
  const std::vector<double> one{1.0};
  CHECK(parse("abs(x1)", 1).directional({0, zero}, 0, one) == 1.0);
  CHECK(parse("max(x1, 0)", 1).directional({0, zero}, 0, one) == 0.0);
  CHECK(parse("max(0, x1)", 1).directional({0, zero}, 0, one) == 1.0);
  CHECK(parse("min(x1, 0)", 1).directional({0, zero}, 0, one) == 0.0);
  CHECK(parse("min(0, x1)", 1).directional({0, zero}, 0, one) == 1.0);
  CHECK_THROWS_AS(parse("sqrt(x1)", 1).directional({0, zero}, 0, one), DomainError);
}

TEST_CASE("gradient and directional derivative agree") {
  auto e = parse("sin(t) * x1^2 + x1 * x2 - exp(-t) * x2^3", 2);
  std::vector<double> x{0.7, -0.3};
  auto g = e.gradient({1.2, x});
  CHECK(g.dt == doctest::Approx(std::cos(1.2) * 0.49 + std::exp(-1.2) * -0.027));
  CHECK(g.dx[0] == doctest::Approx(2 * std::sin(1.2) * 0.7 - 0.3));
  CHECK(g.dx[1] == doctest::Approx(0.7 - 3 * std::exp(-1.2) * 0.09));
  std::vector<double> v{0.25, -2.0};
  auto [val, d] = e.value_and_directional({1.2, x}, 0.5, v);
  CHECK(val == doctest::Approx(e.evaluate(1.2, x)));
  CHECK(d == doctest::Approx(0.5 * g.dt + 0.25 * g.dx[0] - 2.0 * g.dx[1]));
}

TEST_CASE("property: dual derivatives match central differences") {
  const auto corpus = testing_corpus::smooth_corpus();
  REQUIRE(corpus.size() >= 15);
  std::mt19937_64 rng(20261019);
  std::size_t checked = 0;
  for (const auto& entry : corpus) {
    std::uniform_real_distribution<double> ux(-entry.radius, entry.radius);
    std::uniform_real_distribution<double> ut(0.0, 10.0);
    for (int k = 0; k < 60; ++k) {
      std::vector<double> x(entry.n);
      for (double& v : x) v = ux(rng);
      const double t = ut(rng);
      const auto g = entry.expr.gradient({t, x});
      constexpr double h = 1e-6;
      auto fd = [&](int i) {
        std::vector<double> xp = x, xm = x;
        double tp = t, tm = t;
        if (i < 0) {
          tp += h;
          tm -= h;
        } else {
          xp[i] += h;
          xm[i] -= h;
        }
        return (entry.expr.evaluate(tp, xp) - entry.expr.evaluate(tm, xm)) / (2 * h);
      };
      CHECK_MESSAGE(std::fabs(g.dt - fd(-1)) / (1 + std::fabs(g.dt)) <= 1e-6,
                    entry.origin);
      for (int i = 0; i < entry.n; ++i) {
        CHECK_MESSAGE(std::fabs(g.dx[i] - fd(i)) / (1 + std::fabs(g.dx[i])) <= 1e-6,
                      entry.origin);
      }
      ++checked;
    }
  }
  CHECK(checked >= 1000);
}

TEST_CASE("property: printing round-trips bit for bit") {
  const auto corpus = testing_corpus::smooth_corpus();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Expression> exprs;
  for (const auto& e : corpus) exprs.push_back(e.expr);
  for (const char* s : {"abs(x1) - min(x1, -x2) * max(0.1, x2)", "-x1^2 - -3",
                        "0.1 + 1e-300 * x1 / 3", "(x1 + 1) ^ 1.5 + 2 ^ -x2"}) {
    exprs.push_back(parse(s, 2));
  }
  for (const auto& e : exprs) {
    const int n = std::max(2, e.max_variable());
    const Expression back = parse(e.to_string(), n);
    CHECK_MESSAGE(back.structurally_equal(e), e.to_string());
    CHECK(back.to_string() == e.to_string());
    for (int k = 0; k < 50; ++k) {
      std::vector<double> x(n);
      for (double& v : x) v = u(rng);
      const double t = 5 * (u(rng) + 1);
      double a = 0, b = 0;
      try {
        a = e.evaluate(t, x);
      } catch (const DomainError&) {
        CHECK_THROWS_AS(back.evaluate(t, x), DomainError);
        continue;
      }
      b = back.evaluate(t, x);
      CHECK(same_bits(a, b));
    }
  }
}

TEST_CASE("property: max(a, b) = -min(-a, -b)") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const auto mx = parse("max(x1 * x2, sin(t) - x2)", 2);
  const auto mn = parse("-min(-(x1 * x2), -(sin(t) - x2))", 2);
  for (int k = 0; k < 2000; ++k) {
    std::vector<double> x{u(rng), u(rng)};
    const double t = u(rng);
    CHECK(mx.evaluate(t, x) == mn.evaluate(t, x));
  }
}

TEST_CASE("rename and substitute") {
  auto e = parse("x1 - 2 * x2", 2);
  std::vector<int> swap{2, 1};
  CHECK(at(e.rename_variables(swap), 0, {1, 10}) == 8.0);
  std::vector<Expression> args{parse("x1^2", 1), parse("t", 1)};
  CHECK(e.substitute(args).evaluate(3.0, std::vector<double>{2.0}) == -2.0);
  CHECK((e + Expression::constant(1)).evaluate(0, std::vector<double>{1, 1}) == 0.0);
  CHECK((e * e / Expression::constant(2)).evaluate(0, std::vector<double>{1, 1}) == 0.5);
}
