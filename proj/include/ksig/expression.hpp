#pragma once

// Builtin field expressions: sums of products of constants and sin/cos of a
// single coordinate, e.g. "0.1*sin(x1)*cos(x2) - 0.5 + cos(2*x3)".
//
//   expr   := ['-'] term (('+' | '-') term)*
//   term   := factor ('*' factor)*
//   factor := number | ('sin' | 'cos') '(' [integer '*'] 'x' digit ')'
//
// Coordinates are 1-based. Value, gradient and Hessian are exact.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ksig/grid.hpp"

namespace ksig {

class ExpressionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Expression {
 public:
  struct Wave {
    bool is_sin = true;
    int axis = 0;  // 0-based
    int frequency = 1;
  };
  struct Term {
    double coefficient = 1.0;
    std::vector<Wave> waves;
  };

  Expression() = default;

  static Expression parse(std::string_view text) {
    Parser p{text, 0};
    Expression e;
    e.source_ = std::string(text);
    p.skip();
    double sign = 1.0;
    if (p.eat('-')) sign = -1.0;
    else p.eat('+');
    for (;;) {
      auto term = p.term();
      term.coefficient *= sign;
      e.terms_.push_back(std::move(term));
      p.skip();
      if (p.at_end()) break;
      if (p.eat('+')) sign = 1.0;
      else if (p.eat('-')) sign = -1.0;
      else p.fail("expected '+', '-' or end of expression");
    }
    return e;
  }

  static Expression constant(double c) {
    Expression e;
    e.terms_.push_back({c, {}});
    e.source_ = std::to_string(c);
    return e;
  }

  [[nodiscard]] const std::string& source() const noexcept { return source_; }
  [[nodiscard]] const std::vector<Term>& terms() const noexcept { return terms_; }

  /// Largest coordinate index used, 1-based; 0 for constants.
  [[nodiscard]] int max_axis() const noexcept {
    int m = 0;
    for (const auto& t : terms_)
      for (const auto& w : t.waves) m = std::max(m, w.axis + 1);
    return m;
  }

  [[nodiscard]] double value(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& t : terms_) {
      double p = t.coefficient;
      for (const auto& w : t.waves) p *= w.is_sin ? std::sin(w.frequency * x[w.axis]) : std::cos(w.frequency * x[w.axis]);
      s += p;
    }
    return s;
  }

  /// Exact value, gradient, Hessian and Laplacian at x.
  [[nodiscard]] NodeJet jet(std::span<const double> x) const {
    const int n = static_cast<int>(x.size());
    NodeJet out;
    out.hessian = SymTensor(n);
    for (const auto& t : terms_) {
      // Per axis: the 1D product of this term's waves on that axis and its
      // first two derivatives.
      std::array<double, kMaxDim> g{}, g1{}, g2{};
      for (int a = 0; a < n; ++a) g[a] = 1.0;
      for (const auto& w : t.waves) {
        const double m = w.frequency;
        const double arg = m * x[w.axis];
        const double s = std::sin(arg);
        const double c = std::cos(arg);
        const double f = w.is_sin ? s : c;
        const double f1 = w.is_sin ? m * c : -m * s;
        const double f2 = -m * m * f;
        const int a = w.axis;
        const double v = g[a], v1 = g1[a], v2 = g2[a];
        g[a] = v * f;
        g1[a] = v1 * f + v * f1;
        g2[a] = v2 * f + 2.0 * v1 * f1 + v * f2;
      }
      auto others = [&](int skip1, int skip2) {
        double p = t.coefficient;
        for (int a = 0; a < n; ++a)
          if (a != skip1 && a != skip2) p *= g[a];
        return p;
      };
      out.value += others(-1, -1);
      for (int a = 0; a < n; ++a) {
        out.gradient[a] += g1[a] * others(a, -1);
        out.hessian(a, a) += g2[a] * others(a, -1);
        for (int b = a + 1; b < n; ++b) out.hessian(a, b) += g1[a] * g1[b] * others(a, b);
      }
    }
    out.laplacian = out.hessian.trace();
    return out;
  }

 private:
  struct Parser {
    std::string_view s;
    std::size_t pos;

    [[noreturn]] void fail(const std::string& what) const {
      throw ExpressionError("expression \"" + std::string(s) + "\" at offset " + std::to_string(pos) + ": " + what);
    }
    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    [[nodiscard]] bool at_end() {
      skip();
      return pos >= s.size();
    }
    bool eat(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    bool eat_word(std::string_view w) {
      skip();
      if (s.substr(pos, w.size()) == w) {
        pos += w.size();
        return true;
      }
      return false;
    }
    double number() {
      skip();
      const std::string rest(s.substr(pos));
      char* end = nullptr;
      const double v = std::strtod(rest.c_str(), &end);
      if (end == rest.c_str()) fail("expected a number, sin(...) or cos(...)");
      if (!std::isfinite(v)) fail("non-finite constant");
      pos += static_cast<std::size_t>(end - rest.c_str());
      return v;
    }
    int integer() {
      skip();
      const std::size_t start = pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      if (pos == start) fail("expected an integer");
      return std::stoi(std::string(s.substr(start, pos - start)));
    }
    Wave wave(bool is_sin) {
      if (!eat('(')) fail("expected '('");
      Wave w;
      w.is_sin = is_sin;
      skip();
      if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        w.frequency = integer();
        if (!eat('*')) fail("expected '*' after frequency");
      }
      if (!eat('x')) fail("expected a coordinate x1..x5");
      if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos]))) fail("expected a coordinate x1..x5");
      const int axis = s[pos++] - '0';
      if (axis < 1 || axis > kMaxDim) fail("coordinate index out of range");
      w.axis = axis - 1;
      if (!eat(')')) fail("expected ')'");
      return w;
    }
    Term term() {
      Term t;
      do {
        if (eat_word("sin")) t.waves.push_back(wave(true));
        else if (eat_word("cos")) t.waves.push_back(wave(false));
        else t.coefficient *= number();
      } while (eat('*'));
      return t;
    }
  };

  std::vector<Term> terms_;
  std::string source_;
};

namespace detail {
inline void check_axes(const Expression& e, const PeriodicGrid& grid) {
  if (e.max_axis() > grid.dim()) {
    throw ExpressionError("expression \"" + e.source() + "\" uses x" + std::to_string(e.max_axis()) + " on a " +
                          std::to_string(grid.dim()) + "-dimensional grid");
  }
}
}  // namespace detail

[[nodiscard]] inline ScalarField sample_expression(const Expression& e, const PeriodicGrid& grid) {
  detail::check_axes(e, grid);
  return ScalarField::sample(grid, [&](std::span<const double> x) { return e.value(x); });
}

/// Exact jets of the expression at the grid nodes.
[[nodiscard]] inline JetField exact_jet(const Expression& e, const PeriodicGrid& grid) {
  detail::check_axes(e, grid);
  std::vector<NodeJet> jets(grid.node_count());
  std::array<double, kMaxDim> x{};
  for (NodeIndex i = 0; i < grid.node_count(); ++i) {
    for (int a = 0; a < grid.dim(); ++a) x[a] = grid.coordinate(i, a);
    jets[i] = e.jet(std::span<const double>(x.data(), static_cast<std::size_t>(grid.dim())));
  }
  return JetField(grid, std::move(jets));
}

}  // namespace ksig
