#include <algorithm>
#include <cctype>
#include <charconv>

#include "lorhol/expr.hpp"

namespace lorhol {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Parser {
 public:
  Parser(std::string_view src, const SymbolTable& symbols) : src_(src), symbols_(symbols) {}

  Expr parse() {
    Expr e = expression();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, pos_); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
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

  Expr expression() {
    Expr lhs = term();
    for (;;) {
      if (accept('+'))
        lhs = lhs + term();
      else if (accept('-'))
        lhs = lhs - term();
      else
        return lhs;
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*'))
        lhs = lhs * unary();
      else if (accept('/'))
        lhs = lhs / unary();
      else
        return lhs;
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (accept('^')) return pow(base, exponent());
    return base;
  }

  // '^' takes a rational literal: 2, -1, 0.5, (1/2), (-3/2).
  Rational exponent() {
    skip_ws();
    if (accept('(')) {
      Rational r = signed_rational(true);
      expect(')');
      return r;
    }
    return signed_rational(false);
  }

  Rational signed_rational(bool allow_fraction) {
    skip_ws();
    bool negative = false;
    if (accept('-'))
      negative = true;
    else
      accept('+');
    skip_ws();
    Rational r = decimal_rational();
    if (allow_fraction && accept('/')) {
      skip_ws();
      const Rational d = decimal_rational();
      if (d.num() == 0) fail("zero denominator in exponent");
      r = r * Rational(d.den(), d.num());
    }
    return negative ? -r : r;
  }

  Rational decimal_rational() {
    const std::size_t start = pos_;
    std::int64_t num = 0, den = 1;
    int digits = 0;
    while (pos_ < src_.size() && is_digit(src_[pos_])) {
      num = num * 10 + (src_[pos_++] - '0');
      if (++digits > 15) fail("exponent literal too long");
    }
    if (pos_ == start) fail("exponent must be a rational constant");
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && is_digit(src_[pos_])) {
        num = num * 10 + (src_[pos_++] - '0');
        den *= 10;
        if (++digits > 15) fail("exponent literal too long");
      }
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E'))
      fail("exponent must be a rational constant");
    return Rational(num, den);
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("expected operand");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      expect(')');
      return e;
    }
    if (is_digit(c) || c == '.') return number();
    if (is_ident_start(c)) return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && is_digit(src_[p])) {
        pos_ = p;
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
      }
    }
    double v = 0.0;
    auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return Expr(v);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
    const std::string name(src_.substr(start, pos_ - start));

    static const std::pair<const char*, Expr (*)(const Expr&)> functions[] = {
        {"sqrt", &lorhol::sqrt}, {"exp", &lorhol::exp}, {"ln", &lorhol::ln},
        {"sin", &lorhol::sin},   {"cos", &lorhol::cos},
    };
    for (const auto& [fname, fn] : functions) {
      if (name == fname) {
        expect('(');
        Expr arg = expression();
        expect(')');
        return fn(arg);
      }
    }

    const auto& cs = symbols_.coordinates;
    const auto& ps = symbols_.parameters;
    const bool is_coord = std::find(cs.begin(), cs.end(), name) != cs.end();
    const bool is_param = std::find(ps.begin(), ps.end(), name) != ps.end();
    if (is_coord && is_param) {
      pos_ = start;
      fail("identifier '" + name + "' is both a coordinate and a parameter");
    }
    if (is_coord) return Expr::coordinate(name);
    if (is_param) return Expr::parameter(name);
    pos_ = start;
    fail("unknown identifier '" + name + "'");
  }

  std::string_view src_;
  const SymbolTable& symbols_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view src, const SymbolTable& symbols) { return Parser(src, symbols).parse(); }

}  // namespace lorhol
