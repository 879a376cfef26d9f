#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace acfb {

// Parse error with the offending position in the source string.
struct ExprError : std::runtime_error {
  ExprError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " at position " + std::to_string(pos)), position(pos) {}
  std::size_t position;
};

// Closed-form scalar expressions over the coordinates x1, x2.
// Grammar: numbers, x1, x2, + - * /, unary -, abs, max, min, pow, parentheses.
// Compiled to a postfix program; evaluation is allocation free.
class Expr {
 public:
  Expr() = default;

  static Expr parse(const std::string& src);

  double eval(double x1, double x2 = 0.0) const;

  const std::string& source() const { return src_; }
  bool empty() const { return prog_.empty(); }

 private:
  enum class Op : unsigned char { Num, X1, X2, Add, Sub, Mul, Div, Neg, Abs, Max, Min, Pow };
  struct Instr {
    Op op;
    double value = 0.0;
  };

  std::string src_;
  std::vector<Instr> prog_;

  friend class ExprParser;
};

}  // namespace acfb
