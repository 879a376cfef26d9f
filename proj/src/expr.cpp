#include "acfb/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>

namespace acfb {

class ExprParser {
 public:
  explicit ExprParser(const std::string& src) : src_(src) {}

  Expr run() {
    Expr e;
    e.src_ = src_;
    expression(e.prog_);
    skip_ws();
    if (pos_ != src_.size()) throw ExprError("unexpected trailing input", pos_);
    if (e.prog_.empty()) throw ExprError("empty expression", 0);
    int depth = 0, peak = 0;
    for (const auto& ins : e.prog_) {
      switch (ins.op) {
        case Expr::Op::Num:
        case Expr::Op::X1:
        case Expr::Op::X2: ++depth; break;
        case Expr::Op::Neg:
        case Expr::Op::Abs: break;
        default: --depth; break;
      }
      peak = std::max(peak, depth);
    }
    if (peak > 64) throw ExprError("expression too deep", 0);
    return e;
  }

 private:
  using Prog = std::vector<Expr::Instr>;
  const std::string& src_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expression(Prog& out) {
    term(out);
    for (;;) {
      skip_ws();
      if (consume('+')) {
        term(out);
        out.push_back({Expr::Op::Add});
      } else if (consume('-')) {
        term(out);
        out.push_back({Expr::Op::Sub});
      } else {
        return;
      }
    }
  }

  void term(Prog& out) {
    unary(out);
    for (;;) {
      skip_ws();
      if (consume('*')) {
        unary(out);
        out.push_back({Expr::Op::Mul});
      } else if (consume('/')) {
        unary(out);
        out.push_back({Expr::Op::Div});
      } else {
        return;
      }
    }
  }

  void unary(Prog& out) {
    skip_ws();
    if (consume('-')) {
      unary(out);
      out.push_back({Expr::Op::Neg});
      return;
    }
    primary(out);
  }

  void primary(Prog& out) {
    skip_ws();
    if (pos_ >= src_.size()) throw ExprError("unexpected end of expression", pos_);
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      number(out);
      return;
    }
    if (c == '(') {
      ++pos_;
      expression(out);
      if (!consume(')')) throw ExprError("expected ')'", pos_);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      identifier(out);
      return;
    }
    throw ExprError(std::string("unexpected character '") + c + "'", pos_);
  }

  void number(Prog& out) {
    const char* begin = src_.c_str() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) throw ExprError("malformed number", pos_);
    pos_ += static_cast<std::size_t>(end - begin);
    out.push_back({Expr::Op::Num, v});
  }

  void identifier(Prog& out) {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    std::string name = src_.substr(start, pos_ - start);
    if (name == "x1") {
      out.push_back({Expr::Op::X1});
      return;
    }
    if (name == "x2") {
      out.push_back({Expr::Op::X2});
      return;
    }
    Expr::Op op;
    int arity;
    if (name == "abs") {
      op = Expr::Op::Abs;
      arity = 1;
    } else if (name == "max") {
      op = Expr::Op::Max;
      arity = 2;
    } else if (name == "min") {
      op = Expr::Op::Min;
      arity = 2;
    } else if (name == "pow") {
      op = Expr::Op::Pow;
      arity = 2;
    } else {
      throw ExprError("unknown identifier '" + name + "'", start);
    }
    if (!consume('(')) throw ExprError("expected '(' after '" + name + "'", pos_);
    expression(out);
    for (int i = 1; i < arity; ++i) {
      if (!consume(',')) throw ExprError("expected ',' in call to '" + name + "'", pos_);
      expression(out);
    }
    if (consume(',')) throw ExprError("too many arguments to '" + name + "'", pos_ - 1);
    if (!consume(')')) throw ExprError("expected ')'", pos_);
    out.push_back({op});
  }
};

Expr Expr::parse(const std::string& src) { return ExprParser(src).run(); }

double Expr::eval(double x1, double x2) const {
  double stack[64];
  int top = -1;
  for (const Instr& ins : prog_) {
    switch (ins.op) {
      case Op::Num: stack[++top] = ins.value; break;
      case Op::X1: stack[++top] = x1; break;
      case Op::X2: stack[++top] = x2; break;
      case Op::Neg: stack[top] = -stack[top]; break;
      case Op::Abs: stack[top] = std::fabs(stack[top]); break;
      case Op::Add: --top; stack[top] += stack[top + 1]; break;
      case Op::Sub: --top; stack[top] -= stack[top + 1]; break;
      case Op::Mul: --top; stack[top] *= stack[top + 1]; break;
      case Op::Div:
        --top;
        if (stack[top + 1] == 0.0) throw std::domain_error("division by zero in '" + src_ + "'");
        stack[top] /= stack[top + 1];
        break;
      case Op::Max: --top; stack[top] = std::max(stack[top], stack[top + 1]); break;
      case Op::Min: --top; stack[top] = std::min(stack[top], stack[top + 1]); break;
      case Op::Pow: --top; stack[top] = std::pow(stack[top], stack[top + 1]); break;
    }
  }
  return stack[0];
}

}  // namespace acfb
