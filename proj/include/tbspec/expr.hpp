#ifndef TBSPEC_EXPR_HPP
#define TBSPEC_EXPR_HPP

#include "tbspec/errors.hpp"

#include <string>
#include <vector>

namespace tbspec {

class ExprError : public DomainError {
 public:
  ExprError(const std::string& msg, size_t column)
      : DomainError(msg + " (column " + std::to_string(column + 1) + ")"), column_(column) {}
  size_t column() const { return column_; }

 private:
  size_t column_;
};

// Arithmetic expressions over named real variables:
//   + - * / ^ (non-negative integer exponents), unary minus, parentheses,
//   cos, sin, numeric literals, pi.
// Parsed once into a postfix program; evaluation is allocation-free apart
// from a small fixed stack and safe for concurrent use.
class Expr {
 public:
  Expr() = default;
  static Expr parse(const std::string& text, const std::vector<std::string>& variables);

  double operator()(const double* vars) const;
  const std::string& text() const { return text_; }
  bool uses(int var) const;
  bool empty() const { return code_.empty(); }

  bool operator==(const Expr& o) const { return text_ == o.text_; }

  enum class Op : unsigned char { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Cos, Sin };
  struct Instr {
    Op op;
    int index = 0;  // variable index or integer exponent
    double value = 0.0;
  };

 private:
  std::string text_;
  std::vector<Instr> code_;
  int depth_ = 0;
};

}  // namespace tbspec

#endif
