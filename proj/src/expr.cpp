#include "tbspec/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

namespace tbspec {

namespace {

class Parser {
 public:
  Parser(const std::string& s, const std::vector<std::string>& vars) : s_(s), vars_(vars) {}

  std::vector<Expr::Instr> run()
  {
    expr();
    skip();
    if (pos_ != s_.size()) throw ExprError("unexpected '" + std::string(1, s_[pos_]) + "'", pos_);
    return std::move(code_);
  }

 private:
  using Op = Expr::Op;

  void skip()
  {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c)
  {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c)
  {
    if (!accept(c)) throw ExprError(std::string("expected '") + c + "'", pos_);
  }
  void emit(Op op, int index = 0, double value = 0.0) { code_.push_back({op, index, value}); }

  void expr()
  {
    term();
    for (;;) {
      if (accept('+')) {
        term();
        emit(Op::Add);
      } else if (accept('-')) {
        term();
        emit(Op::Sub);
      } else {
        return;
      }
    }
  }

  void term()
  {
    unary();
    for (;;) {
      if (accept('*')) {
        unary();
        emit(Op::Mul);
      } else if (accept('/')) {
        unary();
        emit(Op::Div);
      } else {
        return;
      }
    }
  }

  void unary()
  {
    if (accept('-')) {
      unary();
      emit(Op::Neg);
    } else if (accept('+')) {
      unary();
    } else {
      power();
    }
  }

  void power()
  {
    primary();
    if (accept('^')) {
      skip();
      size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) throw ExprError("exponent must be a non-negative integer literal", start);
      int e = std::atoi(s_.substr(start, pos_ - start).c_str());
      if (e > 64) throw ExprError("exponent too large", start);
      emit(Op::Pow, e);
    }
  }

  void primary()
  {
    skip();
    if (pos_ >= s_.size()) throw ExprError("unexpected end of expression", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      expr();
      expect(')');
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) throw ExprError("malformed number", pos_);
      pos_ += static_cast<size_t>(end - begin);
      emit(Op::Const, 0, v);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      std::string id = s_.substr(start, pos_ - start);
      if (id == "cos" || id == "sin") {
        expect('(');
        expr();
        expect(')');
        emit(id == "cos" ? Op::Cos : Op::Sin);
        return;
      }
      if (id == "pi") {
        emit(Op::Const, 0, std::numbers::pi);
        return;
      }
      for (size_t k = 0; k < vars_.size(); ++k)
        if (vars_[k] == id) {
          emit(Op::Var, static_cast<int>(k));
          return;
        }
      throw ExprError("unknown identifier '" + id + "'", start);
    }
    throw ExprError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  const std::string& s_;
  const std::vector<std::string>& vars_;
  size_t pos_ = 0;
  std::vector<Expr::Instr> code_;
};

constexpr int kMaxDepth = 64;

}  // namespace

Expr Expr::parse(const std::string& text, const std::vector<std::string>& variables)
{
  Expr e;
  e.text_ = text;
  e.code_ = Parser(text, variables).run();
  int d = 0;
  for (const Instr& in : e.code_) {
    switch (in.op) {
      case Op::Const:
      case Op::Var: ++d; break;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div: --d; break;
      default: break;
    }
    e.depth_ = std::max(e.depth_, d);
  }
  if (e.depth_ > kMaxDepth) throw ExprError("expression nested too deeply", 0);
  return e;
}

bool Expr::uses(int var) const
{
  for (const Instr& in : code_)
    if (in.op == Op::Var && in.index == var) return true;
  return false;
}

double Expr::operator()(const double* vars) const
{
  double st[kMaxDepth];
  int top = -1;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::Const: st[++top] = in.value; break;
      case Op::Var: st[++top] = vars[in.index]; break;
      case Op::Neg: st[top] = -st[top]; break;
      case Op::Add: st[top - 1] += st[top]; --top; break;
      case Op::Sub: st[top - 1] -= st[top]; --top; break;
      case Op::Mul: st[top - 1] *= st[top]; --top; break;
      case Op::Div: st[top - 1] /= st[top]; --top; break;
      case Op::Pow: {
        double b = st[top], r = 1.0;
        for (int k = 0; k < in.index; ++k) r *= b;
        st[top] = r;
        break;
      }
      case Op::Cos: st[top] = std::cos(st[top]); break;
      case Op::Sin: st[top] = std::sin(st[top]); break;
    }
  }
  return st[0];
}

}  // namespace tbspec
