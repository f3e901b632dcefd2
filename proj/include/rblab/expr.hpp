#pragma once

#include <string>
#include <vector>

namespace rblab::expr {

/// Variables available to an expression.  Which ones a given config slot
/// may use is checked by the caller via `uses`.
struct Env {
  double t = 0.0;
  double y = 0.0;
  double z = 0.0;
  double b = 0.0;
};

/// A compiled arithmetic expression over {t, y, z, b} with exp, ln, abs,
/// max, min, the four arithmetic operators, unary minus, and ^.  Parsed
/// once into a postfix program; evaluation is allocation-free.
class Expression {
 public:
  static Expression parse(const std::string& text);

  double eval(const Env& env) const;
  bool uses(char variable) const;  // 't', 'y', 'z', or 'b'
  const std::string& text() const { return text_; }

 private:
  enum class Op : unsigned char {
    PushConst, PushT, PushY, PushZ, PushB,
    Add, Sub, Mul, Div, Pow, Neg,
    Exp, Ln, Abs, Max, Min,
  };
  struct Step {
    Op op;
    double value = 0.0;
  };

  std::string text_;
  std::vector<Step> program_;
  bool uses_t_ = false, uses_y_ = false, uses_z_ = false, uses_b_ = false;

  friend class Parser;
};

}  // namespace rblab::expr
