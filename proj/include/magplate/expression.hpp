#pragma once

#include <memory>
#include <string>

namespace magplate {

// Closed-form scalar expression in x1, x2, x3: numbers, pi, e, + - * / ^,
// unary minus, parentheses, and sin cos tan exp log sqrt abs sinh cosh tanh atan.
class Expression {
 public:
  struct Node;

  Expression();
  // Throws ConfigError with the offending position.
  static Expression parse(const std::string& text);

  double operator()(double x1, double x2, double x3 = 0) const;
  const std::string& source() const { return text_; }

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace magplate
