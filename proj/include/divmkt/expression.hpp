#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace divmkt {

// Arithmetic expression in one variable `x`, e.g. "0.25/(0.8 - x)".
// Grammar: + - * / ^, unary minus, parentheses, numeric literals, constants
// pi and e, and the functions exp, log, sqrt, abs, sin, cos, tanh.
class Expression {
 public:
  // Throws ParameterError on a syntax error.
  static Expression parse(std::string_view text);

  double operator()(double x) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  Expression(std::shared_ptr<const Node> root, std::string text)
      : root_(std::move(root)), text_(std::move(text)) {}
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace divmkt
