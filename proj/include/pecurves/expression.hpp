#pragma once

#include <memory>
#include <string>

namespace pec {

/// Scalar expression in the variables x and y.
///
/// Grammar: numbers, x, y, pi, e, the binary operators + - * / ^ (right
/// associative power), unary minus, parentheses and the functions
/// sin cos exp abs sqrt. Parse errors throw ConfigError with the offset.
class Expression {
public:
    static Expression parse(const std::string& text);

    double operator()(double x, double y = 0.0) const;
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::string text_;
    std::shared_ptr<const Node> root_;
};

}  // namespace pec
