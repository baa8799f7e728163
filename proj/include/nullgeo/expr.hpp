#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nullgeo/errors.hpp"

namespace nullgeo {

// Scalar expression in named coordinates. Grammar (documented in docs/formats.md):
// numeric literals, variables, + - * / unary-, ^ (right-associative, binds tighter
// than unary minus), parentheses, and the functions
// sin cos tan exp log sqrt sinh cosh tanh atan2 abs.
//
// An ExprField is immutable after parse; eval/partial are pure and safe to call
// concurrently.
class ExprField {
public:
    ExprField() = default;

    // Throws ParseError (with byte offset) on syntax errors and on identifiers
    // that are neither a known function nor one of `variables`.
    static ExprField parse(std::string_view source, std::vector<std::string> variables);

    double eval(std::span<const double> point) const;

    // Central difference (f(x+h e_i) - f(x-h e_i)) / (2h). step <= 0 picks the
    // default h = eps^(1/3) * max(1, |x_i|).
    double partial(std::span<const double> point, int i, double step = 0.0) const;

    // Nested central differences; step <= 0 picks h = eps^(1/4) * max(1, |x|).
    double second_partial(std::span<const double> point, int i, int j, double step = 0.0) const;

    // Parenthesised form that re-parses to an identically-evaluating field.
    std::string pretty() const;

    const std::string& source() const { return source_; }
    const std::vector<std::string>& variables() const { return variables_; }
    bool empty() const { return root_ == nullptr; }

    struct Node;

private:
    std::string source_;
    std::vector<std::string> variables_;
    std::shared_ptr<const Node> root_;
};

// Convenience for building constant fields ("0", "1", ...).
ExprField constant_field(double value, std::vector<std::string> variables);

}  // namespace nullgeo
