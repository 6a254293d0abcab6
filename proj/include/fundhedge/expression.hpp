#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace fundhedge {

/// Arithmetic expression in the variables t and S.
///
/// Grammar:
///   expr   := term (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := ('+' | '-') unary | atom
///   atom   := number | 't' | 'S' | '(' expr ')'
///           | ('max' | 'min') '(' expr ',' expr ')'
///           | ('call' | 'put') '(' expr ')'
/// call(K) is max(S - K, 0) and put(K) is max(K - S, 0).
class Expression {
public:
    Expression();  // the constant 0

    /// Throws DomainError with the character offset of the first problem.
    static Expression parse(std::string_view source);
    static Expression constant(double value);

    double operator()(double t, double S) const;

    const std::string& source() const noexcept { return source_; }
    bool uses_time() const noexcept { return uses_time_; }
    bool uses_spot() const noexcept { return uses_spot_; }

    struct Node {
        enum class Op { Constant, Time, Spot, Negate, Add, Sub, Mul, Div, Max, Min, Call, Put };
        Op op = Op::Constant;
        double value = 0.0;
        int lhs = -1;
        int rhs = -1;
    };

private:
    std::string source_;
    std::vector<Node> nodes_;
    int root_ = 0;
    bool uses_time_ = false;
    bool uses_spot_ = false;

    double eval(int index, double t, double S) const;
    friend class ExpressionParser;
};

}  // namespace fundhedge
