#pragma once

/**
 * @file expression.hpp
 * @brief Scalar expressions in the chart variables and their Taylor jets.
 *
 * Grammar (EBNF), whitespace insignificant:
 *
 *     expr    = term { ("+" | "-") term } ;
 *     term    = unary { ("*" | "/") unary } ;
 *     unary   = "-" unary | power ;
 *     power   = primary [ "^" unary ] ;
 *     primary = number | variable | func "(" expr ")" | "(" expr ")" ;
 *     variable = "x0" | "x1" | "x2" | "x3" ;
 *     func    = "exp" | "log" | "sin" | "cos" | "sqrt" | "atan" ;
 *     number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;
 *
 * so "^" binds tighter than unary minus ("-x0^2" is -(x0^2)) and is right
 * associative; the four arithmetic operators are left associative.
 */

#include <array>
#include <memory>
#include <string>
#include <string_view>

#include "weylscope/jet.hpp"

namespace weylscope {

using Point4 = std::array<double, kDim>;

enum class ExprKind { Literal, Variable, Negate, Add, Subtract, Multiply, Divide, Power, Call };
enum class Function { Exp, Log, Sin, Cos, Sqrt, Atan };

struct ExprNode;

class Expression {
public:
    Expression() = default;
    explicit Expression(std::shared_ptr<const ExprNode> root) : root_(std::move(root)) {}

    static Expression literal(double value);
    static Expression variable(int axis);
    static Expression negate(Expression operand);
    static Expression binary(ExprKind kind, Expression lhs, Expression rhs);
    static Expression call(Function f, Expression argument);

    const ExprNode& node() const { return *root_; }
    bool empty() const noexcept { return root_ == nullptr; }

    /// True when no chart variable occurs in the tree.
    bool is_constant() const;

    friend bool operator==(const Expression& a, const Expression& b);

private:
    std::shared_ptr<const ExprNode> root_;
};

struct ExprNode {
    ExprKind kind;
    double value = 0.0;  // Literal
    int axis = 0;        // Variable
    Function function = Function::Exp;
    Expression lhs;      // operand / argument / base
    Expression rhs;      // right operand / exponent
};

Expression operator+(Expression a, Expression b);
Expression operator-(Expression a, Expression b);
Expression operator*(Expression a, Expression b);
Expression operator/(Expression a, Expression b);

/// Throws ParseError carrying the byte offset and the set of tokens expected there.
Expression parse_expression(std::string_view source);

/// Minimal-parenthesis rendering; parse_expression(to_string(e)) == e.
std::string to_string(const Expression& e);

/// Exact Taylor jet of e at p to total order k, 0 <= k <= kMaxJetOrder.
Jet jet_eval(const Expression& e, const Point4& p, int order);

/// Plain double evaluation.
double evaluate(const Expression& e, const Point4& p);

/**
 * Central-difference estimate of the order-k jet (k <= 2) with one
 * Richardson step between h and h/2. First derivatives carry O(h^4)
 * truncation error, second derivatives likewise, plus roundoff of order
 * eps/h for first and eps/h^2 for second derivatives.
 */
Jet fd_jet(const Expression& e, const Point4& p, int order, double step);

}  // namespace weylscope
