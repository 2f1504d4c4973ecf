#include "weylscope/expression.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <utility>
#include <vector>

#include "weylscope/error.hpp"

namespace weylscope {

ParseError::ParseError(std::string message, std::size_t offset, std::vector<std::string> expected)
    : InputError(std::move(message)), offset_(offset), expected_(std::move(expected)) {}

GapError::GapError(std::string message, double gap, double tolerance)
    : DomainError(std::move(message)), gap_(gap), tolerance_(tolerance) {}

namespace {

std::shared_ptr<ExprNode> make(ExprKind kind) {
    auto n = std::make_shared<ExprNode>();
    n->kind = kind;
    return n;
}

constexpr std::array<std::pair<std::string_view, Function>, 6> kFunctions{{
    {"exp", Function::Exp},
    {"log", Function::Log},
    {"sin", Function::Sin},
    {"cos", Function::Cos},
    {"sqrt", Function::Sqrt},
    {"atan", Function::Atan},
}};

std::string_view function_name(Function f) {
    for (const auto& [name, fn] : kFunctions)
        if (fn == f) return name;
    return "?";
}

bool nodes_equal(const Expression& a, const Expression& b) {
    if (a.empty() || b.empty()) return a.empty() == b.empty();
    const ExprNode& x = a.node();
    const ExprNode& y = b.node();
    if (x.kind != y.kind) return false;
    switch (x.kind) {
        case ExprKind::Literal: return x.value == y.value;
        case ExprKind::Variable: return x.axis == y.axis;
        case ExprKind::Call: return x.function == y.function && nodes_equal(x.lhs, y.lhs);
        case ExprKind::Negate: return nodes_equal(x.lhs, y.lhs);
        default: return nodes_equal(x.lhs, y.lhs) && nodes_equal(x.rhs, y.rhs);
    }
}

// ---------------------------------------------------------------- parsing

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
    Tok kind;
    std::size_t offset;
    std::string_view text;
    double number = 0.0;
};

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) { advance(); }

    Expression parse() {
        Expression e = expr();
        if (tok_.kind != Tok::End) fail("unexpected trailing input", {"operator", "end of input"});
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& what, std::vector<std::string> expected) {
        std::string msg = "syntax error at offset " + std::to_string(tok_.offset) + ": " + what;
        if (!tok_.text.empty()) msg += " '" + std::string(tok_.text) + "'";
        msg += "; expected one of:";
        for (const auto& e : expected) msg += " " + e;
        throw ParseError(msg, tok_.offset, std::move(expected));
    }

    void advance() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
            ++pos_;
        tok_ = Token{Tok::End, pos_, {}};
        if (pos_ >= src_.size()) return;
        const char c = src_[pos_];
        const std::size_t start = pos_;
        auto single = [&](Tok k) {
            ++pos_;
            tok_ = Token{k, start, src_.substr(start, 1)};
        };
        switch (c) {
            case '+': return single(Tok::Plus);
            case '-': return single(Tok::Minus);
            case '*': return single(Tok::Star);
            case '/': return single(Tok::Slash);
            case '^': return single(Tok::Caret);
            case '(': return single(Tok::LParen);
            case ')': return single(Tok::RParen);
            default: break;
        }
        const auto is_digit = [](char ch) { return ch >= '0' && ch <= '9'; };
        if (is_digit(c) || c == '.') {
            std::size_t p = pos_;
            while (p < src_.size() && is_digit(src_[p])) ++p;
            if (p < src_.size() && src_[p] == '.') {
                ++p;
                while (p < src_.size() && is_digit(src_[p])) ++p;
            }
            if (p < src_.size() && (src_[p] == 'e' || src_[p] == 'E')) {
                std::size_t q = p + 1;
                if (q < src_.size() && (src_[q] == '+' || src_[q] == '-')) ++q;
                if (q < src_.size() && is_digit(src_[q])) {
                    while (q < src_.size() && is_digit(src_[q])) ++q;
                    p = q;
                }
            }
            const std::string_view text = src_.substr(start, p - start);
            double v = 0.0;
            const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
            if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
                tok_ = Token{Tok::Number, start, text};
                fail("malformed number", {"number"});
            }
            pos_ = p;
            tok_ = Token{Tok::Number, start, text, v};
            return;
        }
        const auto is_alpha = [](char ch) { return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || ch == '_'; };
        if (is_alpha(c)) {
            std::size_t p = pos_;
            while (p < src_.size() && (is_alpha(src_[p]) || is_digit(src_[p]))) ++p;
            pos_ = p;
            tok_ = Token{Tok::Ident, start, src_.substr(start, p - start)};
            return;
        }
        tok_ = Token{Tok::End, start, src_.substr(start, 1)};
        fail("invalid character", {"number", "identifier", "operator", "'('", "')'"});
    }

    Expression expr() {
        Expression lhs = term();
        while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
            const ExprKind k = tok_.kind == Tok::Plus ? ExprKind::Add : ExprKind::Subtract;
            advance();
            lhs = Expression::binary(k, std::move(lhs), term());
        }
        return lhs;
    }

    Expression term() {
        Expression lhs = unary();
        while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
            const ExprKind k = tok_.kind == Tok::Star ? ExprKind::Multiply : ExprKind::Divide;
            advance();
            lhs = Expression::binary(k, std::move(lhs), unary());
        }
        return lhs;
    }

    Expression unary() {
        if (tok_.kind == Tok::Minus) {
            advance();
            return Expression::negate(unary());
        }
        return power();
    }

    Expression power() {
        Expression base = primary();
        if (tok_.kind == Tok::Caret) {
            advance();
            return Expression::binary(ExprKind::Power, std::move(base), unary());
        }
        return base;
    }

    Expression primary() {
        switch (tok_.kind) {
            case Tok::Number: {
                const double v = tok_.number;
                advance();
                return Expression::literal(v);
            }
            case Tok::LParen: {
                advance();
                Expression inner = expr();
                expect_rparen();
                return inner;
            }
            case Tok::Ident: {
                const std::string_view name = tok_.text;
                if (name.size() == 2 && name[0] == 'x' && name[1] >= '0' && name[1] <= '3') {
                    advance();
                    return Expression::variable(name[1] - '0');
                }
                for (const auto& [fname, fn] : kFunctions) {
                    if (fname == name) {
                        advance();
                        if (tok_.kind != Tok::LParen) fail("function call needs an argument list", {"'('"});
                        advance();
                        Expression arg = expr();
                        expect_rparen();
                        return Expression::call(fn, std::move(arg));
                    }
                }
                fail("unknown identifier", {"x0", "x1", "x2", "x3", "exp", "log", "sin", "cos", "sqrt", "atan"});
            }
            default:
                fail(tok_.kind == Tok::End && tok_.text.empty() ? "unexpected end of input" : "unexpected token",
                     {"number", "identifier", "'('", "'-'"});
        }
    }

    void expect_rparen() {
        if (tok_.kind != Tok::RParen) fail("unbalanced parenthesis", {"')'", "operator"});
        advance();
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    Token tok_{Tok::End, 0, {}};
};

// --------------------------------------------------------------- printing

int precedence(ExprKind k) {
    switch (k) {
        case ExprKind::Add:
        case ExprKind::Subtract: return 1;
        case ExprKind::Multiply:
        case ExprKind::Divide: return 2;
        case ExprKind::Negate: return 3;
        case ExprKind::Power: return 4;
        default: return 5;
    }
}

void print(const Expression& e, std::string& out);

void print_wrapped(const Expression& e, bool wrap, std::string& out) {
    if (wrap) out += '(';
    print(e, out);
    if (wrap) out += ')';
}

void print(const Expression& e, std::string& out) {
    const ExprNode& n = e.node();
    switch (n.kind) {
        case ExprKind::Literal: {
            char buf[64];
            const auto res = std::to_chars(buf, buf + sizeof buf, n.value);
            out.append(buf, res.ptr);
            return;
        }
        case ExprKind::Variable:
            out += 'x';
            out += static_cast<char>('0' + n.axis);
            return;
        case ExprKind::Call:
            out += function_name(n.function);
            out += '(';
            print(n.lhs, out);
            out += ')';
            return;
        case ExprKind::Negate:
            out += '-';
            print_wrapped(n.lhs, precedence(n.lhs.node().kind) < precedence(ExprKind::Negate), out);
            return;
        case ExprKind::Power:
            print_wrapped(n.lhs, precedence(n.lhs.node().kind) <= precedence(ExprKind::Power), out);
            out += '^';
            // The exponent is parsed as a unary expression.
            print_wrapped(n.rhs, precedence(n.rhs.node().kind) < precedence(ExprKind::Negate), out);
            return;
        default: {
            const int p = precedence(n.kind);
            print_wrapped(n.lhs, precedence(n.lhs.node().kind) < p, out);
            switch (n.kind) {
                case ExprKind::Add: out += " + "; break;
                case ExprKind::Subtract: out += " - "; break;
                case ExprKind::Multiply: out += " * "; break;
                default: out += " / "; break;
            }
            // A Negate right operand is fine after any binary operator.
            const int rp = precedence(n.rhs.node().kind);
            print_wrapped(n.rhs, rp <= p && n.rhs.node().kind != ExprKind::Negate, out);
            return;
        }
    }
}

// ------------------------------------------------------------- evaluation

template <class T, class Ops>
T eval_generic(const Expression& e, const Ops& ops) {
    const ExprNode& n = e.node();
    switch (n.kind) {
        case ExprKind::Literal: return ops.constant(n.value);
        case ExprKind::Variable: return ops.variable(n.axis);
        case ExprKind::Negate: return -eval_generic<T>(n.lhs, ops);
        case ExprKind::Add: return eval_generic<T>(n.lhs, ops) + eval_generic<T>(n.rhs, ops);
        case ExprKind::Subtract: return eval_generic<T>(n.lhs, ops) - eval_generic<T>(n.rhs, ops);
        case ExprKind::Multiply: return eval_generic<T>(n.lhs, ops) * eval_generic<T>(n.rhs, ops);
        case ExprKind::Divide: return ops.divide(eval_generic<T>(n.lhs, ops), eval_generic<T>(n.rhs, ops));
        case ExprKind::Power: {
            T base = eval_generic<T>(n.lhs, ops);
            if (n.rhs.is_constant()) return ops.power(base, evaluate(n.rhs, Point4{}));
            // Variable exponent: a^b = exp(b log a).
            return ops.exp(eval_generic<T>(n.rhs, ops) * ops.log(base));
        }
        case ExprKind::Call: {
            T arg = eval_generic<T>(n.lhs, ops);
            switch (n.function) {
                case Function::Exp: return ops.exp(arg);
                case Function::Log: return ops.log(arg);
                case Function::Sin: return ops.sin(arg);
                case Function::Cos: return ops.cos(arg);
                case Function::Sqrt: return ops.sqrt(arg);
                case Function::Atan: return ops.atan(arg);
            }
        }
    }
    throw Error("corrupt expression tree");
}

struct JetOps {
    const Point4& p;
    int order;
    Jet constant(double v) const { return Jet(order, v); }
    Jet variable(int axis) const { return Jet::variable(axis, p[static_cast<std::size_t>(axis)], order); }
    Jet divide(const Jet& a, const Jet& b) const { return a / b; }
    Jet power(const Jet& a, double r) const { return pow(a, r); }
    Jet exp(const Jet& a) const { return weylscope::exp(a); }
    Jet log(const Jet& a) const { return weylscope::log(a); }
    Jet sin(const Jet& a) const { return weylscope::sin(a); }
    Jet cos(const Jet& a) const { return weylscope::cos(a); }
    Jet sqrt(const Jet& a) const { return weylscope::sqrt(a); }
    Jet atan(const Jet& a) const { return weylscope::atan(a); }
};

struct DoubleOps {
    const Point4& p;
    double constant(double v) const { return v; }
    double variable(int axis) const { return p[static_cast<std::size_t>(axis)]; }
    double divide(double a, double b) const {
        if (b == 0.0) throw DomainError("division by zero");
        return a / b;
    }
    double power(double a, double r) const {
        if (std::nearbyint(r) == r) {
            if (a == 0.0 && r < 0) throw DomainError("division by zero");
            return std::pow(a, r);
        }
        if (!(a > 0.0)) throw DomainError("non-integer power of non-positive value " + std::to_string(a));
        return std::pow(a, r);
    }
    double exp(double a) const { return std::exp(a); }
    double log(double a) const {
        if (!(a > 0.0)) throw DomainError("log of non-positive value " + std::to_string(a));
        return std::log(a);
    }
    double sin(double a) const { return std::sin(a); }
    double cos(double a) const { return std::cos(a); }
    double sqrt(double a) const {
        if (a < 0.0) throw DomainError("sqrt of negative value " + std::to_string(a));
        return std::sqrt(a);
    }
    double atan(double a) const { return std::atan(a); }
};

}  // namespace

Expression Expression::literal(double value) {
    auto n = make(ExprKind::Literal);
    n->value = value;
    return Expression(std::move(n));
}

Expression Expression::variable(int axis) {
    if (axis < 0 || axis >= kDim) throw InputError("variable index out of range");
    auto n = make(ExprKind::Variable);
    n->axis = axis;
    return Expression(std::move(n));
}

Expression Expression::negate(Expression operand) {
    auto n = make(ExprKind::Negate);
    n->lhs = std::move(operand);
    return Expression(std::move(n));
}

Expression Expression::binary(ExprKind kind, Expression lhs, Expression rhs) {
    auto n = make(kind);
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return Expression(std::move(n));
}

Expression Expression::call(Function f, Expression argument) {
    auto n = make(ExprKind::Call);
    n->function = f;
    n->lhs = std::move(argument);
    return Expression(std::move(n));
}

bool Expression::is_constant() const {
    const ExprNode& n = node();
    switch (n.kind) {
        case ExprKind::Literal: return true;
        case ExprKind::Variable: return false;
        case ExprKind::Negate:
        case ExprKind::Call: return n.lhs.is_constant();
        default: return n.lhs.is_constant() && n.rhs.is_constant();
    }
}

bool operator==(const Expression& a, const Expression& b) { return nodes_equal(a, b); }

Expression operator+(Expression a, Expression b) { return Expression::binary(ExprKind::Add, std::move(a), std::move(b)); }
Expression operator-(Expression a, Expression b) { return Expression::binary(ExprKind::Subtract, std::move(a), std::move(b)); }
Expression operator*(Expression a, Expression b) { return Expression::binary(ExprKind::Multiply, std::move(a), std::move(b)); }
Expression operator/(Expression a, Expression b) { return Expression::binary(ExprKind::Divide, std::move(a), std::move(b)); }

Expression parse_expression(std::string_view source) { return Parser(source).parse(); }

std::string to_string(const Expression& e) {
    std::string out;
    print(e, out);
    return out;
}

Jet jet_eval(const Expression& e, const Point4& p, int order) {
    if (order < 0 || order > kMaxJetOrder)
        throw OrderError("jet order " + std::to_string(order) + " outside [0, " + std::to_string(kMaxJetOrder) + "]");
    return eval_generic<Jet>(e, JetOps{p, order});
}

double evaluate(const Expression& e, const Point4& p) {
    const double v = eval_generic<double>(e, DoubleOps{p});
    if (!std::isfinite(v)) throw DomainError("expression is not finite at the evaluation point");
    return v;
}

Jet fd_jet(const Expression& e, const Point4& p, int order, double step) {
    if (order < 0 || order > 2) throw OrderError("finite-difference jets support orders 0..2");
    if (!(step > 0.0)) throw InputError("finite-difference step must be positive");
    const auto f = [&](const Point4& q) {
        try {
            return evaluate(e, q);
        } catch (const DomainError& err) {
            throw DomainError(std::string("finite-difference stencil leaves the expression domain: ") + err.what());
        }
    };
    const auto shifted = [&](int a, double da, int b, double db) {
        Point4 q = p;
        q[static_cast<std::size_t>(a)] += da;
        q[static_cast<std::size_t>(b)] += db;
        return q;
    };
    Jet out(order, f(p));
    if (order == 0) return out;
    const double f0 = out.value();
    const auto richardson = [](double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; };
    for (int a = 0; a < kDim; ++a) {
        const auto d1 = [&](double h) { return (f(shifted(a, h, a, 0.0)) - f(shifted(a, -h, a, 0.0))) / (2.0 * h); };
        MultiIndex m{};
        m[static_cast<std::size_t>(a)] = 1;
        out.set_derivative(m, richardson(d1(step), d1(step / 2)));
    }
    if (order == 1) return out;
    for (int a = 0; a < kDim; ++a) {
        for (int b = a; b < kDim; ++b) {
            std::function<double(double)> d2;
            if (a == b) {
                d2 = [&, a](double h) {
                    return (f(shifted(a, h, a, 0.0)) - 2.0 * f0 + f(shifted(a, -h, a, 0.0))) / (h * h);
                };
            } else {
                d2 = [&, a, b](double h) {
                    return (f(shifted(a, h, b, h)) - f(shifted(a, h, b, -h)) - f(shifted(a, -h, b, h)) +
                            f(shifted(a, -h, b, -h))) /
                           (4.0 * h * h);
                };
            }
            MultiIndex m{};
            ++m[static_cast<std::size_t>(a)];
            ++m[static_cast<std::size_t>(b)];
            out.set_derivative(m, richardson(d2(step), d2(step / 2)));
        }
    }
    return out;
}

}  // namespace weylscope
