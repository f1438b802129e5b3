#ifndef FRACBOUND_EXPR_HPP
#define FRACBOUND_EXPR_HPP

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "fracbound/error.hpp"

namespace fracbound::expr {

// Closed-form scalar functions of t, x, u as user-supplied text.
//
// Grammar (no implicit multiplication):
//   expression := term (('+' | '-') term)*
//   term       := unary (('*' | '/') unary)*
//   unary      := '-' unary | power
//   power      := atom ('^' unary)?          -- right-associative
//   atom       := number | var | func '(' args ')' | '(' expression ')'
//   var        := 't' | 'x' | 'u'
//   func       := exp | ln | abs | sqrt | min | max
//
// The exponent of '^' must be a constant; it is folded to a double at parse
// time, so power nodes always carry a real constant exponent. sqrt(e) is
// sugar for e^0.5.

enum class Kind : std::uint8_t {
    number,
    variable,
    add,
    sub,
    mul,
    div,
    neg,
    pow,  // value holds the constant exponent
    exp,
    ln,
    abs,
    min,
    max,
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    Kind kind;
    double value = 0.0; // number literal, or pow exponent
    char var = 0;       // 't', 'x' or 'u'
    NodePtr lhs;
    NodePtr rhs;
};

/// Variable bindings for evaluation. Slots: t, x, u.
struct Bindings {
    std::array<double, 3> val{0.0, 0.0, 0.0};
    std::array<bool, 3> set_{false, false, false};

    static int slot(char v) { return v == 't' ? 0 : v == 'x' ? 1 : 2; }

    Bindings& set(char v, double value) {
        val[slot(v)] = value;
        set_[slot(v)] = true;
        return *this;
    }
};

namespace detail {

inline std::string format_double(double v) {
    std::array<char, 40> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    (void)ec;
    return std::string(buf.data(), ptr);
}

inline int precedence(Kind k) {
    switch (k) {
    case Kind::add:
    case Kind::sub: return 1;
    case Kind::mul:
    case Kind::div: return 2;
    case Kind::neg: return 3;
    case Kind::pow: return 4;
    default: return 5; // leaves and function calls
    }
}

inline void print_node(const NodePtr& n, std::string& out);

inline void print_child(const NodePtr& child, int min_prec, std::string& out) {
    if (precedence(child->kind) < min_prec) {
        out += '(';
        print_node(child, out);
        out += ')';
    } else {
        print_node(child, out);
    }
}

inline void print_node(const NodePtr& n, std::string& out) {
    switch (n->kind) {
    case Kind::number:
        out += format_double(n->value);
        break;
    case Kind::variable:
        out += n->var;
        break;
    case Kind::add:
        print_child(n->lhs, 1, out);
        out += '+';
        print_child(n->rhs, 2, out);
        break;
    case Kind::sub:
        print_child(n->lhs, 1, out);
        out += '-';
        print_child(n->rhs, 2, out);
        break;
    case Kind::mul:
        print_child(n->lhs, 2, out);
        out += '*';
        print_child(n->rhs, 3, out);
        break;
    case Kind::div:
        print_child(n->lhs, 2, out);
        out += '/';
        print_child(n->rhs, 3, out);
        break;
    case Kind::neg:
        out += '-';
        print_child(n->lhs, 3, out);
        break;
    case Kind::pow:
        print_child(n->lhs, 5, out);
        out += '^';
        if (n->value < 0) {
            out += '(';
            out += format_double(n->value);
            out += ')';
        } else {
            out += format_double(n->value);
        }
        break;
    case Kind::exp:
        out += "exp(";
        print_node(n->lhs, out);
        out += ')';
        break;
    case Kind::ln:
        out += "ln(";
        print_node(n->lhs, out);
        out += ')';
        break;
    case Kind::abs:
        out += "abs(";
        print_node(n->lhs, out);
        out += ')';
        break;
    case Kind::min:
    case Kind::max:
        out += n->kind == Kind::min ? "min(" : "max(";
        print_node(n->lhs, out);
        out += ',';
        print_node(n->rhs, out);
        out += ')';
        break;
    }
}

inline std::string print(const NodePtr& n) {
    std::string out;
    print_node(n, out);
    return out;
}

[[noreturn]] inline void eval_fault(const NodePtr& n, const std::string& what, double v) {
    throw EvalError("domain error: " + what + " (value " + format_double(v) +
                    ") in sub-expression '" + print(n) + "'");
}

inline double eval_pow(const NodePtr& n, double base, double e) {
    if (base == 0.0) {
        if (e > 0.0) return 0.0;
        if (e == 0.0) return 1.0; // empty-product convention
        eval_fault(n, "zero base with negative exponent", base);
    }
    if (base < 0.0) {
        if (e != std::floor(e)) eval_fault(n, "negative base with non-integer exponent", base);
        return std::pow(base, e);
    }
    return std::pow(base, e);
}

inline double eval_node(const NodePtr& n, const Bindings& b) {
    double r = 0.0;
    switch (n->kind) {
    case Kind::number:
        return n->value;
    case Kind::variable:
        if (!b.set_[Bindings::slot(n->var)])
            throw EvalError(std::string("unbound variable '") + n->var + "'");
        return b.val[Bindings::slot(n->var)];
    case Kind::add: r = eval_node(n->lhs, b) + eval_node(n->rhs, b); break;
    case Kind::sub: r = eval_node(n->lhs, b) - eval_node(n->rhs, b); break;
    case Kind::mul: r = eval_node(n->lhs, b) * eval_node(n->rhs, b); break;
    case Kind::div: {
        const double den = eval_node(n->rhs, b);
        if (den == 0.0) eval_fault(n, "division by zero", den);
        r = eval_node(n->lhs, b) / den;
        break;
    }
    case Kind::neg: r = -eval_node(n->lhs, b); break;
    case Kind::pow: r = eval_pow(n, eval_node(n->lhs, b), n->value); break;
    case Kind::exp: r = std::exp(eval_node(n->lhs, b)); break;
    case Kind::ln: {
        const double a = eval_node(n->lhs, b);
        if (a <= 0.0) eval_fault(n, "logarithm of non-positive value", a);
        r = std::log(a);
        break;
    }
    case Kind::abs: r = std::fabs(eval_node(n->lhs, b)); break;
    case Kind::min: r = std::fmin(eval_node(n->lhs, b), eval_node(n->rhs, b)); break;
    case Kind::max: r = std::fmax(eval_node(n->lhs, b), eval_node(n->rhs, b)); break;
    }
    if (!std::isfinite(r)) eval_fault(n, "non-finite result", r);
    return r;
}

inline bool node_equal(const NodePtr& a, const NodePtr& b) {
    if (a->kind != b->kind) return false;
    switch (a->kind) {
    case Kind::number: return a->value == b->value;
    case Kind::variable: return a->var == b->var;
    case Kind::pow:
        return a->value == b->value && node_equal(a->lhs, b->lhs);
    case Kind::neg:
    case Kind::exp:
    case Kind::ln:
    case Kind::abs:
        return node_equal(a->lhs, b->lhs);
    default:
        return node_equal(a->lhs, b->lhs) && node_equal(a->rhs, b->rhs);
    }
}

inline bool node_has_variable(const NodePtr& n) {
    if (n->kind == Kind::variable) return true;
    if (n->lhs && node_has_variable(n->lhs)) return true;
    if (n->rhs && node_has_variable(n->rhs)) return true;
    return false;
}

} // namespace detail

/// Immutable expression value. Evaluation is pure; safe for concurrent use.
class Expr {
public:
    Expr() = default;
    explicit Expr(NodePtr root) : root_(std::move(root)) {}

    bool valid() const { return root_ != nullptr; }
    const NodePtr& root() const { return root_; }

    double eval(const Bindings& b) const { return detail::eval_node(root_, b); }

    /// Evaluate with t bound.
    double operator()(double t) const { return eval(Bindings{}.set('t', t)); }
    /// Evaluate with t and x bound.
    double operator()(double t, double x) const {
        return eval(Bindings{}.set('t', t).set('x', x));
    }
    /// Evaluate with u bound.
    double at_u(double u) const { return eval(Bindings{}.set('u', u)); }

    std::string str() const { return detail::print(root_); }

    bool has_variables() const { return detail::node_has_variable(root_); }

    friend bool structurally_equal(const Expr& a, const Expr& b) {
        return detail::node_equal(a.root_, b.root_);
    }

private:
    NodePtr root_;
};

namespace detail {

class Parser {
public:
    Parser(std::string_view text, std::string_view allowed_vars)
        : text_(text), vars_(allowed_vars) {}

    NodePtr parse() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("empty expression", 0);
        NodePtr e = expression();
        skip_ws();
        if (pos_ < text_.size())
            throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
        return e;
    }

private:
    std::string_view text_;
    std::string_view vars_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    bool accept(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c))
            throw ParseError(std::string("expected '") + c + "'", pos_);
    }

    static NodePtr make(Kind k, NodePtr l = nullptr, NodePtr r = nullptr) {
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->lhs = std::move(l);
        n->rhs = std::move(r);
        return n;
    }

    NodePtr expression() {
        NodePtr e = term();
        for (;;) {
            if (accept('+'))
                e = make(Kind::add, e, term());
            else if (accept('-'))
                e = make(Kind::sub, e, term());
            else
                return e;
        }
    }

    NodePtr term() {
        NodePtr e = unary();
        for (;;) {
            if (accept('*'))
                e = make(Kind::mul, e, unary());
            else if (accept('/'))
                e = make(Kind::div, e, unary());
            else
                return e;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Kind::neg, unary());
        return power();
    }

    NodePtr power() {
        NodePtr base = atom();
        std::size_t caret = pos_;
        if (accept('^')) {
            caret = pos_ - 1;
            NodePtr e = unary(); // right-associative, binds tighter than unary minus on the left
            if (node_has_variable(e))
                throw ParseError("exponent must be a constant", caret);
            double folded;
            try {
                folded = eval_node(e, Bindings{});
            } catch (const EvalError& err) {
                throw ParseError(std::string("invalid constant exponent: ") + err.what(), caret);
            }
            auto n = std::make_shared<Node>();
            n->kind = Kind::pow;
            n->value = folded;
            n->lhs = std::move(base);
            return n;
        }
        return base;
    }

    NodePtr atom() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        if (c == '(') {
            ++pos_;
            NodePtr e = expression();
            expect(')');
            return e;
        }
        throw ParseError(std::string("unexpected '") + c + "'", pos_);
    }

    NodePtr number() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            } else {
                pos_ = mark; // 'e' belonged to something else
            }
        }
        double v = 0.0;
        auto res = std::from_chars(text_.data() + start, text_.data() + pos_, v);
        if (res.ec != std::errc() || res.ptr != text_.data() + pos_)
            throw ParseError("malformed number", start);
        auto n = std::make_shared<Node>();
        n->kind = Kind::number;
        n->value = v;
        return n;
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string_view name = text_.substr(start, pos_ - start);

        if (name == "exp" || name == "ln" || name == "abs" || name == "sqrt") {
            expect('(');
            NodePtr arg = expression();
            expect(')');
            if (name == "sqrt") { // sugar for ^0.5
                auto n = std::make_shared<Node>();
                n->kind = Kind::pow;
                n->value = 0.5;
                n->lhs = std::move(arg);
                return n;
            }
            Kind k = name == "exp" ? Kind::exp : name == "ln" ? Kind::ln : Kind::abs;
            return make(k, arg);
        }
        if (name == "min" || name == "max") {
            expect('(');
            NodePtr a = expression();
            expect(',');
            NodePtr b = expression();
            expect(')');
            return make(name == "min" ? Kind::min : Kind::max, a, b);
        }

        if (name.size() == 1 && (name[0] == 't' || name[0] == 'x' || name[0] == 'u')) {
            if (vars_.find(name[0]) == std::string_view::npos)
                throw ParseError("unknown variable '" + std::string(name) + "'", start);
            auto n = std::make_shared<Node>();
            n->kind = Kind::variable;
            n->var = name[0];
            return n;
        }
        throw ParseError("unknown identifier '" + std::string(name) + "'", start);
    }
};

} // namespace detail

/// Parse `text` over the allowed variable set (a subset of "txu").
/// Throws ParseError with a 0-based byte offset on malformed input.
inline Expr parse(std::string_view text, std::string_view allowed_vars) {
    return Expr(detail::Parser(text, allowed_vars).parse());
}

/// Expression holding a plain constant.
inline Expr constant(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::number;
    n->value = v;
    return Expr(n);
}

/// Programmatic AST builders (used to assemble composite envelopes).
inline Expr variable(char v) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::variable;
    n->var = v;
    return Expr(n);
}

inline Expr combine(Kind k, const Expr& a, const Expr& b) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->lhs = a.root();
    n->rhs = b.root();
    return Expr(n);
}

inline Expr add(const Expr& a, const Expr& b) { return combine(Kind::add, a, b); }
inline Expr mul(const Expr& a, const Expr& b) { return combine(Kind::mul, a, b); }

inline Expr power(const Expr& base, double exponent) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::pow;
    n->value = exponent;
    n->lhs = base.root();
    return Expr(n);
}

/// If e is a constant (no variables), return its value.
inline bool constant_value(const Expr& e, double& out) {
    if (e.has_variables()) return false;
    out = e.eval(Bindings{});
    return true;
}

/// Recognize omega(u) = coeff * u^exponent (including plain u and constants).
/// Used by the closed-form bound fast paths.
inline bool power_law_form(const Expr& e, double& coeff, double& exponent) {
    const NodePtr& n = e.root();
    auto is_u = [](const NodePtr& m) { return m->kind == Kind::variable && m->var == 'u'; };
    if (n->kind == Kind::number) {
        coeff = n->value;
        exponent = 0.0;
        return true;
    }
    if (is_u(n)) {
        coeff = 1.0;
        exponent = 1.0;
        return true;
    }
    if (n->kind == Kind::pow && is_u(n->lhs)) {
        coeff = 1.0;
        exponent = n->value;
        return true;
    }
    if (n->kind == Kind::mul) {
        const NodePtr* num = nullptr;
        const NodePtr* other = nullptr;
        if (n->lhs->kind == Kind::number) { num = &n->lhs; other = &n->rhs; }
        else if (n->rhs->kind == Kind::number) { num = &n->rhs; other = &n->lhs; }
        if (num) {
            double c2, e2;
            if (power_law_form(Expr(*other), c2, e2)) {
                coeff = (*num)->value * c2;
                exponent = e2;
                return true;
            }
        }
    }
    return false;
}

} // namespace fracbound::expr

#endif
