#ifndef KAHLER_EXPR_HPP
#define KAHLER_EXPR_HPP

// Expression trees over complex coordinates z_k, their formal conjugates zb_k
// and real parameters u_k, with Wirtinger differentiation.
//
// z_k and zb_k are independent symbols; they are only tied together when an
// Assignment binds zb_k to conj(z_k).

#include <charconv>
#include <complex>
#include <cstdio>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kahler {

using cplx = std::complex<double>;

enum class VarKind { z, zb, u };

struct VarRef {
    VarKind kind = VarKind::z;
    int index = 1;  // 1-based

    friend bool operator==(const VarRef&, const VarRef&) = default;
};

inline std::string to_string(VarRef v) {
    const char* prefix = v.kind == VarKind::z ? "z" : v.kind == VarKind::zb ? "zb" : "u";
    return prefix + std::to_string(v.index);
}

enum class Op { constant, variable, neg, log, exp, add, sub, mul, div, pow };

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
    Op op = Op::constant;
    cplx value{};     // Op::constant
    VarRef var{};     // Op::variable
    int exponent = 0; // Op::pow
    Expr lhs;         // unary operand, or left operand
    Expr rhs;         // right operand of binary ops

    // Cached at construction.
    bool is_constant = true;  // no variables below
    bool may_fail = false;    // contains log, div or a negative power
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& what)
        : std::runtime_error(what), offset_(offset), expected_(std::move(expected)) {}

    std::size_t offset() const { return offset_; }
    const std::vector<std::string>& expected() const { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

/// Raised by evaluate() on log(0), division by zero or 0^(negative).
class DomainError : public std::runtime_error {
public:
    DomainError(const std::string& node, const std::string& what)
        : std::runtime_error(what + " at '" + node + "'"), node_(node) {}

    /// Unparsed form of the offending subexpression.
    const std::string& node() const { return node_; }

private:
    std::string node_;
};

// ---------------------------------------------------------------------------
// Construction

namespace detail {

inline Expr make_node(Node n) {
    switch (n.op) {
    case Op::constant:
        n.is_constant = true;
        n.may_fail = false;
        break;
    case Op::variable:
        n.is_constant = false;
        n.may_fail = false;
        break;
    case Op::neg:
    case Op::exp:
        n.is_constant = n.lhs->is_constant;
        n.may_fail = n.lhs->may_fail;
        break;
    case Op::log:
        n.is_constant = n.lhs->is_constant;
        n.may_fail = true;
        break;
    case Op::pow:
        n.is_constant = n.lhs->is_constant;
        n.may_fail = n.lhs->may_fail || n.exponent < 0;
        break;
    case Op::add:
    case Op::sub:
    case Op::mul:
        n.is_constant = n.lhs->is_constant && n.rhs->is_constant;
        n.may_fail = n.lhs->may_fail || n.rhs->may_fail;
        break;
    case Op::div:
        n.is_constant = n.lhs->is_constant && n.rhs->is_constant;
        n.may_fail = true;
        break;
    }
    return std::make_shared<const Node>(std::move(n));
}

inline Expr unary(Op op, Expr a) {
    Node n;
    n.op = op;
    n.lhs = std::move(a);
    return make_node(std::move(n));
}

inline Expr binary(Op op, Expr a, Expr b) {
    Node n;
    n.op = op;
    n.lhs = std::move(a);
    n.rhs = std::move(b);
    return make_node(std::move(n));
}

}  // namespace detail

inline Expr constant(cplx c) {
    Node n;
    n.op = Op::constant;
    n.value = c;
    return detail::make_node(std::move(n));
}

inline Expr constant(double c) { return constant(cplx(c, 0.0)); }

inline Expr variable(VarKind kind, int index) {
    Node n;
    n.op = Op::variable;
    n.var = VarRef{kind, index};
    return detail::make_node(std::move(n));
}

inline Expr variable(VarRef v) { return variable(v.kind, v.index); }

inline Expr raw_neg(Expr a) { return detail::unary(Op::neg, std::move(a)); }
inline Expr raw_log(Expr a) { return detail::unary(Op::log, std::move(a)); }
inline Expr raw_exp(Expr a) { return detail::unary(Op::exp, std::move(a)); }
inline Expr raw_add(Expr a, Expr b) { return detail::binary(Op::add, std::move(a), std::move(b)); }
inline Expr raw_sub(Expr a, Expr b) { return detail::binary(Op::sub, std::move(a), std::move(b)); }
inline Expr raw_mul(Expr a, Expr b) { return detail::binary(Op::mul, std::move(a), std::move(b)); }
inline Expr raw_div(Expr a, Expr b) { return detail::binary(Op::div, std::move(a), std::move(b)); }

inline Expr raw_pow(Expr a, int exponent) {
    Node n;
    n.op = Op::pow;
    n.lhs = std::move(a);
    n.exponent = exponent;
    return detail::make_node(std::move(n));
}

// ---------------------------------------------------------------------------
// Evaluation

/// Values for z_k, zb_k, u_k, stored 0-based.
struct Assignment {
    std::vector<cplx> z;
    std::vector<cplx> zb;
    std::vector<cplx> u;

    /// Binds z = p and zb = conj(p).
    static Assignment at_point(const std::vector<cplx>& p) {
        Assignment a;
        a.z = p;
        a.zb.reserve(p.size());
        for (const auto& c : p) a.zb.push_back(std::conj(c));
        return a;
    }

    static Assignment at_parameters(const std::vector<double>& params) {
        Assignment a;
        a.u.assign(params.begin(), params.end());
        return a;
    }

    cplx lookup(VarRef v) const {
        const auto& table = v.kind == VarKind::z ? z : v.kind == VarKind::zb ? zb : u;
        if (v.index < 1 || static_cast<std::size_t>(v.index) > table.size())
            throw std::invalid_argument("no value assigned to " + to_string(v));
        return table[static_cast<std::size_t>(v.index - 1)];
    }
};

std::string unparse(const Expr& e);

inline cplx int_power(cplx base, int exponent, const Expr& where) {
    if (exponent < 0) {
        if (base == cplx(0.0, 0.0)) throw DomainError(unparse(where), "zero raised to a negative power");
        base = cplx(1.0, 0.0) / base;
        exponent = -exponent;
    }
    cplx result(1.0, 0.0);
    while (exponent > 0) {
        if (exponent & 1) result *= base;
        base *= base;
        exponent >>= 1;
    }
    return result;
}

inline cplx evaluate(const Expr& e, const Assignment& at) {
    switch (e->op) {
    case Op::constant: return e->value;
    case Op::variable: return at.lookup(e->var);
    case Op::neg: return -evaluate(e->lhs, at);
    case Op::exp: return std::exp(evaluate(e->lhs, at));
    case Op::log: {
        const cplx a = evaluate(e->lhs, at);
        if (a == cplx(0.0, 0.0)) throw DomainError(unparse(e), "logarithm of zero");
        return std::log(a);
    }
    case Op::add: return evaluate(e->lhs, at) + evaluate(e->rhs, at);
    case Op::sub: return evaluate(e->lhs, at) - evaluate(e->rhs, at);
    case Op::mul: return evaluate(e->lhs, at) * evaluate(e->rhs, at);
    case Op::div: {
        const cplx num = evaluate(e->lhs, at);
        const cplx den = evaluate(e->rhs, at);
        if (den == cplx(0.0, 0.0)) throw DomainError(unparse(e), "division by zero");
        return num / den;
    }
    case Op::pow: return int_power(evaluate(e->lhs, at), e->exponent, e);
    }
    return {};
}

// ---------------------------------------------------------------------------
// Simplifying constructors. Constant subtrees collapse; 0/1 identities are
// dropped only when the dropped operand cannot raise a domain error.

namespace detail {

inline bool is_value(const Expr& e, double v) {
    return e->op == Op::constant && e->value == cplx(v, 0.0);
}

// Folds a constant subtree, leaving it alone if evaluation fails.
inline Expr fold_if_constant(Expr e) {
    if (!e->is_constant || e->op == Op::constant) return e;
    try {
        return constant(evaluate(e, Assignment{}));
    } catch (const DomainError&) {
        return e;
    }
}

}  // namespace detail

inline Expr neg(Expr a) {
    if (a->op == Op::constant) return constant(-a->value);
    if (a->op == Op::neg) return a->lhs;
    return raw_neg(std::move(a));
}

inline Expr log(Expr a) { return detail::fold_if_constant(raw_log(std::move(a))); }
inline Expr exp(Expr a) { return detail::fold_if_constant(raw_exp(std::move(a))); }

inline Expr add(Expr a, Expr b) {
    if (detail::is_value(a, 0.0)) return b;
    if (detail::is_value(b, 0.0)) return a;
    if (a->op == Op::constant && b->op == Op::constant) return constant(a->value + b->value);
    return raw_add(std::move(a), std::move(b));
}

inline Expr sub(Expr a, Expr b) {
    if (detail::is_value(b, 0.0)) return a;
    if (detail::is_value(a, 0.0)) return neg(std::move(b));
    if (a->op == Op::constant && b->op == Op::constant) return constant(a->value - b->value);
    return raw_sub(std::move(a), std::move(b));
}

inline Expr mul(Expr a, Expr b) {
    if (detail::is_value(a, 0.0) && !b->may_fail) return a;
    if (detail::is_value(b, 0.0) && !a->may_fail) return b;
    if (detail::is_value(a, 1.0)) return b;
    if (detail::is_value(b, 1.0)) return a;
    if (detail::is_value(a, -1.0)) return neg(std::move(b));
    if (detail::is_value(b, -1.0)) return neg(std::move(a));
    if (a->op == Op::constant && b->op == Op::constant) return constant(a->value * b->value);
    return raw_mul(std::move(a), std::move(b));
}

inline Expr div(Expr a, Expr b) {
    if (detail::is_value(b, 1.0)) return a;
    return detail::fold_if_constant(raw_div(std::move(a), std::move(b)));
}

inline Expr pow(Expr a, int exponent) {
    if (exponent == 1) return a;
    if (exponent == 0 && !a->may_fail) return constant(1.0);
    return detail::fold_if_constant(raw_pow(std::move(a), exponent));
}

inline Expr operator+(Expr a, Expr b) { return add(std::move(a), std::move(b)); }
inline Expr operator-(Expr a, Expr b) { return sub(std::move(a), std::move(b)); }
inline Expr operator*(Expr a, Expr b) { return mul(std::move(a), std::move(b)); }
inline Expr operator/(Expr a, Expr b) { return div(std::move(a), std::move(b)); }
inline Expr operator-(Expr a) { return neg(std::move(a)); }

/// Bottom-up rebuild through the simplifying constructors.
inline Expr constant_fold(const Expr& e) {
    switch (e->op) {
    case Op::constant:
    case Op::variable: return e;
    case Op::neg: return neg(constant_fold(e->lhs));
    case Op::log: return log(constant_fold(e->lhs));
    case Op::exp: return exp(constant_fold(e->lhs));
    case Op::add: return add(constant_fold(e->lhs), constant_fold(e->rhs));
    case Op::sub: return sub(constant_fold(e->lhs), constant_fold(e->rhs));
    case Op::mul: return mul(constant_fold(e->lhs), constant_fold(e->rhs));
    case Op::div: return div(constant_fold(e->lhs), constant_fold(e->rhs));
    case Op::pow: return pow(constant_fold(e->lhs), e->exponent);
    }
    return e;
}

// ---------------------------------------------------------------------------
// Differentiation

/// Exact partial derivative with respect to `var`; every other symbol,
/// including the formal conjugate of `var`, is held constant.
inline Expr wirtinger_derivative(const Expr& e, VarRef var) {
    if (e->is_constant) return constant(0.0);
    switch (e->op) {
    case Op::constant: return constant(0.0);
    case Op::variable: return constant(e->var == var ? 1.0 : 0.0);
    case Op::neg: return neg(wirtinger_derivative(e->lhs, var));
    case Op::log: return div(wirtinger_derivative(e->lhs, var), e->lhs);
    case Op::exp: return mul(e, wirtinger_derivative(e->lhs, var));
    case Op::add: return add(wirtinger_derivative(e->lhs, var), wirtinger_derivative(e->rhs, var));
    case Op::sub: return sub(wirtinger_derivative(e->lhs, var), wirtinger_derivative(e->rhs, var));
    case Op::mul:
        return add(mul(wirtinger_derivative(e->lhs, var), e->rhs),
                   mul(e->lhs, wirtinger_derivative(e->rhs, var)));
    case Op::div: {
        Expr da = wirtinger_derivative(e->lhs, var);
        Expr db = wirtinger_derivative(e->rhs, var);
        Expr first = div(da, e->rhs);
        if (detail::is_value(db, 0.0)) return first;
        return sub(std::move(first), div(mul(e->lhs, std::move(db)), pow(e->rhs, 2)));
    }
    case Op::pow: {
        if (e->exponent == 0) return constant(0.0);
        Expr da = wirtinger_derivative(e->lhs, var);
        return mul(mul(constant(static_cast<double>(e->exponent)), pow(e->lhs, e->exponent - 1)),
                   std::move(da));
    }
    }
    return constant(0.0);
}

// ---------------------------------------------------------------------------
// Inspection

inline bool structurally_equal(const Expr& a, const Expr& b) {
    if (a == b) return true;
    if (a->op != b->op) return false;
    switch (a->op) {
    case Op::constant: return a->value == b->value;
    case Op::variable: return a->var == b->var;
    case Op::pow: return a->exponent == b->exponent && structurally_equal(a->lhs, b->lhs);
    case Op::neg:
    case Op::log:
    case Op::exp: return structurally_equal(a->lhs, b->lhs);
    default: return structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
    }
}

inline std::size_t node_count(const Expr& e) {
    std::size_t n = 1;
    if (e->lhs) n += node_count(e->lhs);
    if (e->rhs) n += node_count(e->rhs);
    return n;
}

inline void collect_variables(const Expr& e, std::vector<VarRef>& out) {
    if (e->op == Op::variable) {
        for (const auto& v : out)
            if (v == e->var) return;
        out.push_back(e->var);
        return;
    }
    if (e->lhs) collect_variables(e->lhs, out);
    if (e->rhs) collect_variables(e->rhs, out);
}

namespace detail {

inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace detail

/// Text form accepted back by parse_expression. Binary operations are
/// always parenthesized.
inline std::string unparse(const Expr& e) {
    switch (e->op) {
    case Op::constant: {
        const double re = e->value.real();
        const double im = e->value.imag();
        if (im == 0.0) return re < 0.0 ? "(" + detail::format_double(re) + ")" : detail::format_double(re);
        if (re == 0.0) return "(" + detail::format_double(im) + "*i)";
        return "(" + detail::format_double(re) + " + " + detail::format_double(im) + "*i)";
    }
    case Op::variable: return to_string(e->var);
    case Op::neg: return "(-" + unparse(e->lhs) + ")";
    case Op::log: return "log(" + unparse(e->lhs) + ")";
    case Op::exp: return "exp(" + unparse(e->lhs) + ")";
    case Op::add: return "(" + unparse(e->lhs) + " + " + unparse(e->rhs) + ")";
    case Op::sub: return "(" + unparse(e->lhs) + " - " + unparse(e->rhs) + ")";
    case Op::mul: return "(" + unparse(e->lhs) + " * " + unparse(e->rhs) + ")";
    case Op::div: return "(" + unparse(e->lhs) + " / " + unparse(e->rhs) + ")";
    case Op::pow: return "(" + unparse(e->lhs) + "^" + std::to_string(e->exponent) + ")";
    }
    return {};
}

// ---------------------------------------------------------------------------
// Parsing
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ('-')? atom ('^' integer)?
//   atom   := number | var | 'i' | func '(' expr ')' | '(' expr ')'
//   func   := 'log' | 'exp'
//   var    := 'z' index | 'zb' index | 'u' index
//
// The exponent may carry a leading '-'. 'i' is the imaginary unit.

namespace detail {

class Parser {
public:
    Parser(std::string_view text, int dimension, std::set<VarKind> allowed)
        : text_(text), dimension_(dimension), allowed_(std::move(allowed)) {}

    Expr parse() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) fail({"'+'", "'-'", "'*'", "'/'", "end of input"});
        return e;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    int dimension_;
    std::set<VarKind> allowed_;

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        std::string msg = "syntax error at offset " + std::to_string(pos_) + ": expected ";
        for (std::size_t k = 0; k < expected.size(); ++k) msg += (k ? ", " : "") + expected[k];
        if (pos_ < text_.size())
            msg += "; found '" + std::string(1, text_[pos_]) + "'";
        else
            msg += "; found end of input";
        throw ParseError(pos_, std::move(expected), msg);
    }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                                       text_[pos_] == '\r'))
            ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    bool starts_with(std::string_view word) const { return text_.substr(pos_).starts_with(word); }

    static bool is_digit(char c) { return c >= '0' && c <= '9'; }

    Expr parse_expr() {
        Expr e = parse_term();
        for (;;) {
            if (accept('+'))
                e = raw_add(e, parse_term());
            else if (accept('-'))
                e = raw_sub(e, parse_term());
            else
                return e;
        }
    }

    Expr parse_term() {
        Expr e = parse_factor();
        for (;;) {
            if (accept('*'))
                e = raw_mul(e, parse_factor());
            else if (accept('/'))
                e = raw_div(e, parse_factor());
            else
                return e;
        }
    }

    Expr parse_factor() {
        const bool negate = accept('-');
        Expr e = parse_atom();
        if (accept('^')) {
            skip_ws();
            const std::size_t start = pos_;
            if (pos_ < text_.size() && text_[pos_] == '-') ++pos_;
            if (pos_ >= text_.size() || !is_digit(text_[pos_])) fail({"integer exponent"});
            while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
            int exponent = 0;
            auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, exponent);
            if (ec != std::errc()) {
                pos_ = start;
                fail({"integer exponent"});
            }
            e = raw_pow(e, exponent);
        }
        return negate ? raw_neg(e) : e;
    }

    Expr parse_atom() {
        skip_ws();
        static const std::vector<std::string> expected_atom = {"number", "variable", "'i'", "'log'",
                                                               "'exp'",  "'('"};
        if (pos_ >= text_.size()) fail(expected_atom);
        const char c = text_[pos_];
        if (is_digit(c) || c == '.') return parse_number();
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            if (!accept(')')) fail({"')'"});
            return e;
        }
        if (starts_with("log") || starts_with("exp")) {
            const bool is_log = starts_with("log");
            pos_ += 3;
            if (!accept('(')) fail({"'('"});
            Expr arg = parse_expr();
            if (!accept(')')) fail({"')'"});
            return is_log ? raw_log(arg) : raw_exp(arg);
        }
        if (c == 'z' || c == 'u') return parse_variable();
        if (c == 'i') {
            ++pos_;
            return constant(cplx(0.0, 1.0));
        }
        fail(expected_atom);
    }

    Expr parse_number() {
        const std::size_t start = pos_;
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value,
                                         std::chars_format::general);
        if (ec != std::errc()) fail({"number"});
        pos_ = static_cast<std::size_t>(ptr - text_.data());
        if (pos_ == start) fail({"number"});
        return constant(value);
    }

    Expr parse_variable() {
        const std::size_t start = pos_;
        VarKind kind;
        if (starts_with("zb")) {
            kind = VarKind::zb;
            pos_ += 2;
        } else if (text_[pos_] == 'z') {
            kind = VarKind::z;
            pos_ += 1;
        } else {
            kind = VarKind::u;
            pos_ += 1;
        }
        if (pos_ >= text_.size() || text_[pos_] < '1' || text_[pos_] > '9') fail({"variable index"});
        const std::size_t digits = pos_;
        while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
        int index = 0;
        auto [ptr, ec] = std::from_chars(text_.data() + digits, text_.data() + pos_, index);
        const VarRef ref{kind, index};
        if (ec != std::errc() || index > dimension_) {
            pos_ = start;
            throw ParseError(start, {},
                             "variable " + to_string(ref) + " at offset " + std::to_string(start) +
                                 " out of range (dimension " + std::to_string(dimension_) + ")");
        }
        if (!allowed_.contains(kind)) {
            pos_ = start;
            throw ParseError(start, {}, "variable kind of " + to_string(ref) + " not allowed here");
        }
        return variable(ref);
    }
};

}  // namespace detail

inline Expr parse_expression(std::string_view text, int dimension,
                             const std::set<VarKind>& allowed = {VarKind::z, VarKind::zb}) {
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos)
        throw ParseError(0, {"expression"}, "empty expression");
    return detail::Parser(text, dimension, allowed).parse();
}

}  // namespace kahler

#endif  // KAHLER_EXPR_HPP
