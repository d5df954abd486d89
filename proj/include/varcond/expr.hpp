#pragma once

// Immutable symbolic expression trees over independent variables x^i and jet
// coordinates u^j_(k). Construction goes through smart constructors that fold
// constant subtrees and apply the 0/1 identities, so expressions stay small
// without a full canonical form.

#include "varcond/errors.hpp"
#include "varcond/multi_index.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace varcond {

enum class ExprKind : std::uint8_t {
    Constant,
    IndepVar,
    JetCoord,
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Func,
};

enum class FuncKind : std::uint8_t { Sin, Cos, Exp, Log, Sqrt };

inline const char* func_name(FuncKind f) {
    switch (f) {
        case FuncKind::Sin: return "sin";
        case FuncKind::Cos: return "cos";
        case FuncKind::Exp: return "exp";
        case FuncKind::Log: return "log";
        case FuncKind::Sqrt: return "sqrt";
    }
    return "?";
}

/// Value handle for an immutable expression node. Copying is a shared-pointer
/// copy; the tree itself is never mutated after construction.
class Expr {
public:
    /// Default-constructed expression is the constant 0.
    Expr() : Expr(constant(0.0)) {}

    static Expr constant(double v) {
        auto n = std::make_shared<Node>();
        n->kind = ExprKind::Constant;
        n->value = v;
        return Expr(std::move(n));
    }

    /// Independent variable x^axis (1-based).
    static Expr indep(int axis) {
        auto n = std::make_shared<Node>();
        n->kind = ExprKind::IndepVar;
        n->index = axis;
        return Expr(std::move(n));
    }

    static Expr jet(JetCoordinate c) {
        auto n = std::make_shared<Node>();
        n->kind = ExprKind::JetCoord;
        n->coord = std::move(c);
        return Expr(std::move(n));
    }

    ExprKind kind() const noexcept { return node_->kind; }

    bool is_constant() const noexcept { return node_->kind == ExprKind::Constant; }
    bool is_constant(double v) const noexcept { return is_constant() && node_->value == v; }

    double constant_value() const { return node_->value; }
    int axis() const { return node_->index; }
    int exponent() const { return node_->index; }
    FuncKind func() const { return node_->fn; }
    const JetCoordinate& coordinate() const { return node_->coord; }

    /// Child of Neg/Func and base of Pow.
    Expr child() const { return Expr(node_->a); }
    Expr left() const { return Expr(node_->a); }
    Expr right() const { return Expr(node_->b); }

    friend bool operator==(const Expr& a, const Expr& b) {
        return structurally_equal(a.node_.get(), b.node_.get());
    }

    friend Expr make_node(ExprKind k, Expr a, Expr b, int index, FuncKind fn);

private:
    struct Node {
        ExprKind kind = ExprKind::Constant;
        double value = 0.0;
        int index = 0; // IndepVar axis, Pow exponent
        FuncKind fn = FuncKind::Sin;
        JetCoordinate coord;
        std::shared_ptr<const Node> a, b;
    };

    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    static bool structurally_equal(const Node* a, const Node* b) {
        if (a == b) return true;
        if (a->kind != b->kind) return false;
        switch (a->kind) {
            case ExprKind::Constant: return a->value == b->value;
            case ExprKind::IndepVar: return a->index == b->index;
            case ExprKind::JetCoord: return a->coord == b->coord;
            case ExprKind::Neg: return structurally_equal(a->a.get(), b->a.get());
            case ExprKind::Func:
                return a->fn == b->fn && structurally_equal(a->a.get(), b->a.get());
            case ExprKind::Pow:
                return a->index == b->index && structurally_equal(a->a.get(), b->a.get());
            default:
                return structurally_equal(a->a.get(), b->a.get()) &&
                       structurally_equal(a->b.get(), b->b.get());
        }
    }

    std::shared_ptr<const Node> node_;
};

inline Expr make_node(ExprKind k, Expr a, Expr b, int index = 0, FuncKind fn = FuncKind::Sin) {
    auto n = std::make_shared<Expr::Node>();
    n->kind = k;
    n->index = index;
    n->fn = fn;
    n->a = a.node_;
    n->b = b.node_;
    return Expr(std::move(n));
}

// ---------------------------------------------------------------------------
// Smart constructors. Rewrite rules: constant folding, 0/1 identities for
// + - * / ^, double-negation collapse, and merging of constants through
// nested Add/Mul chains. Constants are kept as the left operand of Add/Mul.
// ---------------------------------------------------------------------------

inline Expr add(const Expr& l, const Expr& r);
inline Expr sub(const Expr& l, const Expr& r);
inline Expr mul(const Expr& l, const Expr& r);
inline Expr divide(const Expr& l, const Expr& r);
inline Expr powi(const Expr& base, int exponent);
inline Expr neg(const Expr& e);
inline Expr apply(FuncKind fn, const Expr& e);

inline Expr neg(const Expr& e) {
    if (e.is_constant()) return Expr::constant(-e.constant_value());
    if (e.kind() == ExprKind::Neg) return e.child();
    return make_node(ExprKind::Neg, e, Expr::constant(0.0));
}

inline Expr add(const Expr& l, const Expr& r) {
    if (l.is_constant() && r.is_constant())
        return Expr::constant(l.constant_value() + r.constant_value());
    if (l.is_constant(0.0)) return r;
    if (r.is_constant(0.0)) return l;
    if (r.is_constant()) return add(r, l);
    if (l.is_constant() && r.kind() == ExprKind::Add && r.left().is_constant())
        return add(Expr::constant(l.constant_value() + r.left().constant_value()), r.right());
    return make_node(ExprKind::Add, l, r);
}

inline Expr sub(const Expr& l, const Expr& r) {
    if (l.is_constant() && r.is_constant())
        return Expr::constant(l.constant_value() - r.constant_value());
    if (r.is_constant(0.0)) return l;
    if (l.is_constant(0.0)) return neg(r);
    if (l == r) return Expr::constant(0.0);
    return make_node(ExprKind::Sub, l, r);
}

inline Expr mul(const Expr& l, const Expr& r) {
    if (l.is_constant() && r.is_constant())
        return Expr::constant(l.constant_value() * r.constant_value());
    if (l.is_constant(0.0) || r.is_constant(0.0)) return Expr::constant(0.0);
    if (l.is_constant(1.0)) return r;
    if (r.is_constant(1.0)) return l;
    if (r.is_constant()) return mul(r, l);
    if (l.is_constant() && r.kind() == ExprKind::Mul && r.left().is_constant())
        return mul(Expr::constant(l.constant_value() * r.left().constant_value()), r.right());
    return make_node(ExprKind::Mul, l, r);
}

inline Expr divide(const Expr& l, const Expr& r) {
    if (r.is_constant(1.0)) return l;
    if (l.is_constant(0.0)) return Expr::constant(0.0);
    if (l.is_constant() && r.is_constant() && r.constant_value() != 0.0)
        return Expr::constant(l.constant_value() / r.constant_value());
    return make_node(ExprKind::Div, l, r);
}

inline Expr powi(const Expr& base, int exponent) {
    if (exponent == 0) return Expr::constant(1.0);
    if (exponent == 1) return base;
    if (base.is_constant()) {
        const double b = base.constant_value();
        if (b != 0.0 || exponent > 0)
            return Expr::constant(std::pow(b, static_cast<double>(exponent)));
    }
    return make_node(ExprKind::Pow, base, Expr::constant(0.0), exponent);
}

inline Expr apply(FuncKind fn, const Expr& e) {
    if (e.is_constant()) {
        const double v = e.constant_value();
        switch (fn) {
            case FuncKind::Sin: return Expr::constant(std::sin(v));
            case FuncKind::Cos: return Expr::constant(std::cos(v));
            case FuncKind::Exp: return Expr::constant(std::exp(v));
            case FuncKind::Log:
                if (v > 0.0) return Expr::constant(std::log(v));
                break; // keep the node; evaluation reports the domain error
            case FuncKind::Sqrt:
                if (v >= 0.0) return Expr::constant(std::sqrt(v));
                break;
        }
    }
    return make_node(ExprKind::Func, e, Expr::constant(0.0), 0, fn);
}

inline Expr operator+(const Expr& a, const Expr& b) { return add(a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return sub(a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return mul(a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return divide(a, b); }
inline Expr operator-(const Expr& a) { return neg(a); }

inline Expr sin_of(const Expr& e) { return apply(FuncKind::Sin, e); }
inline Expr cos_of(const Expr& e) { return apply(FuncKind::Cos, e); }
inline Expr exp_of(const Expr& e) { return apply(FuncKind::Exp, e); }
inline Expr log_of(const Expr& e) { return apply(FuncKind::Log, e); }
inline Expr sqrt_of(const Expr& e) { return apply(FuncKind::Sqrt, e); }

/// Bindings used by substitute() and prolongation: jet coordinate -> expression.
using JetBindings = std::unordered_map<JetCoordinate, Expr, JetCoordinateHash>;

/// Evaluation argument: values of the independent variables (by axis) and of
/// every jet coordinate the expression mentions.
struct Point {
    std::vector<double> indep;
    std::unordered_map<JetCoordinate, double, JetCoordinateHash> jet;
};

// ---------------------------------------------------------------------------
// Core operations
// ---------------------------------------------------------------------------

/// One bottom-up pass through the smart constructors.
inline Expr simplify(const Expr& e) {
    switch (e.kind()) {
        case ExprKind::Constant:
        case ExprKind::IndepVar:
        case ExprKind::JetCoord:
            return e;
        case ExprKind::Neg: return neg(simplify(e.child()));
        case ExprKind::Add: return add(simplify(e.left()), simplify(e.right()));
        case ExprKind::Sub: return sub(simplify(e.left()), simplify(e.right()));
        case ExprKind::Mul: return mul(simplify(e.left()), simplify(e.right()));
        case ExprKind::Div: return divide(simplify(e.left()), simplify(e.right()));
        case ExprKind::Pow: return powi(simplify(e.child()), e.exponent());
        case ExprKind::Func: return apply(e.func(), simplify(e.child()));
    }
    return e;
}

namespace detail {

inline Expr chain(FuncKind fn, const Expr& arg, const Expr& darg) {
    switch (fn) {
        case FuncKind::Sin: return mul(cos_of(arg), darg);
        case FuncKind::Cos: return neg(mul(sin_of(arg), darg));
        case FuncKind::Exp: return mul(exp_of(arg), darg);
        case FuncKind::Log: return divide(darg, arg);
        case FuncKind::Sqrt: return divide(darg, mul(Expr::constant(2.0), sqrt_of(arg)));
    }
    return Expr::constant(0.0);
}

// Shared rules for both partial derivatives; `leaf` handles the two leaf kinds.
template <class LeafRule>
Expr differentiate(const Expr& e, const LeafRule& leaf) {
    switch (e.kind()) {
        case ExprKind::Constant: return Expr::constant(0.0);
        case ExprKind::IndepVar:
        case ExprKind::JetCoord:
            return leaf(e);
        case ExprKind::Neg: return neg(differentiate(e.child(), leaf));
        case ExprKind::Add:
            return add(differentiate(e.left(), leaf), differentiate(e.right(), leaf));
        case ExprKind::Sub:
            return sub(differentiate(e.left(), leaf), differentiate(e.right(), leaf));
        case ExprKind::Mul:
            return add(mul(differentiate(e.left(), leaf), e.right()),
                       mul(e.left(), differentiate(e.right(), leaf)));
        case ExprKind::Div: {
            const Expr num = sub(mul(differentiate(e.left(), leaf), e.right()),
                                 mul(e.left(), differentiate(e.right(), leaf)));
            return divide(num, powi(e.right(), 2));
        }
        case ExprKind::Pow: {
            const int k = e.exponent();
            return mul(mul(Expr::constant(static_cast<double>(k)), powi(e.child(), k - 1)),
                       differentiate(e.child(), leaf));
        }
        case ExprKind::Func:
            return chain(e.func(), e.child(), differentiate(e.child(), leaf));
    }
    return Expr::constant(0.0);
}

} // namespace detail

/// Partial derivative with respect to the jet coordinate `c`; every other jet
/// coordinate and every x^i is held fixed.
inline Expr diff_wrt_coord(const Expr& e, const JetCoordinate& c) {
    return simplify(detail::differentiate(e, [&](const Expr& leaf) {
        if (leaf.kind() == ExprKind::JetCoord && leaf.coordinate() == c)
            return Expr::constant(1.0);
        return Expr::constant(0.0);
    }));
}

/// Explicit partial derivative with respect to x^axis; jet coordinates are
/// treated as symbols independent of x (this is not the total derivative).
inline Expr diff_wrt_indep(const Expr& e, int axis) {
    return simplify(detail::differentiate(e, [&](const Expr& leaf) {
        if (leaf.kind() == ExprKind::IndepVar && leaf.axis() == axis)
            return Expr::constant(1.0);
        return Expr::constant(0.0);
    }));
}

/// Simultaneous replacement of bound jet coordinates; unbound ones unchanged.
inline Expr substitute(const Expr& e, const JetBindings& bindings) {
    switch (e.kind()) {
        case ExprKind::Constant:
        case ExprKind::IndepVar:
            return e;
        case ExprKind::JetCoord: {
            auto it = bindings.find(e.coordinate());
            return it == bindings.end() ? e : it->second;
        }
        case ExprKind::Neg: return neg(substitute(e.child(), bindings));
        case ExprKind::Add:
            return add(substitute(e.left(), bindings), substitute(e.right(), bindings));
        case ExprKind::Sub:
            return sub(substitute(e.left(), bindings), substitute(e.right(), bindings));
        case ExprKind::Mul:
            return mul(substitute(e.left(), bindings), substitute(e.right(), bindings));
        case ExprKind::Div:
            return divide(substitute(e.left(), bindings), substitute(e.right(), bindings));
        case ExprKind::Pow: return powi(substitute(e.child(), bindings), e.exponent());
        case ExprKind::Func: return apply(e.func(), substitute(e.child(), bindings));
    }
    return e;
}

inline double evaluate(const Expr& e, const Point& p) {
    switch (e.kind()) {
        case ExprKind::Constant:
            return e.constant_value();
        case ExprKind::IndepVar: {
            const int axis = e.axis();
            if (axis < 1 || axis > static_cast<int>(p.indep.size()))
                throw UnboundCoordinate("independent variable x" + std::to_string(axis) +
                                        " has no value");
            return p.indep[static_cast<std::size_t>(axis - 1)];
        }
        case ExprKind::JetCoord: {
            auto it = p.jet.find(e.coordinate());
            if (it == p.jet.end())
                throw UnboundCoordinate("jet coordinate " + coordinate_name(e.coordinate()) +
                                        " has no value");
            return it->second;
        }
        case ExprKind::Neg: return -evaluate(e.child(), p);
        case ExprKind::Add: return evaluate(e.left(), p) + evaluate(e.right(), p);
        case ExprKind::Sub: return evaluate(e.left(), p) - evaluate(e.right(), p);
        case ExprKind::Mul: return evaluate(e.left(), p) * evaluate(e.right(), p);
        case ExprKind::Div: {
            const double den = evaluate(e.right(), p);
            if (den == 0.0) throw DomainError("division by zero");
            return evaluate(e.left(), p) / den;
        }
        case ExprKind::Pow: {
            const double base = evaluate(e.child(), p);
            const int k = e.exponent();
            if (base == 0.0 && k < 0) throw DomainError("zero raised to a negative power");
            return std::pow(base, static_cast<double>(k));
        }
        case ExprKind::Func: {
            const double v = evaluate(e.child(), p);
            switch (e.func()) {
                case FuncKind::Sin: return std::sin(v);
                case FuncKind::Cos: return std::cos(v);
                case FuncKind::Exp: return std::exp(v);
                case FuncKind::Log:
                    if (v <= 0.0) throw DomainError("log of a nonpositive value");
                    return std::log(v);
                case FuncKind::Sqrt:
                    if (v < 0.0) throw DomainError("sqrt of a negative value");
                    return std::sqrt(v);
            }
            return 0.0;
        }
    }
    return 0.0;
}

namespace detail {

inline void collect_coordinates(const Expr& e, std::set<JetCoordinate>& out) {
    switch (e.kind()) {
        case ExprKind::Constant:
        case ExprKind::IndepVar:
            return;
        case ExprKind::JetCoord:
            out.insert(e.coordinate());
            return;
        case ExprKind::Neg:
        case ExprKind::Pow:
        case ExprKind::Func:
            collect_coordinates(e.child(), out);
            return;
        default:
            collect_coordinates(e.left(), out);
            collect_coordinates(e.right(), out);
            return;
    }
}

} // namespace detail

/// Exactly the jet coordinates occurring in e, in (dep, multi-index) order.
inline std::set<JetCoordinate> free_coordinates(const Expr& e) {
    std::set<JetCoordinate> out;
    detail::collect_coordinates(e, out);
    return out;
}

/// Highest derivative order among the jet coordinates of e; 0 if none occur.
inline int expression_order(const Expr& e) {
    int order = 0;
    for (const JetCoordinate& c : free_coordinates(e)) order = std::max(order, c.order());
    return order;
}

// ---------------------------------------------------------------------------
// Printing. Output re-parses under the canonical x<i>/u<j> vocabulary.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v); // shortest round-trip form
    return std::string(buf, res.ptr);
}

// Precedence levels: Add/Sub 1, Mul/Div 2, Neg 3, Pow 4, atoms 5.
inline int precedence(const Expr& e) {
    switch (e.kind()) {
        case ExprKind::Add:
        case ExprKind::Sub: return 1;
        case ExprKind::Mul:
        case ExprKind::Div: return 2;
        case ExprKind::Neg: return 3;
        case ExprKind::Pow: return 4;
        default: return 5;
    }
}

inline void print_expr(const Expr& e, std::string& out, int parent_prec) {
    const int prec = precedence(e);
    const bool parens = prec < parent_prec;
    if (parens) out += '(';
    switch (e.kind()) {
        case ExprKind::Constant: {
            const double v = e.constant_value();
            if (v < 0.0 && !parens && parent_prec > 0) {
                out += '(';
                out += format_double(v);
                out += ')';
            } else {
                out += format_double(v);
            }
            break;
        }
        case ExprKind::IndepVar:
            out += "x" + std::to_string(e.axis());
            break;
        case ExprKind::JetCoord:
            out += coordinate_name(e.coordinate());
            break;
        case ExprKind::Neg:
            // -a*b and -(a*b) evaluate identically, so only +/- children
            // need parentheses after a unary minus.
            out += '-';
            print_expr(e.child(), out, 2);
            break;
        case ExprKind::Add: {
            print_expr(e.left(), out, prec);
            const Expr r = e.right();
            // Render "a + (-b)" shapes as subtraction.
            if (r.kind() == ExprKind::Neg) {
                out += " - ";
                print_expr(r.child(), out, prec + 1);
            } else if (r.kind() == ExprKind::Mul && r.left().is_constant() &&
                       r.left().constant_value() < 0.0) {
                out += " - ";
                print_expr(mul(Expr::constant(-r.left().constant_value()), r.right()), out,
                           prec + 1);
            } else {
                out += " + ";
                print_expr(r, out, prec + 1);
            }
            break;
        }
        case ExprKind::Sub:
            print_expr(e.left(), out, prec);
            out += " - ";
            print_expr(e.right(), out, prec + 1);
            break;
        case ExprKind::Mul:
            print_expr(e.left(), out, prec);
            out += '*';
            print_expr(e.right(), out, prec + 1);
            break;
        case ExprKind::Div:
            print_expr(e.left(), out, prec);
            out += '/';
            print_expr(e.right(), out, prec + 1);
            break;
        case ExprKind::Pow: {
            print_expr(e.child(), out, prec + 1);
            out += '^';
            const int k = e.exponent();
            if (k < 0) {
                out += '(' + std::to_string(k) + ')';
            } else {
                out += std::to_string(k);
            }
            break;
        }
        case ExprKind::Func:
            out += func_name(e.func());
            out += '(';
            print_expr(e.child(), out, 0);
            out += ')';
            break;
    }
    if (parens) out += ')';
}

} // namespace detail

inline std::string to_string(const Expr& e) {
    std::string out;
    detail::print_expr(e, out, 0);
    return out;
}

} // namespace varcond
