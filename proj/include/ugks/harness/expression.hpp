#pragma once

#include "ugks/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

namespace ugks::harness {

/// Small arithmetic language for config entries.
///
///   expr   := term (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := '-' unary | power
///   power  := atom ('^' unary)?
///   atom   := number | 'x' | 'v' | 'vp' | 'pi' | call | '(' expr ')'
///   call   := name '(' expr (',' expr)* ')'
///
/// Functions: exp, log, sqrt, sin, cos, abs, min, max, and
/// piecewise(s, a0, b1, a1, ..., bn, an) which yields a0 for s < b1, a_k for
/// b_k <= s < b_{k+1}, and an for s >= bn. Breakpoints must increase.
class Expression {
public:
    Expression() : Expression(0.0) {}
    explicit Expression(double constant) : root_(std::make_shared<Node>()), text_(std::to_string(constant)) {
        root_->op = Op::constant;
        root_->value = constant;
    }

    static Expression parse(const std::string& text, std::size_t line = 0) {
        Parser p{text, 0, line};
        Expression e;
        e.root_ = p.parse_all();
        e.text_ = text;
        return e;
    }

    double operator()(double x, double v = 0.0, double vp = 0.0) const { return eval(*root_, x, v, vp); }

    const std::string& text() const noexcept { return text_; }
    bool uses_x() const { return uses(*root_, Op::var_x); }
    bool uses_v() const { return uses(*root_, Op::var_v); }
    bool uses_vp() const { return uses(*root_, Op::var_vp); }

private:
    enum class Op {
        constant, var_x, var_v, var_vp, add, sub, mul, div, pow, neg,
        exp, log, sqrt, sin, cos, abs, min, max, piecewise
    };

    struct Node {
        Op op = Op::constant;
        double value = 0.0;
        std::vector<std::shared_ptr<Node>> args;
    };
    using NodePtr = std::shared_ptr<Node>;

    static double eval(const Node& n, double x, double v, double vp) {
        auto a = [&](std::size_t i) { return eval(*n.args[i], x, v, vp); };
        switch (n.op) {
            case Op::constant: return n.value;
            case Op::var_x: return x;
            case Op::var_v: return v;
            case Op::var_vp: return vp;
            case Op::add: return a(0) + a(1);
            case Op::sub: return a(0) - a(1);
            case Op::mul: return a(0) * a(1);
            case Op::div: return a(0) / a(1);
            case Op::pow: return std::pow(a(0), a(1));
            case Op::neg: return -a(0);
            case Op::exp: return std::exp(a(0));
            case Op::log: return std::log(a(0));
            case Op::sqrt: return std::sqrt(a(0));
            case Op::sin: return std::sin(a(0));
            case Op::cos: return std::cos(a(0));
            case Op::abs: return std::abs(a(0));
            case Op::min: return std::min(a(0), a(1));
            case Op::max: return std::max(a(0), a(1));
            case Op::piecewise: {
                const double s = a(0);
                std::size_t k = 1;
                while (k + 2 < n.args.size() && s >= a(k + 1)) k += 2;
                return a(k);
            }
        }
        return 0.0;
    }

    static bool uses(const Node& n, Op var) {
        if (n.op == var) return true;
        for (const auto& c : n.args)
            if (uses(*c, var)) return true;
        return false;
    }

    struct Parser {
        const std::string& s;
        std::size_t pos;
        std::size_t line;

        [[noreturn]] void fail(const std::string& what) const {
            throw ConfigError("expression '" + s + "': " + what + " at column " + std::to_string(pos + 1), line);
        }

        void skip() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }

        bool accept(char c) {
            skip();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }

        void expect(char c) {
            if (!accept(c)) fail(std::string("expected '") + c + "'");
        }

        static NodePtr make(Op op, std::vector<NodePtr> args = {}, double value = 0.0) {
            auto n = std::make_shared<Node>();
            n->op = op;
            n->args = std::move(args);
            n->value = value;
            return n;
        }

        NodePtr parse_all() {
            NodePtr e = expr();
            skip();
            if (pos != s.size()) fail("unexpected trailing input");
            return e;
        }

        NodePtr expr() {
            NodePtr lhs = term();
            for (;;) {
                if (accept('+'))
                    lhs = make(Op::add, {lhs, term()});
                else if (accept('-'))
                    lhs = make(Op::sub, {lhs, term()});
                else
                    return lhs;
            }
        }

        NodePtr term() {
            NodePtr lhs = unary();
            for (;;) {
                if (accept('*'))
                    lhs = make(Op::mul, {lhs, unary()});
                else if (accept('/'))
                    lhs = make(Op::div, {lhs, unary()});
                else
                    return lhs;
            }
        }

        NodePtr unary() {
            if (accept('-')) return make(Op::neg, {unary()});
            if (accept('+')) return unary();
            return power();
        }

        NodePtr power() {
            NodePtr base = atom();
            if (accept('^')) return make(Op::pow, {base, unary()});
            return base;
        }

        NodePtr atom() {
            skip();
            if (pos >= s.size()) fail("unexpected end of input");
            const char c = s[pos];
            if (c == '(') {
                ++pos;
                NodePtr e = expr();
                expect(')');
                return e;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                const char* begin = s.c_str() + pos;
                char* end = nullptr;
                const double value = std::strtod(begin, &end);
                if (end == begin) fail("bad number");
                pos += static_cast<std::size_t>(end - begin);
                return make(Op::constant, {}, value);
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                const std::size_t start = pos;
                while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
                const std::string name = s.substr(start, pos - start);
                if (name == "x") return make(Op::var_x);
                if (name == "v") return make(Op::var_v);
                if (name == "vp") return make(Op::var_vp);
                if (name == "pi") return make(Op::constant, {}, std::numbers::pi);
                return call(name, start);
            }
            fail(std::string("unexpected character '") + c + "'");
        }

        NodePtr call(const std::string& name, std::size_t start) {
            struct Fn {
                const char* name;
                Op op;
                std::size_t arity;  // 0 = piecewise
            };
            static constexpr Fn table[] = {{"exp", Op::exp, 1},   {"log", Op::log, 1}, {"sqrt", Op::sqrt, 1},
                                           {"sin", Op::sin, 1},   {"cos", Op::cos, 1}, {"abs", Op::abs, 1},
                                           {"min", Op::min, 2},   {"max", Op::max, 2}, {"piecewise", Op::piecewise, 0}};
            const Fn* fn = nullptr;
            for (const auto& f : table)
                if (name == f.name) fn = &f;
            if (!fn) {
                pos = start;
                fail("unknown name '" + name + "'");
            }
            expect('(');
            std::vector<NodePtr> args{expr()};
            while (accept(',')) args.push_back(expr());
            expect(')');
            if (fn->arity == 0) {
                if (args.size() < 2 || args.size() % 2 != 0)
                    fail("piecewise needs (s, a0, b1, a1, ..., bn, an)");
                // constant breakpoints must increase
                for (std::size_t k = 4; k < args.size(); k += 2) {
                    const auto& lo = args[k - 2];
                    const auto& hi = args[k];
                    if (lo->op == Op::constant && hi->op == Op::constant && !(hi->value > lo->value))
                        fail("piecewise breakpoints must increase");
                }
            } else if (args.size() != fn->arity) {
                fail(name + " takes " + std::to_string(fn->arity) + " argument(s)");
            }
            return make(fn->op, std::move(args));
        }
    };

    NodePtr root_;
    std::string text_;
};

}  // namespace ugks::harness
