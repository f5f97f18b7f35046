#include "qwalk/expr.hpp"

#include "qwalk/error.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

namespace qwalk {

struct Expr::Node {
    enum class Op { constant, var_s1, var_s2, neg, add, sub, mul, div, pow, sin, cos, exp, sqrt } op;
    double value = 0.0;
    std::shared_ptr<const Node> lhs, rhs;

    double eval(double s1, double s2) const {
        switch (op) {
        case Op::constant: return value;
        case Op::var_s1: return s1;
        case Op::var_s2: return s2;
        case Op::neg: return -lhs->eval(s1, s2);
        case Op::add: return lhs->eval(s1, s2) + rhs->eval(s1, s2);
        case Op::sub: return lhs->eval(s1, s2) - rhs->eval(s1, s2);
        case Op::mul: return lhs->eval(s1, s2) * rhs->eval(s1, s2);
        case Op::div: return lhs->eval(s1, s2) / rhs->eval(s1, s2);
        case Op::pow: return std::pow(lhs->eval(s1, s2), rhs->eval(s1, s2));
        case Op::sin: return std::sin(lhs->eval(s1, s2));
        case Op::cos: return std::cos(lhs->eval(s1, s2));
        case Op::exp: return std::exp(lhs->eval(s1, s2));
        case Op::sqrt: return std::sqrt(lhs->eval(s1, s2));
        }
        return 0.0;
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Op = Expr::Node::Op;

NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr, double value = 0.0) {
    auto n = std::make_shared<Expr::Node>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    n->value = value;
    return n;
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    NodePtr parse_all() {
        NodePtr n = expr();
        skip_ws();
        if (pos_ != text_.size())
            error("unexpected character");
        return n;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void error(const std::string& what) const {
        fail(ErrorCode::config, "expression '" + std::string(text_) + "': " + what + " at column " +
                                    std::to_string(pos_ + 1));
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
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

    NodePtr expr() {
        NodePtr n = term();
        for (;;) {
            if (accept('+'))
                n = make(Op::add, n, term());
            else if (accept('-'))
                n = make(Op::sub, n, term());
            else
                return n;
        }
    }

    NodePtr term() {
        NodePtr n = unary();
        for (;;) {
            if (accept('*'))
                n = make(Op::mul, n, unary());
            else if (accept('/'))
                n = make(Op::div, n, unary());
            else
                return n;
        }
    }

    NodePtr unary() {
        if (accept('-'))
            return make(Op::neg, unary());
        if (accept('+'))
            return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = atom();
        if (accept('^'))
            return make(Op::pow, base, unary());
        return base;
    }

    NodePtr atom() {
        skip_ws();
        if (pos_ >= text_.size())
            error("unexpected end of input");
        const char c = text_[pos_];
        if (accept('(')) {
            NodePtr n = expr();
            if (!accept(')'))
                error("expected ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::string rest(text_.substr(pos_));
            char* end = nullptr;
            const double v = std::strtod(rest.c_str(), &end);
            if (end == rest.c_str())
                error("malformed number");
            pos_ += static_cast<std::size_t>(end - rest.c_str());
            return make(Op::constant, nullptr, nullptr, v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
            const std::string_view id = text_.substr(start, pos_ - start);
            if (id == "s1")
                return make(Op::var_s1);
            if (id == "s2")
                return make(Op::var_s2);
            if (id == "pi")
                return make(Op::constant, nullptr, nullptr, std::numbers::pi);
            Op fn;
            if (id == "sin")
                fn = Op::sin;
            else if (id == "cos")
                fn = Op::cos;
            else if (id == "exp")
                fn = Op::exp;
            else if (id == "sqrt")
                fn = Op::sqrt;
            else {
                pos_ = start;
                error("unknown identifier '" + std::string(id) + "'");
            }
            if (!accept('('))
                error("expected '(' after function name");
            NodePtr arg = expr();
            if (!accept(')'))
                error("expected ')'");
            return make(fn, arg);
        }
        error("unexpected character");
    }
};

} // namespace

Expr Expr::parse(std::string_view text) {
    Expr e;
    e.source_ = std::string(text);
    e.root_ = Parser(text).parse_all();
    return e;
}

double Expr::operator()(double s1, double s2) const { return root_->eval(s1, s2); }

} // namespace qwalk
