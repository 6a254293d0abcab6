#include "fundhedge/expression.hpp"

#include "fundhedge/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace fundhedge {

using Op = Expression::Node::Op;

class ExpressionParser {
public:
    explicit ExpressionParser(std::string_view src) : src_(src) {}

    Expression run() {
        Expression e;
        e.source_ = std::string(src_);
        out_ = &e;
        e.root_ = parse_expr();
        skip_space();
        if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
        return e;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;
    Expression* out_ = nullptr;

    [[noreturn]] void fail(const std::string& what) const {
        throw DomainError("collateral", "expression \"" + std::string(src_) + "\": " + what +
                                            " at offset " + std::to_string(pos_));
    }

    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    int add(Op op, int lhs = -1, int rhs = -1, double value = 0.0) {
        out_->nodes_.push_back({op, value, lhs, rhs});
        return static_cast<int>(out_->nodes_.size()) - 1;
    }

    int parse_expr() {
        int lhs = parse_term();
        for (;;) {
            if (accept('+')) lhs = add(Op::Add, lhs, parse_term());
            else if (accept('-')) lhs = add(Op::Sub, lhs, parse_term());
            else return lhs;
        }
    }

    int parse_term() {
        int lhs = parse_unary();
        for (;;) {
            if (accept('*')) lhs = add(Op::Mul, lhs, parse_unary());
            else if (accept('/')) lhs = add(Op::Div, lhs, parse_unary());
            else return lhs;
        }
    }

    int parse_unary() {
        if (accept('-')) return add(Op::Negate, parse_unary());
        if (accept('+')) return parse_unary();
        return parse_atom();
    }

    int parse_atom() {
        skip_space();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            const int inner = parse_expr();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos_;
            while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            const std::string_view word = src_.substr(start, pos_ - start);
            if (word == "t") {
                out_->uses_time_ = true;
                return add(Op::Time);
            }
            if (word == "S") {
                out_->uses_spot_ = true;
                return add(Op::Spot);
            }
            if (word == "max" || word == "min") {
                expect('(');
                const int a = parse_expr();
                expect(',');
                const int b = parse_expr();
                expect(')');
                return add(word == "max" ? Op::Max : Op::Min, a, b);
            }
            if (word == "call" || word == "put") {
                expect('(');
                const int k = parse_expr();
                expect(')');
                out_->uses_spot_ = true;
                return add(word == "call" ? Op::Call : Op::Put, k);
            }
            pos_ = start;
            fail("unknown identifier '" + std::string(word) + "'");
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    int parse_number() {
        std::size_t end = pos_;
        while (end < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[end])) || src_[end] == '.')) {
            ++end;
        }
        if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
            std::size_t k = end + 1;
            if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
            if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
                end = k;
                while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
            }
        }
        double value = 0.0;
        const auto res = std::from_chars(src_.data() + pos_, src_.data() + end, value);
        if (res.ec != std::errc() || res.ptr != src_.data() + end) fail("malformed number");
        pos_ = end;
        return add(Op::Constant, -1, -1, value);
    }
};

Expression::Expression() : source_("0"), nodes_{{Node::Op::Constant, 0.0, -1, -1}} {}

Expression Expression::parse(std::string_view source) { return ExpressionParser(source).run(); }

Expression Expression::constant(double value) {
    Expression e;
    e.nodes_[0].value = value;
    e.source_ = std::to_string(value);
    return e;
}

double Expression::operator()(double t, double S) const { return eval(root_, t, S); }

double Expression::eval(int index, double t, double S) const {
    const Node& n = nodes_[static_cast<std::size_t>(index)];
    switch (n.op) {
        case Op::Constant: return n.value;
        case Op::Time: return t;
        case Op::Spot: return S;
        case Op::Negate: return -eval(n.lhs, t, S);
        case Op::Add: return eval(n.lhs, t, S) + eval(n.rhs, t, S);
        case Op::Sub: return eval(n.lhs, t, S) - eval(n.rhs, t, S);
        case Op::Mul: return eval(n.lhs, t, S) * eval(n.rhs, t, S);
        case Op::Div: return eval(n.lhs, t, S) / eval(n.rhs, t, S);
        case Op::Max: return std::max(eval(n.lhs, t, S), eval(n.rhs, t, S));
        case Op::Min: return std::min(eval(n.lhs, t, S), eval(n.rhs, t, S));
        case Op::Call: return std::max(S - eval(n.lhs, t, S), 0.0);
        case Op::Put: return std::max(eval(n.lhs, t, S) - S, 0.0);
    }
    return 0.0;
}

}  // namespace fundhedge
