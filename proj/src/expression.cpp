#include "pecurves/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <string_view>
#include <vector>

#include "pecurves/errors.hpp"

namespace pec {

struct Expression::Node {
    enum class Kind { Const, VarX, VarY, Neg, Add, Sub, Mul, Div, Pow, Call } kind = Kind::Const;
    double value = 0.0;
    double (*fn)(double) = nullptr;
    std::unique_ptr<const Node> lhs, rhs;

    double eval(double x, double y) const {
        switch (kind) {
            case Kind::Const: return value;
            case Kind::VarX: return x;
            case Kind::VarY: return y;
            case Kind::Neg: return -lhs->eval(x, y);
            case Kind::Add: return lhs->eval(x, y) + rhs->eval(x, y);
            case Kind::Sub: return lhs->eval(x, y) - rhs->eval(x, y);
            case Kind::Mul: return lhs->eval(x, y) * rhs->eval(x, y);
            case Kind::Div: return lhs->eval(x, y) / rhs->eval(x, y);
            case Kind::Pow: return std::pow(lhs->eval(x, y), rhs->eval(x, y));
            case Kind::Call: return fn(lhs->eval(x, y));
        }
        return 0.0;
    }
};

namespace {

using Node = Expression::Node;
using NodePtr = std::unique_ptr<const Node>;

NodePtr make(Node::Kind k, NodePtr l = nullptr, NodePtr r = nullptr) {
    auto n = std::make_unique<Node>();
    n->kind = k;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
}

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    NodePtr parse() {
        NodePtr n = sum();
        skip();
        if (pos_ != s_.size()) fail("unexpected character");
        return n;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("expression '" + std::string(s_) + "': " + what + " at offset " + std::to_string(pos_));
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr sum() {
        NodePtr n = product();
        for (;;) {
            if (accept('+')) n = make(Node::Kind::Add, std::move(n), product());
            else if (accept('-')) n = make(Node::Kind::Sub, std::move(n), product());
            else return n;
        }
    }

    NodePtr product() {
        NodePtr n = unary();
        for (;;) {
            if (accept('*')) n = make(Node::Kind::Mul, std::move(n), unary());
            else if (accept('/')) n = make(Node::Kind::Div, std::move(n), unary());
            else return n;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Node::Kind::Neg, unary());
        if (accept('+')) return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return make(Node::Kind::Pow, std::move(base), unary());
        return base;
    }

    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char ch = s_[pos_];
        if (ch == '(') {
            ++pos_;
            NodePtr n = sum();
            if (!accept(')')) fail("missing ')'");
            return n;
        }
        if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(ch))) return identifier();
        fail(std::string("unexpected '") + ch + "'");
    }

    NodePtr number() {
        const std::string rest(s_.substr(pos_));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(rest, &used);
        } catch (const std::exception&) {
            fail("malformed number");
        }
        pos_ += used;
        auto n = std::make_unique<Node>();
        n->value = v;
        return n;
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        const std::string_view id = s_.substr(start, pos_ - start);
        if (id == "x") return make(Node::Kind::VarX);
        if (id == "y") return make(Node::Kind::VarY);
        if (id == "pi" || id == "e") {
            auto n = std::make_unique<Node>();
            n->value = id == "pi" ? std::numbers::pi : std::numbers::e;
            return n;
        }
        double (*fn)(double) = nullptr;
        if (id == "sin") fn = [](double v) { return std::sin(v); };
        else if (id == "cos") fn = [](double v) { return std::cos(v); };
        else if (id == "exp") fn = [](double v) { return std::exp(v); };
        else if (id == "abs") fn = [](double v) { return std::abs(v); };
        else if (id == "sqrt") fn = [](double v) { return std::sqrt(v); };
        else {
            pos_ = start;
            fail("unknown identifier '" + std::string(id) + "'");
        }
        if (!accept('(')) fail("expected '(' after function name");
        auto n = std::make_unique<Node>();
        n->kind = Node::Kind::Call;
        n->fn = fn;
        n->lhs = sum();
        if (!accept(')')) fail("missing ')'");
        return n;
    }
};

}  // namespace

Expression Expression::parse(const std::string& text) {
    Expression e;
    e.text_ = text;
    e.root_ = Parser(text).parse();
    return e;
}

double Expression::operator()(double x, double y) const { return root_->eval(x, y); }

}  // namespace pec
