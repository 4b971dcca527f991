#pragma once

#include <cctype>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mogflow/core.hpp"

namespace mogflow {

/// Tiny expression language for problem data: arithmetic over
/// {z, x1, x2, x3, pi, constants} with exp, log, pow and the ^ operator.
/// x1..x3 are the components of the direction argument.
class Expr {
  public:
    static Expr parse(const std::string& text) {
        Expr e;
        e.text_ = text;
        Parser p{text, 0, &e.nodes_};
        e.root_ = p.expression();
        p.skip_ws();
        if (p.pos != text.size()) throw ConfigError("trailing input in expression: '" + text + "'");
        return e;
    }

    double eval(double z, const Vec3& xi) const { return eval_node(root_, z, xi); }

    bool constant() const { return node_constant(root_); }
    const std::string& text() const { return text_; }

  private:
    enum Kind { Num, VarZ, VarX1, VarX2, VarX3, Add, Sub, Mul, Div, Pow, Neg, Exp, Log };
    struct Node {
        Kind kind;
        double num = 0.0;
        int a = -1, b = -1;
    };
    std::vector<Node> nodes_;
    int root_ = -1;
    std::string text_;

    double eval_node(int i, double z, const Vec3& xi) const {
        const Node& n = nodes_[i];
        switch (n.kind) {
            case Num: return n.num;
            case VarZ: return z;
            case VarX1: return xi.x;
            case VarX2: return xi.y;
            case VarX3: return xi.z;
            case Add: return eval_node(n.a, z, xi) + eval_node(n.b, z, xi);
            case Sub: return eval_node(n.a, z, xi) - eval_node(n.b, z, xi);
            case Mul: return eval_node(n.a, z, xi) * eval_node(n.b, z, xi);
            case Div: return eval_node(n.a, z, xi) / eval_node(n.b, z, xi);
            case Pow: return std::pow(eval_node(n.a, z, xi), eval_node(n.b, z, xi));
            case Neg: return -eval_node(n.a, z, xi);
            case Exp: return std::exp(eval_node(n.a, z, xi));
            case Log: return std::log(eval_node(n.a, z, xi));
        }
        return 0.0;
    }

    bool node_constant(int i) const {
        const Node& n = nodes_[i];
        switch (n.kind) {
            case Num: return true;
            case VarZ:
            case VarX1:
            case VarX2:
            case VarX3: return false;
            case Neg:
            case Exp:
            case Log: return node_constant(n.a);
            default: return node_constant(n.a) && node_constant(n.b);
        }
    }

    struct Parser {
        const std::string& s;
        std::size_t pos;
        std::vector<Node>* nodes;

        void skip_ws() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        bool eat(char c) {
            skip_ws();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }
        int push(Node n) {
            nodes->push_back(n);
            return static_cast<int>(nodes->size()) - 1;
        }

        int expression() {
            int lhs = term();
            for (;;) {
                if (eat('+')) lhs = push({Add, 0, lhs, term()});
                else if (eat('-')) lhs = push({Sub, 0, lhs, term()});
                else return lhs;
            }
        }
        int term() {
            int lhs = factor();
            for (;;) {
                if (eat('*')) lhs = push({Mul, 0, lhs, factor()});
                else if (eat('/')) lhs = push({Div, 0, lhs, factor()});
                else return lhs;
            }
        }
        int factor() {
            if (eat('-')) return push({Neg, 0, factor(), -1});  // -z^2 == -(z^2)
            return power();
        }
        int power() {
            int base = primary();
            if (eat('^')) return push({Pow, 0, base, factor()});  // right-assoc
            return base;
        }
        int primary() {
            skip_ws();
            if (pos >= s.size()) throw ConfigError("unexpected end of expression");
            char c = s[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                std::size_t used = 0;
                double v = std::stod(s.substr(pos), &used);
                pos += used;
                return push({Num, v, -1, -1});
            }
            if (c == '(') {
                ++pos;
                int e = expression();
                if (!eat(')')) throw ConfigError("missing ')'");
                return e;
            }
            if (std::isalpha(static_cast<unsigned char>(c))) {
                std::size_t start = pos;
                while (pos < s.size() &&
                       (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                    ++pos;
                std::string name = s.substr(start, pos - start);
                if (name == "z") return push({VarZ, 0, -1, -1});
                if (name == "x1") return push({VarX1, 0, -1, -1});
                if (name == "x2") return push({VarX2, 0, -1, -1});
                if (name == "x3") return push({VarX3, 0, -1, -1});
                if (name == "pi") return push({Num, std::numbers::pi, -1, -1});
                if (name == "exp" || name == "log") {
                    if (!eat('(')) throw ConfigError(name + " needs '('");
                    int a = expression();
                    if (!eat(')')) throw ConfigError("missing ')'");
                    return push({name == "exp" ? Exp : Log, 0, a, -1});
                }
                if (name == "pow") {
                    if (!eat('(')) throw ConfigError("pow needs '('");
                    int a = expression();
                    if (!eat(',')) throw ConfigError("pow needs two arguments");
                    int b = expression();
                    if (!eat(')')) throw ConfigError("missing ')'");
                    return push({Pow, 0, a, b});
                }
                throw ConfigError("unknown identifier '" + name + "'");
            }
            throw ConfigError(std::string("unexpected character '") + c + "' in expression");
        }
    };
};

}  // namespace mogflow
