#include "nullgeo/expr.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "nullgeo/util.hpp"

namespace nullgeo {

namespace {

enum class Op {
    Number,
    Variable,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Pow,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
    Abs,
    Atan2,
};

struct FnEntry {
    const char* name;
    Op op;
    int arity;
};

constexpr std::array<FnEntry, 11> kFunctions = {{
    {"sin", Op::Sin, 1},
    {"cos", Op::Cos, 1},
    {"tan", Op::Tan, 1},
    {"exp", Op::Exp, 1},
    {"log", Op::Log, 1},
    {"sqrt", Op::Sqrt, 1},
    {"sinh", Op::Sinh, 1},
    {"cosh", Op::Cosh, 1},
    {"tanh", Op::Tanh, 1},
    {"abs", Op::Abs, 1},
    {"atan2", Op::Atan2, 2},
}};

}  // namespace

struct ExprField::Node {
    Op op = Op::Number;
    double number = 0.0;
    int var = -1;
    std::vector<Node> args{};
};

namespace {

using Node = ExprField::Node;

class Parser {
public:
    Parser(std::string_view src, const std::vector<std::string>& vars) : src_(src), vars_(vars) {}

    Node run() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("empty expression", 0);
        Node n = parse_sum();
        skip_ws();
        if (pos_ < src_.size())
            throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
        return n;
    }

private:
    std::string_view src_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    Node parse_sum() {
        Node lhs = parse_product();
        for (;;) {
            if (consume('+')) {
                Node n{Op::Add};
                n.args.push_back(std::move(lhs));
                n.args.push_back(parse_product());
                lhs = std::move(n);
            } else if (consume('-')) {
                Node n{Op::Sub};
                n.args.push_back(std::move(lhs));
                n.args.push_back(parse_product());
                lhs = std::move(n);
            } else {
                return lhs;
            }
        }
    }

    Node parse_product() {
        Node lhs = parse_unary();
        for (;;) {
            if (consume('*')) {
                Node n{Op::Mul};
                n.args.push_back(std::move(lhs));
                n.args.push_back(parse_unary());
                lhs = std::move(n);
            } else if (consume('/')) {
                Node n{Op::Div};
                n.args.push_back(std::move(lhs));
                n.args.push_back(parse_unary());
                lhs = std::move(n);
            } else {
                return lhs;
            }
        }
    }

    // ^ binds tighter than unary minus: -x^2 == -(x^2).
    Node parse_unary() {
        if (consume('-')) {
            Node n{Op::Neg};
            n.args.push_back(parse_unary());
            return n;
        }
        return parse_power();
    }

    Node parse_power() {
        Node base = parse_primary();
        if (consume('^')) {
            Node n{Op::Pow};
            n.args.push_back(std::move(base));
            n.args.push_back(parse_unary());  // right-associative, allows 2^-3
            return n;
        }
        return base;
    }

    Node parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("unexpected end of expression", pos_);
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            Node inner = parse_sum();
            if (!consume(')')) throw ParseError("expected ')'", pos_);
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        throw ParseError(std::string("unexpected '") + c + "'", pos_);
    }

    Node parse_number() {
        std::size_t start = pos_;
        const char* begin = src_.data() + pos_;
        char* end = nullptr;
        double value = std::strtod(begin, &end);
        if (end == begin) throw ParseError("invalid number", start);
        pos_ += static_cast<std::size_t>(end - begin);
        Node n{Op::Number};
        n.number = value;
        return n;
    }

    Node parse_identifier() {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string name(src_.substr(start, pos_ - start));

        for (const auto& fn : kFunctions) {
            if (name == fn.name) {
                if (!consume('(')) throw ParseError("expected '(' after " + name, pos_);
                Node n{fn.op};
                n.args.push_back(parse_sum());
                for (int a = 1; a < fn.arity; ++a) {
                    if (!consume(',')) throw ParseError(name + " expects " +
                                                        std::to_string(fn.arity) + " arguments",
                                                        pos_);
                    n.args.push_back(parse_sum());
                }
                if (!consume(')')) throw ParseError("expected ')'", pos_);
                return n;
            }
        }

        for (std::size_t v = 0; v < vars_.size(); ++v) {
            if (vars_[v] == name) {
                Node n{Op::Variable};
                n.var = static_cast<int>(v);
                return n;
            }
        }
        throw ParseError("unknown identifier '" + name + "'", start);
    }
};

double eval_node(const Node& n, std::span<const double> x);

double checked(double v, const Node&, std::span<const double> x, const char* what) {
    if (!std::isfinite(v)) {
        std::vector<double> pt(x.begin(), x.end());
        throw EvalDomainError(std::string("non-finite value in ") + what, std::move(pt));
    }
    return v;
}

double eval_node(const Node& n, std::span<const double> x) {
    switch (n.op) {
        case Op::Number: return n.number;
        case Op::Variable: return x[static_cast<std::size_t>(n.var)];
        case Op::Add: return eval_node(n.args[0], x) + eval_node(n.args[1], x);
        case Op::Sub: return eval_node(n.args[0], x) - eval_node(n.args[1], x);
        case Op::Mul: return eval_node(n.args[0], x) * eval_node(n.args[1], x);
        case Op::Div: return checked(eval_node(n.args[0], x) / eval_node(n.args[1], x), n, x, "division");
        case Op::Neg: return -eval_node(n.args[0], x);
        case Op::Pow:
            return checked(std::pow(eval_node(n.args[0], x), eval_node(n.args[1], x)), n, x, "power");
        case Op::Sin: return std::sin(eval_node(n.args[0], x));
        case Op::Cos: return std::cos(eval_node(n.args[0], x));
        case Op::Tan: return checked(std::tan(eval_node(n.args[0], x)), n, x, "tan");
        case Op::Exp: return checked(std::exp(eval_node(n.args[0], x)), n, x, "exp");
        case Op::Log: return checked(std::log(eval_node(n.args[0], x)), n, x, "log");
        case Op::Sqrt: return checked(std::sqrt(eval_node(n.args[0], x)), n, x, "sqrt");
        case Op::Sinh: return std::sinh(eval_node(n.args[0], x));
        case Op::Cosh: return std::cosh(eval_node(n.args[0], x));
        case Op::Tanh: return std::tanh(eval_node(n.args[0], x));
        case Op::Abs: return std::abs(eval_node(n.args[0], x));
        case Op::Atan2:
            return std::atan2(eval_node(n.args[0], x), eval_node(n.args[1], x));
    }
    return 0.0;  // unreachable
}

void print_node(const Node& n, std::ostringstream& out) {
    auto binary = [&](const char* sym) {
        out << '(';
        print_node(n.args[0], out);
        out << sym;
        print_node(n.args[1], out);
        out << ')';
    };
    switch (n.op) {
        case Op::Number: out << format_double(n.number); return;
        case Op::Variable: out << "$" << n.var; return;  // placeholder, replaced below
        case Op::Add: binary("+"); return;
        case Op::Sub: binary("-"); return;
        case Op::Mul: binary("*"); return;
        case Op::Div: binary("/"); return;
        case Op::Pow: binary("^"); return;
        case Op::Neg:
            out << "(-";
            print_node(n.args[0], out);
            out << ')';
            return;
        default: break;
    }
    for (const auto& fn : kFunctions) {
        if (fn.op == n.op) {
            out << fn.name << '(';
            print_node(n.args[0], out);
            if (n.args.size() > 1) {
                out << ',';
                print_node(n.args[1], out);
            }
            out << ')';
            return;
        }
    }
}

}  // namespace

ExprField ExprField::parse(std::string_view source, std::vector<std::string> variables) {
    if (source.empty()) throw ParseError("empty expression", 0);
    Parser parser(source, variables);
    auto root = std::make_shared<Node>(parser.run());
    ExprField f;
    f.source_ = std::string(source);
    f.variables_ = std::move(variables);
    f.root_ = std::move(root);
    return f;
}

double ExprField::eval(std::span<const double> point) const {
    if (point.size() != variables_.size())
        throw PreconditionError("point dimension " + std::to_string(point.size()) +
                                " does not match variable count " +
                                std::to_string(variables_.size()));
    return eval_node(*root_, point);
}

double ExprField::partial(std::span<const double> point, int i, double step) const {
    std::vector<double> x(point.begin(), point.end());
    double h = step > 0.0 ? step : fd_step(x[static_cast<std::size_t>(i)]);
    double saved = x[static_cast<std::size_t>(i)];
    x[static_cast<std::size_t>(i)] = saved + h;
    double fp = eval(x);
    x[static_cast<std::size_t>(i)] = saved - h;
    double fm = eval(x);
    return (fp - fm) / (2.0 * h);
}

double ExprField::second_partial(std::span<const double> point, int i, int j, double step) const {
    std::vector<double> x(point.begin(), point.end());
    double h = step > 0.0 ? step : fd_step2(x[static_cast<std::size_t>(i)]);
    double saved = x[static_cast<std::size_t>(i)];
    x[static_cast<std::size_t>(i)] = saved + h;
    double dp = partial(x, j, step > 0.0 ? step : 0.0);
    x[static_cast<std::size_t>(i)] = saved - h;
    double dm = partial(x, j, step > 0.0 ? step : 0.0);
    return (dp - dm) / (2.0 * h);
}

std::string ExprField::pretty() const {
    std::ostringstream out;
    print_node(*root_, out);
    std::string s = out.str();
    // Replace the $k variable placeholders with the actual names.
    std::string result;
    result.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '$') {
            std::size_t j = i + 1;
            int idx = 0;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
                idx = idx * 10 + (s[j] - '0');
                ++j;
            }
            result += variables_[static_cast<std::size_t>(idx)];
            i = j - 1;
        } else {
            result += s[i];
        }
    }
    return result;
}

ExprField constant_field(double value, std::vector<std::string> variables) {
    return ExprField::parse(format_double(value), std::move(variables));
}

}  // namespace nullgeo
