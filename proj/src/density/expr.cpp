#include "density/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <set>

#include "core/error.hpp"
#include "core/textio.hpp"

namespace sdr {

namespace {

const std::set<std::string> kFunctions = {"abs", "norm", "normsq", "dot",  "sqrt",
                                          "exp", "sin",  "cos",    "min", "max"};
const std::set<std::string> kVariables = {"A", "x", "lambda", "nu"};

[[noreturn]] void parse_fail(std::size_t pos, const std::string& what) {
    throw Error(ErrorKind::Parse, what + " at column " + std::to_string(pos + 1));
}

double as_scalar(const ExprValue& v, const std::string& ctx) {
    if (const double* d = std::get_if<double>(&v)) return *d;
    throw Error(ErrorKind::Argument, ctx + ": scalar operand required");
}

const Vec& as_vector(const ExprValue& v, const std::string& ctx) {
    if (const Vec* p = std::get_if<Vec>(&v)) return *p;
    throw Error(ErrorKind::Argument, ctx + ": vector operand required");
}

double value_normsq(const ExprValue& v) {
    if (const double* d = std::get_if<double>(&v)) return (*d) * (*d);
    if (const Vec* p = std::get_if<Vec>(&v)) return dot(*p, *p);
    const Mat& m = std::get<Mat>(v);
    double s = 0.0;
    for (double x : m.a) s += x * x;
    return s;
}

class Parser {
  public:
    explicit Parser(const std::string& text) : s_(text) {}

    ExprPtr run() {
        ExprPtr e = expr();
        skip_ws();
        if (at_ < s_.size()) parse_fail(at_, "unexpected input");
        return e;
    }

  private:
    ExprPtr expr() {
        ExprPtr lhs = term();
        for (;;) {
            skip_ws();
            if (peek() == '+' || peek() == '-') {
                char op = s_[at_++];
                lhs = binary(op, lhs, term());
            } else {
                return lhs;
            }
        }
    }

    ExprPtr term() {
        ExprPtr lhs = factor();
        for (;;) {
            skip_ws();
            if (peek() == '*' || peek() == '/') {
                char op = s_[at_++];
                lhs = binary(op, lhs, factor());
            } else {
                return lhs;
            }
        }
    }

    ExprPtr factor() {
        ExprPtr b = base();
        skip_ws();
        if (peek() == '^') {
            ++at_;
            skip_ws();
            auto node = std::make_shared<Expr>();
            node->tag = Expr::Tag::Power;
            node->number = number();
            node->kids = {b};
            return node;
        }
        return b;
    }

    ExprPtr base() {
        skip_ws();
        char c = peek();
        if (c == '(') {
            ++at_;
            ExprPtr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            auto node = std::make_shared<Expr>();
            node->tag = Expr::Tag::Number;
            node->number = number();
            return node;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = at_;
            std::string id = identifier();
            skip_ws();
            if (peek() == '(') {
                if (!kFunctions.count(id)) parse_fail(start, "unknown function '" + id + "'");
                ++at_;
                auto node = std::make_shared<Expr>();
                node->tag = Expr::Tag::Call;
                node->name = id;
                node->kids.push_back(expr());
                skip_ws();
                while (peek() == ',') {
                    ++at_;
                    node->kids.push_back(expr());
                    skip_ws();
                }
                expect(')');
                check_arity(*node, start);
                return node;
            }
            if (!kVariables.count(id)) parse_fail(start, "unknown identifier '" + id + "'");
            auto node = std::make_shared<Expr>();
            node->tag = Expr::Tag::Variable;
            node->name = id;
            while (true) {
                skip_ws();
                if (peek() != '[') break;
                ++at_;
                skip_ws();
                double v = number();
                int idx = static_cast<int>(v);
                if (idx < 1 || static_cast<double>(idx) != v) parse_fail(at_, "index must be a positive integer");
                node->indices.push_back(idx);
                expect(']');
            }
            if (node->indices.size() > 2 || (node->name != "A" && node->indices.size() > 1))
                parse_fail(start, "too many indices for '" + id + "'");
            return node;
        }
        parse_fail(at_, at_ >= s_.size() ? "syntax error: unexpected end of input" : "syntax error");
    }

    void check_arity(const Expr& call, std::size_t pos) {
        std::size_t want = (call.name == "dot" || call.name == "min" || call.name == "max") ? 2 : 1;
        if (call.kids.size() != want)
            parse_fail(pos, "arity mismatch: " + call.name + " takes " + std::to_string(want) + " argument" +
                                (want == 1 ? "" : "s"));
    }

    static ExprPtr binary(char op, ExprPtr lhs, ExprPtr rhs) {
        auto node = std::make_shared<Expr>();
        node->tag = Expr::Tag::Binary;
        node->op = op;
        node->kids = {std::move(lhs), std::move(rhs)};
        return node;
    }

    double number() {
        skip_ws();
        std::size_t start = at_;
        while (at_ < s_.size() &&
               (std::isdigit(static_cast<unsigned char>(s_[at_])) || s_[at_] == '.'))
            ++at_;
        // exponent suffix (1e-3)
        if (at_ < s_.size() && (s_[at_] == 'e' || s_[at_] == 'E')) {
            std::size_t mark = at_++;
            if (at_ < s_.size() && (s_[at_] == '+' || s_[at_] == '-')) ++at_;
            if (at_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[at_]))) {
                while (at_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[at_]))) ++at_;
            } else {
                at_ = mark;
            }
        }
        if (at_ == start) parse_fail(start, "number expected");
        try {
            return std::stod(s_.substr(start, at_ - start));
        } catch (const std::exception&) {
            parse_fail(start, "malformed number");
        }
    }

    std::string identifier() {
        std::size_t start = at_;
        while (at_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[at_])) || s_[at_] == '_'))
            ++at_;
        return s_.substr(start, at_ - start);
    }

    void expect(char c) {
        skip_ws();
        if (peek() != c) parse_fail(at_, std::string("expected '") + c + "'");
        ++at_;
    }

    char peek() const { return at_ < s_.size() ? s_[at_] : '\0'; }

    void skip_ws() {
        while (at_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[at_]))) ++at_;
    }

    const std::string& s_;
    std::size_t at_ = 0;
};

}  // namespace

ExprValue Expr::eval(const ExprEnv& env) const {
    switch (tag) {
        case Tag::Number:
            return number;
        case Tag::Variable: {
            if (name == "A") {
                if (!env.A) throw Error(ErrorKind::Argument, "variable 'A' not bound");
                if (indices.empty()) return *env.A;
                if (indices.size() != 2)
                    throw Error(ErrorKind::Argument, "'A' requires two indices for entry access");
                if (indices[0] > env.A->rows || indices[1] > env.A->cols)
                    throw Error(ErrorKind::Dimension, "'A' index out of range");
                return env.A->at(indices[0] - 1, indices[1] - 1);
            }
            const Vec* v = name == "x" ? env.x : name == "lambda" ? env.lambda : env.nu;
            if (!v) throw Error(ErrorKind::Argument, "variable '" + name + "' not bound");
            if (indices.empty()) return *v;
            if (indices[0] > static_cast<int>(v->size()))
                throw Error(ErrorKind::Dimension, "'" + name + "' index out of range");
            return (*v)[indices[0] - 1];
        }
        case Tag::Binary: {
            double l = as_scalar(kids[0]->eval(env), std::string(1, op));
            double r = as_scalar(kids[1]->eval(env), std::string(1, op));
            switch (op) {
                case '+': return l + r;
                case '-': return l - r;
                case '*': return l * r;
                case '/':
                    if (r == 0.0) throw Error(ErrorKind::Numeric, "division by zero");
                    return l / r;
            }
            throw Error(ErrorKind::Argument, "bad operator");
        }
        case Tag::Power: {
            double b = as_scalar(kids[0]->eval(env), "^");
            return std::pow(b, number);
        }
        case Tag::Call: {
            if (name == "dot") {
                ExprValue u = kids[0]->eval(env);
                ExprValue v = kids[1]->eval(env);
                return dot(as_vector(u, "dot"), as_vector(v, "dot"));
            }
            if (name == "min" || name == "max") {
                double a = as_scalar(kids[0]->eval(env), name);
                double b = as_scalar(kids[1]->eval(env), name);
                return name == "min" ? std::min(a, b) : std::max(a, b);
            }
            ExprValue arg = kids[0]->eval(env);
            if (name == "norm") return std::sqrt(value_normsq(arg));
            if (name == "normsq") return value_normsq(arg);
            double a = as_scalar(arg, name);
            if (name == "abs") return std::fabs(a);
            if (name == "sqrt") return std::sqrt(a);
            if (name == "exp") return std::exp(a);
            if (name == "sin") return std::sin(a);
            if (name == "cos") return std::cos(a);
            throw Error(ErrorKind::Argument, "unknown function '" + name + "'");
        }
    }
    throw Error(ErrorKind::Argument, "corrupt expression node");
}

double Expr::eval_scalar(const ExprEnv& env) const {
    return as_scalar(eval(env), "expression");
}

namespace {
int op_prec(char op) { return (op == '+' || op == '-') ? 1 : 2; }
}  // namespace

std::string Expr::print_prec(int parent_prec) const {
    switch (tag) {
        case Tag::Number:
            return format_double(number);
        case Tag::Variable: {
            std::string out = name;
            for (int i : indices) out += "[" + std::to_string(i) + "]";
            return out;
        }
        case Tag::Binary: {
            int prec = op_prec(op);
            // Right operand of - and / needs parens at equal precedence.
            std::string l = kids[0]->print_prec(prec);
            std::string r = kids[1]->print_prec(prec + 1);
            std::string out = l + " " + std::string(1, op) + " " + r;
            if (prec < parent_prec) out = "(" + out + ")";
            return out;
        }
        case Tag::Power: {
            std::string out = kids[0]->print_prec(4) + "^" + format_double(number);
            if (parent_prec > 3) out = "(" + out + ")";
            return out;
        }
        case Tag::Call: {
            std::string out = name + "(";
            for (std::size_t i = 0; i < kids.size(); ++i) {
                if (i) out += ", ";
                out += kids[i]->print_prec(0);
            }
            return out + ")";
        }
    }
    return "";
}

std::string Expr::print() const { return print_prec(0); }

bool Expr::equal(const Expr& other) const {
    if (tag != other.tag || number != other.number || name != other.name || op != other.op ||
        indices != other.indices || kids.size() != other.kids.size())
        return false;
    for (std::size_t i = 0; i < kids.size(); ++i)
        if (!kids[i]->equal(*other.kids[i])) return false;
    return true;
}

void Expr::collect_vars(std::vector<std::string>& out) const {
    if (tag == Tag::Variable) out.push_back(name);
    for (const auto& k : kids) k->collect_vars(out);
}

ExprPtr parse_expression(const std::string& text) { return Parser(text).run(); }

}  // namespace sdr
