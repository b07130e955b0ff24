#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "core/linalg.hpp"

namespace sdr {

// Expression value: scalar, vector (x, lambda, nu) or matrix (A).
using ExprValue = std::variant<double, Vec, Mat>;

// Evaluation environment. Unused slots stay empty.
struct ExprEnv {
    const Vec* x = nullptr;
    const Mat* A = nullptr;
    const Vec* lambda = nullptr;
    const Vec* nu = nullptr;
};

// Abstract syntax tree over the density DSL:
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := base ('^' number)?
//   base   := number | ident | func '(' expr (',' expr)* ')' | '(' expr ')'
//
// Identifiers: A, x, lambda, nu, with 1-based entry access A[i][j], x[i].
// Functions: abs, norm, normsq, dot, sqrt, exp, sin, cos, min, max.
class Expr {
  public:
    enum class Tag { Number, Variable, Binary, Power, Call };

    Tag tag;
    double number = 0.0;                    // Number, and the exponent of Power
    std::string name;                       // Variable base name or function name
    std::vector<int> indices;               // Variable entry access (1-based), empty = whole object
    char op = 0;                            // Binary: '+', '-', '*', '/'
    std::vector<std::shared_ptr<const Expr>> kids;

    ExprValue eval(const ExprEnv& env) const;
    double eval_scalar(const ExprEnv& env) const;

    // Canonical rendering; parse(print(e)) reproduces the tree.
    std::string print() const;

    bool equal(const Expr& other) const;

    // Variables referenced anywhere in the tree (base names).
    void collect_vars(std::vector<std::string>& out) const;

  private:
    std::string print_prec(int parent_prec) const;
};

using ExprPtr = std::shared_ptr<const Expr>;

// Parses the documented grammar. Throws Error(Parse) with a 1-based column
// position on syntax errors, unknown identifiers and arity mismatches.
ExprPtr parse_expression(const std::string& text);

}  // namespace sdr
