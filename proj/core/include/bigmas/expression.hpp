#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bigmas/rational.hpp"

namespace bigmas {

enum class BinaryOp { Add, Sub, Mul, Div };

/// Parsed arithmetic expression. Literals are non-negative integers as
/// written (a sign is a Negate node); grouping parentheses are erased.
struct Expr {
    enum class Kind { Literal, Binary, Negate, Factorial, DoubleFactorial };

    Kind kind = Kind::Literal;
    std::int64_t value = 0;     // Literal
    std::string token;          // Literal: digits as written (keeps "55" vs "5")
    BinaryOp op = BinaryOp::Add; // Binary
    std::shared_ptr<const Expr> lhs; // Binary lhs / unary operand
    std::shared_ptr<const Expr> rhs; // Binary rhs
};
using ExprPtr = std::shared_ptr<const Expr>;

ExprPtr make_literal(std::int64_t value, std::string token = {});
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr make_unary(Expr::Kind kind, ExprPtr operand);

struct ExprParseResult {
    ExprPtr expr;              // null on error
    std::size_t error_offset = 0; // byte offset into the input
    std::string error;         // empty on success
    bool ok() const { return expr != nullptr; }
};

/// Grammar: postfix ! and !! bind tightest, then unary minus, then * /
/// (left-assoc), then + - (left-assoc). `!!` is a single token, so 5!!!
/// is (5!!)!. ASCII * / and the symbols × ÷ are interchangeable.
ExprParseResult parse_expression(const std::string& text);

struct EvalPolicy {
    std::int64_t max_factorial_operand = 20;
    std::int64_t max_magnitude = 1'000'000'000'000'000'000LL; // per numerator/denominator
};

enum class EvalErrorKind { None, DivByZero, Domain, Overflow };

struct EvalOutcome {
    bool ok = false;
    Rational value;
    EvalErrorKind error = EvalErrorKind::None;
    std::string message;
};

/// Exact evaluation. Factorials require a non-negative integer operand.
EvalOutcome evaluate(const Expr& e, const EvalPolicy& policy = {});

/// Literal tokens in order of appearance ("55 + 5" -> {"55", "5"}).
std::vector<std::string> literal_tokens(const Expr& e);
/// Literal values in order of appearance.
std::vector<std::int64_t> literal_values(const Expr& e);

/// True if the tree contains only integer literals and the four binary
/// operators (no negation, no factorials).
bool uses_only_binary_ops(const Expr& e);

/// Canonical ASCII rendering; parse(to_text(e)) is structurally equal to e.
std::string to_text(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

} // namespace bigmas
