#include "bigmas/expression.hpp"

#include <cctype>
#include <stdexcept>

namespace bigmas {

namespace rational {

std::optional<Rational> make(__int128 num, __int128 den, std::int64_t limit) {
    if (den == 0) return std::nullopt;
    if (den < 0) {
        num = -num;
        den = -den;
    }
    __int128 g = gcd128(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    if (num == 0) den = 1;
    if (abs128(num) > limit || den > limit) return std::nullopt;
    return Rational{static_cast<std::int64_t>(num), static_cast<std::int64_t>(den)};
}

std::optional<Rational> add(const Rational& a, const Rational& b, std::int64_t limit) {
    __int128 num = static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den;
    __int128 den = static_cast<__int128>(a.den) * b.den;
    return make(num, den, limit);
}

std::optional<Rational> sub(const Rational& a, const Rational& b, std::int64_t limit) {
    __int128 num = static_cast<__int128>(a.num) * b.den - static_cast<__int128>(b.num) * a.den;
    __int128 den = static_cast<__int128>(a.den) * b.den;
    return make(num, den, limit);
}

std::optional<Rational> mul(const Rational& a, const Rational& b, std::int64_t limit) {
    __int128 num = static_cast<__int128>(a.num) * b.num;
    __int128 den = static_cast<__int128>(a.den) * b.den;
    return make(num, den, limit);
}

std::optional<Rational> div(const Rational& a, const Rational& b, std::int64_t limit) {
    if (b.num == 0) return std::nullopt;
    __int128 num = static_cast<__int128>(a.num) * b.den;
    __int128 den = static_cast<__int128>(a.den) * b.num;
    return make(num, den, limit);
}

std::optional<std::int64_t> factorial(std::int64_t n, std::int64_t max_operand, std::int64_t limit) {
    if (n < 0 || n > max_operand) return std::nullopt;
    __int128 acc = 1;
    for (std::int64_t k = 2; k <= n; ++k) {
        acc *= k;
        if (acc > limit) return std::nullopt;
    }
    return static_cast<std::int64_t>(acc);
}

std::optional<std::int64_t> double_factorial(std::int64_t n, std::int64_t max_operand, std::int64_t limit) {
    if (n < 0 || n > max_operand) return std::nullopt;
    __int128 acc = 1;
    for (std::int64_t k = n; k >= 2; k -= 2) {
        acc *= k;
        if (acc > limit) return std::nullopt;
    }
    return static_cast<std::int64_t>(acc);
}

} // namespace rational

std::string Rational::str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
}

ExprPtr make_literal(std::int64_t value, std::string token) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Literal;
    e->value = value;
    e->token = token.empty() ? std::to_string(value) : std::move(token);
    return e;
}

ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Binary;
    e->op = op;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    return e;
}

ExprPtr make_unary(Expr::Kind kind, ExprPtr operand) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->lhs = std::move(operand);
    return e;
}

namespace {

enum class Tok { Int, Plus, Minus, Star, Slash, Bang, DBang, LParen, RParen, End };

struct Token {
    Tok kind;
    std::int64_t value = 0;
    std::string text;
    std::size_t offset = 0;
};

struct LexResult {
    std::vector<Token> tokens;
    std::size_t error_offset = 0;
    std::string error;
    bool ok() const { return error.empty(); }
};

LexResult lex(const std::string& s) {
    LexResult r;
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = s[i];
        if (std::isspace(c)) { ++i; continue; }
        if (std::isdigit(c)) {
            std::size_t start = i;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            std::string digits = s.substr(start, i - start);
            if (digits.size() > 18) {
                r.error = "integer literal too long";
                r.error_offset = start;
                return r;
            }
            r.tokens.push_back({Tok::Int, std::stoll(digits), digits, start});
            continue;
        }
        switch (c) {
            case '+': r.tokens.push_back({Tok::Plus, 0, "+", i}); ++i; continue;
            case '-': r.tokens.push_back({Tok::Minus, 0, "-", i}); ++i; continue;
            case '*': r.tokens.push_back({Tok::Star, 0, "*", i}); ++i; continue;
            case '/': r.tokens.push_back({Tok::Slash, 0, "/", i}); ++i; continue;
            case '(': r.tokens.push_back({Tok::LParen, 0, "(", i}); ++i; continue;
            case ')': r.tokens.push_back({Tok::RParen, 0, ")", i}); ++i; continue;
            case '!':
                if (i + 1 < s.size() && s[i + 1] == '!') {
                    r.tokens.push_back({Tok::DBang, 0, "!!", i});
                    i += 2;
                } else {
                    r.tokens.push_back({Tok::Bang, 0, "!", i});
                    ++i;
                }
                continue;
            default: break;
        }
        // UTF-8 multiplication sign U+00D7 and division sign U+00F7
        if (c == 0xC3 && i + 1 < s.size()) {
            unsigned char d = s[i + 1];
            if (d == 0x97) { r.tokens.push_back({Tok::Star, 0, "*", i}); i += 2; continue; }
            if (d == 0xB7) { r.tokens.push_back({Tok::Slash, 0, "/", i}); i += 2; continue; }
        }
        r.error = "unexpected character";
        r.error_offset = i;
        return r;
    }
    r.tokens.push_back({Tok::End, 0, "", s.size()});
    return r;
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    ExprParseResult run() {
        ExprPtr e = parse_sum();
        if (!e) return fail_;
        if (peek().kind != Tok::End) {
            set_fail("unexpected trailing token");
            return fail_;
        }
        return {e, 0, ""};
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& advance() { return toks_[pos_++]; }

    void set_fail(const std::string& msg) {
        if (fail_.error.empty()) {
            fail_.error = msg;
            fail_.error_offset = peek().offset;
        }
    }

    ExprPtr parse_sum() {
        ExprPtr lhs = parse_product();
        if (!lhs) return nullptr;
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            BinaryOp op = advance().kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
            ExprPtr rhs = parse_product();
            if (!rhs) return nullptr;
            lhs = make_binary(op, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    ExprPtr parse_product() {
        ExprPtr lhs = parse_factor();
        if (!lhs) return nullptr;
        while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
            BinaryOp op = advance().kind == Tok::Star ? BinaryOp::Mul : BinaryOp::Div;
            ExprPtr rhs = parse_factor();
            if (!rhs) return nullptr;
            lhs = make_binary(op, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    ExprPtr parse_factor() {
        if (peek().kind == Tok::Minus) {
            advance();
            ExprPtr operand = parse_factor();
            if (!operand) return nullptr;
            return make_unary(Expr::Kind::Negate, std::move(operand));
        }
        return parse_postfix();
    }

    ExprPtr parse_postfix() {
        ExprPtr e = parse_primary();
        if (!e) return nullptr;
        while (peek().kind == Tok::Bang || peek().kind == Tok::DBang) {
            Expr::Kind k = advance().kind == Tok::Bang ? Expr::Kind::Factorial
                                                       : Expr::Kind::DoubleFactorial;
            e = make_unary(k, std::move(e));
        }
        return e;
    }

    ExprPtr parse_primary() {
        const Token& t = peek();
        if (t.kind == Tok::Int) {
            advance();
            return make_literal(t.value, t.text);
        }
        if (t.kind == Tok::LParen) {
            advance();
            ExprPtr e = parse_sum();
            if (!e) return nullptr;
            if (peek().kind != Tok::RParen) {
                set_fail("expected ')'");
                return nullptr;
            }
            advance();
            return e;
        }
        set_fail("expected a number, '(' or unary '-'");
        return nullptr;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    ExprParseResult fail_;
};

} // namespace

ExprParseResult parse_expression(const std::string& text) {
    LexResult lr = lex(text);
    if (!lr.ok()) return {nullptr, lr.error_offset, lr.error};
    if (lr.tokens.size() == 1) return {nullptr, 0, "empty expression"};
    return Parser(std::move(lr.tokens)).run();
}

namespace {

EvalOutcome eval_error(EvalErrorKind kind, std::string message) {
    EvalOutcome o;
    o.error = kind;
    o.message = std::move(message);
    return o;
}

EvalOutcome eval_rec(const Expr& e, const EvalPolicy& p) {
    switch (e.kind) {
        case Expr::Kind::Literal: {
            if (e.value > p.max_magnitude)
                return eval_error(EvalErrorKind::Overflow, "literal exceeds magnitude limit");
            EvalOutcome o;
            o.ok = true;
            o.value = Rational{e.value, 1};
            return o;
        }
        case Expr::Kind::Negate: {
            EvalOutcome sub = eval_rec(*e.lhs, p);
            if (!sub.ok) return sub;
            sub.value.num = -sub.value.num;
            return sub;
        }
        case Expr::Kind::Factorial:
        case Expr::Kind::DoubleFactorial: {
            EvalOutcome sub = eval_rec(*e.lhs, p);
            if (!sub.ok) return sub;
            if (!sub.value.is_integer() || sub.value.num < 0)
                return eval_error(EvalErrorKind::Domain,
                                  "factorial requires a non-negative integer operand");
            std::int64_t n = sub.value.num;
            if (n > p.max_factorial_operand)
                return eval_error(EvalErrorKind::Overflow, "factorial operand exceeds policy limit");
            auto v = e.kind == Expr::Kind::Factorial
                         ? rational::factorial(n, p.max_factorial_operand, p.max_magnitude)
                         : rational::double_factorial(n, p.max_factorial_operand, p.max_magnitude);
            if (!v) return eval_error(EvalErrorKind::Overflow, "factorial result exceeds magnitude limit");
            EvalOutcome o;
            o.ok = true;
            o.value = Rational{*v, 1};
            return o;
        }
        case Expr::Kind::Binary: {
            EvalOutcome l = eval_rec(*e.lhs, p);
            if (!l.ok) return l;
            EvalOutcome r = eval_rec(*e.rhs, p);
            if (!r.ok) return r;
            std::optional<Rational> v;
            switch (e.op) {
                case BinaryOp::Add: v = rational::add(l.value, r.value, p.max_magnitude); break;
                case BinaryOp::Sub: v = rational::sub(l.value, r.value, p.max_magnitude); break;
                case BinaryOp::Mul: v = rational::mul(l.value, r.value, p.max_magnitude); break;
                case BinaryOp::Div:
                    if (r.value.num == 0)
                        return eval_error(EvalErrorKind::DivByZero, "division by zero");
                    v = rational::div(l.value, r.value, p.max_magnitude);
                    break;
            }
            if (!v) return eval_error(EvalErrorKind::Overflow, "intermediate exceeds magnitude limit");
            EvalOutcome o;
            o.ok = true;
            o.value = *v;
            return o;
        }
    }
    return eval_error(EvalErrorKind::Domain, "malformed expression tree");
}

void collect_tokens(const Expr& e, std::vector<std::string>& out) {
    switch (e.kind) {
        case Expr::Kind::Literal: out.push_back(e.token); return;
        case Expr::Kind::Binary:
            collect_tokens(*e.lhs, out);
            collect_tokens(*e.rhs, out);
            return;
        default: collect_tokens(*e.lhs, out); return;
    }
}

} // namespace

EvalOutcome evaluate(const Expr& e, const EvalPolicy& policy) {
    return eval_rec(e, policy);
}

std::vector<std::string> literal_tokens(const Expr& e) {
    std::vector<std::string> out;
    collect_tokens(e, out);
    return out;
}

std::vector<std::int64_t> literal_values(const Expr& e) {
    std::vector<std::int64_t> out;
    for (const auto& t : literal_tokens(e)) out.push_back(std::stoll(t));
    return out;
}

bool uses_only_binary_ops(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Literal: return true;
        case Expr::Kind::Binary: return uses_only_binary_ops(*e.lhs) && uses_only_binary_ops(*e.rhs);
        default: return false;
    }
}

namespace {

const char* op_text(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return " + ";
        case BinaryOp::Sub: return " - ";
        case BinaryOp::Mul: return " * ";
        case BinaryOp::Div: return " / ";
    }
    return " ? ";
}

} // namespace

std::string to_text(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Literal: return e.token;
        case Expr::Kind::Binary:
            return "(" + to_text(*e.lhs) + op_text(e.op) + to_text(*e.rhs) + ")";
        case Expr::Kind::Negate: {
            std::string inner = to_text(*e.lhs);
            if (e.lhs->kind == Expr::Kind::Literal) return "-" + inner;
            return "-(" + inner + ")";
        }
        case Expr::Kind::Factorial:
        case Expr::Kind::DoubleFactorial: {
            std::string inner = to_text(*e.lhs);
            // A trailing '!' must be isolated so "5!"+"!" does not lex as "!!".
            bool needs_parens = e.lhs->kind != Expr::Kind::Literal &&
                                e.lhs->kind != Expr::Kind::Binary;
            if (!inner.empty() && inner.back() == '!') needs_parens = true;
            if (needs_parens) inner = "(" + inner + ")";
            return inner + (e.kind == Expr::Kind::Factorial ? "!" : "!!");
        }
    }
    return {};
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Expr::Kind::Literal: return a.value == b.value && a.token == b.token;
        case Expr::Kind::Binary:
            return a.op == b.op && structurally_equal(*a.lhs, *b.lhs) &&
                   structurally_equal(*a.rhs, *b.rhs);
        default: return structurally_equal(*a.lhs, *b.lhs);
    }
}

} // namespace bigmas
