#include "jgeo/parse.hpp"

#include "jgeo/errors.hpp"

#include <cctype>

namespace jgeo {

namespace {

struct Token {
    enum Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End } kind;
    std::string text; // for Number / Ident
    int line = 1, col = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& s) : s_(s) { advance(); }
    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n')) {
            if (s_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
            ++pos_;
        }
        tok_.line = line_;
        tok_.col = col_;
        tok_.text.clear();
        if (pos_ >= s_.size()) {
            tok_.kind = Token::End;
            return;
        }
        char c = s_[pos_];
        auto one = [&](Token::Kind k) {
            tok_.kind = k;
            ++pos_;
            ++col_;
        };
        if (std::isdigit((unsigned char)c)) {
            tok_.kind = Token::Number;
            while (pos_ < s_.size() && std::isdigit((unsigned char)s_[pos_])) {
                tok_.text += s_[pos_++];
                ++col_;
            }
            return;
        }
        if (std::isalpha((unsigned char)c) || c == '_') {
            tok_.kind = Token::Ident;
            while (pos_ < s_.size() &&
                   (std::isalnum((unsigned char)s_[pos_]) || s_[pos_] == '_')) {
                tok_.text += s_[pos_++];
                ++col_;
            }
            while (pos_ < s_.size() && s_[pos_] == '\'') { // primed names
                tok_.text += s_[pos_++];
                ++col_;
            }
            return;
        }
        switch (c) {
        case '+': one(Token::Plus); return;
        case '-': one(Token::Minus); return;
        case '*': one(Token::Star); return;
        case '/': one(Token::Slash); return;
        case '^': one(Token::Caret); return;
        case '(': one(Token::LParen); return;
        case ')': one(Token::RParen); return;
        default:
            throw parse_error(line_, col_, std::string("unexpected character '") + c + "'");
        }
    }

    const std::string& s_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;
};

class Parser {
public:
    Parser(const std::string& s, const PatchPtr& p) : lex_(s), patch_(p) {}

    ExpPoly run() {
        ExpPoly e = expr();
        const Token& t = lex_.peek();
        if (t.kind != Token::End)
            throw parse_error(t.line, t.col, "unexpected trailing input");
        return e;
    }

private:
    ExpPoly expr() {
        ExpPoly acc = term();
        for (;;) {
            const Token& t = lex_.peek();
            if (t.kind == Token::Plus) {
                lex_.take();
                acc = acc + term();
            } else if (t.kind == Token::Minus) {
                lex_.take();
                acc = acc - term();
            } else {
                return acc;
            }
        }
    }

    ExpPoly term() {
        ExpPoly acc = factor();
        while (lex_.peek().kind == Token::Star) {
            lex_.take();
            acc = acc * factor();
        }
        if (lex_.peek().kind == Token::Slash) {
            const Token& t = lex_.peek();
            throw parse_error(t.line, t.col, "'/' is only allowed inside rational literals");
        }
        return acc;
    }

    ExpPoly factor() {
        if (lex_.peek().kind == Token::Minus) {
            lex_.take();
            return -factor();
        }
        ExpPoly base = atom();
        if (lex_.peek().kind == Token::Caret) {
            lex_.take();
            bool neg = false;
            if (lex_.peek().kind == Token::Minus) {
                lex_.take();
                neg = true;
            }
            Token t = lex_.take();
            if (t.kind != Token::Number)
                throw parse_error(t.line, t.col, "expected integer exponent after '^'");
            int k = 0;
            for (char c : t.text) {
                k = k * 10 + (c - '0');
                if (k > 1000) throw parse_error(t.line, t.col, "exponent too large");
            }
            return base.pow(neg ? -k : k);
        }
        return base;
    }

    ExpPoly atom() {
        Token t = lex_.take();
        switch (t.kind) {
        case Token::Number: {
            Int num(t.text);
            if (lex_.peek().kind == Token::Slash) {
                lex_.take();
                Token d = lex_.take();
                if (d.kind != Token::Number)
                    throw parse_error(d.line, d.col, "expected integer denominator");
                Int den(d.text);
                if (den == 0) throw parse_error(d.line, d.col, "zero denominator");
                return ExpPoly::constant(patch_, Rat(num, den));
            }
            return ExpPoly::constant(patch_, Rat(num));
        }
        case Token::Ident: {
            if (t.text == "exp") {
                Token open = lex_.take();
                if (open.kind != Token::LParen)
                    throw parse_error(open.line, open.col, "expected '(' after exp");
                ExpPoly inner = expr();
                Token close = lex_.take();
                if (close.kind != Token::RParen)
                    throw parse_error(close.line, close.col, "expected ')'");
                auto affine = inner.as_affine();
                if (!affine)
                    throw parse_error(t.line, t.col,
                                      "exp argument must be affine in the patch variables");
                return ExpPoly::exponential(patch_, affine->first, affine->second);
            }
            int idx = patch_->index_of(t.text);
            if (idx < 0)
                throw parse_error(t.line, t.col, "unknown variable '" + t.text + "'");
            return ExpPoly::variable(patch_, idx);
        }
        case Token::LParen: {
            ExpPoly inner = expr();
            Token close = lex_.take();
            if (close.kind != Token::RParen)
                throw parse_error(close.line, close.col, "expected ')'");
            return inner;
        }
        default:
            break;
        }
        throw parse_error(t.line, t.col, "expected number, variable, or '('");
    }

    Lexer lex_;
    PatchPtr patch_;
};

} // namespace

ExpPoly parse_scalar(const std::string& text, const PatchPtr& patch) {
    return Parser(text, patch).run();
}

} // namespace jgeo
