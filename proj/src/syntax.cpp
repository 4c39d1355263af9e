#include "deriver/syntax.hpp"

#include <array>
#include <cctype>
#include <deque>
#include <unordered_map>

namespace deriver {

namespace {

const std::array<std::string_view, 12> kKeywords = {
    "fun", "let", "in", "if", "then", "else", "true", "false", "Num", "Bool", "evalto", "by",
};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '\'' || c >= 0x80; }

// ---------------------------------------------------------------------------
// Lexer

enum class Tok { Ident, Int, Kw, Sym, Abbrev, End, Bad };

struct Token {
    Tok type = Tok::End;
    std::string text;
    SrcSpan span;
    std::size_t offset = 0;
};

std::string describe(const Token& t) {
    switch (t.type) {
    case Tok::End: return "end of input";
    case Tok::Bad: return "'" + t.text + "'";
    default: return "'" + t.text + "'";
    }
}

class Lexer {
public:
    Lexer(std::string_view text, SrcPos origin) : text_(text), pos_(origin) {}

    Token next() {
        skip_space();
        Token t;
        t.offset = i_;
        SrcPos start = pos_;
        if (i_ >= text_.size()) {
            t.type = Tok::End;
            t.span = {start, start};
            return t;
        }
        static const std::array<std::string_view, 18> syms = {
            "_|_", "|-", "->", "=>", "/\\", "\\/", "+", "(", ")", "[", "]", ",", ":", "=", "~", "?", "/", "$",
        };
        auto c = static_cast<unsigned char>(text_[i_]);
        bool neg = c == '-' && i_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_ + 1]));
        if (std::isdigit(c) || neg) {
            std::size_t j = i_ + 1;
            while (j < text_.size() && std::isdigit(static_cast<unsigned char>(text_[j]))) ++j;
            t.type = Tok::Int;
            t.text = std::string(text_.substr(i_, j - i_));
            advance_to(j);
        } else if (c == '$' && i_ + 1 < text_.size() && ident_start(static_cast<unsigned char>(text_[i_ + 1]))) {
            std::size_t j = i_ + 1;
            while (j < text_.size() && ident_char(static_cast<unsigned char>(text_[j]))) ++j;
            t.type = Tok::Abbrev;
            t.text = std::string(text_.substr(i_ + 1, j - i_ - 1));
            advance_to(j);
        } else {
            bool matched = false;
            for (auto s : syms) {
                if (text_.substr(i_, s.size()) == s) {
                    t.type = Tok::Sym;
                    t.text = std::string(s);
                    advance_to(i_ + s.size());
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                if (ident_start(c)) {
                    std::size_t j = i_ + 1;
                    while (j < text_.size() && ident_char(static_cast<unsigned char>(text_[j]))) ++j;
                    t.text = std::string(text_.substr(i_, j - i_));
                    t.type = is_keyword(t.text) ? Tok::Kw : Tok::Ident;
                    advance_to(j);
                } else {
                    std::size_t j = i_ + 1;
                    while (j < text_.size() && (static_cast<unsigned char>(text_[j]) & 0xC0) == 0x80) ++j;
                    t.type = Tok::Bad;
                    t.text = std::string(text_.substr(i_, j - i_));
                    advance_to(j);
                }
            }
        }
        t.span = {start, pos_};
        return t;
    }

private:
    void skip_space() {
        while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) advance_to(i_ + 1);
    }

    void advance_to(std::size_t j) {
        for (; i_ < j; ++i_) {
            auto c = static_cast<unsigned char>(text_[i_]);
            if (c == '\n') {
                ++pos_.line;
                pos_.col = 1;
            } else if ((c & 0xC0) != 0x80) {
                ++pos_.col;
            }
        }
    }

    std::string_view text_;
    std::size_t i_ = 0;
    SrcPos pos_;
};

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
    Parser(std::string_view text, const ParseOptions& opts) : lexer_(text, opts.origin), opts_(opts) {}

    const Token& peek(std::size_t k = 0) {
        while (buf_.size() <= k) buf_.push_back(lexer_.next());
        return buf_[k];
    }

    Token take() {
        peek();
        Token t = std::move(buf_.front());
        buf_.pop_front();
        last_end_ = t.span.end;
        return t;
    }

    bool at_sym(std::string_view s, std::size_t k = 0) {
        const Token& t = peek(k);
        return t.type == Tok::Sym && t.text == s;
    }
    bool at_kw(std::string_view s, std::size_t k = 0) {
        const Token& t = peek(k);
        return t.type == Tok::Kw && t.text == s;
    }

    [[noreturn]] void fail(std::vector<std::string> expected) {
        const Token& t = peek();
        std::string msg = "expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) msg += i + 1 == expected.size() ? " or " : ", ";
            msg += expected[i];
        }
        msg += ", found " + describe(t);
        throw ParseError(t.span, std::move(expected), t.type == Tok::End ? "" : t.text, msg);
    }

    void expect_sym(std::string_view s) {
        if (!at_sym(s)) fail({"'" + std::string(s) + "'"});
        take();
    }
    void expect_kw(std::string_view s) {
        if (!at_kw(s)) fail({"'" + std::string(s) + "'"});
        take();
    }

    void expect_end() {
        if (peek().type != Tok::End) fail({"end of input"});
    }

    Term mark(Term t, SrcPos start) {
        if (opts_.spans) spans_[t.identity()] = {start, last_end_};
        return t;
    }

    bool is_meta(const std::string& name) const { return opts_.metas && opts_.metas->count(name); }

    // -- names ------------------------------------------------------------

    Term binder() {
        SrcPos start = peek().span.start;
        if (at_sym("?")) {
            take();
            return mark(Term::hole(), start);
        }
        if (peek().type != Tok::Ident) fail({"a variable name", "'?'"});
        Token t = take();
        return mark(is_meta(t.text) ? Term::meta(t.text) : Term::var(t.text), start);
    }

    // -- expressions ------------------------------------------------------

    bool starts_atom() {
        const Token& t = peek();
        switch (t.type) {
        case Tok::Ident: case Tok::Int: case Tok::Abbrev: return true;
        case Tok::Kw: return t.text == "true" || t.text == "false";
        case Tok::Sym: return t.text == "(" || t.text == "?" || (t.text == "[" && opts_.metas);
        default: return false;
        }
    }

    Term expr() {
        SrcPos start = peek().span.start;
        if (at_kw("fun")) {
            take();
            Term x = binder();
            expect_sym(":");
            Term ty = type_atom();
            expect_sym("->");
            Term body = expr();
            return mark(Term::fun(x, ty, body), start);
        }
        if (at_kw("let")) {
            take();
            Term x = binder();
            expect_sym("=");
            Term bound = expr();
            expect_kw("in");
            Term body = expr();
            return mark(Term::let(x, bound, body), start);
        }
        if (at_kw("if")) {
            take();
            Term c = expr();
            expect_kw("then");
            Term a = expr();
            expect_kw("else");
            Term b = expr();
            return mark(Term::if_(c, a, b), start);
        }
        Term lhs = app();
        while (at_sym("+")) {
            take();
            Term rhs = app();
            lhs = mark(Term::plus(lhs, rhs), start);
        }
        return lhs;
    }

    Term app() {
        SrcPos start = peek().span.start;
        Term f = atom();
        while (starts_atom()) {
            Term a = atom();
            f = mark(Term::app(f, a), start);
        }
        return f;
    }

    Term atom() {
        SrcPos start = peek().span.start;
        const Token& t = peek();
        switch (t.type) {
        case Tok::Ident: {
            Token tok = take();
            return mark(is_meta(tok.text) ? Term::meta(tok.text) : Term::var(tok.text), start);
        }
        case Tok::Int: {
            Token tok = take();
            return mark(Term::num(BigInt(tok.text)), start);
        }
        case Tok::Abbrev: {
            Token tok = take();
            return mark(Term::abbrev(tok.text), start);
        }
        case Tok::Kw:
            if (t.text == "true" || t.text == "false") {
                bool v = t.text == "true";
                take();
                return mark(Term::boolean(v), start);
            }
            break;
        case Tok::Sym:
            if (t.text == "?") {
                take();
                return mark(Term::hole(), start);
            }
            if (t.text == "(") {
                take();
                Term inner = expr();
                expect_sym(")");
                return inner;
            }
            if (t.text == "[" && opts_.metas) {
                take();
                Term value = expr();
                expect_sym("/");
                Term x = binder();
                expect_sym("]");
                Term body = atom();
                return mark(Term::subst(body, x, value), start);
            }
            break;
        default:
            break;
        }
        fail({"an expression"});
    }

    // -- types ------------------------------------------------------------

    Term type() {
        SrcPos start = peek().span.start;
        Term from = type_atom();
        if (at_sym("->")) {
            take();
            Term to = type();
            return mark(Term::arrow(from, to), start);
        }
        return from;
    }

    Term type_atom() {
        SrcPos start = peek().span.start;
        const Token& t = peek();
        if (t.type == Tok::Kw && (t.text == "Num" || t.text == "Bool")) {
            bool num = t.text == "Num";
            take();
            return mark(num ? Term::tnum() : Term::tbool(), start);
        }
        if (t.type == Tok::Sym && t.text == "?") {
            take();
            return mark(Term::hole(), start);
        }
        if (t.type == Tok::Abbrev) {
            Token tok = take();
            return mark(Term::abbrev(tok.text), start);
        }
        if (t.type == Tok::Ident && is_meta(t.text)) {
            Token tok = take();
            return mark(Term::meta(tok.text), start);
        }
        if (t.type == Tok::Sym && t.text == "(") {
            take();
            Term inner = type();
            expect_sym(")");
            return inner;
        }
        fail({"a type"});
    }

    // -- propositions -----------------------------------------------------

    Term prop() {
        SrcPos start = peek().span.start;
        Term lhs = prop_or();
        if (at_sym("=>")) {
            take();
            Term rhs = prop();
            return mark(Term::implies(lhs, rhs), start);
        }
        return lhs;
    }

    Term prop_or() {
        SrcPos start = peek().span.start;
        Term lhs = prop_and();
        while (at_sym("\\/")) {
            take();
            Term rhs = prop_and();
            lhs = mark(Term::or_(lhs, rhs), start);
        }
        return lhs;
    }

    Term prop_and() {
        SrcPos start = peek().span.start;
        Term lhs = prop_atom();
        while (at_sym("/\\")) {
            take();
            Term rhs = prop_atom();
            lhs = mark(Term::and_(lhs, rhs), start);
        }
        return lhs;
    }

    Term prop_atom() {
        SrcPos start = peek().span.start;
        const Token& t = peek();
        if (t.type == Tok::Sym) {
            if (t.text == "~") {
                take();
                Term inner = prop_atom();
                return mark(Term::not_(inner), start);
            }
            if (t.text == "_|_") {
                take();
                return mark(Term::falsum(), start);
            }
            if (t.text == "?") {
                take();
                return mark(Term::hole(), start);
            }
            if (t.text == "(") {
                take();
                Term inner = prop();
                expect_sym(")");
                return inner;
            }
        }
        if (t.type == Tok::Abbrev) {
            Token tok = take();
            return mark(Term::abbrev(tok.text), start);
        }
        if (t.type == Tok::Ident) {
            Token tok = take();
            return mark(is_meta(tok.text) ? Term::meta(tok.text) : Term::atom(tok.text), start);
        }
        fail({"a proposition"});
    }

    // -- contexts ---------------------------------------------------------

    Sort guess_ctx_flavor() {
        // called with '[' at peek(0)
        if (at_sym("]", 1)) return Sort::TypeCtx;
        const Token& a = peek(1);
        if ((a.type == Tok::Ident || (a.type == Tok::Sym && a.text == "?")) && at_sym(":", 2)) return Sort::TypeCtx;
        return Sort::PropCtx;
    }

    Term context(Sort flavor) {
        SrcPos start = peek().span.start;
        const Token& t = peek();
        if (t.type == Tok::Sym && t.text == "?") {
            take();
            return mark(Term::hole(), start);
        }
        if (t.type == Tok::Abbrev) {
            Token tok = take();
            return mark(Term::abbrev(tok.text), start);
        }
        if (t.type == Tok::Ident && is_meta(t.text)) {
            Token tok = take();
            return mark(Term::meta(tok.text), start);
        }
        if (!(t.type == Tok::Sym && t.text == "[")) fail({"a context"});
        if (flavor == Sort::Expr) flavor = guess_ctx_flavor();
        take();
        std::vector<Term> entries;
        if (!at_sym("]")) {
            for (;;) {
                entries.push_back(flavor == Sort::TypeCtx ? type_entry() : prop());
                if (at_sym(",")) {
                    take();
                    continue;
                }
                break;
            }
        }
        expect_sym("]");
        return mark(Term::ctx(std::move(entries)), start);
    }

    Term type_entry() {
        SrcPos start = peek().span.start;
        const Token& t = peek();
        bool named = (t.type == Tok::Ident || (t.type == Tok::Sym && t.text == "?")) && at_sym(":", 1);
        if (!named) {
            if (t.type == Tok::Sym && t.text == "?") {
                take();
                return mark(Term::hole(), start);
            }
            if (t.type == Tok::Abbrev) {
                Token tok = take();
                return mark(Term::abbrev(tok.text), start);
            }
            if (t.type == Tok::Ident && is_meta(t.text)) {
                Token tok = take();
                return mark(Term::meta(tok.text), start);
            }
            fail({"a context entry 'x : T'", "'?'", "an abbreviation"});
        }
        Term x = binder();
        expect_sym(":");
        Term ty = type();
        return mark(Term::entry(x, ty), start);
    }

    // -- judgments --------------------------------------------------------

    bool at_judgment_end() { return peek().type == Tok::End || at_kw("by"); }

    Judgment judgment(JudgmentKind k) {
        if (at_sym("?") && (peek(1).type == Tok::End || at_kw("by", 1))) {
            take();
            return Judgment::hole();
        }
        switch (k) {
        case JudgmentKind::Typing: {
            Term ctx = context(Sort::TypeCtx);
            expect_sym("|-");
            Term e = expr();
            expect_sym(":");
            Term ty = type();
            return Judgment::typing(ctx, e, ty);
        }
        case JudgmentKind::Entail: {
            Term ctx = context(Sort::PropCtx);
            expect_sym("|-");
            Term p = prop();
            return Judgment::entail(ctx, p);
        }
        case JudgmentKind::Eval: {
            Term e = expr();
            expect_kw("evalto");
            Term v = expr();
            return Judgment::eval(e, v);
        }
        case JudgmentKind::Hole:
            fail({"'?'"});
        }
        fail({"a judgment"});
    }

    std::size_t stop_offset() { return peek().offset; }

    void fill_spans(const Judgment& j) {
        if (!opts_.spans) return;
        for (std::size_t i = 0; i < j.slot_count(); ++i) {
            Path p{i};
            fill_spans(j.slot(i), p);
        }
    }

    void fill_spans(const Term& t, Path& p) {
        if (auto it = spans_.find(t.identity()); it != spans_.end()) (*opts_.spans)[p] = it->second;
        for (std::size_t i = 0; i < t.arity(); ++i) {
            p.push_back(i);
            fill_spans(t.child(i), p);
            p.pop_back();
        }
    }

    void fill_term_spans(const Term& t) {
        if (!opts_.spans) return;
        Path p;
        fill_spans(t, p);
    }

private:
    Lexer lexer_;
    const ParseOptions& opts_;
    std::deque<Token> buf_;
    SrcPos last_end_;
    std::unordered_map<const void*, SrcSpan> spans_;
};

std::pair<Judgment, std::size_t> parse_judgment_impl(std::string_view text, std::optional<JudgmentKind> kind,
                                                     const ParseOptions& opts, bool whole) {
    auto attempt = [&](JudgmentKind k) {
        Parser p(text, opts);
        Judgment j = p.judgment(k);
        if (whole)
            p.expect_end();
        else if (!p.at_judgment_end())
            p.fail({"'by'", "end of line"});
        p.fill_spans(j);
        return std::pair{j, p.stop_offset()};
    };
    if (kind) return attempt(*kind);
    std::optional<ParseError> best;
    for (JudgmentKind k : {JudgmentKind::Typing, JudgmentKind::Entail, JudgmentKind::Eval}) {
        try {
            return attempt(k);
        } catch (const ParseError& e) {
            if (!best || best->span.start < e.span.start) best = e;
        }
    }
    throw *best;
}

// ---------------------------------------------------------------------------
// Printer

class StringSink : public PrintSink {
public:
    void text(std::string_view s, const Path&) override { out.append(s); }
    void meta(const std::string& name, const Path&) override { out += name; }
    std::string out;
};

// Expression levels: 0 = open-right forms allowed, 1 = sum, 2 = application
// head, 3 = atom. Proposition levels: 0 implication, 1 disjunction,
// 2 conjunction, 3 atom. Type levels: 0 arrow, 1 atom.
class Printer {
public:
    explicit Printer(PrintSink& sink) : sink_(sink) {}

    void term(const Term& t, Sort s, int level, Path& at) {
        switch (t.kind()) {
        case Kind::Hole: return emit("?", at);
        case Kind::Abbrev: return emit("$" + t.name(), at);
        case Kind::MetaRef: return sink_.meta(t.name(), at);
        case Kind::Var: return emit(t.name(), at);
        case Kind::NumLit: return emit(t.number().str(), at);
        case Kind::BoolLit: return emit(t.truth() ? "true" : "false", at);
        case Kind::TNum: return emit("Num", at);
        case Kind::TBool: return emit("Bool", at);
        case Kind::Atom: return emit(t.name(), at);
        case Kind::Falsum: return emit("_|_", at);
        case Kind::Plus:
            paren(level > 1, at, [&] {
                child(t, 0, Sort::Expr, 1, at);
                emit(" + ", at);
                child(t, 1, Sort::Expr, 2, at);
            });
            return;
        case Kind::App:
            paren(level > 2, at, [&] {
                child(t, 0, Sort::Expr, 2, at);
                emit(" ", at);
                child(t, 1, Sort::Expr, 3, at);
            });
            return;
        case Kind::Fun:
            paren(level > 0, at, [&] {
                emit("fun ", at);
                child(t, 0, Sort::Name, 3, at);
                emit(":", at);
                child(t, 1, Sort::Type, 1, at);
                emit(" -> ", at);
                child(t, 2, Sort::Expr, 0, at);
            });
            return;
        case Kind::Let:
            paren(level > 0, at, [&] {
                emit("let ", at);
                child(t, 0, Sort::Name, 3, at);
                emit(" = ", at);
                child(t, 1, Sort::Expr, 0, at);
                emit(" in ", at);
                child(t, 2, Sort::Expr, 0, at);
            });
            return;
        case Kind::If:
            paren(level > 0, at, [&] {
                emit("if ", at);
                child(t, 0, Sort::Expr, 0, at);
                emit(" then ", at);
                child(t, 1, Sort::Expr, 0, at);
                emit(" else ", at);
                child(t, 2, Sort::Expr, 0, at);
            });
            return;
        case Kind::Subst:
            emit("[", at);
            child(t, 2, Sort::Expr, 0, at);
            emit("/", at);
            child(t, 1, Sort::Name, 3, at);
            emit("]", at);
            child(t, 0, Sort::Expr, 3, at);
            return;
        case Kind::TArrow:
            paren(level > 0, at, [&] {
                child(t, 0, Sort::Type, 1, at);
                emit(" -> ", at);
                child(t, 1, Sort::Type, 0, at);
            });
            return;
        case Kind::Implies:
            paren(level > 0, at, [&] {
                child(t, 0, Sort::Prop, 1, at);
                emit(" => ", at);
                child(t, 1, Sort::Prop, 0, at);
            });
            return;
        case Kind::Or:
            paren(level > 1, at, [&] {
                child(t, 0, Sort::Prop, 1, at);
                emit(" \\/ ", at);
                child(t, 1, Sort::Prop, 2, at);
            });
            return;
        case Kind::And:
            paren(level > 2, at, [&] {
                child(t, 0, Sort::Prop, 2, at);
                emit(" /\\ ", at);
                child(t, 1, Sort::Prop, 3, at);
            });
            return;
        case Kind::Not:
            emit("~", at);
            child(t, 0, Sort::Prop, 3, at);
            return;
        case Kind::Ctx: {
            emit("[", at);
            for (std::size_t i = 0; i < t.arity(); ++i) {
                if (i) emit(", ", at);
                child(t, i, child_sort(t, s, i), 0, at);
            }
            emit("]", at);
            return;
        }
        case Kind::Entry:
            child(t, 0, Sort::Name, 3, at);
            emit(":", at);
            child(t, 1, Sort::Type, 0, at);
            return;
        }
    }

    void judgment(const Judgment& j) {
        Path at;
        switch (j.kind()) {
        case JudgmentKind::Hole:
            emit("?", at);
            return;
        case JudgmentKind::Typing:
            slot(j, 0, at);
            emit(" |- ", at);
            slot(j, 1, at);
            emit(" : ", at);
            slot(j, 2, at);
            return;
        case JudgmentKind::Eval:
            slot(j, 0, at);
            emit(" evalto ", at);
            slot(j, 1, at);
            return;
        case JudgmentKind::Entail:
            slot(j, 0, at);
            emit(" |- ", at);
            slot(j, 1, at);
            return;
        }
    }

private:
    void slot(const Judgment& j, std::size_t i, Path& at) {
        at.push_back(i);
        term(j.slot(i), slot_sorts(j.kind())[i], 0, at);
        at.pop_back();
    }

    void child(const Term& t, std::size_t i, Sort s, int level, Path& at) {
        at.push_back(i);
        term(t.child(i), s, level, at);
        at.pop_back();
    }

    template <typename F>
    void paren(bool wrap, const Path& at, F&& body) {
        if (wrap) emit("(", at);
        body();
        if (wrap) emit(")", at);
    }

    void emit(std::string_view s, const Path& at) { sink_.text(s, at); }

    PrintSink& sink_;
};

}  // namespace

bool is_keyword(std::string_view s) {
    for (auto k : kKeywords)
        if (k == s) return true;
    return false;
}

bool is_identifier(std::string_view s) {
    if (s.empty() || !ident_start(static_cast<unsigned char>(s[0])) || s.starts_with("_|_")) return false;
    for (char c : s)
        if (!ident_char(static_cast<unsigned char>(c))) return false;
    return !is_keyword(s);
}

Term parse_term(Sort sort, std::string_view text, const ParseOptions& opts) {
    Parser p(text, opts);
    Term t = [&] {
        switch (sort) {
        case Sort::Expr: return p.expr();
        case Sort::Type: return p.type();
        case Sort::Prop: return p.prop();
        case Sort::Name: return p.binder();
        case Sort::TypeCtx: return p.context(Sort::TypeCtx);
        case Sort::PropCtx: return p.context(Sort::PropCtx);
        case Sort::TypeEntry: return p.type_entry();
        }
        return p.expr();
    }();
    p.expect_end();
    p.fill_term_spans(t);
    return t;
}

Judgment parse_judgment(std::string_view text, std::optional<JudgmentKind> kind, const ParseOptions& opts) {
    return parse_judgment_impl(text, kind, opts, true).first;
}

std::pair<Judgment, std::size_t> parse_judgment_prefix(std::string_view text, std::optional<JudgmentKind> kind,
                                                       const ParseOptions& opts) {
    return parse_judgment_impl(text, kind, opts, false);
}

void print_term(const Term& t, PrintSink& sink) {
    Printer pr(sink);
    Path at;
    Sort s = t.is(Kind::Ctx) ? Sort::TypeCtx : Sort::Expr;
    if (t.is(Kind::Ctx) && t.arity() && !t.child(0).is(Kind::Entry)) s = Sort::PropCtx;
    pr.term(t, s, 0, at);
}

void print_judgment(const Judgment& j, PrintSink& sink) {
    Printer pr(sink);
    pr.judgment(j);
}

std::string print_term(const Term& t) {
    StringSink s;
    print_term(t, s);
    return s.out;
}

std::string print_judgment(const Judgment& j) {
    StringSink s;
    print_judgment(j, s);
    return s.out;
}

}  // namespace deriver
