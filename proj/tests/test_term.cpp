#include <doctest.h>

#include <map>
#include <variant>

#include "deriver/syntax.hpp"
#include "deriver/term.hpp"
#include "oracles.hpp"

using namespace deriver;

namespace {

Term n(long long v) { return Term::num(v); }
Term x() { return Term::var("x"); }
Term E(const char* s) { return parse_term(Sort::Expr, s); }

// Environment-passing evaluator with closures. Shares nothing with
// substitute().
struct Closure;
using Val = std::variant<BigInt, bool, std::shared_ptr<Closure>>;
using Env = std::shared_ptr<const std::map<std::string, Val>>;
struct Closure {
    std::string param;
    Term body;
    Env env;
};

Env extend(const Env& e, const std::string& k, Val v) {
    auto m = std::make_shared<std::map<std::string, Val>>(*e);
    (*m)[k] = std::move(v);
    return m;
}

Val env_eval(const Term& t, const Env& env) {
    switch (t.kind()) {
    case Kind::NumLit: return t.number();
    case Kind::BoolLit: return t.truth();
    case Kind::Var: return env->at(t.name());
    case Kind::Plus: return std::get<BigInt>(env_eval(t.child(0), env)) + std::get<BigInt>(env_eval(t.child(1), env));
    case Kind::If: return std::get<bool>(env_eval(t.child(0), env)) ? env_eval(t.child(1), env) : env_eval(t.child(2), env);
    case Kind::Fun: return std::make_shared<Closure>(Closure{t.child(0).name(), t.child(2), env});
    case Kind::App: {
        auto c = std::get<std::shared_ptr<Closure>>(env_eval(t.child(0), env));
        Val a = env_eval(t.child(1), env);
        return env_eval(c->body, extend(c->env, c->param, a));
    }
    case Kind::Let: return env_eval(t.child(2), extend(env, t.child(0).name(), env_eval(t.child(1), env)));
    default: throw std::logic_error("not an expression");
    }
}

// Substitution-based evaluator built on the library's substitute().
Term subst_eval(const Term& t) {
    switch (t.kind()) {
    case Kind::NumLit:
    case Kind::BoolLit:
    case Kind::Fun: return t;
    case Kind::Plus: return Term::num(subst_eval(t.child(0)).number() + subst_eval(t.child(1)).number());
    case Kind::If: return subst_eval(t.child(0)).truth() ? subst_eval(t.child(1)) : subst_eval(t.child(2));
    case Kind::App: {
        Term f = subst_eval(t.child(0));
        Term a = subst_eval(t.child(1));
        return subst_eval(substitute(f.child(2), f.child(0).name(), a));
    }
    case Kind::Let: return subst_eval(substitute(t.child(2), t.child(0).name(), subst_eval(t.child(1))));
    default: throw std::logic_error("stuck");
    }
}

// All subterm paths of t (relative), preorder.
void all_paths(const Term& t, Path& cur, std::vector<Path>& out) {
    out.push_back(cur);
    for (std::size_t i = 0; i < t.arity(); ++i) {
        cur.push_back(i);
        all_paths(t.child(i), cur, out);
        cur.pop_back();
    }
}

std::vector<Path> all_paths(const Judgment& j) {
    std::vector<Path> out;
    for (std::size_t s = 0; s < j.slot_count(); ++s) {
        Path p{s};
        all_paths(j.slot(s), p, out);
    }
    return out;
}

}  // namespace

TEST_SUITE("term") {

TEST_CASE("subterm_at walks indices") {
    auto j = Judgment::typing(Term::ctx({}), Term::plus(n(1), n(2)), Term::tnum());
    CHECK(subterm_at(j, {1, 0}) == n(1));
    CHECK(subterm_at(Judgment::eval(Term::hole(), n(3)), {0}).is(Kind::Hole));
    auto e = Judgment::entail(Term::ctx({Term::atom("A")}), Term::atom("A"));
    try {
        (void)subterm_at(e, {1, 5});
        FAIL("expected PathOutOfRange");
    } catch (const TermError& err) {
        CHECK(err.code == TermError::Code::PathOutOfRange);
    }
    CHECK_THROWS_AS((void)subterm_at(e, Path{}), TermError);
}

TEST_CASE("replace_at is persistent and sort-checked") {
    auto j = Judgment::eval(Term::hole(), n(3));
    auto r = replace_at(j, {0}, Term::plus(n(1), n(2)));
    CHECK(r == Judgment::eval(Term::plus(n(1), n(2)), n(3)));
    CHECK(j == Judgment::eval(Term::hole(), n(3)));

    auto t = Judgment::typing(Term::ctx({}), Term::hole(), Term::hole());
    CHECK(replace_at(t, {2}, Term::arrow(Term::tnum(), Term::tnum())) ==
          Judgment::typing(Term::ctx({}), Term::hole(), Term::arrow(Term::tnum(), Term::tnum())));

    auto t2 = Judgment::typing(Term::ctx({}), Term::hole(), Term::tnum());
    try {
        (void)replace_at(t2, {1}, Term::tbool());
        FAIL("expected SortMismatch");
    } catch (const TermError& err) {
        CHECK(err.code == TermError::Code::SortMismatch);
    }
}

TEST_CASE("eq3 basics") {
    CHECK(eq3(Term::plus(n(1), n(2)), Term::plus(n(1), n(2))).is_yes());
    auto u = eq3(Term::plus(n(1), Term::hole()), Term::plus(n(1), n(2)));
    REQUIRE(u.is_unknown());
    CHECK(u.holes == std::vector<Path>{{1}});
    auto no = eq3(Term::tnum(), Term::tbool());
    REQUIRE(no.is_no());
    CHECK(no.witness == Path{});
    auto binder = eq3(E("fun x:Num -> x"), E("fun y:Num -> y"));
    REQUIRE(binder.is_no());
    CHECK(binder.witness == Path{0});
}

TEST_CASE("eq3 binder and hole table") {
    struct Row {
        const char* a;
        const char* b;
        TriBool::Value v;
        Path witness;
    };
    using V = TriBool::Value;
    const std::vector<Row> rows = {
        {"fun x:Num -> x", "fun x:Num -> x", V::Yes, {}},
        {"fun x:Num -> x", "fun y:Num -> y", V::No, {0}},
        {"fun x:Num -> y", "fun x:Num -> x", V::No, {2}},
        {"fun x:Num -> x", "fun x:Bool -> x", V::No, {1}},
        {"fun ?:Num -> x", "fun y:Num -> x", V::Unknown, {}},
        {"fun x:? -> x", "fun x:Num -> x", V::Unknown, {}},
        {"fun x:Num -> ?", "fun y:Num -> y", V::No, {0}},
        {"fun x:Num -> ?", "fun x:Num -> x + 1", V::Unknown, {}},
        {"let x = 1 in x", "let x = 1 in x", V::Yes, {}},
        {"let x = 1 in x", "let y = 1 in y", V::No, {0}},
        {"let x = ? in x", "let x = 2 in x", V::Unknown, {}},
        {"let ? = 1 in x", "let y = 1 in x", V::Unknown, {}},
        {"let x = 1 in x", "let x = 2 in y", V::No, {1}},
        {"?", "fun x:Num -> x", V::Unknown, {}},
        {"fun x:Num -> x", "?", V::Unknown, {}},
        {"let x = 1 in x", "fun x:Num -> x", V::No, {}},
        {"(fun x:Num -> x) 1", "(fun y:Num -> x) 1", V::No, {0, 0}},
        {"(fun x:Num -> ?) ?", "(fun x:Num -> x) 1", V::Unknown, {}},
        {"(fun x:? -> x) 2", "(fun x:Num -> x) 1", V::No, {1}},
        {"x", "y", V::No, {}},
    };
    for (const auto& r : rows) {
        CAPTURE(r.a);
        CAPTURE(r.b);
        auto res = eq3(E(r.a), E(r.b));
        CHECK(res.value == r.v);
        if (r.v == V::No) CHECK(res.witness == r.witness);
        if (r.v == V::Unknown) CHECK(!res.holes.empty());
    }
}

TEST_CASE("eq3 properties on generated terms") {
    oracle::DocGen gen(7);
    for (int i = 0; i < 300; ++i) {
        Term a = gen.expr(4);
        Term b = gen.expr(4);
        if (!a.has_holes()) CHECK(eq3(a, a).is_yes());
        CHECK(eq3(a, b).value == eq3(b, a).value);
        auto r = eq3(a, b);
        if (r.is_no()) CHECK_NOTHROW((void)subterm_at(a, r.witness));
        if (r.is_unknown()) CHECK(!r.holes.empty());
    }
}

TEST_CASE("eq3 hole monotonicity") {
    oracle::DocGen gen(11);
    for (int i = 0; i < 200; ++i) {
        Term a = gen.expr(4);
        if (a.has_holes()) continue;
        std::vector<Path> ps;
        Path cur;
        all_paths(a, cur, ps);
        for (const auto& p : ps) {
            if (p.empty()) continue;
            Term holed = replace_at(a, p, Term::hole(), Sort::Expr);
            CHECK(!eq3(holed, a).is_no());
            CHECK(!eq3(a, holed).is_no());
        }
    }
}

TEST_CASE("replace_at and subterm_at cohere") {
    oracle::DocGen gen(3);
    for (int i = 0; i < 200; ++i) {
        auto j = Judgment::typing(Term::ctx({Term::entry("x", gen.type(2))}), gen.expr(3), gen.type(3));
        for (const auto& p : all_paths(j)) {
            Term t = Term::hole();
            auto r = replace_at(j, p, t);
            CHECK(subterm_at(r, p) == t);
            CHECK(replace_at(r, p, subterm_at(j, p)) == j);
        }
    }
}

TEST_CASE("substitute examples") {
    CHECK(substitute(E("x + 1"), "x", n(2)) == E("2 + 1"));
    CHECK(substitute(E("fun x:Num -> x"), "x", n(5)) == E("fun x:Num -> x"));
    CHECK(substitute(E("let y = x in x + y"), "x", n(3)) == E("let y = 3 in 3 + y"));
    CHECK(substitute(E("let x = x in x"), "x", n(3)) == E("let x = 3 in x"));
    try {
        (void)substitute(E("x"), "x", E("y"));
        FAIL("expected OpenValue");
    } catch (const TermError& err) {
        CHECK(err.code == TermError::Code::OpenValue);
    }
    CHECK_THROWS_AS((void)substitute(E("x"), "x", Term::hole()), TermError);
}

TEST_CASE("substitution agrees with environment semantics") {
    oracle::TermGen gen(2024);
    auto empty = std::make_shared<const std::map<std::string, Val>>();
    for (int i = 0; i < 100; ++i) {
        Term t = gen.closed_num(5);
        CAPTURE(print_term(t));
        Term v = subst_eval(t);
        REQUIRE(v.is(Kind::NumLit));
        CHECK(v.number() == std::get<BigInt>(env_eval(t, empty)));
    }
}

TEST_CASE("context lookup") {
    auto c = Term::ctx({Term::entry("x", Term::tnum()), Term::entry("x", Term::tbool())});
    auto r = ctx_lookup(c, x());
    CHECK(r.answer.is_yes());
    CHECK(r.payload == Term::tbool());
    CHECK(ctx_lookup(Term::ctx({Term::entry("x", Term::tnum())}), Term::var("y")).answer.is_no());
    CHECK(ctx_lookup(Term::ctx({Term::hole(), Term::atom("B")}), Term::atom("A")).answer.is_unknown());
    CHECK(ctx_lookup(Term::ctx({Term::atom("A"), Term::hole()}), Term::atom("A")).answer.is_yes());
    CHECK(ctx_lookup(Term::ctx({Term::entry("x", Term::tnum()), Term::hole()}), x()).answer.is_unknown());
}

TEST_CASE("values and closedness") {
    CHECK(is_value(n(1)));
    CHECK(is_value(Term::boolean(true)));
    CHECK(is_value(E("fun x:Num -> x")));
    CHECK_FALSE(is_value(E("1 + 2")));
    CHECK(is_closed(E("fun x:Num -> x")));
    CHECK_FALSE(is_closed(E("fun x:Num -> y")));
    CHECK(is_closed(E("let y = 1 in y + 2")));
}

TEST_CASE("big literals are exact") {
    Term big = E("123456789012345678901234567890 + 1");
    CHECK(subst_eval(big).number() == BigInt("123456789012345678901234567891"));
}

TEST_CASE("judgment slot sorts") {
    CHECK(slot_sorts(JudgmentKind::Typing) == std::vector<Sort>{Sort::TypeCtx, Sort::Expr, Sort::Type});
    CHECK(slot_sorts(JudgmentKind::Eval) == std::vector<Sort>{Sort::Expr, Sort::Expr});
    CHECK(slot_sorts(JudgmentKind::Entail) == std::vector<Sort>{Sort::PropCtx, Sort::Prop});
    CHECK(sort_violation(Term::tnum(), Sort::Expr).has_value());
    CHECK_FALSE(sort_violation(Term::hole(), Sort::Type).has_value());
}

}  // TEST_SUITE
