#include "deriver/term.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace deriver {

std::string path_to_string(const Path& p) {
    std::string out = "[";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(p[i]);
    }
    return out + "]";
}

const char* sort_name(Sort s) {
    switch (s) {
    case Sort::Expr: return "expression";
    case Sort::Type: return "type";
    case Sort::Prop: return "proposition";
    case Sort::Name: return "name";
    case Sort::TypeCtx: return "typing context";
    case Sort::PropCtx: return "assumption context";
    case Sort::TypeEntry: return "context entry";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Construction

Term Term::make(Kind k, std::vector<Term> kids, std::string name, BigInt number, bool truth) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->name = std::move(name);
    n->number = std::move(number);
    n->truth = truth;
    n->holey = k == Kind::Hole;
    n->metas = k == Kind::MetaRef;
    n->abbrevs = k == Kind::Abbrev;
    for (const auto& c : kids) {
        n->holey = n->holey || c.has_holes();
        n->metas = n->metas || c.has_metas();
        n->abbrevs = n->abbrevs || c.has_abbrevs();
    }
    n->kids = std::move(kids);
    return Term(std::move(n));
}

Term Term::var(std::string name) { return make(Kind::Var, {}, std::move(name)); }
Term Term::num(BigInt value) { return make(Kind::NumLit, {}, {}, std::move(value)); }
Term Term::boolean(bool value) { return make(Kind::BoolLit, {}, {}, 0, value); }
Term Term::plus(Term a, Term b) { return make(Kind::Plus, {std::move(a), std::move(b)}); }
Term Term::if_(Term c, Term t, Term e) { return make(Kind::If, {std::move(c), std::move(t), std::move(e)}); }
Term Term::fun(Term binder, Term type, Term body) {
    return make(Kind::Fun, {std::move(binder), std::move(type), std::move(body)});
}
Term Term::app(Term f, Term a) { return make(Kind::App, {std::move(f), std::move(a)}); }
Term Term::let(Term binder, Term bound, Term body) {
    return make(Kind::Let, {std::move(binder), std::move(bound), std::move(body)});
}
Term Term::tnum() { return make(Kind::TNum, {}); }
Term Term::tbool() { return make(Kind::TBool, {}); }
Term Term::arrow(Term from, Term to) { return make(Kind::TArrow, {std::move(from), std::move(to)}); }
Term Term::atom(std::string name) { return make(Kind::Atom, {}, std::move(name)); }
Term Term::and_(Term a, Term b) { return make(Kind::And, {std::move(a), std::move(b)}); }
Term Term::or_(Term a, Term b) { return make(Kind::Or, {std::move(a), std::move(b)}); }
Term Term::implies(Term a, Term b) { return make(Kind::Implies, {std::move(a), std::move(b)}); }
Term Term::not_(Term a) { return make(Kind::Not, {std::move(a)}); }
Term Term::falsum() { return make(Kind::Falsum, {}); }
Term Term::ctx(std::vector<Term> entries) { return make(Kind::Ctx, std::move(entries)); }
Term Term::entry(Term name, Term type) { return make(Kind::Entry, {std::move(name), std::move(type)}); }
Term Term::hole() { return make(Kind::Hole, {}); }
Term Term::abbrev(std::string name) { return make(Kind::Abbrev, {}, std::move(name)); }
Term Term::subst(Term body, Term name, Term value) {
    return make(Kind::Subst, {std::move(body), std::move(name), std::move(value)});
}
Term Term::meta(std::string name) { return make(Kind::MetaRef, {}, std::move(name)); }

Term Term::with_children(std::vector<Term> kids) const {
    auto fixed = fixed_arity(kind());
    if (fixed && *fixed != kids.size())
        throw std::invalid_argument("with_children: arity mismatch for " + describe_kind(kind()));
    return make(kind(), std::move(kids), node_->name, node_->number, node_->truth);
}

bool operator==(const Term& a, const Term& b) {
    if (a.node_ == b.node_) return true;
    if (a.kind() != b.kind() || a.arity() != b.arity()) return false;
    switch (a.kind()) {
    case Kind::Var:
    case Kind::Atom:
    case Kind::Abbrev:
    case Kind::MetaRef:
        if (a.name() != b.name()) return false;
        break;
    case Kind::NumLit:
        if (a.number() != b.number()) return false;
        break;
    case Kind::BoolLit:
        if (a.truth() != b.truth()) return false;
        break;
    default:
        break;
    }
    for (std::size_t i = 0; i < a.arity(); ++i)
        if (a.child(i) != b.child(i)) return false;
    return true;
}

std::optional<std::size_t> fixed_arity(Kind k) {
    switch (k) {
    case Kind::Var: case Kind::NumLit: case Kind::BoolLit: case Kind::TNum: case Kind::TBool:
    case Kind::Atom: case Kind::Falsum: case Kind::Hole: case Kind::Abbrev: case Kind::MetaRef:
        return 0;
    case Kind::Not:
        return 1;
    case Kind::Plus: case Kind::App: case Kind::TArrow: case Kind::And: case Kind::Or:
    case Kind::Implies: case Kind::Entry:
        return 2;
    case Kind::If: case Kind::Fun: case Kind::Let: case Kind::Subst:
        return 3;
    case Kind::Ctx:
        return std::nullopt;
    }
    return std::nullopt;
}

std::string describe_kind(Kind k) {
    switch (k) {
    case Kind::Var: return "a variable";
    case Kind::NumLit: return "an integer";
    case Kind::BoolLit: return "a boolean";
    case Kind::Plus: return "an addition";
    case Kind::If: return "an if-expression";
    case Kind::Fun: return "a function term";
    case Kind::App: return "an application";
    case Kind::Let: return "a let-expression";
    case Kind::TNum: return "Num";
    case Kind::TBool: return "Bool";
    case Kind::TArrow: return "a function type";
    case Kind::Atom: return "an atomic proposition";
    case Kind::And: return "a conjunction";
    case Kind::Or: return "a disjunction";
    case Kind::Implies: return "an implication";
    case Kind::Not: return "a negation";
    case Kind::Falsum: return "falsum";
    case Kind::Ctx: return "a context";
    case Kind::Entry: return "a context entry";
    case Kind::Hole: return "a hole";
    case Kind::Abbrev: return "an abbreviation";
    case Kind::Subst: return "a substitution";
    case Kind::MetaRef: return "a metavariable";
    }
    return "a term";
}

const char* judgment_kind_name(JudgmentKind k) {
    switch (k) {
    case JudgmentKind::Hole: return "hole";
    case JudgmentKind::Typing: return "typing";
    case JudgmentKind::Eval: return "evaluation";
    case JudgmentKind::Entail: return "entailment";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Judgments

Judgment Judgment::make(JudgmentKind k, std::vector<Term> slots) {
    if (slots.size() != slot_sorts(k).size())
        throw std::invalid_argument("Judgment::make: wrong slot count");
    Judgment j;
    j.kind_ = k;
    j.slots_ = std::move(slots);
    return j;
}

Judgment Judgment::typing(Term ctx, Term expr, Term type) {
    return make(JudgmentKind::Typing, {std::move(ctx), std::move(expr), std::move(type)});
}
Judgment Judgment::eval(Term expr, Term value) {
    return make(JudgmentKind::Eval, {std::move(expr), std::move(value)});
}
Judgment Judgment::entail(Term ctx, Term prop) {
    return make(JudgmentKind::Entail, {std::move(ctx), std::move(prop)});
}

Judgment Judgment::holes_of(JudgmentKind k) {
    return make(k, std::vector<Term>(slot_sorts(k).size(), Term::hole()));
}

bool Judgment::has_holes() const {
    return is_hole() || std::any_of(slots_.begin(), slots_.end(), [](const Term& t) { return t.has_holes(); });
}

bool Judgment::has_abbrevs() const {
    return std::any_of(slots_.begin(), slots_.end(), [](const Term& t) { return t.has_abbrevs(); });
}

bool operator==(const Judgment& a, const Judgment& b) {
    return a.kind_ == b.kind_ && a.slots_ == b.slots_;
}

std::vector<Sort> slot_sorts(JudgmentKind k) {
    switch (k) {
    case JudgmentKind::Hole: return {};
    case JudgmentKind::Typing: return {Sort::TypeCtx, Sort::Expr, Sort::Type};
    case JudgmentKind::Eval: return {Sort::Expr, Sort::Expr};
    case JudgmentKind::Entail: return {Sort::PropCtx, Sort::Prop};
    }
    return {};
}

Sort child_sort(const Term& t, Sort parent, std::size_t i) {
    switch (t.kind()) {
    case Kind::Fun: return i == 0 ? Sort::Name : i == 1 ? Sort::Type : Sort::Expr;
    case Kind::Let: return i == 0 ? Sort::Name : Sort::Expr;
    case Kind::Subst: return i == 1 ? Sort::Name : Sort::Expr;
    case Kind::Entry: return i == 0 ? Sort::Name : Sort::Type;
    case Kind::Ctx: return parent == Sort::PropCtx ? Sort::Prop : Sort::TypeEntry;
    case Kind::TArrow: return Sort::Type;
    case Kind::And: case Kind::Or: case Kind::Implies: case Kind::Not: return Sort::Prop;
    default: return Sort::Expr;
    }
}

namespace {

bool head_fits(Kind k, Sort s) {
    switch (s) {
    case Sort::Expr:
        return k == Kind::Var || k == Kind::NumLit || k == Kind::BoolLit || k == Kind::Plus || k == Kind::If ||
               k == Kind::Fun || k == Kind::App || k == Kind::Let || k == Kind::Subst;
    case Sort::Type: return k == Kind::TNum || k == Kind::TBool || k == Kind::TArrow;
    case Sort::Prop:
        return k == Kind::Atom || k == Kind::And || k == Kind::Or || k == Kind::Implies || k == Kind::Not ||
               k == Kind::Falsum;
    case Sort::Name: return k == Kind::Var;
    case Sort::TypeCtx:
    case Sort::PropCtx: return k == Kind::Ctx;
    case Sort::TypeEntry: return k == Kind::Entry;
    }
    return false;
}

}  // namespace

std::string guess_sort(const Term& t) {
    for (Sort s : {Sort::Expr, Sort::Type, Sort::Prop, Sort::TypeCtx, Sort::TypeEntry})
        if (head_fits(t.kind(), s)) return sort_name(s);
    return describe_kind(t.kind());
}

std::optional<std::string> sort_violation(const Term& t, Sort s) {
    if (t.is(Kind::Hole) || t.is(Kind::Abbrev) || t.is(Kind::MetaRef)) return std::nullopt;
    if (!head_fits(t.kind(), s))
        return std::string("expected ") + sort_name(s) + ", found " + guess_sort(t);
    for (std::size_t i = 0; i < t.arity(); ++i)
        if (auto v = sort_violation(t.child(i), child_sort(t, s, i))) return v;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Paths

namespace {

[[noreturn]] void out_of_range(std::span<const std::size_t> p, std::size_t depth) {
    Path full(p.begin(), p.end());
    Path prefix(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(depth));
    throw TermError(TermError::Code::PathOutOfRange,
                    "path " + path_to_string(full) + " leaves the term after " + path_to_string(prefix));
}

}  // namespace

const Term& subterm_at(const Term& t, std::span<const std::size_t> p) {
    const Term* cur = &t;
    for (std::size_t d = 0; d < p.size(); ++d) {
        if (p[d] >= cur->arity()) out_of_range(p, d);
        cur = &cur->child(p[d]);
    }
    return *cur;
}

const Term& subterm_at(const Judgment& j, const Path& p) {
    if (p.empty())
        throw TermError(TermError::Code::PathOutOfRange, "the empty path denotes the judgment itself, not a term");
    if (p[0] >= j.slot_count()) out_of_range(p, 0);
    const Term* cur = &j.slot(p[0]);
    for (std::size_t d = 1; d < p.size(); ++d) {
        if (p[d] >= cur->arity()) out_of_range(p, d);
        cur = &cur->child(p[d]);
    }
    return *cur;
}

Sort sort_at(const Judgment& j, const Path& p) {
    if (p.empty() || p[0] >= j.slot_count())
        throw TermError(TermError::Code::PathOutOfRange, "path " + path_to_string(p) + " does not name a slot");
    Sort s = slot_sorts(j.kind())[p[0]];
    const Term* cur = &j.slot(p[0]);
    for (std::size_t d = 1; d < p.size(); ++d) {
        if (p[d] >= cur->arity()) out_of_range(p, d);
        s = child_sort(*cur, s, p[d]);
        cur = &cur->child(p[d]);
    }
    return s;
}

namespace {

Term rebuild(const Term& cur, std::span<const std::size_t> p, const Term& t) {
    if (p.empty()) return t;
    std::vector<Term> kids(cur.children().begin(), cur.children().end());
    kids[p[0]] = rebuild(kids[p[0]], p.subspan(1), t);
    return cur.with_children(std::move(kids));
}

}  // namespace

Term replace_at(const Term& root, std::span<const std::size_t> p, const Term& t, Sort root_sort) {
    Sort s = root_sort;
    const Term* cur = &root;
    for (std::size_t d = 0; d < p.size(); ++d) {
        if (p[d] >= cur->arity()) out_of_range(p, d);
        s = child_sort(*cur, s, p[d]);
        cur = &cur->child(p[d]);
    }
    if (auto v = sort_violation(t, s)) throw TermError(TermError::Code::SortMismatch, "sort mismatch: " + *v);
    return rebuild(root, p, t);
}

Judgment replace_at(const Judgment& j, const Path& p, const Term& t) {
    if (p.empty())
        throw TermError(TermError::Code::PathOutOfRange, "the empty path denotes the judgment itself, not a term");
    Sort s = sort_at(j, p);
    if (auto v = sort_violation(t, s)) throw TermError(TermError::Code::SortMismatch, "sort mismatch: " + *v);
    std::vector<Term> slots(j.slots().begin(), j.slots().end());
    slots[p[0]] = rebuild(slots[p[0]], std::span<const std::size_t>(p).subspan(1), t);
    return Judgment::make(j.kind(), std::move(slots));
}

// ---------------------------------------------------------------------------
// Three-valued equality

namespace {

bool same_payload(const Term& a, const Term& b) {
    switch (a.kind()) {
    case Kind::Var: case Kind::Atom: case Kind::Abbrev: case Kind::MetaRef: return a.name() == b.name();
    case Kind::NumLit: return a.number() == b.number();
    case Kind::BoolLit: return a.truth() == b.truth();
    case Kind::Ctx: return a.arity() == b.arity();
    default: return true;
    }
}

struct Eq3Walk {
    std::optional<Path> no;
    std::vector<Path> holes;
    Path cur;

    void walk(const Term& a, const Term& b) {
        if (no) return;
        if (a.is(Kind::Hole) || b.is(Kind::Hole)) {
            holes.push_back(cur);
            return;
        }
        if (a.kind() != b.kind() || !same_payload(a, b)) {
            no = cur;
            return;
        }
        for (std::size_t i = 0; i < a.arity() && !no; ++i) {
            cur.push_back(i);
            walk(a.child(i), b.child(i));
            cur.pop_back();
        }
    }

    TriBool result() {
        if (no) return TriBool::no(*no);
        if (!holes.empty()) return TriBool::unknown(std::move(holes));
        return TriBool::yes();
    }
};

}  // namespace

TriBool eq3(const Term& a, const Term& b) {
    Eq3Walk w;
    w.walk(a, b);
    return w.result();
}

TriBool eq3(const Judgment& a, const Judgment& b) {
    if (a.is_hole() || b.is_hole()) return TriBool::unknown({Path{}});
    if (a.kind() != b.kind()) return TriBool::no({});
    Eq3Walk w;
    for (std::size_t i = 0; i < a.slot_count() && !w.no; ++i) {
        w.cur = {i};
        w.walk(a.slot(i), b.slot(i));
    }
    return w.result();
}

namespace {

void collect_holes(const Term& t, Path& cur, std::vector<Path>& out) {
    if (!t.has_holes()) return;
    if (t.is(Kind::Hole)) {
        out.push_back(cur);
        return;
    }
    for (std::size_t i = 0; i < t.arity(); ++i) {
        cur.push_back(i);
        collect_holes(t.child(i), cur, out);
        cur.pop_back();
    }
}

}  // namespace

std::vector<Path> hole_paths(const Term& t) {
    std::vector<Path> out;
    Path cur;
    collect_holes(t, cur, out);
    return out;
}

std::vector<Path> hole_paths(const Judgment& j) {
    if (j.is_hole()) return {Path{}};
    std::vector<Path> out;
    for (std::size_t i = 0; i < j.slot_count(); ++i) {
        Path cur{i};
        collect_holes(j.slot(i), cur, out);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Substitution

namespace {

void free_vars(const Term& t, std::multiset<std::string>& bound, std::set<std::string>& out) {
    switch (t.kind()) {
    case Kind::Var:
        if (!bound.count(t.name())) out.insert(t.name());
        return;
    case Kind::Fun: {
        free_vars(t.child(1), bound, out);
        bool named = t.child(0).is(Kind::Var);
        if (named) bound.insert(t.child(0).name());
        free_vars(t.child(2), bound, out);
        if (named) bound.erase(bound.find(t.child(0).name()));
        return;
    }
    case Kind::Let: {
        free_vars(t.child(1), bound, out);
        bool named = t.child(0).is(Kind::Var);
        if (named) bound.insert(t.child(0).name());
        free_vars(t.child(2), bound, out);
        if (named) bound.erase(bound.find(t.child(0).name()));
        return;
    }
    case Kind::Entry:
        free_vars(t.child(1), bound, out);
        return;
    case Kind::Subst:
        free_vars(t.child(0), bound, out);
        free_vars(t.child(2), bound, out);
        return;
    default:
        for (const auto& c : t.children()) free_vars(c, bound, out);
    }
}

Term subst_rec(const Term& t, const std::string& x, const Term& v) {
    switch (t.kind()) {
    case Kind::Var:
        return t.name() == x ? v : t;
    case Kind::Fun:
        if (t.child(0).is(Kind::Var) && t.child(0).name() == x) return t;
        return Term::fun(t.child(0), t.child(1), subst_rec(t.child(2), x, v));
    case Kind::Let: {
        Term bound = subst_rec(t.child(1), x, v);
        if (t.child(0).is(Kind::Var) && t.child(0).name() == x) return Term::let(t.child(0), bound, t.child(2));
        return Term::let(t.child(0), bound, subst_rec(t.child(2), x, v));
    }
    case Kind::Plus: case Kind::If: case Kind::App: {
        std::vector<Term> kids;
        for (const auto& c : t.children()) kids.push_back(subst_rec(c, x, v));
        return t.with_children(std::move(kids));
    }
    default:
        return t;
    }
}

}  // namespace

bool is_closed(const Term& t) {
    if (t.has_metas()) return false;
    std::multiset<std::string> bound;
    std::set<std::string> out;
    free_vars(t, bound, out);
    return out.empty();
}

bool is_value(const Term& t) {
    return t.is(Kind::NumLit) || t.is(Kind::BoolLit) || t.is(Kind::Fun);
}

Term substitute(const Term& body, const std::string& x, const Term& v) {
    if (v.has_holes() || !is_closed(v))
        throw TermError(TermError::Code::OpenValue, "cannot substitute a term with free variables or holes");
    return subst_rec(body, x, v);
}

// ---------------------------------------------------------------------------
// Context lookup

LookupResult ctx_lookup(const Term& ctx, const Term& key) {
    if (!ctx.is(Kind::Ctx)) return {TriBool::unknown({Path{}}), std::nullopt};
    if (key.is(Kind::Var)) {
        std::vector<Path> blockers;
        for (std::size_t k = ctx.arity(); k-- > 0;) {
            const Term& e = ctx.child(k);
            if (!e.is(Kind::Entry)) {
                blockers.push_back({k});
                continue;
            }
            const Term& name = e.child(0);
            if (!name.is(Kind::Var)) {
                blockers.push_back({k, 0});
                continue;
            }
            if (name.name() != key.name()) continue;
            const Term& type = e.child(1);
            if (!blockers.empty()) return {TriBool::unknown(std::move(blockers)), std::nullopt};
            if (type.has_holes()) {
                std::vector<Path> hs;
                for (auto& p : hole_paths(type)) {
                    Path full{k, 1};
                    full.insert(full.end(), p.begin(), p.end());
                    hs.push_back(std::move(full));
                }
                return {TriBool::unknown(std::move(hs)), type};
            }
            return {TriBool::yes(), type};
        }
        if (!blockers.empty()) return {TriBool::unknown(std::move(blockers)), std::nullopt};
        return {TriBool::no({}), std::nullopt};
    }
    std::vector<Path> blockers;
    for (std::size_t k = 0; k < ctx.arity(); ++k) {
        TriBool r = eq3(ctx.child(k), key);
        if (r.is_yes()) return {TriBool::yes(), std::nullopt};
        if (r.is_unknown()) blockers.push_back({k});
    }
    if (!blockers.empty()) return {TriBool::unknown(std::move(blockers)), std::nullopt};
    return {TriBool::no({}), std::nullopt};
}

}  // namespace deriver
