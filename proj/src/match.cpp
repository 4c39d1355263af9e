#include <algorithm>

#include "deriver/rules.hpp"
#include "deriver/syntax.hpp"

namespace deriver {

namespace {

// Diagnostic phrase for a term: leaves print as themselves, compound terms
// by their constructor ("a let-expression").
std::string describe(const Term& t) {
    if (t.is(Kind::Var)) return "variable " + t.name();
    if (t.is(Kind::Ctx)) return print_term(t);
    if (t.arity() == 0) return print_term(t);
    return describe_kind(t.kind());
}

bool same_payload(const Term& a, const Term& b) {
    switch (a.kind()) {
    case Kind::Var: case Kind::Atom: return a.name() == b.name();
    case Kind::NumLit: return a.number() == b.number();
    case Kind::BoolLit: return a.truth() == b.truth();
    default: return true;
    }
}

Path concat(const Path& a, const Path& b) {
    Path out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

bool is_splice(const Term& entry, const Rule& rule) {
    if (!entry.is(Kind::MetaRef)) return false;
    const Metavar* m = rule.find_meta(entry.name());
    return m && m->sort == MetaSort::Ctx;
}

}  // namespace

Matcher::Matcher(const Rule& rule, Bindings seed) : rule_(rule), bindings_(std::move(seed)) {}

std::optional<std::pair<Locus, Path>> Matcher::origin(const std::string& meta) const {
    if (auto it = origins_.find(meta); it != origins_.end()) return it->second;
    return std::nullopt;
}

void Matcher::match(const Judgment& schema, const Judgment& subject, Locus locus) {
    locus_ = locus;
    if (subject.is_hole()) {
        block({});
        return;
    }
    if (schema.kind() != subject.kind()) {
        mismatch({}, {}, std::string("a ") + judgment_kind_name(schema.kind()) + " judgment",
                 std::string("a ") + judgment_kind_name(subject.kind()) + " judgment");
        return;
    }
    for (std::size_t i = 0; i < schema.slot_count(); ++i) {
        Path spath{i}, ppath{i};
        walk(schema.slot(i), subject.slot(i), spath, ppath);
    }
}

void Matcher::walk(const Term& pat, const Term& subj, Path& spath, Path& ppath) {
    if (pat.is(Kind::MetaRef)) {
        const Metavar* m = rule_.find_meta(pat.name());
        if (!m) throw RuleError("undeclared metavariable " + pat.name());
        bind_or_compare(*m, subj, spath, ppath);
        return;
    }
    if (pat.is(Kind::Subst)) {
        Term inst = instantiate(pat, bindings_);
        if (inst.has_metas() || inst.is(Kind::Subst)) {
            deferred_.push_back({pat, subj, locus_, spath, ppath});
            return;
        }
        compare(inst, subj, spath, ppath, std::nullopt);
        return;
    }
    if (subj.is(Kind::Hole)) {
        block(spath);
        return;
    }
    if (pat.is(Kind::Ctx)) {
        walk_ctx(pat, subj, spath, ppath);
        return;
    }
    if (pat.kind() != subj.kind() || !same_payload(pat, subj)) {
        mismatch(spath, ppath, describe(pat), describe(subj));
        return;
    }
    for (std::size_t i = 0; i < pat.arity(); ++i) {
        spath.push_back(i);
        ppath.push_back(i);
        walk(pat.child(i), subj.child(i), spath, ppath);
        spath.pop_back();
        ppath.pop_back();
    }
}

void Matcher::walk_ctx(const Term& pat, const Term& subj, Path& spath, Path& ppath) {
    if (!subj.is(Kind::Ctx)) {
        mismatch(spath, ppath, "a context", describe(subj));
        return;
    }
    bool splice = pat.arity() > 0 && is_splice(pat.child(0), rule_);
    std::size_t fixed = splice ? pat.arity() - 1 : pat.arity();
    std::size_t n = subj.arity();
    if (!splice && n != fixed) {
        mismatch(spath, ppath, "a context with " + std::to_string(fixed) + " entries", describe(subj));
        return;
    }
    if (splice && n < fixed) {
        mismatch(spath, ppath, "a context with at least " + std::to_string(fixed) + " entries", describe(subj));
        return;
    }
    std::size_t skip = n - fixed;
    if (splice) {
        std::vector<Term> prefix(subj.children().begin(), subj.children().begin() + static_cast<std::ptrdiff_t>(skip));
        ppath.push_back(0);
        const Metavar* m = rule_.find_meta(pat.child(0).name());
        bind_or_compare(*m, Term::ctx(std::move(prefix)), spath, ppath);
        ppath.pop_back();
    }
    for (std::size_t j = 0; j < fixed; ++j) {
        std::size_t pi = splice ? j + 1 : j;
        spath.push_back(skip + j);
        ppath.push_back(pi);
        walk(pat.child(pi), subj.child(skip + j), spath, ppath);
        spath.pop_back();
        ppath.pop_back();
    }
}

void Matcher::bind_or_compare(const Metavar& m, const Term& subj, Path& spath, Path& ppath) {
    if (!subj.is(Kind::Hole)) {
        switch (m.sort) {
        case MetaSort::Name:
            if (!subj.is(Kind::Var)) return mismatch(spath, ppath, "a variable", describe(subj), m.name);
            break;
        case MetaSort::Num:
            if (!subj.is(Kind::NumLit)) return mismatch(spath, ppath, "an integer", describe(subj), m.name);
            break;
        case MetaSort::Ctx:
            if (!subj.is(Kind::Ctx)) return mismatch(spath, ppath, "a context", describe(subj), m.name);
            break;
        default:
            break;
        }
    }
    if (auto it = bindings_.find(m.name); it != bindings_.end()) {
        compare(it->second, subj, spath, ppath, m.name);
        return;
    }
    if (subj.has_holes()) {
        deferred_.push_back({Term::meta(m.name), subj, locus_, spath, ppath});
        return;
    }
    bindings_.emplace(m.name, subj);
    origins_[m.name] = {locus_, spath};
}

void Matcher::compare(const Term& expected, const Term& subj, const Path& spath, const Path& ppath,
                      const std::optional<std::string>& meta) {
    TriBool r = eq3(expected, subj);
    if (r.is_no()) {
        mismatch(concat(spath, r.witness), ppath, describe(subterm_at(expected, r.witness)),
                 describe(subterm_at(subj, r.witness)), meta);
        mismatches_.back().witness = r.witness;
    } else if (r.is_unknown()) {
        for (const auto& h : r.holes) block(concat(spath, h));
    }
}

void Matcher::mismatch(const Path& spath, const Path& ppath, std::string expected, std::string found,
                       const std::optional<std::string>& meta) {
    Mismatch mm{locus_, spath, std::move(expected), std::move(found), meta, ppath, std::nullopt, {}, {}};
    if (meta) {
        if (auto o = origin(*meta); o && o->first != locus_) {
            mm.origin_locus = o->first;
            mm.origin_path = o->second;
        }
    }
    mismatches_.push_back(std::move(mm));
}

void Matcher::block(const Path& spath) { blocked_.push_back({locus_, spath}); }

void Matcher::block_holes(const Term& subj, const Path& spath) {
    auto hs = hole_paths(subj);
    if (hs.empty()) block(spath);
    for (const auto& h : hs) block(concat(spath, h));
}

TriBool Matcher::side_condition(const SideCond& c) {
    bool had = !c.result.empty() && bindings_.count(c.result);
    TriBool r = check_side_condition(c, bindings_);
    if (!had && !c.result.empty() && bindings_.count(c.result) && !origins_.count(c.result))
        origins_[c.result] = {locus_, {}};
    return r;
}

MatchResult Matcher::finish() {
    auto pending = std::move(deferred_);
    deferred_.clear();
    for (const auto& d : pending) {
        locus_ = d.locus;
        Term inst = instantiate(d.pattern, bindings_);
        if (inst.has_metas() || inst.is(Kind::Subst)) {
            block_holes(d.subject, d.path);
            continue;
        }
        std::optional<std::string> meta;
        if (d.pattern.is(Kind::MetaRef)) meta = d.pattern.name();
        compare(inst, d.subject, d.path, d.schema_path, meta);
    }
    MatchResult out;
    out.bindings = bindings_;
    out.mismatches = mismatches_;
    out.blocked = blocked_;
    if (!out.mismatches.empty())
        out.kind = MatchResult::Kind::Mismatch;
    else if (!out.blocked.empty())
        out.kind = MatchResult::Kind::Blocked;
    return out;
}

MatchResult match_schema(const Rule& rule, const Judgment& schema, const Judgment& subject, const Bindings& seed) {
    Matcher m(rule, seed);
    m.match(schema, subject, Locus::conclusion());
    return m.finish();
}

// ---------------------------------------------------------------------------

Term instantiate(const Term& pattern, const Bindings& b) {
    if (!pattern.has_metas()) return pattern;
    switch (pattern.kind()) {
    case Kind::MetaRef: {
        auto it = b.find(pattern.name());
        return it == b.end() ? pattern : it->second;
    }
    case Kind::Ctx: {
        std::vector<Term> entries;
        for (const auto& e : pattern.children()) {
            if (e.is(Kind::MetaRef)) {
                auto it = b.find(e.name());
                if (it != b.end() && it->second.is(Kind::Ctx)) {
                    for (const auto& x : it->second.children()) entries.push_back(x);
                    continue;
                }
            }
            entries.push_back(instantiate(e, b));
        }
        return Term::ctx(std::move(entries));
    }
    case Kind::Subst: {
        Term body = instantiate(pattern.child(0), b);
        Term x = instantiate(pattern.child(1), b);
        Term v = instantiate(pattern.child(2), b);
        if (!body.has_metas() && x.is(Kind::Var) && !v.has_holes() && is_closed(v))
            return substitute(body, x.name(), v);
        return Term::subst(body, x, v);
    }
    default: {
        std::vector<Term> kids;
        for (const auto& c : pattern.children()) kids.push_back(instantiate(c, b));
        return pattern.with_children(std::move(kids));
    }
    }
}

Judgment instantiate(const Judgment& schema, const Bindings& b) {
    if (schema.is_hole()) return schema;
    std::vector<Term> slots;
    for (const auto& s : schema.slots()) slots.push_back(instantiate(s, b));
    return Judgment::make(schema.kind(), std::move(slots));
}

TriBool check_side_condition(const SideCond& c, Bindings& b) {
    auto get = [&](const std::string& name) -> const Term* {
        auto it = b.find(name);
        return it == b.end() ? nullptr : &it->second;
    };
    switch (c.kind) {
    case SideCond::Kind::Lookup: {
        const Term* ctx = get(c.args[0]);
        const Term* key = get(c.args[1]);
        if (!ctx || !key) return TriBool::unknown({});
        LookupResult r = ctx_lookup(*ctx, *key);
        if (c.result.empty()) return r.answer;
        const Term* result = get(c.result);
        if (r.answer.is_yes()) {
            if (!result) {
                b.emplace(c.result, *r.payload);
                return TriBool::yes();
            }
            return eq3(*r.payload, *result);
        }
        if (r.answer.is_unknown() && r.payload && result) {
            TriBool cmp = eq3(*r.payload, *result);
            if (cmp.is_no()) return cmp;
        }
        return r.answer;
    }
    case SideCond::Kind::Arith: {
        const Term* a = get(c.args[0]);
        const Term* d = get(c.args[1]);
        const Term* r = get(c.result);
        if (!a || !d || !r) return TriBool::unknown({});
        for (const Term* t : {a, d, r})
            if (t->has_holes()) return TriBool::unknown(hole_paths(*t));
        if (!a->is(Kind::NumLit) || !d->is(Kind::NumLit) || !r->is(Kind::NumLit)) return TriBool::no({});
        return a->number() + d->number() == r->number() ? TriBool::yes() : TriBool::no({});
    }
    case SideCond::Kind::IsValue: {
        const Term* t = get(c.args[0]);
        if (!t) return TriBool::unknown({});
        if (t->is(Kind::Hole)) return TriBool::unknown({Path{}});
        return is_value(*t) ? TriBool::yes() : TriBool::no({});
    }
    }
    return TriBool::unknown({});
}

}  // namespace deriver
