#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace deriver {

using BigInt = boost::multiprecision::cpp_int;

/// Child-index route from a judgment root down to a subterm. The first step
/// selects the judgment slot.
using Path = std::vector<std::size_t>;

std::string path_to_string(const Path& p);

enum class Kind : std::uint8_t {
    // expressions
    Var, NumLit, BoolLit, Plus, If, Fun, App, Let,
    // types
    TNum, TBool, TArrow,
    // propositions
    Atom, And, Or, Implies, Not, Falsum,
    // contexts; Entry is a typing binding `x : T`
    Ctx, Entry,
    // editor / schema forms
    Hole, Abbrev, Subst, MetaRef,
};

/// Syntactic category of a term position.
enum class Sort : std::uint8_t {
    Expr, Type, Prop, Name, TypeCtx, PropCtx, TypeEntry,
};

const char* sort_name(Sort s);

/// Immutable, structurally shared term. Copies are cheap.
///
/// Binder positions (the bound name of Fun/Let, the name of a context entry,
/// the variable of a Subst) hold a `Var` term, so they can be addressed by a
/// Path and replaced by a Hole or MetaRef like any other position.
class Term {
public:
    static Term var(std::string name);
    static Term num(BigInt value);
    static Term num(long long value) { return num(BigInt(value)); }
    static Term boolean(bool value);
    static Term plus(Term a, Term b);
    static Term if_(Term c, Term t, Term e);
    static Term fun(Term binder, Term type, Term body);
    static Term fun(std::string name, Term type, Term body) { return fun(var(std::move(name)), std::move(type), std::move(body)); }
    static Term app(Term f, Term a);
    static Term let(Term binder, Term bound, Term body);
    static Term let(std::string name, Term bound, Term body) { return let(var(std::move(name)), std::move(bound), std::move(body)); }
    static Term tnum();
    static Term tbool();
    static Term arrow(Term from, Term to);
    static Term atom(std::string name);
    static Term and_(Term a, Term b);
    static Term or_(Term a, Term b);
    static Term implies(Term a, Term b);
    static Term not_(Term a);
    static Term falsum();
    static Term ctx(std::vector<Term> entries);
    static Term entry(Term name, Term type);
    static Term entry(std::string name, Term type) { return entry(var(std::move(name)), std::move(type)); }
    static Term hole();
    static Term abbrev(std::string name);
    static Term subst(Term body, Term name, Term value);
    static Term meta(std::string name);

    /// Same head, new children. Arity must match for fixed-arity kinds.
    Term with_children(std::vector<Term> kids) const;

    Kind kind() const { return node_->kind; }
    bool is(Kind k) const { return node_->kind == k; }
    const std::string& name() const { return node_->name; }
    const BigInt& number() const { return node_->number; }
    bool truth() const { return node_->truth; }
    std::span<const Term> children() const { return node_->kids; }
    const Term& child(std::size_t i) const { return node_->kids.at(i); }
    std::size_t arity() const { return node_->kids.size(); }

    bool has_holes() const { return node_->holey; }
    bool has_metas() const { return node_->metas; }
    bool has_abbrevs() const { return node_->abbrevs; }

    /// Address of the shared node; distinct for separately constructed terms.
    const void* identity() const { return node_.get(); }

    friend bool operator==(const Term& a, const Term& b);
    friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

private:
    struct Node {
        Kind kind;
        std::string name;
        BigInt number;
        bool truth = false;
        std::vector<Term> kids;
        bool holey = false;
        bool metas = false;
        bool abbrevs = false;
    };
    explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    static Term make(Kind k, std::vector<Term> kids, std::string name = {}, BigInt number = 0, bool truth = false);

    std::shared_ptr<const Node> node_;
};

/// Fixed arity of a constructor, or nullopt for Ctx (variadic).
std::optional<std::size_t> fixed_arity(Kind k);

/// Short phrase naming a constructor, used in diagnostics ("a let-expression").
std::string describe_kind(Kind k);

enum class JudgmentKind : std::uint8_t { Hole, Typing, Eval, Entail };

const char* judgment_kind_name(JudgmentKind k);

/// A complete claim: `ctx |- e : T`, `e evalto v`, `ctx |- p`, or a hole.
class Judgment {
public:
    Judgment() : kind_(JudgmentKind::Hole) {}
    static Judgment hole() { return {}; }
    static Judgment typing(Term ctx, Term expr, Term type);
    static Judgment eval(Term expr, Term value);
    static Judgment entail(Term ctx, Term prop);
    /// A judgment of kind `k` whose every slot is a Hole.
    static Judgment holes_of(JudgmentKind k);
    static Judgment make(JudgmentKind k, std::vector<Term> slots);

    JudgmentKind kind() const { return kind_; }
    bool is_hole() const { return kind_ == JudgmentKind::Hole; }
    std::span<const Term> slots() const { return slots_; }
    const Term& slot(std::size_t i) const { return slots_.at(i); }
    std::size_t slot_count() const { return slots_.size(); }
    bool has_holes() const;
    bool has_abbrevs() const;

    friend bool operator==(const Judgment& a, const Judgment& b);
    friend bool operator!=(const Judgment& a, const Judgment& b) { return !(a == b); }

private:
    JudgmentKind kind_;
    std::vector<Term> slots_;
};

/// Sort required at each slot of a judgment kind.
std::vector<Sort> slot_sorts(JudgmentKind k);

/// Sort required at child `i` of a term whose own position has sort `parent`.
Sort child_sort(const Term& t, Sort parent, std::size_t i);

class TermError : public std::runtime_error {
public:
    enum class Code { PathOutOfRange, SortMismatch, OpenValue };
    TermError(Code c, std::string msg) : std::runtime_error(std::move(msg)), code(c) {}
    Code code;
};

/// Why `t` may not stand at a position of sort `s`, or nullopt when it may.
/// Hole, Abbrev and MetaRef fit anywhere.
std::optional<std::string> sort_violation(const Term& t, Sort s);

/// The sort of a term judged only by its head, for diagnostics.
std::string guess_sort(const Term& t);

const Term& subterm_at(const Judgment& j, const Path& p);
const Term& subterm_at(const Term& t, std::span<const std::size_t> p);
/// Sort expected at a (non-empty) path of a judgment.
Sort sort_at(const Judgment& j, const Path& p);
Judgment replace_at(const Judgment& j, const Path& p, const Term& t);
Term replace_at(const Term& root, std::span<const std::size_t> p, const Term& t, Sort root_sort);

/// Three-valued answer. `No` carries the first mismatching position; `Unknown`
/// carries the hole positions that blocked a decision.
struct TriBool {
    enum class Value : std::uint8_t { Yes, No, Unknown };
    Value value = Value::Yes;
    Path witness;
    std::vector<Path> holes;

    static TriBool yes() { return {}; }
    static TriBool no(Path w) { return {Value::No, std::move(w), {}}; }
    static TriBool unknown(std::vector<Path> hs) { return {Value::Unknown, {}, std::move(hs)}; }
    bool is_yes() const { return value == Value::Yes; }
    bool is_no() const { return value == Value::No; }
    bool is_unknown() const { return value == Value::Unknown; }
};

/// Hole-tolerant structural comparison. Names compare exactly.
TriBool eq3(const Term& a, const Term& b);
TriBool eq3(const Judgment& a, const Judgment& b);

/// Paths (relative to t) of every Hole in t, preorder.
std::vector<Path> hole_paths(const Term& t);
std::vector<Path> hole_paths(const Judgment& j);

bool is_closed(const Term& t);
bool is_value(const Term& t);

/// [v/x]body. Requires v closed and hole-free (throws OpenValue otherwise).
/// Does not descend under a binder of the same name.
Term substitute(const Term& body, const std::string& x, const Term& v);

/// Context lookup. For a Var key the payload is the type of the rightmost
/// binding; for a proposition key there is no payload.
struct LookupResult {
    TriBool answer;
    std::optional<Term> payload;
};
LookupResult ctx_lookup(const Term& ctx, const Term& key);

}  // namespace deriver
