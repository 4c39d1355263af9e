#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "deriver/term.hpp"

namespace deriver {

enum class MetaSort : std::uint8_t { Expr, Value, Num, Type, Prop, Ctx, Name };

const char* meta_sort_name(MetaSort s);

struct Metavar {
    std::string name;
    MetaSort sort = MetaSort::Expr;
    int color = 0;  // first-occurrence order over (conclusion, premises)
};

struct SideCond {
    enum class Kind : std::uint8_t { Lookup, Arith, IsValue };
    Kind kind = Kind::IsValue;
    // Lookup: args = {ctx, key} and result (empty for proposition lookup).
    // Arith:  result = args[0] + args[1].
    // IsValue: args = {m}.
    std::vector<std::string> args;
    std::string result;

    static SideCond lookup(std::string ctx, std::string key, std::string result = {});
    static SideCond arith(std::string result, std::string a, std::string b);
    static SideCond is_value(std::string m);

    std::vector<std::string> metavars() const;
};

/// Where in a rule application something happened.
struct Locus {
    enum class Kind : std::uint8_t { Conclusion, Premise, RuleApplication, SideCondition };
    Kind kind = Kind::Conclusion;
    std::size_t index = 0;

    static Locus conclusion() { return {Kind::Conclusion, 0}; }
    static Locus premise(std::size_t i) { return {Kind::Premise, i}; }
    static Locus rule_application() { return {Kind::RuleApplication, 0}; }
    static Locus side_condition(std::size_t i) { return {Kind::SideCondition, i}; }

    friend bool operator==(const Locus&, const Locus&) = default;
    friend auto operator<=>(const Locus&, const Locus&) = default;
};

std::string locus_name(const Locus& l);

class RuleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An inference rule schema. Built through RuleBuilder, immutable afterwards.
class Rule {
public:
    const std::string& name() const { return name_; }
    const std::string& category() const { return category_; }
    const std::string& doc_text() const { return doc_; }
    JudgmentKind judgment_kind() const { return kind_; }
    const Judgment& conclusion() const { return conclusion_; }
    const std::vector<Judgment>& premises() const { return premises_; }
    std::size_t arity() const { return premises_.size(); }
    const std::vector<SideCond>& side_conditions() const { return side_; }
    const std::vector<Metavar>& metavars() const { return metas_; }
    const std::set<std::string>& premise_bound() const { return premise_bound_; }
    const Metavar* find_meta(const std::string& name) const;

    /// Scoping audit. Empty when the rule is well formed.
    std::vector<std::string> audit() const;

private:
    friend class RuleBuilder;
    std::string name_, category_, doc_;
    JudgmentKind kind_ = JudgmentKind::Hole;
    Judgment conclusion_;
    std::vector<Judgment> premises_;
    std::vector<SideCond> side_;
    std::vector<Metavar> metas_;
    std::set<std::string> premise_bound_;
};

/// Declarative rule authoring. Schema text uses the ordinary judgment syntax;
/// identifiers declared with meta() stand for metavariables, `[v/x]e` denotes
/// a pending substitution, and a ctx metavariable alone inside `[...]`
/// splices its entries (`[Γ, x : T1]`).
class RuleBuilder {
public:
    RuleBuilder(std::string name, std::string category, JudgmentKind kind);
    RuleBuilder& meta(std::string name, MetaSort sort);
    RuleBuilder& conclusion(std::string_view schema);
    RuleBuilder& premise(std::string_view schema);
    RuleBuilder& premise_bound(std::initializer_list<std::string> names);
    RuleBuilder& side(SideCond c);
    RuleBuilder& doc(std::string text);
    /// Throws RuleError when the audit fails.
    Rule build() const;

private:
    Judgment parse(std::string_view schema) const;
    Rule rule_;
    std::vector<std::pair<std::string, MetaSort>> declared_;
    std::set<std::string> names_;
};

class RuleSystem {
public:
    RuleSystem(std::string id, JudgmentKind kind, std::vector<Rule> rules);

    const std::string& id() const { return id_; }
    JudgmentKind judgment_kind() const { return kind_; }
    const std::vector<Rule>& rules() const { return rules_; }
    const std::vector<std::string>& categories() const { return categories_; }
    const Rule* find(const std::string& name) const;

private:
    std::string id_;
    JudgmentKind kind_;
    std::vector<Rule> rules_;
    std::vector<std::string> categories_;
};

/// Built-in systems: "alfa-typing", "alfa-eval", "prop-nd". Null if unknown.
const RuleSystem* find_system(const std::string& id);
std::vector<std::string> system_ids();

using Bindings = std::map<std::string, Term>;

struct Mismatch {
    Locus locus;
    Path path;  // within the subject judgment of `locus`
    std::string expected;
    std::string found;
    std::optional<std::string> metavar;  // conflicting metavariable, if any
    Path schema_path;                    // position in the rule schema of `locus`
    // Where the conflicting binding of `metavar` was taken from.
    std::optional<Locus> origin_locus;
    Path origin_path;
    // Offset of the conflict inside the metavariable's term.
    Path witness;
};

struct Blocker {
    Locus locus;
    Path path;
};

struct MatchResult {
    enum class Kind { Matched, Mismatch, Blocked };
    Kind kind = Kind::Matched;
    Bindings bindings;  // always the bindings gathered so far
    std::vector<Mismatch> mismatches;
    std::vector<Blocker> blocked;

    bool matched() const { return kind == Kind::Matched; }
};

/// Threads bindings through a sequence of schema/subject pairs. Occurrences
/// of an unbound metavariable over hole-bearing subterms are re-checked in
/// finish() against whatever binding later pairs produce.
class Matcher {
public:
    explicit Matcher(const Rule& rule, Bindings seed = {});

    void match(const Judgment& schema, const Judgment& subject, Locus locus);
    TriBool side_condition(const SideCond& c);
    MatchResult finish();

    const Bindings& bindings() const { return bindings_; }
    /// Where a metavariable's binding was read from (unset for seeds).
    std::optional<std::pair<Locus, Path>> origin(const std::string& meta) const;

private:
    struct Deferred {
        Term pattern;
        Term subject;
        Locus locus;
        Path path;
        Path schema_path;
    };

    void walk(const Term& pat, const Term& subj, Path& spath, Path& ppath);
    void walk_ctx(const Term& pat, const Term& subj, Path& spath, Path& ppath);
    void bind_or_compare(const Metavar& m, const Term& subj, Path& spath, Path& ppath);
    void compare(const Term& expected, const Term& subj, const Path& spath, const Path& ppath,
                 const std::optional<std::string>& meta);
    void mismatch(const Path& spath, const Path& ppath, std::string expected, std::string found,
                  const std::optional<std::string>& meta = std::nullopt);
    void block(const Path& spath);
    void block_holes(const Term& subj, const Path& spath);

    const Rule& rule_;
    Bindings bindings_;
    std::map<std::string, std::pair<Locus, Path>> origins_;
    std::vector<Deferred> deferred_;
    std::vector<Mismatch> mismatches_;
    std::vector<Blocker> blocked_;
    Locus locus_;
};

MatchResult match_schema(const Rule& rule, const Judgment& schema, const Judgment& subject,
                         const Bindings& seed = {});

/// Replaces bound metavariables; splices bound ctx metavariables; normalizes
/// a Subst once its three parts are ground.
Term instantiate(const Term& pattern, const Bindings& b);
Judgment instantiate(const Judgment& schema, const Bindings& b);

/// Evaluates a side condition, binding an unbound result metavariable on Yes.
TriBool check_side_condition(const SideCond& c, Bindings& b);

struct RuleSummary {
    std::string name;
    std::string category;
    std::size_t arity = 0;
    std::string schema;  // one-line "premises / conclusion"
};

struct RuleGroup {
    std::string category;
    std::vector<RuleSummary> rules;
};

class UnknownCategory : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Case-insensitive search over rule names and documentation, grouped by
/// category in declaration order.
std::vector<RuleGroup> list_rules(const RuleSystem& sys, const std::string& query,
                                  const std::optional<std::string>& category = std::nullopt);

/// One printed piece of a rule schema.
struct DocSegment {
    std::string text;
    std::optional<std::string> metavar;
    int color = -1;
    std::optional<std::string> bound;  // printed concrete term, when supplied
    Path schema_path;
};

struct DocLine {
    Locus locus;
    std::vector<DocSegment> segments;
    std::string plain() const;
};

struct MetavarDoc {
    std::string name;
    MetaSort sort;
    int color;
    std::optional<std::string> bound;
};

struct RuleDoc {
    std::string rule;
    std::string category;
    std::string text;
    std::vector<DocLine> premises;
    DocLine conclusion;
    std::vector<DocLine> side_conditions;
    std::vector<MetavarDoc> metavars;
};

RuleDoc rule_doc(const Rule& r, const std::optional<Bindings>& b = std::nullopt);

/// Plain-text rendering: premises, an inference bar, the conclusion, side
/// conditions, prose and a metavariable legend. ANSI-colored when `color`.
std::string render_rule_doc(const RuleDoc& d, bool color);

}  // namespace deriver
