#include "deriver/rules.hpp"

#include <algorithm>

#include "deriver/syntax.hpp"

namespace deriver {

const char* meta_sort_name(MetaSort s) {
    switch (s) {
    case MetaSort::Expr: return "expr";
    case MetaSort::Value: return "value";
    case MetaSort::Num: return "num";
    case MetaSort::Type: return "type";
    case MetaSort::Prop: return "prop";
    case MetaSort::Ctx: return "ctx";
    case MetaSort::Name: return "name";
    }
    return "?";
}

SideCond SideCond::lookup(std::string ctx, std::string key, std::string result) {
    return {Kind::Lookup, {std::move(ctx), std::move(key)}, std::move(result)};
}
SideCond SideCond::arith(std::string result, std::string a, std::string b) {
    return {Kind::Arith, {std::move(a), std::move(b)}, std::move(result)};
}
SideCond SideCond::is_value(std::string m) { return {Kind::IsValue, {std::move(m)}, {}}; }

std::vector<std::string> SideCond::metavars() const {
    std::vector<std::string> out = args;
    if (!result.empty()) out.push_back(result);
    return out;
}

std::string locus_name(const Locus& l) {
    switch (l.kind) {
    case Locus::Kind::Conclusion: return "conclusion";
    case Locus::Kind::Premise: return "premise " + std::to_string(l.index + 1);
    case Locus::Kind::RuleApplication: return "rule application";
    case Locus::Kind::SideCondition: return "side condition " + std::to_string(l.index + 1);
    }
    return "?";
}

const Metavar* Rule::find_meta(const std::string& name) const {
    for (const auto& m : metas_)
        if (m.name == name) return &m;
    return nullptr;
}

namespace {

struct Occurrence {
    std::string name;
    Sort position;
    bool ctx_entry;   // direct child of a Ctx
    bool first_entry; // first child of a Ctx
    bool in_subst;    // below a pending substitution (reads, never binds)
};

void occurrences(const Term& t, Sort s, bool entry, bool first, bool in_subst, std::vector<Occurrence>& out) {
    if (t.is(Kind::MetaRef)) {
        out.push_back({t.name(), s, entry, first, in_subst});
        return;
    }
    for (std::size_t i = 0; i < t.arity(); ++i)
        occurrences(t.child(i), child_sort(t, s, i), t.is(Kind::Ctx), i == 0, in_subst || t.is(Kind::Subst), out);
}

std::vector<Occurrence> occurrences(const Judgment& j) {
    std::vector<Occurrence> out;
    auto sorts = slot_sorts(j.kind());
    for (std::size_t i = 0; i < j.slot_count(); ++i) occurrences(j.slot(i), sorts[i], false, false, false, out);
    return out;
}

bool position_fits(const Occurrence& o, MetaSort m) {
    if (o.ctx_entry && m == MetaSort::Ctx) return o.first_entry;
    switch (m) {
    case MetaSort::Expr: case MetaSort::Value: case MetaSort::Num: return o.position == Sort::Expr;
    case MetaSort::Name: return o.position == Sort::Name || o.position == Sort::Expr;
    case MetaSort::Type: return o.position == Sort::Type;
    case MetaSort::Prop: return o.position == Sort::Prop;
    case MetaSort::Ctx: return o.position == Sort::TypeCtx || o.position == Sort::PropCtx;
    }
    return false;
}

class MetaCollector : public PrintSink {
public:
    void text(std::string_view, const Path&) override {}
    void meta(const std::string& name, const Path&) override {
        if (std::find(order.begin(), order.end(), name) == order.end()) order.push_back(name);
    }
    std::vector<std::string> order;
};

}  // namespace

std::vector<std::string> Rule::audit() const {
    std::vector<std::string> problems;
    auto where = [&](const std::string& what) { return name_ + ": " + what; };

    std::set<std::string> bound;
    auto scan = [&](const Judgment& j, const std::string& label, bool is_premise) {
        if (j.kind() != kind_) problems.push_back(where(label + " has the wrong judgment form"));
        auto occ = occurrences(j);
        for (const auto& o : occ) {
            const Metavar* m = find_meta(o.name);
            if (!m) {
                problems.push_back(where(label + " mentions undeclared metavariable " + o.name));
                continue;
            }
            if (!position_fits(o, m->sort))
                problems.push_back(where(label + ": " + o.name + " of sort " + meta_sort_name(m->sort) +
                                         " stands at a " + sort_name(o.position) + " position"));
            if (o.in_subst && !bound.count(o.name))
                problems.push_back(where(label + ": " + o.name + " is read by a substitution before it is bound"));
        }
        for (const auto& o : occ) {
            if (o.in_subst || bound.count(o.name)) continue;
            if (is_premise && !premise_bound_.count(o.name))
                problems.push_back(where(label + " introduces " + o.name + " without marking it premise-bound"));
        }
        for (const auto& o : occ)
            if (!o.in_subst) bound.insert(o.name);
    };
    scan(conclusion_, "conclusion", false);
    for (const auto& name : premise_bound_)
        if (bound.count(name)) problems.push_back(where(name + " is marked premise-bound but occurs in the conclusion"));
    for (std::size_t i = 0; i < premises_.size(); ++i) scan(premises_[i], "premise " + std::to_string(i + 1), true);
    for (const auto& name : premise_bound_)
        if (!bound.count(name)) problems.push_back(where(name + " is marked premise-bound but never bound"));
    for (std::size_t i = 0; i < side_.size(); ++i)
        for (const auto& m : side_[i].metavars()) {
            if (!find_meta(m))
                problems.push_back(where("side condition " + std::to_string(i + 1) + " mentions undeclared " + m));
            else if (!bound.count(m))
                problems.push_back(where("side condition " + std::to_string(i + 1) + " reads unbound " + m));
        }
    return problems;
}

RuleBuilder::RuleBuilder(std::string name, std::string category, JudgmentKind kind) {
    rule_.name_ = std::move(name);
    rule_.category_ = std::move(category);
    rule_.kind_ = kind;
}

RuleBuilder& RuleBuilder::meta(std::string name, MetaSort sort) {
    if (!names_.insert(name).second) throw RuleError(rule_.name_ + ": metavariable " + name + " declared twice");
    declared_.emplace_back(std::move(name), sort);
    return *this;
}

Judgment RuleBuilder::parse(std::string_view schema) const {
    ParseOptions opts;
    opts.metas = &names_;
    try {
        return parse_judgment(schema, rule_.kind_, opts);
    } catch (const ParseError& e) {
        throw RuleError(rule_.name_ + ": bad schema '" + std::string(schema) + "': " + e.what());
    }
}

RuleBuilder& RuleBuilder::conclusion(std::string_view schema) {
    rule_.conclusion_ = parse(schema);
    return *this;
}

RuleBuilder& RuleBuilder::premise(std::string_view schema) {
    rule_.premises_.push_back(parse(schema));
    return *this;
}

RuleBuilder& RuleBuilder::premise_bound(std::initializer_list<std::string> names) {
    rule_.premise_bound_.insert(names.begin(), names.end());
    return *this;
}

RuleBuilder& RuleBuilder::side(SideCond c) {
    rule_.side_.push_back(std::move(c));
    return *this;
}

RuleBuilder& RuleBuilder::doc(std::string text) {
    rule_.doc_ = std::move(text);
    return *this;
}

Rule RuleBuilder::build() const {
    Rule r = rule_;
    MetaCollector order;
    print_judgment(r.conclusion_, order);
    for (const auto& p : r.premises_) print_judgment(p, order);
    for (const auto& c : r.side_)
        for (const auto& m : c.metavars())
            if (std::find(order.order.begin(), order.order.end(), m) == order.order.end()) order.order.push_back(m);
    for (const auto& [name, sort] : declared_)
        if (std::find(order.order.begin(), order.order.end(), name) == order.order.end()) order.order.push_back(name);
    for (const auto& name : order.order) {
        auto it = std::find_if(declared_.begin(), declared_.end(), [&](const auto& d) { return d.first == name; });
        Metavar m{name, it == declared_.end() ? MetaSort::Expr : it->second, static_cast<int>(r.metas_.size())};
        r.metas_.push_back(std::move(m));
    }
    auto problems = r.audit();
    if (!problems.empty()) throw RuleError(problems.front());
    return r;
}

RuleSystem::RuleSystem(std::string id, JudgmentKind kind, std::vector<Rule> rules)
    : id_(std::move(id)), kind_(kind), rules_(std::move(rules)) {
    std::set<std::string> seen;
    for (const auto& r : rules_) {
        if (!seen.insert(r.name()).second) throw RuleError(id_ + ": duplicate rule name " + r.name());
        if (r.judgment_kind() != kind_) throw RuleError(id_ + ": rule " + r.name() + " has the wrong judgment form");
        if (std::find(categories_.begin(), categories_.end(), r.category()) == categories_.end())
            categories_.push_back(r.category());
    }
}

const Rule* RuleSystem::find(const std::string& name) const {
    for (const auto& r : rules_)
        if (r.name() == name) return &r;
    return nullptr;
}

}  // namespace deriver
