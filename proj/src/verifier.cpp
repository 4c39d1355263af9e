#include "deriver/verifier.hpp"

#include <algorithm>

#include "deriver/syntax.hpp"

namespace deriver {

const char* tree_status_name(TreeStatus s) {
    switch (s) {
    case TreeStatus::CompleteCorrect: return "CompleteCorrect";
    case TreeStatus::Incomplete: return "Incomplete";
    case TreeStatus::HasErrors: return "HasErrors";
    }
    return "?";
}

const char* status_name(NodeStatus::Kind k) {
    switch (k) {
    case NodeStatus::Kind::Correct: return "Correct";
    case NodeStatus::Kind::Incorrect: return "Incorrect";
    case NodeStatus::Kind::Indeterminate: return "Indeterminate";
    }
    return "?";
}

namespace {

std::string sentence(const std::string& expected, const std::string& found) {
    return "Expected " + expected + ", but found " + found + ".";
}

Path concat(const Path& a, const Path& b) {
    Path out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

std::string count_holes(std::size_t n) { return n == 1 ? "1 hole" : std::to_string(n) + " holes"; }

class NodeChecker {
public:
    NodeChecker(const DerivNode& node, const VerifyEnv& env) : node_(node), env_(env) {}

    NodeStatus run() {
        switch (node_.applied.kind) {
        case RuleRef::Kind::Hole: return rule_hole();
        case RuleRef::Kind::Subtree: return subtree_ref();
        case RuleRef::Kind::Rule: return rule_application();
        }
        return classify();
    }

private:
    Judgment expand(const Judgment& j) const { return env_.expand ? env_.expand(j) : j; }

    const Judgment& shown(const Locus& l) const {
        if (l.kind == Locus::Kind::Premise && l.index < node_.children.size()) return node_.children[l.index]->judgment;
        return node_.judgment;
    }

    Path display(const Locus& l, const Path& p) const {
        if (l.kind == Locus::Kind::RuleApplication) return {};
        if (!env_.display) return p;
        return env_.display(shown(l), p);
    }

    void error(Locus l, const Path& p, std::string expected, std::string found, std::string message, std::string code,
               std::optional<std::string> metavar = std::nullopt, std::optional<Path> schema_path = std::nullopt) {
        VerifyError e{node_.id, l, display(l, p), std::move(expected), std::move(found), std::move(message),
                      std::move(code), std::move(metavar), std::move(schema_path)};
        for (const auto& x : status_.errors)
            if (x.locus == e.locus && x.path == e.path && x.message == e.message) return;
        status_.errors.push_back(std::move(e));
    }

    void obligation(Locus l, std::vector<Path> holes, std::string statement) {
        for (auto& h : holes) h = display(l, h);
        std::sort(holes.begin(), holes.end());
        holes.erase(std::unique(holes.begin(), holes.end()), holes.end());
        for (auto& o : status_.obligations)
            if (o.locus == l) {
                for (auto& h : holes)
                    if (std::find(o.holes.begin(), o.holes.end(), h) == o.holes.end()) o.holes.push_back(h);
                std::sort(o.holes.begin(), o.holes.end());
                return;
            }
        status_.obligations.push_back({node_.id, l, std::move(holes), std::move(statement)});
    }

    NodeStatus classify() {
        if (!status_.errors.empty())
            status_.kind = NodeStatus::Kind::Incorrect;
        else if (!status_.obligations.empty())
            status_.kind = NodeStatus::Kind::Indeterminate;
        else
            status_.kind = NodeStatus::Kind::Correct;
        return status_;
    }

    NodeStatus rule_hole() {
        if (node_.judgment.is_hole())
            obligation(Locus::rule_application(), {}, "state the judgment and choose a rule");
        else
            obligation(Locus::rule_application(), {}, "choose a rule for this step");
        return classify();
    }

    NodeStatus subtree_ref() {
        const std::string& name = node_.applied.name;
        auto info = env_.subtree ? env_.subtree(name) : std::nullopt;
        if (!info) {
            error(Locus::rule_application(), {}, "a defined subtree", name, "subtree " + name + " is not defined",
                  "DanglingSubtreeRef");
            return classify();
        }
        Judgment j = expand(node_.judgment);
        TriBool r = eq3(j, info->root);
        if (r.is_no()) {
            std::string exp = "the root of subtree " + name, fnd = "a different judgment";
            if (!r.witness.empty() && !j.is_hole() && !info->root.is_hole()) {
                exp = print_term(subterm_at(info->root, r.witness));
                fnd = print_term(subterm_at(j, r.witness));
            }
            error(Locus::conclusion(), r.witness, exp, fnd,
                  "This judgment does not match the root of subtree " + name + ": " + sentence(exp, fnd), "SubtreeMismatch");
        } else if (r.is_unknown()) {
            obligation(Locus::conclusion(), r.holes, "fill the holes so this judgment can be compared with subtree " + name);
        }
        if (info->status == TreeStatus::HasErrors)
            error(Locus::rule_application(), {}, "a correct subtree", "a subtree with errors",
                  "subtree " + name + " contains errors", "BrokenSubtree");
        else if (info->status == TreeStatus::Incomplete)
            obligation(Locus::rule_application(), {}, "complete subtree " + name);
        return classify();
    }

    NodeStatus rule_application() {
        const Rule* rule = env_.system ? env_.system->find(node_.applied.name) : nullptr;
        if (!rule) {
            std::string sys = env_.system ? env_.system->id() : "?";
            error(Locus::rule_application(), {}, "a rule of " + sys, node_.applied.name,
                  "unknown rule '" + node_.applied.name + "' in system " + sys, "UnknownRule");
            return classify();
        }
        Matcher m(*rule);
        m.match(rule->conclusion(), expand(node_.judgment), Locus::conclusion());
        bool arity_ok = node_.children.size() == rule->arity();
        if (!arity_ok) {
            error(Locus::rule_application(), {}, std::to_string(rule->arity()) + " premises",
                  std::to_string(node_.children.size()),
                  "rule " + rule->name() + " expects " + std::to_string(rule->arity()) + " premises, found " +
                      std::to_string(node_.children.size()),
                  "Arity");
        } else {
            for (std::size_t i = 0; i < rule->arity(); ++i)
                m.match(rule->premises()[i], expand(node_.children[i]->judgment), Locus::premise(i));
        }
        std::vector<std::pair<std::size_t, TriBool>> sides;
        for (std::size_t i = 0; i < rule->side_conditions().size(); ++i)
            sides.emplace_back(i, m.side_condition(rule->side_conditions()[i]));
        MatchResult res = m.finish();
        status_.bindings = res.bindings;

        for (const auto& mm : res.mismatches) {
            error(mm.locus, mm.path, mm.expected, mm.found, sentence(mm.expected, mm.found), "Mismatch", mm.metavar,
                  mm.schema_path);
            if (mm.origin_locus && mm.metavar) {
                Path at = concat(mm.origin_path, mm.witness);
                error(*mm.origin_locus, at, mm.found, mm.expected,
                      sentence(mm.found, mm.expected) + " " + mm.metavar.value() + " must agree with " +
                          locus_name(mm.locus) + ".",
                      "Conflict", mm.metavar);
            }
        }
        if (arity_ok)
            for (const auto& [i, r] : sides) side_result(*rule, i, r, m);

        std::map<Locus, std::vector<Path>> blocked;
        for (const auto& b : res.blocked) blocked[b.locus].push_back(b.path);
        for (auto& [l, paths] : blocked) {
            std::string where = locus_name(l);
            obligation(l, paths, "fill the " + count_holes(paths.size()) + " in the " + where);
        }
        return classify();
    }

    // Path of a metavariable's binding site, when it lies in the conclusion.
    Path conclusion_path(const Matcher& m, const std::string& meta) const {
        auto o = m.origin(meta);
        if (o && o->first == Locus::conclusion()) return o->second;
        return {};
    }

    void side_result(const Rule& rule, std::size_t i, const TriBool& r, const Matcher& m) {
        const SideCond& c = rule.side_conditions()[i];
        Locus l = Locus::side_condition(i);
        const Bindings& b = m.bindings();
        auto bound = [&](const std::string& n) -> std::optional<Term> {
            if (auto it = b.find(n); it != b.end()) return it->second;
            return std::nullopt;
        };
        if (r.is_unknown()) {
            std::vector<Path> holes;
            if (c.kind == SideCond::Kind::Lookup) {
                Path base = conclusion_path(m, c.args[0]);
                if (!base.empty())
                    for (const auto& h : r.holes) holes.push_back(concat(base, h));
            }
            obligation(l, holes, "side condition " + std::to_string(i + 1) + " cannot be decided until holes are filled");
            return;
        }
        if (!r.is_no()) return;
        switch (c.kind) {
        case SideCond::Kind::Lookup: {
            auto ctx = bound(c.args[0]);
            auto key = bound(c.args[1]);
            if (!ctx || !key) return;
            if (c.result.empty()) {
                std::string p = print_term(*key);
                error(l, conclusion_path(m, c.args[1]), p + " among the assumptions", print_term(*ctx),
                      p + " is not among the assumptions " + print_term(*ctx), "SideCondition", c.args[1]);
                return;
            }
            LookupResult lr = ctx_lookup(*ctx, *key);
            auto res = bound(c.result);
            if (lr.payload && res) {
                std::string exp = print_term(*lr.payload), fnd = print_term(*res);
                error(l, conclusion_path(m, c.result), exp, fnd,
                      sentence(exp + " (the type of " + print_term(*key) + " in the context)", fnd), "SideCondition",
                      c.result);
            } else {
                std::string x = print_term(*key);
                error(l, conclusion_path(m, c.args[1]), "a binding for " + x, "none",
                      "variable " + x + " is not bound in the context", "SideCondition", c.args[1]);
            }
            return;
        }
        case SideCond::Kind::Arith: {
            auto a = bound(c.args[0]), d = bound(c.args[1]), n = bound(c.result);
            if (!a || !d || !n) return;
            if (a->is(Kind::NumLit) && d->is(Kind::NumLit)) {
                BigInt sum = a->number() + d->number();
                std::string exp = sum.str(), fnd = print_term(*n);
                error(l, conclusion_path(m, c.result), exp, fnd,
                      sentence(exp + " (= " + print_term(*a) + " + " + print_term(*d) + ")", fnd), "SideCondition",
                      c.result);
            } else {
                error(l, conclusion_path(m, c.result), "integers", "a non-integer operand",
                      "addition needs integer operands", "SideCondition", c.result);
            }
            return;
        }
        case SideCond::Kind::IsValue: {
            auto t = bound(c.args[0]);
            std::string fnd = t ? (t->arity() == 0 ? print_term(*t) : describe_kind(t->kind())) : "?";
            error(l, {}, "a value", fnd, sentence("a value", fnd), "SideCondition", c.args[0]);
            return;
        }
        }
    }

    const DerivNode& node_;
    const VerifyEnv& env_;
    NodeStatus status_;
};

}  // namespace

NodeStatus verify_node(const DerivNode& node, const VerifyEnv& env) { return NodeChecker(node, env).run(); }

TreeStatus fold_tree_status(const NodePtr& tree, const std::map<NodeId, NodeStatus>& statuses) {
    bool errors = false, open = false;
    for_each_node(tree, [&](const DerivNode& n) {
        auto it = statuses.find(n.id);
        if (it == statuses.end()) {
            open = true;
            return;
        }
        if (it->second.incorrect()) errors = true;
        if (it->second.indeterminate()) open = true;
    });
    if (errors) return TreeStatus::HasErrors;
    return open ? TreeStatus::Incomplete : TreeStatus::CompleteCorrect;
}

VerifyEnv document_env(const DerivationDoc& doc, const std::map<std::string, TreeStatus>& subtrees) {
    VerifyEnv env;
    env.system = find_system(doc.system_id);
    env.expand = [&doc](const Judgment& j) { return expand_abbrevs(doc, j); };
    env.subtree = [&doc, &subtrees](const std::string& name) -> std::optional<SubtreeInfo> {
        auto idx = subtree_index(doc, name);
        auto st = subtrees.find(name);
        if (!idx || st == subtrees.end()) return std::nullopt;
        return SubtreeInfo{expand_abbrevs(doc, doc.subtrees[*idx].tree->judgment), st->second};
    };
    env.display = [&doc](const Judgment& shown, const Path& p) { return display_path(doc, shown, p); };
    return env;
}

namespace {

VerificationReport run(const DerivationDoc& doc, const VerificationReport* previous, const std::set<NodeId>* affected) {
    VerificationReport out;
    VerifyEnv env = document_env(doc, out.subtrees);
    auto visit = [&](const NodePtr& tree) {
        for_each_node(tree, [&](const DerivNode& n) {
            if (previous && !affected->count(n.id)) {
                if (auto it = previous->nodes.find(n.id); it != previous->nodes.end()) out.nodes.emplace(n.id, it->second);
                return;
            }
            out.nodes.emplace(n.id, verify_node(n, env));
        });
        return fold_tree_status(tree, out.nodes);
    };
    for (const auto& s : doc.subtrees) out.subtrees[s.name] = visit(s.tree);
    out.root_status = visit(doc.root);
    bool errors = false, open = false;
    for (const auto& [id, st] : out.nodes) {
        errors = errors || st.incorrect();
        open = open || st.indeterminate();
    }
    if (out.nodes.size() != node_count(doc)) open = true;
    out.tree_status = errors ? TreeStatus::HasErrors : open ? TreeStatus::Incomplete : TreeStatus::CompleteCorrect;
    return out;
}

}  // namespace

VerificationReport verify_document(const DerivationDoc& doc) { return run(doc, nullptr, nullptr); }

VerificationReport reverify(const DerivationDoc& doc, const VerificationReport& previous,
                            const std::set<NodeId>& affected) {
    return run(doc, &previous, &affected);
}

}  // namespace deriver
