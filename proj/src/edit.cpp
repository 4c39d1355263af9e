#include "deriver/edit.hpp"

#include <algorithm>

#include "deriver/syntax.hpp"

namespace deriver {

using C = DocError::Code;

const char* command_name(const EditCommand& c) {
    static const char* names[] = {"SetRule",    "ClearRule",    "AddPremise",   "RemovePremise",    "EditJudgment",
                                  "SetJudgment", "FillHole",     "MakeHole",     "DefineAbbrev",     "DefineSubtree",
                                  "InsertSubtreeRef", "SetFeedback", "RemoveAbbrev", "RemoveSubtree"};
    return names[c.index()];
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void unknown_node(NodeId id) { throw DocError(C::UnknownNode, "no node with id " + std::to_string(id)); }

NodeLocation must_locate(const DerivationDoc& doc, NodeId id) {
    auto loc = locate(doc, id);
    if (!loc) unknown_node(id);
    return *loc;
}

NodePtr rebuild_along(const NodePtr& cur, const std::vector<std::size_t>& route, std::size_t depth,
                      const std::function<NodePtr(const DerivNode&)>& f) {
    if (depth == route.size()) return f(*cur);
    auto kids = cur->children;
    kids[route[depth]] = rebuild_along(kids[route[depth]], route, depth + 1, f);
    return make_node(cur->id, cur->judgment, cur->applied, std::move(kids));
}

// Copy of `doc` with the node at `loc` replaced by f(node).
DerivationDoc update(const DerivationDoc& doc, const NodeLocation& loc, const std::function<NodePtr(const DerivNode&)>& f) {
    DerivationDoc out = doc;
    NodePtr& tree = loc.subtree ? out.subtrees[*loc.subtree].tree : out.root;
    tree = rebuild_along(tree, loc.route, 0, f);
    return out;
}

NodePtr with_judgment(const DerivNode& n, Judgment j) { return make_node(n.id, std::move(j), n.applied, n.children); }

Judgment materialize(const DerivationDoc& doc, const Judgment& j) {
    return j.is_hole() ? Judgment::holes_of(doc.system().judgment_kind()) : j;
}

Judgment replace_checked(const Judgment& j, const Path& p, const Term& t) {
    try {
        return replace_at(j, p, t);
    } catch (const TermError& e) {
        throw DocError(e.code == TermError::Code::SortMismatch ? C::SortMismatch : C::BadPath, e.what());
    }
}

const Term& subterm_checked(const Judgment& j, const Path& p) {
    try {
        return subterm_at(j, p);
    } catch (const TermError& e) {
        throw DocError(C::BadPath, e.what());
    }
}

void collect_refs_to(const NodePtr& tree, const std::string& name, std::vector<NodeId>& out) {
    for_each_node(tree, [&](const DerivNode& n) {
        if (n.applied.kind == RuleRef::Kind::Subtree && n.applied.name == name) out.push_back(n.id);
    });
}

bool mentions_abbrev(const Term& t, const std::string& name) {
    if (!t.has_abbrevs()) return false;
    if (t.is(Kind::Abbrev)) return t.name() == name;
    for (const auto& c : t.children())
        if (mentions_abbrev(c, name)) return true;
    return false;
}

bool mentions_abbrev(const Judgment& j, const std::string& name) {
    for (const auto& s : j.slots())
        if (mentions_abbrev(s, name)) return true;
    return false;
}

// The node plus its parent, and when it sits in a subtree, every node that
// references that subtree (transitively) together with their parents.
void add_with_dependents(const DerivationDoc& doc, NodeId id, std::set<NodeId>& out) {
    auto loc = locate(doc, id);
    if (!loc) return;
    out.insert(id);
    if (loc->parent) out.insert(*loc->parent);
    if (!loc->subtree) return;
    std::vector<std::string> pending{doc.subtrees[*loc->subtree].name};
    std::set<std::string> seen;
    while (!pending.empty()) {
        std::string name = pending.back();
        pending.pop_back();
        if (!seen.insert(name).second) continue;
        std::vector<NodeId> refs;
        for (const auto& s : doc.subtrees) collect_refs_to(s.tree, name, refs);
        collect_refs_to(doc.root, name, refs);
        for (NodeId r : refs) {
            auto rl = locate(doc, r);
            out.insert(r);
            if (rl->parent) out.insert(*rl->parent);
            if (rl->subtree) pending.push_back(doc.subtrees[*rl->subtree].name);
        }
    }
}

struct Editor {
    const DerivationDoc& doc;
    std::set<NodeId> touched;  // nodes whose own judgment/rule/children changed
    std::set<NodeId> fresh;    // newly created nodes

    DerivationDoc operator()(const cmd::SetRule& c) {
        const Rule* rule = doc.system().find(c.rule);
        if (!rule) throw DocError(C::UnknownRule, "unknown rule '" + c.rule + "' in system " + doc.system_id);
        NodeLocation loc = must_locate(doc, c.node);
        NodeId next = doc.next_id;
        DerivationDoc out = update(doc, loc, [&](const DerivNode& n) {
            auto kids = n.children;
            while (kids.size() < rule->arity()) {
                fresh.insert(next);
                kids.push_back(make_node(next++, Judgment::hole(), RuleRef::hole()));
            }
            return make_node(n.id, n.judgment, RuleRef::rule(c.rule), std::move(kids));
        });
        out.next_id = next;
        touched.insert(c.node);
        return out;
    }

    DerivationDoc operator()(const cmd::ClearRule& c) {
        NodeLocation loc = must_locate(doc, c.node);
        touched.insert(c.node);
        return update(doc, loc, [&](const DerivNode& n) { return make_node(n.id, n.judgment, RuleRef::hole(), n.children); });
    }

    DerivationDoc operator()(const cmd::AddPremise& c) {
        NodeLocation loc = must_locate(doc, c.node);
        if (loc.node->applied.kind == RuleRef::Kind::Subtree)
            throw DocError(C::SubtreeRefHasChildren, "a subtree reference cannot have premises");
        std::size_t pos = c.position.value_or(loc.node->children.size());
        if (pos > loc.node->children.size())
            throw DocError(C::BadPath, "premise position " + std::to_string(pos) + " is past the end");
        NodeId id = doc.next_id;
        DerivationDoc out = update(doc, loc, [&](const DerivNode& n) {
            auto kids = n.children;
            kids.insert(kids.begin() + static_cast<std::ptrdiff_t>(pos), make_node(id, Judgment::hole(), RuleRef::hole()));
            return make_node(n.id, n.judgment, n.applied, std::move(kids));
        });
        out.next_id = id + 1;
        fresh.insert(id);
        touched.insert(c.node);
        return out;
    }

    DerivationDoc operator()(const cmd::RemovePremise& c) {
        NodeLocation loc = must_locate(doc, c.node);
        if (c.position >= loc.node->children.size())
            throw DocError(C::BadPath, "node has no premise " + std::to_string(c.position));
        touched.insert(c.node);
        return update(doc, loc, [&](const DerivNode& n) {
            auto kids = n.children;
            kids.erase(kids.begin() + static_cast<std::ptrdiff_t>(c.position));
            return make_node(n.id, n.judgment, n.applied, std::move(kids));
        });
    }

    DerivationDoc operator()(const cmd::EditJudgment& c) {
        NodeLocation loc = must_locate(doc, c.node);
        if (c.path.empty()) throw DocError(C::BadPath, "EditJudgment needs a path into the judgment");
        Judgment j = replace_checked(materialize(doc, loc.node->judgment), c.path, c.term);
        touched.insert(c.node);
        return update(doc, loc, [&](const DerivNode& n) { return with_judgment(n, j); });
    }

    DerivationDoc operator()(const cmd::SetJudgment& c) {
        NodeLocation loc = must_locate(doc, c.node);
        touched.insert(c.node);
        return update(doc, loc, [&](const DerivNode& n) { return with_judgment(n, c.judgment); });
    }

    DerivationDoc operator()(const cmd::FillHole& c) {
        NodeLocation loc = must_locate(doc, c.node);
        if (c.path.empty()) throw DocError(C::BadPath, "FillHole needs a path into the judgment");
        Judgment base = materialize(doc, loc.node->judgment);
        if (!subterm_checked(base, c.path).is(Kind::Hole))
            throw DocError(C::BadPath, "there is no hole at " + path_to_string(c.path));
        Judgment j = replace_checked(base, c.path, c.term);
        touched.insert(c.node);
        return update(doc, loc, [&](const DerivNode& n) { return with_judgment(n, j); });
    }

    DerivationDoc operator()(const cmd::MakeHole& c) {
        NodeLocation loc = must_locate(doc, c.node);
        Judgment j = Judgment::hole();
        if (!c.path.empty()) {
            if (loc.node->judgment.is_hole()) throw DocError(C::BadPath, "the judgment is already a hole");
            subterm_checked(loc.node->judgment, c.path);
            j = replace_checked(loc.node->judgment, c.path, Term::hole());
        }
        touched.insert(c.node);
        return update(doc, loc, [&](const DerivNode& n) { return with_judgment(n, j); });
    }

    DerivationDoc operator()(const cmd::DefineAbbrev& c) {
        DerivationDoc out = doc;
        Term expanded = expand_abbrevs(doc, c.term);
        out.prelude.push_back({c.name, c.term, expanded});
        return out;
    }

    DerivationDoc operator()(const cmd::DefineSubtree& c) {
        DerivationDoc out = doc;
        NodeId next = doc.next_id;
        NodePtr tree;
        if (c.from) {
            NodeLocation loc = must_locate(doc, *c.from);
            NodePtr src = loc.subtree ? doc.subtrees[*loc.subtree].tree : doc.root;
            for (auto i : loc.route) src = src->children[i];
            tree = clone_tree(src, next);
        } else {
            tree = make_node(next++, Judgment::hole(), RuleRef::hole());
        }
        for_each_node(tree, [&](const DerivNode& n) { fresh.insert(n.id); });
        out.subtrees.push_back({c.name, tree});
        out.next_id = next;
        return out;
    }

    DerivationDoc operator()(const cmd::InsertSubtreeRef& c) {
        NodeLocation loc = must_locate(doc, c.node);
        auto idx = subtree_index(doc, c.subtree);
        if (!idx) throw DocError(C::UnknownSubtree, "no subtree named " + c.subtree);
        if (loc.subtree && *idx >= *loc.subtree)
            throw DocError(C::ForwardSubtreeRef, "subtree " + doc.subtrees[*loc.subtree].name +
                                                     " may only use subtrees defined before it");
        touched.insert(c.node);
        return update(doc, loc, [&](const DerivNode& n) {
            return make_node(n.id, n.judgment, RuleRef::subtree(c.subtree), {});
        });
    }

    DerivationDoc operator()(const cmd::SetFeedback& c) {
        DerivationDoc out = doc;
        out.feedback = c.feedback;
        return out;
    }

    DerivationDoc operator()(const cmd::RemoveAbbrev& c) {
        auto it = std::find_if(doc.prelude.begin(), doc.prelude.end(), [&](const AbbrevDef& d) { return d.name == c.name; });
        if (it == doc.prelude.end()) throw DocError(C::UnboundAbbrev, "no abbreviation named $" + c.name);
        for (const auto& d : doc.prelude)
            if (mentions_abbrev(d.term, c.name))
                throw DocError(C::UnboundAbbrev, "$" + c.name + " is still used by $" + d.name);
        bool used = false;
        for_each_node(doc, [&](const DerivNode& n) { used = used || mentions_abbrev(n.judgment, c.name); });
        if (used) throw DocError(C::UnboundAbbrev, "$" + c.name + " is still used in the derivation");
        DerivationDoc out = doc;
        out.prelude.erase(out.prelude.begin() + (it - doc.prelude.begin()));
        return out;
    }

    DerivationDoc operator()(const cmd::RemoveSubtree& c) {
        auto idx = subtree_index(doc, c.name);
        if (!idx) throw DocError(C::UnknownSubtree, "no subtree named " + c.name);
        std::vector<NodeId> refs;
        for (const auto& s : doc.subtrees) collect_refs_to(s.tree, c.name, refs);
        collect_refs_to(doc.root, c.name, refs);
        if (!refs.empty()) throw DocError(C::UnknownSubtree, "subtree " + c.name + " is still referenced");
        DerivationDoc out = doc;
        out.subtrees.erase(out.subtrees.begin() + static_cast<std::ptrdiff_t>(*idx));
        return out;
    }
};

}  // namespace

EditResult edit_document(const DerivationDoc& doc, const EditCommand& c) {
    Editor ed{doc, {}, {}};
    DerivationDoc out = std::visit(ed, c);
    validate(out);
    EditResult r{std::move(out), {}};
    for (NodeId id : ed.touched) add_with_dependents(r.doc, id, r.affected);
    for (NodeId id : ed.fresh) add_with_dependents(r.doc, id, r.affected);
    return r;
}

std::set<NodeId> affected_nodes(const DerivationDoc& doc, const EditCommand& c) { return edit_document(doc, c).affected; }

EditOutcome apply_edit(const DerivationDoc& doc, const EditCommand& c, const VerificationReport& current) {
    EditResult r = edit_document(doc, c);
    EditOutcome out{std::move(r.doc), {}, {}, {}};
    out.report = reverify(out.doc, current, r.affected);
    for (NodeId id : r.affected)
        if (auto it = out.report.nodes.find(id); it != out.report.nodes.end()) out.delta.emplace(id, it->second);
    for (const auto& [id, st] : current.nodes)
        if (!out.report.nodes.count(id)) out.removed.push_back(id);
    return out;
}

EditOutcome apply_edit(const DerivationDoc& doc, const EditCommand& c) { return apply_edit(doc, c, verify_document(doc)); }

// ---------------------------------------------------------------------------
// Inverses

namespace {

class InverseBuilder {
public:
    explicit InverseBuilder(DerivationDoc work) : work_(std::move(work)) {}

    void emit(EditCommand c) {
        work_ = edit_document(work_, c).doc;
        out_.push_back(std::move(c));
    }

    const DerivationDoc& work() const { return work_; }

    std::size_t child_count(NodeId id) const { return must_locate(work_, id).node->children.size(); }

    void trim_children(NodeId id, std::size_t keep) {
        for (std::size_t n = child_count(id); n > keep; --n) emit(cmd::RemovePremise{id, n - 1});
    }

    // Makes node `id` of the working document look like `old`.
    void restore(NodeId id, const DerivNode& old) {
        const DerivNode* cur = must_locate(work_, id).node;
        if (cur->judgment != old.judgment) emit(cmd::SetJudgment{id, old.judgment});
        cur = must_locate(work_, id).node;
        if (cur->applied == old.applied && cur->children.size() == old.children.size() &&
            std::equal(cur->children.begin(), cur->children.end(), old.children.begin(),
                       [](const NodePtr& a, const NodePtr& b) { return same_shape(*a, *b); }))
            return;
        trim_children(id, 0);
        switch (old.applied.kind) {
        case RuleRef::Kind::Hole: emit(cmd::ClearRule{id}); break;
        case RuleRef::Kind::Subtree: emit(cmd::InsertSubtreeRef{id, old.applied.name}); break;
        case RuleRef::Kind::Rule:
            emit(cmd::SetRule{id, old.applied.name});
            trim_children(id, 0);
            break;
        }
        for (std::size_t i = 0; i < old.children.size(); ++i) {
            NodeId fresh = work_.next_id;
            emit(cmd::AddPremise{id, i});
            restore(fresh, *old.children[i]);
        }
    }

    std::vector<EditCommand> take() { return std::move(out_); }

private:
    DerivationDoc work_;
    std::vector<EditCommand> out_;
};

std::optional<NodeId> target_node(const EditCommand& c) {
    return std::visit(overloaded{
                          [](const cmd::DefineAbbrev&) -> std::optional<NodeId> { return std::nullopt; },
                          [](const cmd::DefineSubtree&) -> std::optional<NodeId> { return std::nullopt; },
                          [](const cmd::SetFeedback&) -> std::optional<NodeId> { return std::nullopt; },
                          [](const cmd::RemoveAbbrev&) -> std::optional<NodeId> { return std::nullopt; },
                          [](const cmd::RemoveSubtree&) -> std::optional<NodeId> { return std::nullopt; },
                          [](const auto& x) -> std::optional<NodeId> { return x.node; },
                      },
                      c);
}

}  // namespace

std::vector<EditCommand> inverse_commands(const DerivationDoc& doc, const EditCommand& c) {
    DerivationDoc after = edit_document(doc, c).doc;
    InverseBuilder b(after);
    if (auto* x = std::get_if<cmd::DefineAbbrev>(&c)) {
        b.emit(cmd::RemoveAbbrev{x->name});
    } else if (auto* x = std::get_if<cmd::DefineSubtree>(&c)) {
        b.emit(cmd::RemoveSubtree{x->name});
    } else if (std::holds_alternative<cmd::SetFeedback>(c)) {
        b.emit(cmd::SetFeedback{doc.feedback});
    } else if (auto* x = std::get_if<cmd::RemoveAbbrev>(&c)) {
        auto it = std::find_if(doc.prelude.begin(), doc.prelude.end(), [&](const AbbrevDef& d) { return d.name == x->name; });
        if (it + 1 != doc.prelude.end())
            throw DocError(C::UnboundAbbrev, "only the last abbreviation can be restored by commands");
        b.emit(cmd::DefineAbbrev{it->name, it->term});
    } else if (auto* x = std::get_if<cmd::RemoveSubtree>(&c)) {
        auto idx = *subtree_index(doc, x->name);
        if (idx + 1 != doc.subtrees.size())
            throw DocError(C::UnknownSubtree, "only the last subtree can be restored by commands");
        b.emit(cmd::DefineSubtree{x->name, std::nullopt});
        b.restore(b.work().subtrees.back().tree->id, *doc.subtrees[idx].tree);
    } else if (auto* x = std::get_if<cmd::RemovePremise>(&c)) {
        NodeId fresh = b.work().next_id;
        b.emit(cmd::AddPremise{x->node, x->position});
        b.restore(fresh, *must_locate(doc, x->node).node->children[x->position]);
    } else if (auto* x = std::get_if<cmd::AddPremise>(&c)) {
        std::size_t pos = x->position.value_or(must_locate(doc, x->node).node->children.size());
        b.emit(cmd::RemovePremise{x->node, pos});
    } else {
        NodeId id = *target_node(c);
        b.restore(id, *must_locate(doc, id).node);
    }
    return b.take();
}

}  // namespace deriver
