#include "deriver/document.hpp"

#include <set>
#include <sstream>

#include "deriver/syntax.hpp"

namespace deriver {

NodePtr make_node(NodeId id, Judgment j, RuleRef applied, std::vector<NodePtr> children) {
    auto n = std::make_shared<DerivNode>();
    n->id = id;
    n->judgment = std::move(j);
    n->applied = std::move(applied);
    n->children = std::move(children);
    return n;
}

const RuleSystem& DerivationDoc::system() const {
    const RuleSystem* s = find_system(system_id);
    if (!s) throw DocError(DocError::Code::UnknownSystem, "unknown rule system '" + system_id + "'");
    return *s;
}

const char* error_code_name(DocError::Code c) {
    using C = DocError::Code;
    switch (c) {
    case C::UnknownSystem: return "UnknownSystem";
    case C::UnknownNode: return "UnknownNode";
    case C::BadPath: return "BadPath";
    case C::UnknownRule: return "UnknownRule";
    case C::UnknownSubtree: return "UnknownSubtree";
    case C::ForwardSubtreeRef: return "ForwardSubtreeRef";
    case C::DuplicateName: return "DuplicateName";
    case C::SortMismatch: return "SortMismatch";
    case C::UnboundAbbrev: return "UnboundAbbrev";
    case C::InvalidName: return "InvalidName";
    case C::SubtreeRefHasChildren: return "SubtreeRefHasChildren";
    case C::DuplicateNodeId: return "DuplicateNodeId";
    }
    return "DocError";
}

DerivationDoc new_document(const std::string& system_id) {
    if (!find_system(system_id))
        throw DocError(DocError::Code::UnknownSystem, "unknown rule system '" + system_id + "'");
    DerivationDoc d;
    d.system_id = system_id;
    d.root = make_node(0, Judgment::hole(), RuleRef::hole());
    d.next_id = 1;
    return d;
}

namespace {

const AbbrevDef* find_abbrev(const std::vector<AbbrevDef>& prelude, std::size_t limit, const std::string& name) {
    for (std::size_t i = 0; i < limit && i < prelude.size(); ++i)
        if (prelude[i].name == name) return &prelude[i];
    return nullptr;
}

// Expansion against the first `limit` definitions.
Term expand_with(const std::vector<AbbrevDef>& prelude, std::size_t limit, const Term& t) {
    if (!t.has_abbrevs()) return t;
    if (t.is(Kind::Abbrev)) {
        const AbbrevDef* d = find_abbrev(prelude, limit, t.name());
        if (!d) throw DocError(DocError::Code::UnboundAbbrev, "undefined abbreviation $" + t.name());
        return d->expanded;
    }
    std::vector<Term> kids;
    for (const auto& c : t.children()) {
        if (t.is(Kind::Ctx) && c.is(Kind::Abbrev)) {
            Term e = expand_with(prelude, limit, c);
            if (e.is(Kind::Ctx)) {
                for (const auto& x : e.children()) kids.push_back(x);
                continue;
            }
            kids.push_back(e);
            continue;
        }
        kids.push_back(expand_with(prelude, limit, c));
    }
    return t.with_children(std::move(kids));
}

std::size_t splice_width(const DerivationDoc& doc, const Term& entry) {
    if (!entry.is(Kind::Abbrev)) return 1;
    const AbbrevDef* d = find_abbrev(doc.prelude, doc.prelude.size(), entry.name());
    if (d && d->expanded.is(Kind::Ctx)) return d->expanded.arity();
    return 1;
}

bool spliced(const DerivationDoc& doc, const Term& entry) {
    if (!entry.is(Kind::Abbrev)) return false;
    const AbbrevDef* d = find_abbrev(doc.prelude, doc.prelude.size(), entry.name());
    return d && d->expanded.is(Kind::Ctx);
}

bool locate_in(const NodePtr& n, NodeId id, std::vector<std::size_t>& route, std::optional<NodeId> parent,
               NodeLocation& out) {
    if (n->id == id) {
        out.route = route;
        out.parent = parent;
        out.node = n.get();
        return true;
    }
    for (std::size_t i = 0; i < n->children.size(); ++i) {
        route.push_back(i);
        if (locate_in(n->children[i], id, route, n->id, out)) return true;
        route.pop_back();
    }
    return false;
}

void collect_refs(const NodePtr& n, std::vector<const DerivNode*>& out) {
    if (n->applied.kind == RuleRef::Kind::Subtree) out.push_back(n.get());
    for (const auto& c : n->children) collect_refs(c, out);
}

void collect_abbrevs(const Term& t, std::vector<std::string>& out) {
    if (!t.has_abbrevs()) return;
    if (t.is(Kind::Abbrev)) out.push_back(t.name());
    for (const auto& c : t.children()) collect_abbrevs(c, out);
}

}  // namespace

Term expand_abbrevs(const DerivationDoc& doc, const Term& t) { return expand_with(doc.prelude, doc.prelude.size(), t); }

Judgment expand_abbrevs(const DerivationDoc& doc, const Judgment& j) {
    if (!j.has_abbrevs()) return j;
    std::vector<Term> slots;
    for (const auto& s : j.slots()) slots.push_back(expand_abbrevs(doc, s));
    return Judgment::make(j.kind(), std::move(slots));
}

Path display_path(const DerivationDoc& doc, const Judgment& shown, const Path& p) {
    Path out;
    if (shown.is_hole() || p.empty() || p[0] >= shown.slot_count()) return out;
    out.push_back(p[0]);
    Term cur = shown.slot(p[0]);
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (cur.is(Kind::Abbrev)) return out;
        std::size_t idx = p[i];
        if (cur.is(Kind::Ctx)) {
            std::size_t start = 0;
            bool found = false;
            for (std::size_t k = 0; k < cur.arity(); ++k) {
                std::size_t w = splice_width(doc, cur.child(k));
                if (idx < start + w) {
                    if (spliced(doc, cur.child(k))) {
                        out.push_back(k);
                        return out;
                    }
                    idx = k;
                    found = true;
                    break;
                }
                start += w;
            }
            if (!found) return out;
        }
        if (idx >= cur.arity()) return out;
        out.push_back(idx);
        cur = cur.child(idx);
    }
    return out;
}

std::optional<std::size_t> subtree_index(const DerivationDoc& doc, const std::string& name) {
    for (std::size_t i = 0; i < doc.subtrees.size(); ++i)
        if (doc.subtrees[i].name == name) return i;
    return std::nullopt;
}

const SubtreeDef& resolve_subtree(const DerivationDoc& doc, const std::string& name) {
    auto i = subtree_index(doc, name);
    if (!i) throw DocError(DocError::Code::UnknownSubtree, "no subtree named " + name);
    return doc.subtrees[*i];
}

std::optional<NodeLocation> locate(const DerivationDoc& doc, NodeId id) {
    NodeLocation loc;
    std::vector<std::size_t> route;
    for (std::size_t i = 0; i < doc.subtrees.size(); ++i) {
        route.clear();
        if (locate_in(doc.subtrees[i].tree, id, route, std::nullopt, loc)) {
            loc.subtree = i;
            return loc;
        }
    }
    route.clear();
    if (doc.root && locate_in(doc.root, id, route, std::nullopt, loc)) return loc;
    return std::nullopt;
}

const DerivNode* find_node(const DerivationDoc& doc, NodeId id) {
    auto loc = locate(doc, id);
    return loc ? loc->node : nullptr;
}

std::string node_path(const DerivationDoc& doc, const NodeLocation& loc) {
    std::string out = loc.subtree ? doc.subtrees[*loc.subtree].name : "root";
    for (auto i : loc.route) out += "." + std::to_string(i);
    return out;
}

std::string node_path(const DerivationDoc& doc, NodeId id) {
    auto loc = locate(doc, id);
    if (!loc) throw DocError(DocError::Code::UnknownNode, "no node with id " + std::to_string(id));
    return node_path(doc, *loc);
}

std::optional<NodeId> node_by_path(const DerivationDoc& doc, const std::string& path) {
    std::vector<std::string> parts;
    std::stringstream ss(path);
    for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);
    if (parts.empty()) return std::nullopt;
    const DerivNode* n = nullptr;
    if (parts[0] == "root") {
        n = doc.root.get();
    } else if (auto i = subtree_index(doc, parts[0])) {
        n = doc.subtrees[*i].tree.get();
    } else {
        return std::nullopt;
    }
    for (std::size_t k = 1; k < parts.size(); ++k) {
        const auto& s = parts[k];
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos || s.size() > 9) return std::nullopt;
        std::size_t i = std::stoul(s);
        if (i >= n->children.size()) return std::nullopt;
        n = n->children[i].get();
    }
    return n->id;
}

void for_each_node(const NodePtr& tree, const std::function<void(const DerivNode&)>& f) {
    f(*tree);
    for (const auto& c : tree->children) for_each_node(c, f);
}

void for_each_node(const DerivationDoc& doc, const std::function<void(const DerivNode&)>& f) {
    for (const auto& s : doc.subtrees) for_each_node(s.tree, f);
    for_each_node(doc.root, f);
}

std::size_t node_count(const DerivationDoc& doc) {
    std::size_t n = 0;
    for_each_node(doc, [&](const DerivNode&) { ++n; });
    return n;
}

namespace {

void check_judgment(const DerivationDoc& doc, const Judgment& j, JudgmentKind want, const std::string& where) {
    if (j.is_hole()) return;
    if (j.kind() != want)
        throw DocError(DocError::Code::SortMismatch, where + ": expected a " + judgment_kind_name(want) +
                                                         " judgment, found a " + judgment_kind_name(j.kind()) +
                                                         " judgment");
    auto sorts = slot_sorts(j.kind());
    Judgment e = expand_abbrevs(doc, j);
    for (std::size_t i = 0; i < j.slot_count(); ++i) {
        if (j.slot(i).has_metas() || e.slot(i).has_metas())
            throw DocError(DocError::Code::SortMismatch, where + ": rule metavariables cannot appear in a derivation");
        for (const Term* t : {&j.slot(i), &e.slot(i)})
            if (auto v = sort_violation(*t, sorts[i])) throw DocError(DocError::Code::SortMismatch, where + ": " + *v);
    }
}

}  // namespace

void check_judgment(const DerivationDoc& doc, const Judgment& j) {
    check_judgment(doc, j, doc.system().judgment_kind(), "judgment");
}

void validate(const DerivationDoc& doc) {
    using C = DocError::Code;
    const RuleSystem& sys = doc.system();

    for (std::size_t i = 0; i < doc.prelude.size(); ++i) {
        const auto& d = doc.prelude[i];
        if (!is_identifier(d.name) || is_keyword(d.name))
            throw DocError(C::InvalidName, "'" + d.name + "' is not a valid abbreviation name");
        if (find_abbrev(doc.prelude, i, d.name)) throw DocError(C::DuplicateName, "$" + d.name + " is defined twice");
        if (d.term.has_metas()) throw DocError(C::SortMismatch, "$" + d.name + " mentions a rule metavariable");
        std::vector<std::string> used;
        collect_abbrevs(d.term, used);
        for (const auto& u : used)
            if (!find_abbrev(doc.prelude, i, u))
                throw DocError(C::UnboundAbbrev, "$" + d.name + " refers to $" + u + ", which is not defined before it");
        if (expand_with(doc.prelude, i, d.term) != d.expanded)
            throw DocError(C::UnboundAbbrev, "$" + d.name + " has a stale expansion");
    }

    for (std::size_t i = 0; i < doc.subtrees.size(); ++i) {
        const auto& s = doc.subtrees[i];
        if (!is_identifier(s.name) || is_keyword(s.name) || s.name == "root")
            throw DocError(C::InvalidName, "'" + s.name + "' is not a valid subtree name");
        for (std::size_t k = 0; k < i; ++k)
            if (doc.subtrees[k].name == s.name) throw DocError(C::DuplicateName, "subtree " + s.name + " is defined twice");
    }

    std::set<NodeId> ids;
    auto check_tree = [&](const NodePtr& tree, std::size_t visible, const std::string& label) {
        std::vector<const DerivNode*> refs;
        collect_refs(tree, refs);
        for (const DerivNode* r : refs) {
            auto idx = subtree_index(doc, r->applied.name);
            if (!idx) throw DocError(C::UnknownSubtree, label + " uses undefined subtree " + r->applied.name);
            if (*idx >= visible)
                throw DocError(C::ForwardSubtreeRef, label + " uses subtree " + r->applied.name + ", defined later");
        }
        for_each_node(tree, [&](const DerivNode& n) {
            if (!ids.insert(n.id).second || n.id >= doc.next_id)
                throw DocError(C::DuplicateNodeId, "node id " + std::to_string(n.id) + " is reused");
            if (n.applied.kind == RuleRef::Kind::Subtree && !n.children.empty())
                throw DocError(C::SubtreeRefHasChildren, "a subtree reference cannot have premises");
            check_judgment(doc, n.judgment, sys.judgment_kind(), label);
        });
    };
    for (std::size_t i = 0; i < doc.subtrees.size(); ++i) check_tree(doc.subtrees[i].tree, i, "subtree " + doc.subtrees[i].name);
    if (!doc.root) throw DocError(C::UnknownNode, "document has no root");
    check_tree(doc.root, doc.subtrees.size(), "derivation");
}

bool same_shape(const DerivNode& a, const DerivNode& b) {
    if (a.judgment != b.judgment || a.applied != b.applied || a.children.size() != b.children.size()) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!same_shape(*a.children[i], *b.children[i])) return false;
    return true;
}

bool same_shape(const DerivationDoc& a, const DerivationDoc& b) {
    if (a.system_id != b.system_id || a.feedback != b.feedback) return false;
    if (a.prelude.size() != b.prelude.size() || a.subtrees.size() != b.subtrees.size()) return false;
    for (std::size_t i = 0; i < a.prelude.size(); ++i)
        if (a.prelude[i].name != b.prelude[i].name || a.prelude[i].term != b.prelude[i].term) return false;
    for (std::size_t i = 0; i < a.subtrees.size(); ++i)
        if (a.subtrees[i].name != b.subtrees[i].name || !same_shape(*a.subtrees[i].tree, *b.subtrees[i].tree))
            return false;
    return same_shape(*a.root, *b.root);
}

NodePtr clone_tree(const NodePtr& tree, NodeId& next_id) {
    NodeId id = next_id++;
    std::vector<NodePtr> kids;
    for (const auto& c : tree->children) kids.push_back(clone_tree(c, next_id));
    return make_node(id, tree->judgment, tree->applied, std::move(kids));
}

}  // namespace deriver
