#include <doctest.h>

#include "deriver/docfile.hpp"
#include "deriver/edit.hpp"
#include "deriver/syntax.hpp"
#include "oracles.hpp"

using namespace deriver;

namespace {

Term E(const char* s) { return parse_term(Sort::Expr, s); }

DocError::Code edit_error(const DerivationDoc& d, const EditCommand& c) {
    try {
        edit_document(d, c);
    } catch (const DocError& e) {
        return e.code;
    }
    FAIL("edit was accepted");
    return DocError::Code::UnknownNode;
}

// Node ids in the subtree below (and including) `id`.
std::set<NodeId> below(const DerivationDoc& d, NodeId id) {
    std::set<NodeId> out;
    const DerivNode* n = find_node(d, id);
    if (!n) return out;
    std::function<void(const DerivNode&)> walk = [&](const DerivNode& m) {
        out.insert(m.id);
        for (const auto& c : m.children) walk(*c);
    };
    walk(*n);
    return out;
}

std::optional<NodeId> edited_node(const EditCommand& c) {
    return std::visit(
        [](const auto& x) -> std::optional<NodeId> {
            if constexpr (requires { x.node; }) return x.node;
            else return std::nullopt;
        },
        c);
}

}  // namespace

TEST_SUITE("document") {

TEST_CASE("new documents") {
    auto d = new_document("alfa-eval");
    CHECK(d.root->judgment.is_hole());
    CHECK(d.root->applied.is_hole());
    CHECK(d.prelude.empty());
    CHECK(d.subtrees.empty());
    CHECK(verify_document(d).tree_status == TreeStatus::Incomplete);
    CHECK(new_document("prop-nd").root->judgment.is_hole());
    try {
        new_document("bogus");
        FAIL("expected UnknownSystem");
    } catch (const DocError& e) {
        CHECK(e.code == DocError::Code::UnknownSystem);
    }
}

TEST_CASE("SetRule creates premise holes") {
    auto d = new_document("alfa-eval");
    auto o = apply_edit(d, cmd::SetRule{d.root->id, "E-Plus"});
    REQUIRE(o.doc.root->children.size() == 2);
    for (const auto& c : o.doc.root->children) CHECK(c->judgment.is_hole());
    CHECK(o.report.nodes.size() == 3);
    for (const auto& [id, st] : o.report.nodes) CHECK(st.indeterminate());
    CHECK(d.root->children.empty());  // the old value is untouched
}

TEST_CASE("building 1 + 2 by edits reaches CompleteCorrect") {
    auto d = new_document("alfa-eval");
    auto o = apply_edit(d, cmd::SetRule{d.root->id, "E-Plus"});
    o = apply_edit(o.doc, cmd::FillHole{o.doc.root->id, {0}, E("1 + 2")}, o.report);
    o = apply_edit(o.doc, cmd::FillHole{o.doc.root->id, {1}, Term::num(3)}, o.report);
    CHECK(o.report.nodes.at(o.doc.root->id).indeterminate());
    NodeId a = o.doc.root->children[0]->id;
    NodeId b = o.doc.root->children[1]->id;
    o = apply_edit(o.doc, cmd::SetJudgment{a, Judgment::eval(Term::num(1), Term::num(1))}, o.report);
    o = apply_edit(o.doc, cmd::SetRule{a, "E-Num"}, o.report);
    o = apply_edit(o.doc, cmd::SetJudgment{b, Judgment::eval(Term::num(2), Term::num(2))}, o.report);
    o = apply_edit(o.doc, cmd::SetRule{b, "E-Num"}, o.report);
    CHECK(o.report.tree_status == TreeStatus::CompleteCorrect);
    CHECK(o.report == verify_document(o.doc));

    NodeId next = 0;
    auto expected = oracle::eval_derivation(E("1 + 2"), next);
    CHECK(same_shape(*expected, *o.doc.root));
}

TEST_CASE("invalid edits are rejected whole") {
    auto d = new_document("alfa-eval");
    CHECK(edit_error(d, cmd::InsertSubtreeRef{d.root->id, "S9"}) == DocError::Code::UnknownSubtree);
    CHECK(edit_error(d, cmd::SetRule{d.root->id, "T-App"}) == DocError::Code::UnknownRule);
    CHECK(edit_error(d, cmd::ClearRule{42}) == DocError::Code::UnknownNode);
    CHECK(edit_error(d, cmd::EditJudgment{d.root->id, {0}, Term::tnum()}) == DocError::Code::SortMismatch);
    CHECK(edit_error(d, cmd::EditJudgment{d.root->id, {7}, Term::num(1)}) == DocError::Code::BadPath);
    CHECK(edit_error(d, cmd::DefineAbbrev{"A", Term::abbrev("B")}) == DocError::Code::UnboundAbbrev);
    CHECK(edit_error(d, cmd::DefineAbbrev{"fun", Term::num(1)}) == DocError::Code::InvalidName);
    CHECK(edit_error(d, cmd::RemovePremise{d.root->id, 0}) == DocError::Code::BadPath);

    auto s = edit_document(d, cmd::DefineSubtree{"S1", std::nullopt}).doc;
    CHECK(edit_error(s, cmd::DefineSubtree{"S1", std::nullopt}) == DocError::Code::DuplicateName);
    CHECK(edit_error(s, cmd::DefineSubtree{"root", std::nullopt}) == DocError::Code::InvalidName);
    auto s2 = edit_document(s, cmd::DefineSubtree{"S2", std::nullopt}).doc;
    NodeId in_s1 = s2.subtrees[0].tree->id;
    CHECK(edit_error(s2, cmd::InsertSubtreeRef{in_s1, "S2"}) == DocError::Code::ForwardSubtreeRef);
    CHECK(edit_error(s2, cmd::InsertSubtreeRef{in_s1, "S1"}) == DocError::Code::ForwardSubtreeRef);
    auto r = edit_document(s2, cmd::InsertSubtreeRef{s2.root->id, "S1"}).doc;
    CHECK(edit_error(r, cmd::RemoveSubtree{"S1"}) == DocError::Code::UnknownSubtree);
}

TEST_CASE("abbreviations expand but persist for display") {
    auto d = new_document("alfa-typing");
    d = edit_document(d, cmd::DefineAbbrev{"G", parse_term(Sort::TypeCtx, "[x:Num]")}).doc;
    auto j = Judgment::typing(Term::abbrev("G"), Term::var("x"), Term::tnum());
    CHECK(expand_abbrevs(d, j) == parse_judgment("[x:Num] |- x : Num"));
    auto plain = parse_judgment("[] |- 1 : Num");
    CHECK(expand_abbrevs(d, plain) == plain);
    d = edit_document(d, cmd::SetJudgment{d.root->id, j}).doc;
    d = edit_document(d, cmd::SetRule{d.root->id, "T-Var"}).doc;
    CHECK(d.root->judgment == j);
    CHECK(verify_document(d).tree_status == TreeStatus::CompleteCorrect);
    try {
        (void)expand_abbrevs(d, Term::abbrev("H"));
        FAIL("expected UnboundAbbrev");
    } catch (const DocError& e) {
        CHECK(e.code == DocError::Code::UnboundAbbrev);
    }
}

TEST_CASE("resolve_subtree") {
    auto d = edit_document(new_document("prop-nd"), cmd::DefineSubtree{"S1", std::nullopt}).doc;
    CHECK(resolve_subtree(d, "S1").tree == d.subtrees[0].tree);
    CHECK_THROWS_AS(resolve_subtree(d, "S2"), DocError);
}

TEST_CASE("node paths") {
    auto p = parse_document(
        "system alfa-eval\nsubtree S1:\n  1 evalto 1  by E-Num\nderive:\n  1 + 1 evalto 2  by E-Plus\n"
        "    1 evalto 1  by use S1\n    1 evalto 1  by E-Num\n");
    const auto& d = p.doc;
    CHECK(node_path(d, d.root->id) == "root");
    CHECK(node_path(d, d.root->children[1]->id) == "root.1");
    CHECK(node_path(d, d.subtrees[0].tree->id) == "S1");
    for_each_node(d, [&](const DerivNode& n) { CHECK(node_by_path(d, node_path(d, n.id)) == n.id); });
    CHECK_FALSE(node_by_path(d, "root.7"));
    CHECK_FALSE(node_by_path(d, "S9"));
}

TEST_CASE("affected nodes of a subtree edit include every referrer") {
    auto p = parse_document(
        "system alfa-eval\n"
        "subtree S1:\n"
        "  1 + 1 evalto 2  by E-Plus\n"
        "    1 evalto 1  by E-Num\n"
        "    1 evalto 1  by E-Num\n"
        "derive:\n"
        "  (1 + 1) + (1 + 1) evalto 4  by E-Plus\n"
        "    1 + 1 evalto 2  by use S1\n"
        "    1 + 1 evalto 2  by use S1\n");
    const auto& d = p.doc;
    NodeId leaf = d.subtrees[0].tree->children[0]->id;
    auto a = affected_nodes(d, cmd::SetJudgment{leaf, Judgment::eval(Term::num(1), Term::num(2))});
    std::set<NodeId> expect{leaf, d.subtrees[0].tree->id, d.root->id, d.root->children[0]->id,
                            d.root->children[1]->id};
    CHECK(a == expect);

    auto o = apply_edit(d, cmd::SetJudgment{leaf, Judgment::eval(Term::num(1), Term::num(2))}, verify_document(d));
    CHECK(o.report == verify_document(o.doc));
    CHECK(o.report.nodes.at(d.root->children[0]->id).incorrect());

    NodeId root_leaf = d.root->children[1]->id;
    CHECK(affected_nodes(d, cmd::ClearRule{root_leaf}) == std::set<NodeId>{root_leaf, d.root->id});
}

TEST_CASE("removing a premise keeps sibling ids") {
    auto p = parse_document(
        "system alfa-eval\nderive:\n  1 + 2 evalto 3  by E-Plus\n    1 evalto 1  by E-Num\n    2 evalto 2  by E-Num\n");
    NodeId keep = p.doc.root->children[1]->id;
    auto o = edit_document(p.doc, cmd::RemovePremise{p.doc.root->id, 0});
    REQUIRE(o.doc.root->children.size() == 1);
    CHECK(o.doc.root->children[0]->id == keep);
    CHECK(o.doc.root->id == p.doc.root->id);
}

TEST_CASE("generated edits keep invariants, ids, undo and incremental checking") {
    int accepted = 0, rejected = 0, undone = 0;
    for (std::uint64_t seed = 1; seed <= 150; ++seed) {
        oracle::DocGen gen(seed);
        gen.bogus_rules = seed % 3 != 0;
        DerivationDoc d = gen.document(4);
        REQUIRE_NOTHROW(validate(d));
        VerificationReport rep = verify_document(d);
        for (int step = 0; step < 8; ++step) {
            EditCommand c = gen.edit(d);
            CAPTURE(command_name(c));
            EditOutcome o;
            try {
                o = apply_edit(d, c, rep);
            } catch (const DocError&) {
                ++rejected;
                continue;
            }
            ++accepted;
            CHECK_NOTHROW(validate(o.doc));
            CHECK(o.report == verify_document(o.doc));

            // Nodes outside the edited node's subtree keep id, judgment and rule.
            std::set<NodeId> touched;
            if (auto n = edited_node(c)) touched = below(d, *n);
            if (auto* rs = std::get_if<cmd::RemoveSubtree>(&c))
                for_each_node(resolve_subtree(d, rs->name).tree, [&](const DerivNode& n) { touched.insert(n.id); });
            for_each_node(d, [&](const DerivNode& n) {
                if (touched.count(n.id)) return;
                const DerivNode* m = find_node(o.doc, n.id);
                REQUIRE(m);
                CHECK(m->judgment == n.judgment);
                CHECK(m->applied == n.applied);
            });

            std::vector<EditCommand> inv;
            try {
                inv = inverse_commands(d, c);
            } catch (const DocError&) {
                d = o.doc;
                rep = o.report;
                continue;
            }
            DerivationDoc back = o.doc;
            for (const auto& ic : inv) back = edit_document(back, ic).doc;
            CHECK(same_shape(back, d));
            ++undone;
            d = o.doc;
            rep = o.report;
        }
    }
    MESSAGE("accepted ", accepted, ", rejected ", rejected, ", undone ", undone);
    CHECK(accepted > 500);
    CHECK(undone > 300);
}

TEST_CASE("subtree references to holey subtrees are indeterminate") {
    auto p = parse_document(
        "system alfa-eval\nsubtree S1:\n  1 evalto 1  by ?\nderive:\n  1 evalto 1  by use S1\n");
    auto r = verify_document(p.doc);
    CHECK(r.nodes.at(p.doc.root->id).indeterminate());
    CHECK(r.tree_status == TreeStatus::Incomplete);
}

TEST_CASE("DefineSubtree can copy a node") {
    auto p = parse_document(
        "system alfa-eval\nderive:\n  1 + 2 evalto 3  by E-Plus\n    1 evalto 1  by E-Num\n    2 evalto 2  by E-Num\n");
    auto o = edit_document(p.doc, cmd::DefineSubtree{"S1", p.doc.root->children[0]->id});
    REQUIRE(o.doc.subtrees.size() == 1);
    CHECK(same_shape(*o.doc.subtrees[0].tree, *p.doc.root->children[0]));
    CHECK(o.doc.subtrees[0].tree->id != p.doc.root->children[0]->id);
    auto r = edit_document(o.doc, cmd::InsertSubtreeRef{o.doc.root->children[0]->id, "S1"});
    CHECK(verify_document(r.doc).tree_status == TreeStatus::CompleteCorrect);
}

}  // TEST_SUITE
