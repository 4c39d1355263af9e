#include <doctest.h>

#include "deriver/docfile.hpp"
#include "deriver/edit.hpp"
#include "deriver/verifier.hpp"
#include "oracles.hpp"

using namespace deriver;

namespace {

ParsedDocument parse(const std::string& text) { return parse_document(text); }

const NodeStatus& status_at(const DerivationDoc& d, const VerificationReport& r, const std::string& path) {
    return r.nodes.at(*node_by_path(d, path));
}

}  // namespace

TEST_SUITE("verifier") {

TEST_CASE("axiom node is correct") {
    auto p = parse("system alfa-eval\nderive:\n  3 evalto 3  by E-Num\n");
    auto r = verify_document(p.doc);
    CHECK(r.tree_status == TreeStatus::CompleteCorrect);
    CHECK(status_at(p.doc, r, "root").correct());
    CHECK(status_at(p.doc, r, "root").bindings.at("n") == Term::num(3));
}

TEST_CASE("E-Plus golden derivation is complete") {
    auto p = parse("system alfa-eval\nderive:\n  1 + 2 evalto 3  by E-Plus\n    1 evalto 1  by E-Num\n    2 evalto 2  by E-Num\n");
    auto r = verify_document(p.doc);
    CHECK(r.tree_status == TreeStatus::CompleteCorrect);
    CHECK(r.nodes.size() == 3);
}

TEST_CASE("wrong sum is a side-condition error") {
    auto p = parse("system alfa-eval\nderive:\n  1 + 2 evalto 4  by E-Plus\n    1 evalto 1  by E-Num\n    2 evalto 2  by E-Num\n");
    auto r = verify_document(p.doc);
    CHECK(r.tree_status == TreeStatus::HasErrors);
    const auto& st = status_at(p.doc, r, "root");
    REQUIRE(st.incorrect());
    REQUIRE(st.errors.size() == 1);
    CHECK(st.errors[0].locus == Locus::side_condition(0));
    CHECK(st.errors[0].message == "Expected 3 (= 1 + 2), but found 4.");
    CHECK(st.errors[0].path == Path{1});
    CHECK(status_at(p.doc, r, "root.0").correct());
}

TEST_CASE("E-App over a let-expression names both constructors") {
    auto p = parse(
        "system alfa-eval\nderive:\n"
        "  (let x = 1 in x) 2 evalto ?  by E-App\n"
        "    let x = 1 in x evalto let x = 1 in x  by E-Let\n"
        "    2 evalto 2  by E-Num\n"
        "    ? by ?\n");
    auto r = verify_document(p.doc);
    const auto& st = status_at(p.doc, r, "root");
    REQUIRE(st.incorrect());
    bool found = false;
    for (const auto& e : st.errors)
        if (e.message.find("Expected a function term, but found a let-expression.") != std::string::npos) {
            found = true;
            CHECK(e.locus == Locus::premise(0));
            CHECK(e.path == Path{1});
            CHECK(e.metavar == std::nullopt);
            CHECK(e.schema_path == Path{1});
        }
    CHECK(found);
}

TEST_CASE("typing derivation of an application") {
    auto p = parse(
        "system alfa-typing\nderive:\n"
        "  [] |- (fun x:Num -> x + 1) 2 : Num  by T-App\n"
        "    [] |- fun x:Num -> x + 1 : Num -> Num  by T-Lam\n"
        "      [x:Num] |- x + 1 : Num  by T-Plus\n"
        "        [x:Num] |- x : Num  by T-Var\n"
        "        [x:Num] |- 1 : Num  by T-Num\n"
        "    [] |- 2 : Num  by T-Num\n");
    auto r = verify_document(p.doc);
    CHECK(r.tree_status == TreeStatus::CompleteCorrect);
    CHECK(r.nodes.size() == 6);

    NodeId next = 0;
    auto e = parse_term(Sort::Expr, "(fun x:Num -> x + 1) 2");
    auto oracle_tree = oracle::typing_derivation(e, next);
    REQUIRE(oracle_tree);
    CHECK(same_shape(**oracle_tree, *p.doc.root));
}

TEST_CASE("changing the lambda annotation breaks only nearby nodes") {
    auto good = parse(
        "system alfa-typing\nderive:\n"
        "  [] |- (fun x:Num -> x + 1) 2 : Num  by T-App\n"
        "    [] |- fun x:Bool -> x + 1 : Num -> Num  by T-Lam\n"
        "      [x:Num] |- x + 1 : Num  by T-Plus\n"
        "        [x:Num] |- x : Num  by T-Var\n"
        "        [x:Num] |- 1 : Num  by T-Num\n"
        "    [] |- 2 : Num  by T-Num\n");
    auto r = verify_document(good.doc);
    CHECK(r.tree_status == TreeStatus::HasErrors);
    CHECK(status_at(good.doc, r, "root").incorrect());
    CHECK(status_at(good.doc, r, "root.0").incorrect());
    CHECK(status_at(good.doc, r, "root.0.0").correct());
    CHECK(status_at(good.doc, r, "root.1").correct());
}

TEST_CASE("fresh documents are incomplete") {
    for (auto sys : {"alfa-eval", "alfa-typing", "prop-nd"}) {
        auto r = verify_document(new_document(sys));
        CHECK(r.tree_status == TreeStatus::Incomplete);
        REQUIRE(r.nodes.size() == 1);
        CHECK(r.nodes.begin()->second.indeterminate());
        CHECK(!r.nodes.begin()->second.obligations.empty());
    }
}

TEST_CASE("fabricated rule name is an error") {
    auto p = parse("system alfa-eval\nderive:\n  3 evalto 3  by E-Bogus\n");
    auto r = verify_document(p.doc);
    CHECK(r.tree_status == TreeStatus::HasErrors);
    CHECK(status_at(p.doc, r, "root").errors.at(0).code == "UnknownRule");
    CHECK(status_at(p.doc, r, "root").errors.at(0).locus == Locus::rule_application());
}

TEST_CASE("arity mismatch") {
    auto p = parse("system alfa-eval\nderive:\n  1 + 2 evalto 3  by E-Plus\n    1 evalto 1  by E-Num\n");
    auto r = verify_document(p.doc);
    const auto& st = status_at(p.doc, r, "root");
    REQUIRE(st.incorrect());
    CHECK(st.errors.at(0).message == "rule E-Plus expects 2 premises, found 1");
}

TEST_CASE("mismatches are all collected") {
    auto p = parse(
        "system alfa-typing\nderive:\n"
        "  [] |- 1 + true : Num  by T-Plus\n"
        "    [] |- 2 : Num  by T-Num\n"
        "    [] |- false : Num  by T-Num\n");
    auto r = verify_document(p.doc);
    const auto& st = status_at(p.doc, r, "root");
    REQUIRE(st.incorrect());
    CHECK(st.errors.size() >= 2);
}

TEST_CASE("holes make a node indeterminate") {
    auto p = parse("system alfa-eval\nderive:\n  1 + ? evalto 3  by E-Plus\n    1 evalto 1  by E-Num\n    ? by ?\n");
    auto r = verify_document(p.doc);
    CHECK(r.tree_status == TreeStatus::Incomplete);
    const auto& st = status_at(p.doc, r, "root");
    REQUIRE(st.indeterminate());
    for (const auto& o : st.obligations)
        for (const auto& h : o.holes) {
            const Judgment& j = o.locus.kind == Locus::Kind::Premise
                                    ? find_node(p.doc, *node_by_path(p.doc, "root." + std::to_string(o.locus.index)))->judgment
                                    : p.doc.root->judgment;
            if (!j.is_hole() && !h.empty()) CHECK(subterm_at(j, h).has_holes());
        }
}

TEST_CASE("a definite mismatch wins over holes") {
    auto p = parse("system alfa-eval\nderive:\n  1 + ? evalto 3  by E-Plus\n    2 evalto 2  by E-Num\n    ? by ?\n");
    auto r = verify_document(p.doc);
    CHECK(status_at(p.doc, r, "root").incorrect());
}

TEST_CASE("subtree references fold in subtree health") {
    std::string base =
        "system alfa-eval\n"
        "subtree S1:\n"
        "  1 + 2 evalto 3  by E-Plus\n"
        "    1 evalto 1  by E-Num\n"
        "    2 evalto 2  by E-Num\n"
        "derive:\n";
    auto ok = parse(base + "  1 + 2 evalto 3  by use S1\n");
    auto r = verify_document(ok.doc);
    CHECK(r.tree_status == TreeStatus::CompleteCorrect);
    CHECK(r.subtrees.at("S1") == TreeStatus::CompleteCorrect);

    auto wrong = parse(base + "  1 + 2 evalto 4  by use S1\n");
    auto r2 = verify_document(wrong.doc);
    CHECK(status_at(wrong.doc, r2, "root").incorrect());

    auto open = parse(base + "  1 + 2 evalto ?  by use S1\n");
    CHECK(status_at(open.doc, verify_document(open.doc), "root").indeterminate());

    auto broken = parse(
        "system alfa-eval\nsubtree S1:\n  1 evalto 2  by E-Num\nderive:\n  1 evalto 2  by use S1\n");
    auto r3 = verify_document(broken.doc);
    CHECK(status_at(broken.doc, r3, "root").incorrect());
    CHECK(r3.subtrees.at("S1") == TreeStatus::HasErrors);
}

TEST_CASE("lookup side condition in typing") {
    auto p = parse("system alfa-typing\nderive:\n  [x:Num, x:Bool] |- x : Num  by T-Var\n");
    auto r = verify_document(p.doc);
    const auto& st = status_at(p.doc, r, "root");
    REQUIRE(st.incorrect());
    CHECK(st.errors[0].locus == Locus::side_condition(0));
    CHECK(st.errors[0].path == Path{2});

    auto shadow = parse("system alfa-typing\nderive:\n  [x:Num, x:Bool] |- x : Bool  by T-Var\n");
    CHECK(verify_document(shadow.doc).tree_status == TreeStatus::CompleteCorrect);

    auto unbound = parse("system alfa-typing\nderive:\n  [y:Num] |- x : Num  by T-Var\n");
    CHECK(verify_document(unbound.doc).tree_status == TreeStatus::HasErrors);

    auto hole_right = parse("system alfa-typing\nderive:\n  [x:Num, ?] |- x : Num  by T-Var\n");
    CHECK(verify_document(hole_right.doc).tree_status == TreeStatus::Incomplete);

    auto hole_left = parse("system alfa-typing\nderive:\n  [?, x:Num] |- x : Num  by T-Var\n");
    CHECK(verify_document(hole_left.doc).tree_status == TreeStatus::Incomplete);
}

TEST_CASE("abbreviations expand for checking and keep display paths") {
    auto p = parse(
        "system alfa-typing\n"
        "def G = [x:Num, y:Bool]\n"
        "derive:\n"
        "  $G |- y : Num  by T-Var\n");
    auto r = verify_document(p.doc);
    const auto& st = status_at(p.doc, r, "root");
    REQUIRE(st.incorrect());
    for (const auto& e : st.errors) CHECK_NOTHROW(subterm_at(p.doc.root->judgment, e.path));

    auto ok = parse("system alfa-typing\ndef G = [x:Num]\nderive:\n  [$G, y:Bool] |- x : Num  by T-Var\n");
    CHECK(verify_document(ok.doc).tree_status == TreeStatus::CompleteCorrect);
}

TEST_CASE("conflicting binding reports the origin too") {
    auto p = parse(
        "system alfa-eval\nderive:\n"
        "  let x = 1 in x evalto 2  by E-Let\n"
        "    1 evalto 1  by E-Num\n"
        "    1 evalto 1  by E-Num\n");
    auto r = verify_document(p.doc);
    const auto& st = status_at(p.doc, r, "root");
    REQUIRE(st.incorrect());
    bool at_conclusion = false;
    for (const auto& e : st.errors) at_conclusion = at_conclusion || e.locus == Locus::conclusion();
    CHECK(at_conclusion);
}

TEST_CASE("E-App full derivation") {
    auto p = parse(
        "system alfa-eval\nderive:\n"
        "  (fun x:Num -> x + 1) 2 evalto 3  by E-App\n"
        "    fun x:Num -> x + 1 evalto fun x:Num -> x + 1  by E-Fun\n"
        "    2 evalto 2  by E-Num\n"
        "    2 + 1 evalto 3  by E-Plus\n"
        "      2 evalto 2  by E-Num\n"
        "      1 evalto 1  by E-Num\n");
    CHECK(verify_document(p.doc).tree_status == TreeStatus::CompleteCorrect);
}

TEST_CASE("status is local to the node") {
    auto p = parse(
        "system alfa-eval\nderive:\n"
        "  1 + 2 evalto 3  by E-Plus\n"
        "    1 evalto 1  by E-Bogus\n"
        "    2 evalto 2  by E-Num\n");
    auto r = verify_document(p.doc);
    CHECK(status_at(p.doc, r, "root").correct());
    CHECK(status_at(p.doc, r, "root.0").incorrect());
    CHECK(r.tree_status == TreeStatus::HasErrors);
}

}  // TEST_SUITE
