// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "deriver/docfile.hpp"
#include "deriver/edit.hpp"
#include "deriver/syntax.hpp"
#include "deriver/verifier.hpp"
#include "oracles.hpp"

using namespace deriver;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<fs::path> golden_files(const std::string& sub = "") {
    std::vector<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(fs::path(GOLDEN_DIR) / sub))
        if (e.path().extension() == ".deriv") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

// The shared corpus of closed Num terms; seed i gives term i.
std::vector<Term> corpus(std::size_t n) {
    std::vector<Term> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(oracle::TermGen(1000 + i).closed_num(5));
    return out;
}

// Rebuilds `root` with the node `target` replaced by f(node).
NodePtr rewrite(const NodePtr& root, NodeId target, const std::function<NodePtr(const DerivNode&)>& f) {
    if (root->id == target) return f(*root);
    std::vector<NodePtr> kids;
    bool changed = false;
    for (const auto& c : root->children) {
        kids.push_back(rewrite(c, target, f));
        changed = changed || kids.back() != c;
    }
    if (!changed) return root;
    return make_node(root->id, root->judgment, root->applied, std::move(kids));
}

std::map<NodeId, NodeId> parents(const NodePtr& root) {
    std::map<NodeId, NodeId> out;
    for_each_node(root, [&](const DerivNode& n) {
        for (const auto& c : n.children) out[c->id] = n.id;
    });
    return out;
}

// Every path below the slots of `j`, slots included.
std::vector<Path> all_paths(const Judgment& j) {
    std::vector<Path> out;
    std::function<void(const Term&, Path&)> walk = [&](const Term& t, Path& p) {
        out.push_back(p);
        for (std::size_t i = 0; i < t.arity(); ++i) {
            p.push_back(i);
            walk(t.child(i), p);
            p.pop_back();
        }
    };
    for (std::size_t s = 0; s < j.slot_count(); ++s) {
        Path p{s};
        walk(j.slot(s), p);
    }
    return out;
}

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

std::vector<NodeId> node_ids(const NodePtr& root) {
    std::vector<NodeId> out;
    for_each_node(root, [&](const DerivNode& n) { out.push_back(n.id); });
    return out;
}

Outcome typing_oracle() {
    auto start = std::chrono::steady_clock::now();
    int ok = 0, deep = 0;
    std::string first;
    auto terms = corpus(200);
    for (const auto& e : terms) {
        if (oracle::ast_depth(e) > 5) ++deep;
        NodeId next = 0;
        auto root = oracle::typing_derivation(e, next);
        if (!root) {
            if (first.empty()) first = "oracle rejected " + print_term(e);
            continue;
        }
        auto doc = oracle::wrap("alfa-typing", *root, next);
        if (verify_document(doc).tree_status == TreeStatus::CompleteCorrect) ++ok;
        else if (first.empty()) first = print_judgment((*root)->judgment);
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream os;
    os << ok << "/200 CompleteCorrect in " << secs << " s";
    if (deep) os << ", " << deep << " terms deeper than 5";
    if (!first.empty()) os << ", first failure: " << first;
    return {ok == 200 && deep == 0 && secs < 5.0, os.str()};
}

Outcome eval_oracle() {
    int ok = 0, caught = 0;
    std::string first;
    for (const auto& e : corpus(200)) {
        NodeId next = 0;
        Term v = Term::hole();
        auto root = oracle::eval_derivation(e, next, &v);
        auto doc = oracle::wrap("alfa-eval", root, next);
        if (verify_document(doc).tree_status == TreeStatus::CompleteCorrect) ++ok;
        else if (first.empty()) first = print_judgment(root->judgment);

        Judgment bumped = replace_at(root->judgment, {1}, Term::num(v.number() + 1));
        auto bad = rewrite(root, root->id, [&](const DerivNode& n) {
            return make_node(n.id, bumped, n.applied, n.children);
        });
        auto bad_doc = oracle::wrap("alfa-eval", bad, next);
        auto rep = verify_document(bad_doc);
        bool at_root = false;
        for (const auto& err : rep.nodes.at(root->id).errors)
            at_root = at_root || err.locus.kind == Locus::Kind::SideCondition || err.locus.kind == Locus::Kind::Conclusion;
        if (rep.tree_status == TreeStatus::HasErrors && at_root) ++caught;
        else if (first.empty()) first = "mutation missed: " + print_judgment(bumped);
    }
    std::ostringstream os;
    os << ok << "/200 CompleteCorrect, " << caught << "/200 value+1 mutations caught at the root";
    if (!first.empty()) os << ", first failure: " << first;
    return {ok == 200 && caught == 200, os.str()};
}

// One mutation of `n`: another rule name, another type, or another literal.
std::optional<NodePtr> mutate_node(const DerivNode& n, const RuleSystem& sys, bool has_parent, std::mt19937_64& rng,
                                   std::string& what) {
    std::vector<Path> types, literals;
    for (const auto& p : all_paths(n.judgment)) {
        const Term& t = subterm_at(n.judgment, p);
        if (sort_at(n.judgment, p) == Sort::Type && (t.is(Kind::TNum) || t.is(Kind::TBool) || t.is(Kind::TArrow)))
            types.push_back(p);
        if (t.is(Kind::NumLit)) literals.push_back(p);
    }
    // A literal or type that only occurs in an axiom with no parent has no
    // witness to contradict it; such nodes get a rule mutation instead.
    bool axiom_alone = n.children.empty() && !has_parent;
    int choice = std::uniform_int_distribution<int>(0, 2)(rng);
    if (axiom_alone || (choice == 1 && types.empty()) || (choice == 2 && literals.empty())) choice = 0;
    if (choice == 0) {
        std::vector<std::string> others;
        for (const auto& r : sys.rules())
            if (r.name() != n.applied.name) others.push_back(r.name());
        std::string r = pick(rng, others);
        what = "rule " + n.applied.name + " -> " + r;
        return make_node(n.id, n.judgment, RuleRef::rule(r), n.children);
    }
    const Path& p = pick(rng, choice == 1 ? types : literals);
    const Term& old = subterm_at(n.judgment, p);
    Term repl = choice == 2 ? Term::num(old.number() + 1) : old.is(Kind::TNum) ? Term::tbool() : Term::tnum();
    what = (choice == 1 ? "type " : "literal ") + print_term(old) + " -> " + print_term(repl) + " at " +
           path_to_string(p);
    return make_node(n.id, replace_at(n.judgment, p, repl), n.applied, n.children);
}

// True when the oracles still derive the (closed) root judgment `j`.
bool oracle_holds(const std::string& system, const Judgment& j) {
    NodeId next = 0;
    if (system == "alfa-eval") {
        Term v = Term::hole();
        oracle::eval_derivation(j.slot(0), next, &v);
        return v == j.slot(1);
    }
    auto d = oracle::typing_derivation(j.slot(1), next);
    return d && (*d)->judgment == j;
}

Outcome mutation_localization() {
    std::mt19937_64 rng(77);
    int cases = 0, ok = 0, benign = 0;
    std::string first;
    auto terms = corpus(200);
    for (const char* system : {"alfa-typing", "alfa-eval"}) {
        const RuleSystem& sys = *find_system(system);
        for (const auto& e : terms) {
            NodeId next = 0;
            NodePtr root = std::string(system) == "alfa-eval" ? oracle::eval_derivation(e, next)
                                                              : *oracle::typing_derivation(e, next);
            auto par = parents(root);
            NodeId target = pick(rng, node_ids(root));
            std::string what;
            NodePtr bad = rewrite(root, target, [&](const DerivNode& n) {
                return *mutate_node(n, sys, par.count(target) > 0, rng, what);
            });
            auto rep = verify_document(oracle::wrap(system, bad, next));
            bool local = true;
            for (const auto& [id, st] : rep.nodes) {
                bool near = id == target || (par.count(target) && par.at(target) == id);
                if (!near && st.incorrect()) local = false;
                for (const auto& err : st.errors)
                    if (!(err.node == target || (par.count(target) && par.at(target) == err.node))) local = false;
            }
            // A root with no parent can be turned into another true judgment,
            // e.g. by editing the branch an `if` does not take.
            if (rep.tree_status == TreeStatus::CompleteCorrect && target == root->id &&
                bad->applied == root->applied && oracle_holds(system, bad->judgment)) {
                ++benign;
                continue;
            }
            ++cases;
            if (rep.tree_status == TreeStatus::HasErrors && local) ++ok;
            else if (first.empty())
                first = std::string(system) + " " + print_judgment(root->judgment) + ": " + what +
                        (local ? " went unnoticed" : " reported far away");
        }
    }
    std::ostringstream os;
    os << ok << "/" << cases << " mutations detected and localized";
    if (benign) os << " (" << benign << " more produced a judgment the oracles confirm is still true)";
    if (!first.empty()) os << ", first failure: " << first;
    return {ok == cases, os.str()};
}

Outcome message_reproduction() {
    const std::string want = "Expected a function term, but found a let-expression.";
    auto p = parse_document(slurp(fs::path(GOLDEN_DIR) / "errors/app-of-let.deriv"));
    auto rep = verify_document(p.doc);
    for (const auto& err : rep.nodes.at(p.doc.root->id).errors)
        if (err.message.find(want) != std::string::npos) return {true, "root error: " + err.message};
    return {false, "no root error mentions the expected text"};
}

Outcome hole_monotonicity() {
    std::mt19937_64 rng(4242);
    auto terms = corpus(200);
    int cases = 0, ok = 0;
    std::string first;
    for (int i = 0; i < 1000; ++i) {
        const Term& e = terms[i % terms.size()];
        bool eval = (i / terms.size()) % 2 == 1;
        NodeId next = 0;
        NodePtr root = eval ? oracle::eval_derivation(e, next) : *oracle::typing_derivation(e, next);
        const char* system = eval ? "alfa-eval" : "alfa-typing";
        NodeId target = pick(rng, node_ids(root));
        Path hole_at;
        NodePtr holey = rewrite(root, target, [&](const DerivNode& n) {
            hole_at = pick(rng, all_paths(n.judgment));
            return make_node(n.id, replace_at(n.judgment, hole_at, Term::hole()), n.applied, n.children);
        });
        auto rep = verify_document(oracle::wrap(system, holey, next));
        bool good = rep.tree_status == TreeStatus::Incomplete;
        for (const auto& [id, st] : rep.nodes) good = good && !st.incorrect();
        ++cases;
        if (good) ++ok;
        else if (first.empty()) first = print_judgment(root->judgment) + " hole at node " + std::to_string(target) + " " + path_to_string(hole_at);
    }
    std::ostringstream os;
    os << ok << "/" << cases << " hole insertions left every node Correct or Indeterminate";
    if (!first.empty()) os << ", first failure: " << first;
    return {ok == cases, os.str()};
}

Outcome incremental_equals_batch() {
    int cases = 0, ok = 0;
    for (std::uint64_t seed = 1; cases < 500; ++seed) {
        oracle::DocGen gen(seed);
        DerivationDoc d = gen.document(5);
        VerificationReport rep = verify_document(d);
        for (int step = 0; step < 4 && cases < 500; ++step) {
            EditCommand c = gen.edit(d);
            EditOutcome o;
            try {
                o = apply_edit(d, c, rep);
            } catch (const DocError&) {
                continue;
            }
            ++cases;
            if (o.report == verify_document(o.doc)) ++ok;
            d = o.doc;
            rep = o.report;
        }
    }
    return {ok == cases, std::to_string(ok) + "/" + std::to_string(cases) + " incremental reports equal batch"};
}

Outcome round_trip() {
    int same = 0, fixed = 0;
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        DerivationDoc d = oracle::DocGen(seed).document();
        std::string text = print_document(d);
        DerivationDoc back = parse_document(text).doc;
        if (same_shape(back, d)) ++same;
        if (print_document(back) == text) ++fixed;
    }
    int idem = 0, files = 0;
    for (const auto& f : golden_files()) {
        if (f.parent_path().filename() == "parse") continue;
        ++files;
        std::string once = print_document(parse_document(slurp(f)).doc);
        if (print_document(parse_document(once).doc) == once) ++idem;
    }
    std::ostringstream os;
    os << same << "/1000 documents survive parse(print), " << fixed << "/1000 print fixed points, fmt idempotent on "
       << idem << "/" << files << " golden files";
    return {same == 1000 && fixed == 1000 && idem == files, os.str()};
}

std::vector<Term> hypotheses(const Term& ctx) {
    std::vector<Term> out;
    for (const auto& e : ctx.children()) out.push_back(e);
    return out;
}

Outcome prop_spot_suite() {
    const RuleSystem& sys = *find_system("prop-nd");
    auto files = golden_files("correct");
    std::erase_if(files, [](const fs::path& p) { return p.filename().string().rfind("prop-", 0) != 0; });
    int correct = 0, derivable = 0, corruptions = 0, caught = 0;
    std::set<std::string> roots;
    std::string first;
    for (const auto& f : files) {
        DerivationDoc d = parse_document(slurp(f)).doc;
        if (verify_document(d).tree_status == TreeStatus::CompleteCorrect) ++correct;
        else if (first.empty()) first = f.filename().string() + " is not CompleteCorrect";
        Judgment j = expand_abbrevs(d, d.root->judgment);
        roots.insert(print_judgment(j));
        if (oracle::provable(hypotheses(j.slot(0)), j.slot(1), 6)) ++derivable;
        else if (first.empty()) first = f.filename().string() + " not found by proof search";

        for (NodeId id : node_ids(d.root)) {
            const DerivNode* n = find_node(d, id);
            for (const auto& r : sys.rules()) {
                if (r.name() == n->applied.name) continue;
                DerivationDoc bad = d;
                bad.root = rewrite(d.root, id, [&](const DerivNode& m) {
                    return make_node(m.id, m.judgment, RuleRef::rule(r.name()), m.children);
                });
                ++corruptions;
                if (verify_document(bad).tree_status == TreeStatus::HasErrors) ++caught;
                else if (first.empty()) first = f.filename().string() + ": " + n->applied.name + " -> " + r.name() + " went unnoticed";
            }
        }
    }
    int named = 0;
    for (const char* s : {"[A /\\ B] |- B /\\ A", "[] |- A => B => A", "[A \\/ B, A => C, B => C] |- C"})
        named += roots.count(print_judgment(parse_judgment(s, JudgmentKind::Entail)));
    std::ostringstream os;
    os << correct << "/" << files.size() << " CompleteCorrect, " << derivable << " confirmed by proof search, "
       << named << "/3 required sequents present, " << caught << "/" << corruptions << " rule corruptions caught";
    if (!first.empty()) os << ", first failure: " << first;
    return {files.size() == 15 && correct == 15 && derivable == 15 && named == 3 && caught == corruptions, os.str()};
}

Outcome cli_contract() {
    int ok = 0, total = 0;
    std::string first;
    for (const auto& f : golden_files()) {
        std::string dir = f.parent_path().filename();
        int want = dir == "correct" ? 0 : dir == "incomplete" ? 1 : dir == "errors" ? 2 : 3;
        std::string cmd = std::string("'") + DERIVER_BIN + "' check '" + f.string() + "' >/dev/null 2>&1";
        int status = std::system(cmd.c_str());
        int got = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        ++total;
        if (got == want) ++ok;
        else if (first.empty()) first = f.filename().string() + " exited " + std::to_string(got);
    }
    std::string detail = std::to_string(ok) + "/" + std::to_string(total) + " golden files exit as expected";
    if (!first.empty()) detail += ", first failure: " + first;
    return {ok == total && total > 0, detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"oracle-typing", typing_oracle},
        {"oracle-eval", eval_oracle},
        {"mutation-localization", mutation_localization},
        {"message-reproduction", message_reproduction},
        {"hole-monotonicity", hole_monotonicity},
        {"incremental-equals-batch", incremental_equals_batch},
        {"round-trip", round_trip},
        {"prop-nd-spot-suite", prop_spot_suite},
        {"cli-contract", cli_contract},
    };
    bool all = true;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        all = all && o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    return all ? 0 : 1;
}
