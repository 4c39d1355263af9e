#include "deriver/rules.hpp"

namespace deriver {

namespace {

using M = MetaSort;

RuleSystem make_typing() {
    const auto K = JudgmentKind::Typing;
    const std::string cat = "Typing";
    std::vector<Rule> rules;
    rules.push_back(RuleBuilder("T-Var", cat, K)
                        .meta("Γ", M::Ctx).meta("x", M::Name).meta("T", M::Type)
                        .conclusion("Γ |- x : T")
                        .side(SideCond::lookup("Γ", "x", "T"))
                        .doc("A variable has the type recorded for it by its rightmost binding in the context.")
                        .build());
    rules.push_back(RuleBuilder("T-Num", cat, K)
                        .meta("Γ", M::Ctx).meta("n", M::Num)
                        .conclusion("Γ |- n : Num")
                        .doc("Every integer literal has type Num.")
                        .build());
    rules.push_back(RuleBuilder("T-True", cat, K)
                        .meta("Γ", M::Ctx)
                        .conclusion("Γ |- true : Bool")
                        .doc("The literal true has type Bool.")
                        .build());
    rules.push_back(RuleBuilder("T-False", cat, K)
                        .meta("Γ", M::Ctx)
                        .conclusion("Γ |- false : Bool")
                        .doc("The literal false has type Bool.")
                        .build());
    rules.push_back(RuleBuilder("T-Plus", cat, K)
                        .meta("Γ", M::Ctx).meta("M", M::Expr).meta("N", M::Expr)
                        .conclusion("Γ |- M + N : Num")
                        .premise("Γ |- M : Num")
                        .premise("Γ |- N : Num")
                        .doc("A sum has type Num when both summands have type Num.")
                        .build());
    rules.push_back(RuleBuilder("T-If", cat, K)
                        .meta("Γ", M::Ctx).meta("e1", M::Expr).meta("e2", M::Expr).meta("e3", M::Expr)
                        .meta("T", M::Type)
                        .conclusion("Γ |- if e1 then e2 else e3 : T")
                        .premise("Γ |- e1 : Bool")
                        .premise("Γ |- e2 : T")
                        .premise("Γ |- e3 : T")
                        .doc("A conditional needs a Bool guard; both branches must share the result type T.")
                        .build());
    rules.push_back(RuleBuilder("T-Lam", cat, K)
                        .meta("Γ", M::Ctx).meta("x", M::Name).meta("T1", M::Type).meta("e", M::Expr)
                        .meta("T2", M::Type)
                        .conclusion("Γ |- fun x : T1 -> e : T1 -> T2")
                        .premise("[Γ, x : T1] |- e : T2")
                        .doc("A function has type T1 -> T2 when its body has type T2 in the context extended "
                             "with x : T1.")
                        .build());
    rules.push_back(RuleBuilder("T-App", cat, K)
                        .meta("Γ", M::Ctx).meta("F", M::Expr).meta("E", M::Expr).meta("T1", M::Type)
                        .meta("T2", M::Type)
                        .conclusion("Γ |- F E : T2")
                        .premise("Γ |- F : T1 -> T2")
                        .premise("Γ |- E : T1")
                        .premise_bound({"T1"})
                        .doc("Function application: F must have a function type T1 -> T2 and the argument E "
                             "must have type T1; the application then has type T2.")
                        .build());
    rules.push_back(RuleBuilder("T-Let", cat, K)
                        .meta("Γ", M::Ctx).meta("x", M::Name).meta("e1", M::Expr).meta("e2", M::Expr)
                        .meta("T1", M::Type).meta("T2", M::Type)
                        .conclusion("Γ |- let x = e1 in e2 : T2")
                        .premise("Γ |- e1 : T1")
                        .premise("[Γ, x : T1] |- e2 : T2")
                        .premise_bound({"T1"})
                        .doc("A let-binding types its definition at some T1, then types the body with x : T1 "
                             "added to the context.")
                        .build());
    return RuleSystem("alfa-typing", K, std::move(rules));
}

RuleSystem make_eval() {
    const auto K = JudgmentKind::Eval;
    const std::string cat = "Evaluation";
    std::vector<Rule> rules;
    rules.push_back(RuleBuilder("E-Num", cat, K)
                        .meta("n", M::Num)
                        .conclusion("n evalto n")
                        .doc("An integer literal is a value; it evaluates to itself.")
                        .build());
    rules.push_back(RuleBuilder("E-True", cat, K)
                        .conclusion("true evalto true")
                        .doc("The literal true is a value.")
                        .build());
    rules.push_back(RuleBuilder("E-False", cat, K)
                        .conclusion("false evalto false")
                        .doc("The literal false is a value.")
                        .build());
    rules.push_back(RuleBuilder("E-Fun", cat, K)
                        .meta("x", M::Name).meta("T", M::Type).meta("e", M::Expr)
                        .conclusion("fun x : T -> e evalto fun x : T -> e")
                        .doc("A function is a value; its body is not evaluated.")
                        .build());
    rules.push_back(RuleBuilder("E-Plus", cat, K)
                        .meta("e1", M::Expr).meta("e2", M::Expr).meta("n", M::Num).meta("n1", M::Num)
                        .meta("n2", M::Num)
                        .conclusion("e1 + e2 evalto n")
                        .premise("e1 evalto n1")
                        .premise("e2 evalto n2")
                        .premise_bound({"n1", "n2"})
                        .side(SideCond::arith("n", "n1", "n2"))
                        .doc("Evaluate both summands to integers n1, n2; the sum evaluates to n = n1 + n2.")
                        .build());
    rules.push_back(RuleBuilder("E-IfTrue", cat, K)
                        .meta("e1", M::Expr).meta("e2", M::Expr).meta("e3", M::Expr).meta("v", M::Value)
                        .conclusion("if e1 then e2 else e3 evalto v")
                        .premise("e1 evalto true")
                        .premise("e2 evalto v")
                        .doc("When the guard evaluates to true, the conditional takes the value of the "
                             "then-branch.")
                        .build());
    rules.push_back(RuleBuilder("E-IfFalse", cat, K)
                        .meta("e1", M::Expr).meta("e2", M::Expr).meta("e3", M::Expr).meta("v", M::Value)
                        .conclusion("if e1 then e2 else e3 evalto v")
                        .premise("e1 evalto false")
                        .premise("e3 evalto v")
                        .doc("When the guard evaluates to false, the conditional takes the value of the "
                             "else-branch.")
                        .build());
    rules.push_back(RuleBuilder("E-App", cat, K)
                        .meta("e1", M::Expr).meta("e2", M::Expr).meta("v", M::Value).meta("x", M::Name)
                        .meta("T", M::Type).meta("e", M::Expr).meta("v2", M::Value)
                        .conclusion("e1 e2 evalto v")
                        .premise("e1 evalto fun x : T -> e")
                        .premise("e2 evalto v2")
                        .premise("[v2/x]e evalto v")
                        .premise_bound({"x", "T", "e", "v2"})
                        .side(SideCond::is_value("v2"))
                        .doc("Function application: e1 must evaluate to a function fun x : T -> e, the argument "
                             "to a value v2, and the body with v2 substituted for x to the result v.")
                        .build());
    rules.push_back(RuleBuilder("E-Let", cat, K)
                        .meta("x", M::Name).meta("e1", M::Expr).meta("e2", M::Expr).meta("v", M::Value)
                        .meta("v1", M::Value)
                        .conclusion("let x = e1 in e2 evalto v")
                        .premise("e1 evalto v1")
                        .premise("[v1/x]e2 evalto v")
                        .premise_bound({"v1"})
                        .side(SideCond::is_value("v1"))
                        .doc("Evaluate the definition to v1, then the body with v1 substituted for x.")
                        .build());
    return RuleSystem("alfa-eval", K, std::move(rules));
}

RuleSystem make_logic() {
    const auto K = JudgmentKind::Entail;
    const std::string cat = "Propositional";
    std::vector<Rule> rules;
    rules.push_back(RuleBuilder("Asm", cat, K)
                        .meta("Γ", M::Ctx).meta("φ", M::Prop)
                        .conclusion("Γ |- φ")
                        .side(SideCond::lookup("Γ", "φ"))
                        .doc("Assumption: any formula listed in the context may be concluded.")
                        .build());
    rules.push_back(RuleBuilder("AndI", cat, K)
                        .meta("Γ", M::Ctx).meta("φ", M::Prop).meta("ψ", M::Prop)
                        .conclusion("Γ |- φ /\\ ψ")
                        .premise("Γ |- φ")
                        .premise("Γ |- ψ")
                        .doc("And-introduction: prove each conjunct separately.")
                        .build());
    rules.push_back(RuleBuilder("AndE1", cat, K)
                        .meta("Γ", M::Ctx).meta("φ", M::Prop).meta("ψ", M::Prop)
                        .conclusion("Γ |- φ")
                        .premise("Γ |- φ /\\ ψ")
                        .premise_bound({"ψ"})
                        .doc("And-elimination (left): from a conjunction conclude its left conjunct.")
                        .build());
    rules.push_back(RuleBuilder("AndE2", cat, K)
                        .meta("Γ", M::Ctx).meta("φ", M::Prop).meta("ψ", M::Prop)
                        .conclusion("Γ |- ψ")
                        .premise("Γ |- φ /\\ ψ")
                        .premise_bound({"φ"})
                        .doc("And-elimination (right): from a conjunction conclude its right conjunct.")
                        .build());
    rules.push_back(RuleBuilder("ImpI", cat, K)
                        .meta("Γ", M::Ctx).meta("φ", M::Prop).meta("ψ", M::Prop)
                        .conclusion("Γ |- φ => ψ")
                        .premise("[Γ, φ] |- ψ")
                        .doc("Implication introduction: assume the antecedent φ, derive ψ.")
                        .build());
    rules.push_back(RuleBuilder("ImpE", cat, K)
                        .meta("Γ", M::Ctx).meta("φ", M::Prop).meta("ψ", M::Prop)
                        .conclusion("Γ |- ψ")
                        .premise("Γ |- φ => ψ")
                        .premise("Γ |- φ")
                        .premise_bound({"φ"})
                        .doc("Modus ponens: from φ => ψ together with φ, conclude ψ.")
                        .build());
    rules.push_back(RuleBuilder("OrI1", cat, K)
                        .meta("Γ", M::Ctx).meta("φ", M::Prop).meta("ψ", M::Prop)
                        .conclusion("Γ |- φ \\/ ψ")
                        .premise("Γ |- φ")
                        .doc("Or-introduction (left): a proof of φ proves φ \\/ ψ.")
                        .build());
    rules.push_back(RuleBuilder("OrI2", cat, K)
                        .meta("Γ", M::Ctx).meta("φ", M::Prop).meta("ψ", M::Prop)
                        .conclusion("Γ |- φ \\/ ψ")
                        .premise("Γ |- ψ")
                        .doc("Or-introduction (right): a proof of ψ proves φ \\/ ψ.")
                        .build());
    rules.push_back(RuleBuilder("OrE", cat, K)
                        .meta("Γ", M::Ctx).meta("φ", M::Prop).meta("ψ", M::Prop).meta("χ", M::Prop)
                        .conclusion("Γ |- χ")
                        .premise("Γ |- φ \\/ ψ")
                        .premise("[Γ, φ] |- χ")
                        .premise("[Γ, ψ] |- χ")
                        .premise_bound({"φ", "ψ"})
                        .doc("Or-elimination (case analysis): derive χ from each disjunct in turn.")
                        .build());
    rules.push_back(RuleBuilder("NotI", cat, K)
                        .meta("Γ", M::Ctx).meta("φ", M::Prop)
                        .conclusion("Γ |- ~φ")
                        .premise("[Γ, φ] |- _|_")
                        .doc("Negation introduction: if assuming φ leads to falsum, conclude ~φ.")
                        .build());
    rules.push_back(RuleBuilder("NotE", cat, K)
                        .meta("Γ", M::Ctx).meta("φ", M::Prop)
                        .conclusion("Γ |- _|_")
                        .premise("Γ |- φ")
                        .premise("Γ |- ~φ")
                        .premise_bound({"φ"})
                        .doc("Negation elimination: φ together with ~φ yields falsum.")
                        .build());
    rules.push_back(RuleBuilder("FalseE", cat, K)
                        .meta("Γ", M::Ctx).meta("φ", M::Prop)
                        .conclusion("Γ |- φ")
                        .premise("Γ |- _|_")
                        .doc("Ex falso: from falsum, any formula follows.")
                        .build());
    return RuleSystem("prop-nd", K, std::move(rules));
}

}  // namespace

const RuleSystem* find_system(const std::string& id) {
    static const RuleSystem typing = make_typing();
    static const RuleSystem eval = make_eval();
    static const RuleSystem logic = make_logic();
    if (id == typing.id()) return &typing;
    if (id == eval.id()) return &eval;
    if (id == logic.id()) return &logic;
    return nullptr;
}

std::vector<std::string> system_ids() { return {"alfa-typing", "alfa-eval", "prop-nd"}; }

}  // namespace deriver
