#include "deriver/wire.hpp"

#include "deriver/docfile.hpp"
#include "deriver/syntax.hpp"

namespace deriver {

namespace {

const Json& field(const Json& j, const char* name) {
    if (!j.is_object() || !j.contains(name)) throw WireError("BadRequest", std::string("missing field '") + name + "'");
    return j.at(name);
}

std::string str(const Json& j, const char* name) {
    const Json& v = field(j, name);
    if (!v.is_string()) throw WireError("BadRequest", std::string("field '") + name + "' must be a string");
    return v.get<std::string>();
}

std::size_t index(const Json& v, const char* name) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw WireError("BadRequest", std::string("field '") + name + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

Path path(const Json& j, const char* name) {
    const Json& v = field(j, name);
    if (!v.is_array()) throw WireError("BadRequest", std::string("field '") + name + "' must be an array");
    Path p;
    for (const auto& e : v) p.push_back(index(e, name));
    return p;
}

const DerivNode& node(const DerivationDoc& doc, const Json& j) {
    NodeId id = resolve_node_ref(doc, str(j, "node"));
    return *find_node(doc, id);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

}  // namespace

NodeId resolve_node_ref(const DerivationDoc& doc, const std::string& ref) {
    if (auto id = parse_wire_id(ref); id && find_node(doc, *id)) return *id;
    if (auto id = node_by_path(doc, ref)) return *id;
    throw DocError(DocError::Code::UnknownNode, "no node " + ref);
}

EditCommand command_from_json(const Json& j, const DerivationDoc& doc) {
    std::string op = str(j, "op");
    JudgmentKind kind = doc.system().judgment_kind();
    if (op == "SetRule") return cmd::SetRule{node(doc, j).id, str(j, "rule")};
    if (op == "ClearRule") return cmd::ClearRule{node(doc, j).id};
    if (op == "AddPremise") {
        std::optional<std::size_t> pos;
        if (j.contains("position") && !j.at("position").is_null()) pos = index(j.at("position"), "position");
        return cmd::AddPremise{node(doc, j).id, pos};
    }
    if (op == "RemovePremise") return cmd::RemovePremise{node(doc, j).id, index(field(j, "position"), "position")};
    if (op == "EditJudgment" || op == "FillHole") {
        const DerivNode& n = node(doc, j);
        Path p = path(j, "path");
        if (p.empty()) throw DocError(DocError::Code::BadPath, "a term edit needs a non-empty path");
        Term t = parse_at(n.judgment, kind, p, str(j, "term"));
        if (op == "FillHole") return cmd::FillHole{n.id, p, t};
        return cmd::EditJudgment{n.id, p, t};
    }
    if (op == "SetJudgment") {
        const DerivNode& n = node(doc, j);
        std::string text = str(j, "judgment");
        if (trim(text) == "?") return cmd::SetJudgment{n.id, Judgment::hole()};
        return cmd::SetJudgment{n.id, parse_judgment(text, kind)};
    }
    if (op == "MakeHole") return cmd::MakeHole{node(doc, j).id, j.contains("path") ? path(j, "path") : Path{}};
    if (op == "DefineAbbrev") return cmd::DefineAbbrev{str(j, "name"), parse_definition(kind, str(j, "term"))};
    if (op == "DefineSubtree") {
        std::optional<NodeId> from;
        if (j.contains("from") && !j.at("from").is_null()) from = resolve_node_ref(doc, str(j, "from"));
        return cmd::DefineSubtree{str(j, "name"), from};
    }
    if (op == "InsertSubtreeRef") return cmd::InsertSubtreeRef{node(doc, j).id, str(j, "subtree")};
    if (op == "SetFeedback") {
        std::string f = str(j, "feedback");
        if (f != "full" && f != "silent") throw WireError("BadRequest", "feedback must be 'full' or 'silent'");
        return cmd::SetFeedback{f == "silent" ? Feedback::Silent : Feedback::Full};
    }
    if (op == "RemoveAbbrev") return cmd::RemoveAbbrev{str(j, "name")};
    if (op == "RemoveSubtree") return cmd::RemoveSubtree{str(j, "name")};
    throw WireError("BadRequest", "unknown op '" + op + "'");
}

Json command_to_json(const EditCommand& c) {
    Json j;
    j["op"] = command_name(c);
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (requires { x.node; }) j["node"] = wire_id(x.node);
            if constexpr (std::is_same_v<T, cmd::SetRule>) j["rule"] = x.rule;
            if constexpr (std::is_same_v<T, cmd::AddPremise>) {
                if (x.position) j["position"] = *x.position;
            }
            if constexpr (std::is_same_v<T, cmd::RemovePremise>) j["position"] = x.position;
            if constexpr (std::is_same_v<T, cmd::EditJudgment> || std::is_same_v<T, cmd::FillHole>) {
                j["path"] = path_json(x.path);
                j["term"] = print_term(x.term);
            }
            if constexpr (std::is_same_v<T, cmd::MakeHole>) j["path"] = path_json(x.path);
            if constexpr (std::is_same_v<T, cmd::SetJudgment>) j["judgment"] = print_judgment(x.judgment);
            if constexpr (std::is_same_v<T, cmd::DefineAbbrev>) {
                j["name"] = x.name;
                j["term"] = print_term(x.term);
            }
            if constexpr (std::is_same_v<T, cmd::DefineSubtree>) {
                j["name"] = x.name;
                if (x.from) j["from"] = wire_id(*x.from);
            }
            if constexpr (std::is_same_v<T, cmd::InsertSubtreeRef>) j["subtree"] = x.subtree;
            if constexpr (std::is_same_v<T, cmd::SetFeedback>)
                j["feedback"] = x.feedback == Feedback::Silent ? "silent" : "full";
            if constexpr (std::is_same_v<T, cmd::RemoveAbbrev> || std::is_same_v<T, cmd::RemoveSubtree>)
                j["name"] = x.name;
        },
        c);
    return j;
}

Json span_json(const SrcSpan& s) {
    return Json{{"start", {{"line", s.start.line}, {"col", s.start.col}}},
                {"end", {{"line", s.end.line}, {"col", s.end.col}}}};
}

Json error_body(const std::string& code, const std::string& message, const std::optional<SrcSpan>& span) {
    Json j;
    j["error"] = code;
    j["message"] = message;
    if (span) j["span"] = span_json(*span);
    return j;
}

Json parse_error_body(const ParseError& e) {
    std::string code = e.kind == ParseError::Kind::Indent      ? "IndentError"
                       : e.kind == ParseError::Kind::Invariant ? e.invariant
                                                               : "ParseError";
    Json j = error_body(code, e.what(), e.span);
    if (!e.expected.empty()) j["expected"] = e.expected;
    j["found"] = e.found;
    return j;
}

}  // namespace deriver
