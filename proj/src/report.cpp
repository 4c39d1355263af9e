#include "deriver/report.hpp"

#include <limits>
#include <sstream>

#include "deriver/syntax.hpp"

namespace deriver {

std::string wire_id(NodeId id) { return "n" + std::to_string(id); }

std::optional<NodeId> parse_wire_id(const std::string& s) {
    if (s.size() < 2 || s[0] != 'n') return std::nullopt;
    NodeId v = 0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') return std::nullopt;
        if (v > (std::numeric_limits<NodeId>::max() - 9) / 10) return std::nullopt;
        v = v * 10 + static_cast<NodeId>(s[i] - '0');
    }
    return v;
}

std::string rule_ref_text(const RuleRef& r) {
    switch (r.kind) {
    case RuleRef::Kind::Hole: return "?";
    case RuleRef::Kind::Rule: return r.name;
    case RuleRef::Kind::Subtree: return "use " + r.name;
    }
    return "?";
}

Json locus_json(const Locus& l) {
    Json j;
    switch (l.kind) {
    case Locus::Kind::Conclusion: j["kind"] = "Conclusion"; break;
    case Locus::Kind::Premise: j["kind"] = "Premise"; j["index"] = l.index; break;
    case Locus::Kind::RuleApplication: j["kind"] = "RuleApplication"; break;
    case Locus::Kind::SideCondition: j["kind"] = "SideCondition"; j["index"] = l.index; break;
    }
    return j;
}

Json path_json(const Path& p) {
    Json j = Json::array();
    for (auto i : p) j.push_back(i);
    return j;
}

std::string visible_status(const NodeStatus& st, bool silent) {
    if (silent && st.incorrect()) return "unresolved";
    return status_name(st.kind);
}

std::string visible_tree_status(TreeStatus s, bool silent) {
    if (silent && s == TreeStatus::HasErrors) return "unresolved";
    return tree_status_name(s);
}

std::optional<SrcPos> error_position(const DerivationDoc& doc, const std::map<NodeId, NodeSource>& sources,
                                     const VerifyError& e) {
    auto own = sources.find(e.node);
    if (own == sources.end()) return std::nullopt;
    const NodeSource* src = &own->second;
    if (e.locus.kind == Locus::Kind::RuleApplication) return src->rule.start;
    if (e.locus.kind == Locus::Kind::Premise) {
        const DerivNode* n = find_node(doc, e.node);
        if (!n || e.locus.index >= n->children.size()) return src->rule.start;
        auto child = sources.find(n->children[e.locus.index]->id);
        if (child == sources.end()) return src->rule.start;
        src = &child->second;
    }
    // the innermost recorded span on the way down the path
    Path p = e.path;
    while (!p.empty()) {
        auto it = src->spans.find(p);
        if (it != src->spans.end()) return it->second.start;
        p.pop_back();
    }
    return src->judgment.start;
}

Json error_json(const VerifyError& e, const DerivationDoc& doc, const JsonOptions& opts) {
    Json j;
    j["locus"] = locus_json(e.locus);
    j["path"] = path_json(e.path);
    j["expected"] = e.expected;
    j["found"] = e.found;
    j["message"] = e.message;
    j["code"] = e.code;
    if (e.metavar) j["metavar"] = *e.metavar;
    if (e.schema_path) j["schema_path"] = path_json(*e.schema_path);
    if (opts.sources) {
        if (auto pos = error_position(doc, *opts.sources, e)) {
            j["line"] = pos->line;
            j["col"] = pos->col;
        }
    }
    return j;
}

Json node_json(const DerivationDoc& doc, const DerivNode& n, const NodeStatus& st, const JsonOptions& opts) {
    Json j;
    j["id"] = wire_id(n.id);
    j["node"] = node_path(doc, n.id);
    j["judgment"] = print_judgment(n.judgment);
    j["rule"] = rule_ref_text(n.applied);
    j["status"] = visible_status(st, opts.silent);
    if (opts.sources) {
        auto it = opts.sources->find(n.id);
        if (it != opts.sources->end()) j["line"] = it->second.line;
    }
    bool hide = opts.silent && st.incorrect();
    j["errors"] = Json::array();
    if (!hide)
        for (const auto& e : st.errors) j["errors"].push_back(error_json(e, doc, opts));
    j["obligations"] = Json::array();
    for (const auto& o : st.obligations) {
        Json oj;
        oj["locus"] = locus_json(o.locus);
        oj["holes"] = Json::array();
        for (const auto& h : o.holes) oj["holes"].push_back(path_json(h));
        oj["statement"] = o.statement;
        j["obligations"].push_back(std::move(oj));
    }
    if (!hide) {
        Json b = Json::object();
        for (const auto& [k, v] : st.bindings) b[k] = print_term(v);
        j["bindings"] = std::move(b);
    }
    return j;
}

Json report_json(const DerivationDoc& doc, const VerificationReport& r, const JsonOptions& opts) {
    Json j;
    j["system"] = doc.system_id;
    j["feedback"] = doc.feedback == Feedback::Silent ? "silent" : "full";
    j["tree_status"] = visible_tree_status(r.tree_status, opts.silent);
    Json subs = Json::object();
    for (const auto& s : doc.subtrees) {
        auto it = r.subtrees.find(s.name);
        if (it != r.subtrees.end()) subs[s.name] = visible_tree_status(it->second, opts.silent);
    }
    j["subtrees"] = std::move(subs);
    Json nodes = Json::object();
    for_each_node(doc, [&](const DerivNode& n) {
        auto it = r.nodes.find(n.id);
        if (it == r.nodes.end()) return;
        nodes[node_path(doc, n.id)] = node_json(doc, n, it->second, opts);
    });
    j["nodes"] = std::move(nodes);
    return j;
}

std::string summary_line(const DerivationDoc& doc, const VerificationReport& r) {
    std::size_t nodes = node_count(doc), errors = 0, open = 0;
    for (const auto& [id, st] : r.nodes) {
        errors += st.errors.size();
        open += st.obligations.size();
    }
    std::ostringstream os;
    os << tree_status_name(r.tree_status) << " (" << nodes << (nodes == 1 ? " node" : " nodes");
    if (r.tree_status == TreeStatus::HasErrors) os << ", " << errors << (errors == 1 ? " error" : " errors");
    if (r.tree_status == TreeStatus::Incomplete)
        os << ", " << open << (open == 1 ? " open obligation" : " open obligations");
    os << ")";
    return os.str();
}

std::string human_report(const std::string& file, const ParsedDocument& parsed, const VerificationReport& r,
                         bool color) {
    const auto& doc = parsed.doc;
    auto paint = [&](const std::string& s, const char* code) {
        return color ? std::string("\x1b[") + code + "m" + s + "\x1b[0m" : s;
    };
    std::ostringstream os;
    for_each_node(doc, [&](const DerivNode& n) {
        auto it = r.nodes.find(n.id);
        if (it == r.nodes.end()) return;
        for (const auto& e : it->second.errors) {
            SrcPos pos = error_position(doc, parsed.sources, e).value_or(SrcPos{});
            os << paint(file + ":" + std::to_string(pos.line) + ":" + std::to_string(pos.col) + ":", "1") << " "
               << paint("[" + node_path(doc, n.id) + "]", "31") << " " << e.message << "\n";
        }
    });
    const char* tone = r.tree_status == TreeStatus::CompleteCorrect ? "32"
                       : r.tree_status == TreeStatus::Incomplete    ? "33"
                                                                    : "31";
    os << file << ": " << paint(summary_line(doc, r), tone) << "\n";
    return os.str();
}

}  // namespace deriver
