#include "deriver/service.hpp"

#include <fstream>
#include <random>

#include "deriver/docfile.hpp"
#include "deriver/wire.hpp"

namespace deriver {

Json ServiceError::body() const { return error_body(code, what(), span); }

namespace {

ServiceError from_parse(const ParseError& e) {
    Json b = parse_error_body(e);
    return ServiceError(400, b["error"].get<std::string>(), e.what(), e.span);
}

ServiceError from_doc(const DocError& e, int status = 422) {
    int s = e.code == DocError::Code::UnknownNode ? 404 : status;
    return ServiceError(s, error_code_name(e.code), e.what());
}

// Runs `f`, mapping library exceptions onto protocol errors.
template <typename F>
auto guarded(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ServiceError&) {
        throw;
    } catch (const ParseError& e) {
        throw from_parse(e);
    } catch (const DocError& e) {
        throw from_doc(e);
    } catch (const WireError& e) {
        throw ServiceError(400, e.code, e.what());
    } catch (const UnknownCategory& e) {
        throw ServiceError(400, "UnknownCategory", e.what());
    }
}

Json line_json(const DocLine& l) {
    Json j;
    j["locus"] = locus_json(l.locus);
    j["plain"] = l.plain();
    Json segs = Json::array();
    for (const auto& s : l.segments) {
        Json sj;
        sj["text"] = s.text;
        if (s.metavar) {
            sj["metavar"] = *s.metavar;
            sj["color"] = s.color;
            sj["schema_path"] = path_json(s.schema_path);
        }
        if (s.bound) sj["bound"] = *s.bound;
        segs.push_back(std::move(sj));
    }
    j["segments"] = std::move(segs);
    return j;
}

Json prelude_json(const DerivationDoc& d) {
    Json a = Json::array();
    for (const auto& p : d.prelude) a.push_back({{"name", p.name}, {"term", print_term(p.term)}});
    return a;
}

Json subtrees_json(const DerivationDoc& d, const VerificationReport& r, bool silent) {
    Json a = Json::array();
    for (const auto& s : d.subtrees) {
        auto it = r.subtrees.find(s.name);
        TreeStatus st = it == r.subtrees.end() ? TreeStatus::Incomplete : it->second;
        a.push_back({{"name", s.name}, {"root", wire_id(s.tree->id)}, {"status", visible_tree_status(st, silent)}});
    }
    return a;
}

}  // namespace

Json session_node_json(const DerivationDoc& doc, const DerivNode& n, const NodeStatus& st, bool silent) {
    JsonOptions o;
    o.silent = silent;
    Json j = node_json(doc, n, st, o);
    // paths shift when siblings move; clients derive them from `children`
    j.erase("node");
    Json kids = Json::array();
    for (const auto& c : n.children) kids.push_back(wire_id(c->id));
    j["children"] = std::move(kids);
    return j;
}

Json rule_doc_json(const RuleDoc& d) {
    Json j;
    j["rule"] = d.rule;
    j["category"] = d.category;
    j["text"] = d.text;
    j["premises"] = Json::array();
    for (const auto& p : d.premises) j["premises"].push_back(line_json(p));
    j["conclusion"] = line_json(d.conclusion);
    j["side_conditions"] = Json::array();
    for (const auto& s : d.side_conditions) j["side_conditions"].push_back(line_json(s));
    j["metavars"] = Json::array();
    for (const auto& m : d.metavars) {
        Json mj{{"name", m.name}, {"sort", meta_sort_name(m.sort)}, {"color", m.color}};
        if (m.bound) mj["bound"] = *m.bound;
        j["metavars"].push_back(std::move(mj));
    }
    j["rendered"] = render_rule_doc(d, false);
    return j;
}

SessionManager::SnapPtr SessionManager::Session::snapshot() const {
    std::lock_guard lk(read);
    return current;
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) const {
    std::shared_lock lk(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ServiceError(404, "UnknownSession", "no session " + id);
    return it->second;
}

std::string SessionManager::fresh_id() {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng() ^ ++counter_));
    return buf;
}

std::size_t SessionManager::session_count() const {
    std::shared_lock lk(mu_);
    return sessions_.size();
}

void SessionManager::write_through(const Session& s, const Snapshot& snap) const {
    if (!opts_.export_dir) return;
    std::filesystem::create_directories(*opts_.export_dir);
    std::ofstream out(*opts_.export_dir / (s.id + ".deriv"), std::ios::binary | std::ios::trunc);
    out << print_document(snap.doc);
}

Json SessionManager::full_state(const Session& s, const Snapshot& snap) const {
    bool silent = snap.doc.feedback == Feedback::Silent;
    Json j;
    j["session"] = s.id;
    j["system"] = snap.doc.system_id;
    j["feedback"] = silent ? "silent" : "full";
    j["tree_status"] = visible_tree_status(snap.report.tree_status, silent);
    j["root"] = wire_id(snap.doc.root->id);
    j["prelude"] = prelude_json(snap.doc);
    j["subtrees"] = subtrees_json(snap.doc, snap.report, silent);
    Json nodes = Json::object();
    for_each_node(snap.doc, [&](const DerivNode& n) {
        nodes[wire_id(n.id)] = session_node_json(snap.doc, n, snap.report.nodes.at(n.id), silent);
    });
    j["nodes"] = std::move(nodes);
    {
        std::lock_guard lk(s.read);
        j["selected"] = s.selected ? Json(wire_id(*s.selected)) : Json(nullptr);
        j["can_undo"] = !s.undo.empty();
        j["can_redo"] = !s.redo.empty();
    }
    return j;
}

Json SessionManager::delta(const Session& s, const Snapshot& before, const Snapshot& after,
                           const std::set<NodeId>& changed, const std::vector<NodeId>& removed) const {
    bool silent = after.doc.feedback == Feedback::Silent;
    Json j;
    j["tree_status"] = visible_tree_status(after.report.tree_status, silent);
    j["feedback"] = silent ? "silent" : "full";
    j["root"] = wire_id(after.doc.root->id);
    j["prelude"] = prelude_json(after.doc);
    j["subtrees"] = subtrees_json(after.doc, after.report, silent);
    Json nodes = Json::object();
    std::set<NodeId> ids = changed;
    if (before.doc.feedback != after.doc.feedback)
        for (const auto& [id, st] : after.report.nodes) ids.insert(id);
    for (NodeId id : ids) {
        const DerivNode* n = find_node(after.doc, id);
        if (n) nodes[wire_id(id)] = session_node_json(after.doc, *n, after.report.nodes.at(id), silent);
    }
    j["nodes"] = std::move(nodes);
    j["removed"] = Json::array();
    for (NodeId id : removed) j["removed"].push_back(wire_id(id));
    std::lock_guard lk(s.read);
    j["can_undo"] = !s.undo.empty();
    j["can_redo"] = !s.redo.empty();
    return j;
}

Json SessionManager::create(const Json& body) {
    auto snap = guarded([&] {
        auto out = std::make_shared<Snapshot>();
        if (body.is_object() && body.contains("document") && body["document"].is_string()) {
            out->doc = parse_document(body["document"].get<std::string>()).doc;
        } else if (body.is_object() && body.contains("system") && body["system"].is_string()) {
            try {
                out->doc = new_document(body["system"].get<std::string>());
            } catch (const DocError& e) {
                throw ServiceError(400, error_code_name(e.code), e.what());
            }
        } else {
            throw ServiceError(400, "BadRequest", "expected {\"system\": id} or {\"document\": text}");
        }
        out->report = verify_document(out->doc);
        return SnapPtr(out);
    });
    auto s = std::make_shared<Session>();
    s->current = snap;
    {
        std::unique_lock lk(mu_);
        s->id = fresh_id();
        sessions_[s->id] = s;
    }
    write_through(*s, *snap);
    return full_state(*s, *snap);
}

void SessionManager::close(const std::string& id) {
    std::unique_lock lk(mu_);
    if (!sessions_.erase(id)) throw ServiceError(404, "UnknownSession", "no session " + id);
}

Json SessionManager::post_edit(const std::string& id, const Json& command) {
    auto s = find(id);
    std::lock_guard w(s->write);
    SnapPtr before = s->snapshot();
    EditOutcome o = guarded([&] {
        EditCommand c = command_from_json(command, before->doc);
        return apply_edit(before->doc, c, before->report);
    });
    auto after = std::make_shared<const Snapshot>(Snapshot{std::move(o.doc), std::move(o.report)});
    {
        std::lock_guard lk(s->read);
        s->undo.push_back(before);
        s->redo.clear();
        if (s->selected && !find_node(after->doc, *s->selected)) s->selected.reset();
        s->current = after;
    }
    write_through(*s, *after);
    std::set<NodeId> changed;
    for (const auto& [nid, st] : o.delta) changed.insert(nid);
    return delta(*s, *before, *after, changed, o.removed);
}

namespace {

// Nodes whose entry differs between two versions, and ids that vanished.
std::pair<std::set<NodeId>, std::vector<NodeId>> version_diff(const DerivationDoc& a, const VerificationReport& ra,
                                                              const DerivationDoc& b, const VerificationReport& rb) {
    std::set<NodeId> changed;
    std::vector<NodeId> removed;
    for_each_node(b, [&](const DerivNode& n) {
        const DerivNode* old = find_node(a, n.id);
        bool same = old && old->judgment == n.judgment && old->applied == n.applied &&
                    old->children.size() == n.children.size() && ra.nodes.at(n.id) == rb.nodes.at(n.id);
        if (same)
            for (std::size_t i = 0; i < n.children.size(); ++i) same = same && old->children[i]->id == n.children[i]->id;
        if (!same) changed.insert(n.id);
    });
    for_each_node(a, [&](const DerivNode& n) {
        if (!find_node(b, n.id)) removed.push_back(n.id);
    });
    return {changed, removed};
}

}  // namespace

Json SessionManager::undo(const std::string& id) {
    auto s = find(id);
    std::lock_guard w(s->write);
    SnapPtr before, after;
    {
        std::lock_guard lk(s->read);
        if (s->undo.empty()) throw ServiceError(409, "NothingToUndo", "nothing to undo");
        before = s->current;
        after = s->undo.back();
        s->undo.pop_back();
        s->redo.push_back(before);
        if (s->selected && !find_node(after->doc, *s->selected)) s->selected.reset();
        s->current = after;
    }
    write_through(*s, *after);
    auto [changed, removed] = version_diff(before->doc, before->report, after->doc, after->report);
    return delta(*s, *before, *after, changed, removed);
}

Json SessionManager::redo(const std::string& id) {
    auto s = find(id);
    std::lock_guard w(s->write);
    SnapPtr before, after;
    {
        std::lock_guard lk(s->read);
        if (s->redo.empty()) throw ServiceError(409, "NothingToRedo", "nothing to redo");
        before = s->current;
        after = s->redo.back();
        s->redo.pop_back();
        s->undo.push_back(before);
        if (s->selected && !find_node(after->doc, *s->selected)) s->selected.reset();
        s->current = after;
    }
    write_through(*s, *after);
    auto [changed, removed] = version_diff(before->doc, before->report, after->doc, after->report);
    return delta(*s, *before, *after, changed, removed);
}

Json SessionManager::state(const std::string& id) const {
    auto s = find(id);
    return full_state(*s, *s->snapshot());
}

Json SessionManager::rules(const std::string& id, const std::string& query,
                           const std::optional<std::string>& category) const {
    auto snap = find(id)->snapshot();
    return guarded([&] {
        Json j;
        j["system"] = snap->doc.system_id;
        j["groups"] = Json::array();
        for (const auto& g : list_rules(snap->doc.system(), query, category)) {
            Json gj{{"category", g.category}, {"rules", Json::array()}};
            for (const auto& r : g.rules)
                gj["rules"].push_back({{"name", r.name}, {"category", r.category}, {"arity", r.arity},
                                       {"schema", r.schema}});
            j["groups"].push_back(std::move(gj));
        }
        return j;
    });
}

Json SessionManager::doc_for(const std::string& id, const std::optional<std::string>& node,
                             const std::optional<std::string>& rule) {
    auto s = find(id);
    auto snap = s->snapshot();
    const RuleSystem& sys = snap->doc.system();
    if (!node) {
        if (!rule) throw ServiceError(400, "BadRequest", "give a node or a rule");
        const Rule* r = sys.find(*rule);
        if (!r) throw ServiceError(404, "UnknownRule", "no rule " + *rule + " in " + sys.id());
        return rule_doc_json(rule_doc(*r));
    }
    NodeId nid = guarded([&] { return resolve_node_ref(snap->doc, *node); });
    const DerivNode& n = *find_node(snap->doc, nid);
    {
        std::lock_guard lk(s->read);
        s->selected = nid;
    }
    if (n.applied.kind != RuleRef::Kind::Rule)
        throw ServiceError(404, "UnknownRule", "node " + *node + " has no rule applied");
    const Rule* r = sys.find(n.applied.name);
    if (!r) throw ServiceError(404, "UnknownRule", "no rule " + n.applied.name + " in " + sys.id());
    const NodeStatus& st = snap->report.nodes.at(nid);
    bool hide = snap->doc.feedback == Feedback::Silent && st.incorrect();
    Json j = rule_doc_json(hide ? rule_doc(*r) : rule_doc(*r, st.bindings));
    j["node"] = wire_id(nid);
    j["status"] = visible_status(st, snap->doc.feedback == Feedback::Silent);
    j["errors"] = Json::array();
    if (!hide) {
        for (const auto& e : st.errors) {
            Json ej = error_json(e, snap->doc);
            if (e.metavar || e.schema_path) {
                Json link;
                link["locus"] = locus_json(e.locus);
                if (e.schema_path) link["schema_path"] = path_json(*e.schema_path);
                if (e.metavar) {
                    link["metavar"] = *e.metavar;
                    if (const Metavar* m = r->find_meta(*e.metavar)) link["color"] = m->color;
                }
                ej["link"] = std::move(link);
            }
            j["errors"].push_back(std::move(ej));
        }
    }
    return j;
}

std::string SessionManager::export_text(const std::string& id) const {
    return print_document(find(id)->snapshot()->doc);
}

Json SessionManager::parse_check(const Json& body) {
    if (!body.is_object() || !body.contains("text") || !body["text"].is_string())
        throw ServiceError(400, "BadRequest", "expected {\"kind\": ..., \"text\": ...}");
    std::string kind = body.value("kind", "judgment");
    std::string text = body["text"].get<std::string>();
    return guarded([&] {
        Json j;
        j["ok"] = true;
        j["kind"] = kind;
        static const std::map<std::string, Sort> sorts = {{"expr", Sort::Expr},       {"type", Sort::Type},
                                                          {"prop", Sort::Prop},       {"typectx", Sort::TypeCtx},
                                                          {"propctx", Sort::PropCtx}};
        if (auto it = sorts.find(kind); it != sorts.end()) {
            j["printed"] = print_term(parse_term(it->second, text));
            return j;
        }
        if (kind != "judgment") throw ServiceError(400, "BadRequest", "unknown kind '" + kind + "'");
        std::optional<JudgmentKind> jk;
        if (body.contains("system")) {
            const RuleSystem* sys = find_system(body.value("system", ""));
            if (!sys) throw ServiceError(400, "UnknownSystem", "unknown system");
            jk = sys->judgment_kind();
        }
        j["printed"] = print_judgment(parse_judgment(text, jk));
        return j;
    });
}

}  // namespace deriver
