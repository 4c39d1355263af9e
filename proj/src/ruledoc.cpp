#include <algorithm>
#include <cctype>
#include <sstream>

#include "deriver/rules.hpp"
#include "deriver/syntax.hpp"

namespace deriver {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

class SegmentSink : public PrintSink {
public:
    SegmentSink(const Rule& r, const std::optional<Bindings>& b, std::vector<DocSegment>& out)
        : rule_(r), b_(b), out_(out) {}

    void text(std::string_view s, const Path& at) override {
        if (!out_.empty() && !out_.back().metavar && out_.back().schema_path == at) {
            out_.back().text.append(s);
            return;
        }
        out_.push_back({std::string(s), std::nullopt, -1, std::nullopt, at});
    }

    void meta(const std::string& name, const Path& at) override {
        DocSegment seg{name, name, -1, std::nullopt, at};
        if (const Metavar* m = rule_.find_meta(name)) seg.color = m->color;
        if (b_) {
            if (auto it = b_->find(name); it != b_->end()) seg.bound = print_term(it->second);
        }
        out_.push_back(std::move(seg));
    }

private:
    const Rule& rule_;
    const std::optional<Bindings>& b_;
    std::vector<DocSegment>& out_;
};

DocLine judgment_line(const Rule& r, const Judgment& j, Locus locus, const std::optional<Bindings>& b) {
    DocLine line{locus, {}};
    SegmentSink sink(r, b, line.segments);
    print_judgment(j, sink);
    return line;
}

DocLine side_line(const Rule& r, const SideCond& c, std::size_t i, const std::optional<Bindings>& b) {
    DocLine line{Locus::side_condition(i), {}};
    SegmentSink sink(r, b, line.segments);
    Path none;
    switch (c.kind) {
    case SideCond::Kind::Lookup:
        if (c.result.empty()) {
            sink.meta(c.args[1], none);
            sink.text(" in ", none);
            sink.meta(c.args[0], none);
        } else {
            sink.meta(c.args[0], none);
            sink.text("(", none);
            sink.meta(c.args[1], none);
            sink.text(") = ", none);
            sink.meta(c.result, none);
        }
        break;
    case SideCond::Kind::Arith:
        sink.meta(c.result, none);
        sink.text(" = ", none);
        sink.meta(c.args[0], none);
        sink.text(" + ", none);
        sink.meta(c.args[1], none);
        break;
    case SideCond::Kind::IsValue:
        sink.meta(c.args[0], none);
        sink.text(" is a value", none);
        break;
    }
    return line;
}

std::string one_line(const Rule& r) {
    std::string out;
    for (std::size_t i = 0; i < r.premises().size(); ++i) {
        if (i) out += "    ";
        out += print_judgment(r.premises()[i]);
    }
    if (!out.empty()) out += "  ---  ";
    out += print_judgment(r.conclusion());
    return out;
}

}  // namespace

std::string DocLine::plain() const {
    std::string out;
    for (const auto& s : segments) out += s.text;
    return out;
}

std::vector<RuleGroup> list_rules(const RuleSystem& sys, const std::string& query,
                                  const std::optional<std::string>& category) {
    if (category && std::find(sys.categories().begin(), sys.categories().end(), *category) == sys.categories().end())
        throw UnknownCategory("unknown category '" + *category + "' in system " + sys.id());
    std::string q = lower(query);
    std::vector<RuleGroup> groups;
    for (const auto& cat : sys.categories()) {
        if (category && *category != cat) continue;
        RuleGroup g{cat, {}};
        for (const auto& r : sys.rules()) {
            if (r.category() != cat) continue;
            if (!q.empty() && lower(r.name()).find(q) == std::string::npos &&
                lower(r.doc_text()).find(q) == std::string::npos)
                continue;
            g.rules.push_back({r.name(), r.category(), r.arity(), one_line(r)});
        }
        if (!g.rules.empty()) groups.push_back(std::move(g));
    }
    return groups;
}

RuleDoc rule_doc(const Rule& r, const std::optional<Bindings>& b) {
    RuleDoc d;
    d.rule = r.name();
    d.category = r.category();
    d.text = r.doc_text();
    for (std::size_t i = 0; i < r.premises().size(); ++i)
        d.premises.push_back(judgment_line(r, r.premises()[i], Locus::premise(i), b));
    d.conclusion = judgment_line(r, r.conclusion(), Locus::conclusion(), b);
    for (std::size_t i = 0; i < r.side_conditions().size(); ++i)
        d.side_conditions.push_back(side_line(r, r.side_conditions()[i], i, b));
    for (const auto& m : r.metavars()) {
        MetavarDoc md{m.name, m.sort, m.color, std::nullopt};
        if (b) {
            if (auto it = b->find(m.name); it != b->end()) md.bound = print_term(it->second);
        }
        d.metavars.push_back(std::move(md));
    }
    return d;
}

namespace {

std::size_t display_width(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++n;
    return n;
}

std::string paint(const DocLine& line, bool color) {
    std::string out;
    for (const auto& s : line.segments) {
        if (color && s.metavar && s.color >= 0) {
            out += "\x1b[" + std::to_string(31 + s.color % 6) + "m" + s.text + "\x1b[0m";
        } else {
            out += s.text;
        }
    }
    return out;
}

}  // namespace

std::string render_rule_doc(const RuleDoc& d, bool color) {
    std::ostringstream os;
    os << d.rule << "  (" << d.category << ")\n\n";
    std::string premises, premises_plain;
    for (std::size_t i = 0; i < d.premises.size(); ++i) {
        if (i) {
            premises += "     ";
            premises_plain += "     ";
        }
        premises += paint(d.premises[i], color);
        premises_plain += d.premises[i].plain();
    }
    std::size_t width = std::max(display_width(premises_plain), display_width(d.conclusion.plain()));
    if (!premises.empty()) os << "    " << premises << "\n";
    os << "    " << std::string(std::max<std::size_t>(width, 4), '-') << "  " << d.rule << "\n";
    os << "    " << paint(d.conclusion, color) << "\n";
    if (!d.side_conditions.empty()) {
        os << "\n  where\n";
        for (const auto& s : d.side_conditions) os << "    " << paint(s, color) << "\n";
    }
    os << "\n" << d.text << "\n";
    if (!d.metavars.empty()) {
        os << "\nMetavariables:\n";
        // display width in code points, so Γ lines up with ASCII names
        auto width = [](const std::string& s) {
            return std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; });
        };
        std::ptrdiff_t w = 0;
        for (const auto& m : d.metavars) w = std::max(w, width(m.name));
        for (const auto& m : d.metavars) {
            std::string name = color ? "\x1b[" + std::to_string(31 + m.color % 6) + "m" + m.name + "\x1b[0m" : m.name;
            os << "    " << name << std::string(w - width(m.name) + 2, ' ') << meta_sort_name(m.sort);
            if (m.bound) os << "  = " << *m.bound;
            os << "\n";
        }
    }
    return os.str();
}

}  // namespace deriver
