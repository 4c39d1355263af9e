#include "deriver/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "deriver/docfile.hpp"
#include "deriver/report.hpp"
#include "deriver/server.hpp"
#include "deriver/verifier.hpp"
#include "deriver/wire.hpp"

namespace deriver {

namespace {

struct FileResult {
    int code = Failure;
    std::string out;  // buffered so parallel checks print in argument order
    std::string err;
};

bool read_file(const std::string& path, std::string& text) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
    return true;
}

int code_for(TreeStatus s, bool strict) {
    switch (s) {
    case TreeStatus::CompleteCorrect: return Complete;
    case TreeStatus::Incomplete: return strict ? HasErrors : Incomplete;
    case TreeStatus::HasErrors: return HasErrors;
    }
    return Failure;
}

std::string parse_error_line(const std::string& file, const ParseError& e) {
    return file + ":" + std::to_string(e.span.start.line) + ":" + std::to_string(e.span.start.col) +
           ": error: " + e.what() + "\n";
}

FileResult check_file(const std::string& file, bool json, bool strict, bool color) {
    FileResult r;
    std::string text;
    if (!read_file(file, text)) {
        r.err = file + ": cannot read file\n";
        if (json) r.out = Json{{"file", file}, {"exit_code", int(Failure)}, {"error", error_body("IOError", "cannot read file")}}.dump() + "\n";
        return r;
    }
    try {
        ParsedDocument p = parse_document(text);
        VerificationReport rep = verify_document(p.doc);
        r.code = code_for(rep.tree_status, strict);
        if (json) {
            JsonOptions o;
            o.sources = &p.sources;
            Json j{{"file", file}, {"exit_code", r.code}};
            j.update(report_json(p.doc, rep, o));
            r.out = j.dump() + "\n";
        } else {
            r.out = human_report(file, p, rep, color);
        }
    } catch (const ParseError& e) {
        r.code = Failure;
        if (json)
            r.out = Json{{"file", file}, {"exit_code", int(Failure)}, {"error", parse_error_body(e)}}.dump() + "\n";
        else
            r.err = parse_error_line(file, e);
    }
    return r;
}

int cmd_check(const std::vector<std::string>& files, bool json, bool strict, CliStreams& io) {
    std::vector<FileResult> results(files.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < files.size();) results[i] = check_file(files[i], json, strict, io.color);
    };
    std::size_t n = std::min<std::size_t>(files.size(), std::max(1u, std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    int worst = Complete;
    for (const auto& r : results) {
        io.out << r.out;
        io.err << r.err;
        worst = std::max(worst, r.code);
    }
    return worst;
}

int cmd_fmt(const std::vector<std::string>& files, bool write, CliStreams& io) {
    int worst = Complete;
    for (const auto& f : files) {
        std::string text;
        if (!read_file(f, text)) {
            io.err << f << ": cannot read file\n";
            worst = Failure;
            continue;
        }
        try {
            std::string canon = print_document(parse_document(text).doc);
            if (!write) {
                io.out << canon;
            } else if (canon != text) {
                std::ofstream(f, std::ios::binary | std::ios::trunc) << canon;
            }
        } catch (const ParseError& e) {
            io.err << parse_error_line(f, e);
            worst = Failure;
        }
    }
    return worst;
}

int cmd_rules(const std::string& system, const std::string& query, const std::optional<std::string>& category,
              CliStreams& io) {
    const RuleSystem* sys = find_system(system);
    if (!sys) {
        io.err << "unknown system '" << system << "'\n";
        return Failure;
    }
    try {
        for (const auto& g : list_rules(*sys, query, category)) {
            io.out << g.category << ":\n";
            std::size_t w = 0;
            for (const auto& r : g.rules) w = std::max(w, r.name.size());
            for (const auto& r : g.rules)
                io.out << "  " << r.name << std::string(w - r.name.size() + 2, ' ') << r.schema << "\n";
        }
    } catch (const UnknownCategory& e) {
        io.err << e.what() << "\n";
        return Failure;
    }
    return Complete;
}

int cmd_doc(const std::string& system, const std::string& rule, CliStreams& io) {
    const RuleSystem* sys = find_system(system);
    if (!sys) {
        io.err << "unknown system '" << system << "'\n";
        return Failure;
    }
    const Rule* r = sys->find(rule);
    if (!r) {
        io.err << "no rule '" << rule << "' in " << system << "\n";
        return Failure;
    }
    io.out << render_rule_doc(rule_doc(*r), io.color);
    return Complete;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, CliStreams io) {
    CLI::App app{"Checks and edits derivation trees for the bundled rule systems.", "deriver"};
    app.require_subcommand(1);

    std::vector<std::string> files;
    bool json = false, strict = false, write = false;
    std::string system, rule, query, host = "127.0.0.1";
    std::optional<std::string> category;
    std::optional<std::string> export_dir;
    int port = 8080;

    auto* check = app.add_subcommand("check", "Verify derivation files");
    check->add_option("files", files, "Files to check")->required();
    check->add_flag("--json", json, "One JSON report per line");
    check->add_flag("--strict", strict, "Treat incomplete derivations as errors");

    auto* fmt = app.add_subcommand("fmt", "Print files in canonical form");
    fmt->add_option("files", files, "Files to format")->required();
    fmt->add_flag("--write", write, "Rewrite the files in place");

    auto* rules = app.add_subcommand("rules", "List the rules of a system");
    rules->add_option("system", system)->required();
    rules->add_option("--query,-q", query, "Substring of a rule name or its documentation");
    rules->add_option("--category,-c", category, "Only this category");

    auto* doc = app.add_subcommand("doc", "Show the documentation of a rule");
    doc->add_option("system", system)->required();
    doc->add_option("rule", rule)->required();

    auto* serve = app.add_subcommand("serve", "Run the editing service over HTTP");
    serve->add_option("--port,-p", port)->check(CLI::Range(0, 65535));
    serve->add_option("--host", host);
    serve->add_option("--export-dir", export_dir, "Mirror every session to <dir>/<session>.deriv");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::Success& e) {
        app.exit(e, io.out, io.err);
        return Complete;
    } catch (const CLI::ParseError& e) {
        app.exit(e, io.out, io.err);
        return Failure;
    }

    if (*check) return cmd_check(files, json, strict, io);
    if (*fmt) return cmd_fmt(files, write, io);
    if (*rules) return cmd_rules(system, query, category, io);
    if (*doc) return cmd_doc(system, rule, io);
    if (*serve) {
        SessionManager::Options o;
        if (export_dir) o.export_dir = *export_dir;
        SessionManager manager(o);
        io.err << "listening on http://" << host << ":" << port << "\n";
        io.err.flush();
        if (!run_server(manager, host, port)) {
            io.err << "cannot listen on " << host << ":" << port << "\n";
            return Failure;
        }
        return Complete;
    }
    return Failure;
}

}  // namespace deriver
