#include <doctest.h>

#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "deriver/cli.hpp"
#include "deriver/report.hpp"

using namespace deriver;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(args, {out, err, false});
    return {code, out.str(), err.str()};
}

std::string golden(const std::string& rel) { return std::string(GOLDEN_DIR) + "/" + rel; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch_dir() { return fs::temp_directory_path() / ("deriver-cli-" + std::to_string(::getpid())); }

struct ScratchCleanup {
    ~ScratchCleanup() {
        std::error_code ec;
        fs::remove_all(scratch_dir(), ec);
    }
} cleanup;

fs::path scratch(const std::string& name, const std::string& text) {
    fs::path dir = scratch_dir();
    fs::create_directories(dir);
    std::ofstream(dir / name, std::ios::binary) << text;
    return dir / name;
}

int expected_code(const fs::path& p) {
    std::string dir = p.parent_path().filename();
    if (dir == "correct") return 0;
    if (dir == "incomplete") return 1;
    if (dir == "errors") return 2;
    return 3;
}

std::vector<fs::path> corpus() {
    std::vector<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(GOLDEN_DIR))
        if (e.path().extension() == ".deriv") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("check a correct file") {
    Run r = run({"check", golden("correct/e-plus.deriv")});
    CHECK(r.code == 0);
    CHECK(r.out.find("CompleteCorrect (3 nodes)") != std::string::npos);
    CHECK(r.err.empty());
}

TEST_CASE("check reports the broken sum as JSON") {
    std::string text = slurp(golden("correct/e-plus.deriv"));
    auto at = text.find("evalto 3");
    REQUIRE(at != std::string::npos);
    text.replace(at, 8, "evalto 4");
    Run r = run({"check", scratch("broken.deriv", text).string(), "--json"});
    CHECK(r.code == 2);
    Json j = Json::parse(r.out);
    CHECK(j["exit_code"] == 2);
    CHECK(j["tree_status"] == "HasErrors");
    Json root = j["nodes"]["root"];
    CHECK(root["rule"] == "E-Plus");
    REQUIRE(root["errors"].size() == 1);
    CHECK(root["errors"][0]["locus"]["kind"] == "SideCondition");
    CHECK(root["errors"][0]["message"] == "Expected 3 (= 1 + 2), but found 4.");
    CHECK(root["errors"][0]["line"] == 3);
}

TEST_CASE("exit codes over the golden corpus") {
    for (const auto& p : corpus()) {
        CAPTURE(p.string());
        CHECK(run({"check", p.string()}).code == expected_code(p));
        CHECK(run({"check", "--json", p.string()}).code == expected_code(p));
    }
}

TEST_CASE("strict mode fails incomplete derivations") {
    CHECK(run({"check", golden("incomplete/fresh.deriv")}).code == 1);
    CHECK(run({"check", "--strict", golden("incomplete/fresh.deriv")}).code == 2);
    CHECK(run({"check", "--strict", golden("correct/e-plus.deriv")}).code == 0);
}

TEST_CASE("several files keep argument order and report the worst code") {
    std::vector<std::string> files = {golden("errors/typing-mismatch.deriv"), golden("correct/e-plus.deriv"),
                                      golden("incomplete/fresh.deriv"), golden("correct/typing-app.deriv")};
    std::vector<std::string> args = {"check"};
    args.insert(args.end(), files.begin(), files.end());
    Run a = run(args);
    CHECK(a.code == 2);
    std::size_t last = 0;
    for (const auto& f : files) {
        auto at = a.out.find(f + ": ");
        REQUIRE(at != std::string::npos);
        CHECK(at >= last);
        last = at;
    }
    for (int i = 0; i < 5; ++i) CHECK(run(args).out == a.out);

    args.push_back(golden("parse/double-plus.deriv"));
    Run b = run(args);
    CHECK(b.code == 3);
    CHECK(b.err.find("double-plus.deriv:3:7: error:") != std::string::npos);
    CHECK(run({"check", "/nonexistent/x.deriv"}).code == 3);
}

TEST_CASE("fmt is idempotent") {
    for (const auto& p : corpus()) {
        if (expected_code(p) == 3) continue;
        CAPTURE(p.string());
        Run once = run({"fmt", p.string()});
        REQUIRE(once.code == 0);
        Run twice = run({"fmt", scratch("fmt.deriv", once.out).string()});
        CHECK(twice.out == once.out);
    }
    fs::path messy = scratch("messy.deriv", "system alfa-eval\nderive:\n  1+2 evalto 3 by E-Plus\n    1 evalto 1 by E-Num\n"
                                            "    2 evalto 2 by   E-Num\n");
    CHECK(run({"fmt", "--write", messy.string()}).code == 0);
    CHECK(slurp(messy) == slurp(golden("correct/e-plus.deriv")));
    CHECK(run({"fmt", golden("parse/tab-indent.deriv")}).code == 3);
}

TEST_CASE("rules and doc") {
    Run r = run({"rules", "prop-nd", "--query", "and"});
    CHECK(r.code == 0);
    for (const char* n : {"AndI", "AndE1", "AndE2"}) CHECK(r.out.find(n) != std::string::npos);
    CHECK(run({"rules", "alfa-eval", "--category", "Nope"}).code == 3);
    CHECK(run({"rules", "bogus"}).code == 3);
    Run d = run({"doc", "alfa-eval", "E-Plus"});
    CHECK(d.code == 0);
    CHECK(d.out.find("E-Plus") != std::string::npos);
    CHECK(d.out.find("\x1b[") == std::string::npos);
    CHECK(run({"doc", "alfa-eval", "T-Plus"}).code == 3);
}

TEST_CASE("usage errors") {
    CHECK(run({}).code == 3);
    CHECK(run({"check"}).code == 3);
    CHECK(run({"frobnicate"}).code == 3);
    CHECK(run({"serve", "--port", "99999"}).code == 3);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("the installed binary") {
    for (const auto& p : corpus()) {
        CAPTURE(p.string());
        std::string cmd = std::string("DERIVER_NO_COLOR=1 '") + DERIVER_BIN + "' check '" + p.string() + "' >/dev/null 2>&1";
        int status = std::system(cmd.c_str());
        REQUIRE(WIFEXITED(status));
        CHECK(WEXITSTATUS(status) == expected_code(p));
    }
}

}
