#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "json.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

// Runs the CLI with stderr folded into the captured output.
Run cli(const std::string& args) {
    std::string cmd = std::string(SPINORFORGE_CLI) + " " + args + " 2>&1";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    fs::path d = fs::temp_directory_path() / "spinorforge_cli_test";
    fs::create_directories(d);
    return d / name;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

json read(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

const std::string kFlat = std::string(SPINORFORGE_DATA) + "/flat_vacuum.json";

}  // namespace

TEST_CASE("verify algebra passes for the documented seed") {
    Run r = cli("verify --suite algebra --seed 42 --samples 500");
    CHECK(r.code == 0);
    CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("verify report is byte-identical for a fixed seed apart from meta") {
    Run a = cli("verify --suite all --seed 7 --samples 40 --json");
    Run b = cli("verify --suite all --seed 7 --samples 40 --json");
    REQUIRE(a.code == 0);
    json ja = json::parse(a.out), jb = json::parse(b.out);
    CHECK(ja["report"].dump() == jb["report"].dump());
    CHECK(ja["report"]["seed"] == 7);
    CHECK(ja["meta"].contains("timestamp"));
    Run c = cli("verify --suite all --seed 8 --samples 40 --json");
    CHECK(json::parse(c.out)["report"].dump() != ja["report"].dump());
}

TEST_CASE("an impossible tolerance makes verify exit 1") {
    CHECK(cli("verify --suite algebra --samples 20 --tol 1e-300").code == 1);
}

TEST_CASE("cover maps the identity of SL(2,C) to the identity Lorentz matrix") {
    Run r = cli("cover --from sl --to lorentz --json");
    REQUIRE(r.code == 0);
    json L = json::parse(r.out)["L"];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(L[i][j].get<double>() == (i == j ? 1.0 : 0.0));
}

TEST_CASE("cover converts a boost and its inverse direction") {
    double c = std::cosh(0.5), s = std::sinh(0.5);
    json in{{"L", {{c, s, 0, 0}, {s, c, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}}};
    fs::path p = scratch("boost.json");
    write(p, in.dump());
    Run r = cli("cover --input " + p.string() + " --from lorentz --to sl --json");
    REQUIRE(r.code == 0);
    json k = json::parse(r.out);
    fs::path q = scratch("k.json");
    write(q, json{{"K", k["K"]}}.dump());
    Run back = cli("cover --input " + q.string() + " --from sl --to lorentz --json");
    REQUIRE(back.code == 0);
    json L = json::parse(back.out)["L"];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(L[i][j].get<double>() == doctest::Approx(in["L"][i][j].get<double>()).epsilon(1e-12));
    // an improper matrix is outside the cover
    write(p, json{{"L", {{-1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}}}.dump());
    CHECK(cli("cover --input " + p.string() + " --from lorentz --to sl").code == 2);
}

TEST_CASE("momentum reports stratum and agreeing conditions") {
    fs::path p = scratch("psi.json");
    write(p, R"({"u": [[1, 0], [0, 0.5]], "chi": [[0.3, 0.2], [0, 1]]})");
    Run r = cli("momentum --psi " + p.string() + " --json");
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["stratum"] == "Wback");
    CHECK(j["conditions_agree"] == true);
    CHECK(j["mu"].get<double>() > 0.0);
    write(p, R"({"u": [[1, 0], [0, 0]], "chi": [0, [0, 1]]})");
    j = json::parse(cli("momentum --psi " + p.string() + " --json").out);
    CHECK(j["stratum"] == "W0");
    CHECK(j["conditions"].is_null());
}

TEST_CASE("field eval on the bundled flat vacuum passes with tiny residuals") {
    fs::path rep = scratch("flat_report.json");
    Run r = cli("field eval --config " + kFlat + " --report " + rep.string());
    CHECK(r.code == 0);
    json j = read(rep);
    CHECK(j["report"]["pass"] == true);
    CHECK(j["report"]["sites_evaluated"].get<int>() > 0);
    for (const auto& st : j["report"]["stats"]) CHECK(st["max"].get<double>() < 1e-12);
    std::string first = j["report"].dump();
    cli("field eval --serial --config " + kFlat + " --report " + rep.string());
    CHECK(read(rep)["report"].dump() == first);
}

TEST_CASE("malformed configurations exit 2 and name the key") {
    json cfg = read(kFlat);
    fs::path p = scratch("bad.json");

    json bad = cfg;
    bad["a"] = {{0, 0, "x", 0}};
    write(p, bad.dump());
    Run r = cli("field eval --config " + p.string());
    CHECK(r.code == 2);
    CHECK(r.out.find("a[0][2]") != std::string::npos);

    bad = cfg;
    bad.erase("psi");
    write(p, bad.dump());
    r = cli("field eval --config " + p.string());
    CHECK(r.code == 2);
    CHECK(r.out.find("psi") != std::string::npos);

    bad = cfg;
    bad["grid"]["spacing"][1] = -0.1;
    write(p, bad.dump());
    r = cli("field eval --config " + p.string());
    CHECK(r.code == 2);
    CHECK(r.out.find("grid.spacing[1]") != std::string::npos);

    write(p, "{not json");
    CHECK(cli("field eval --config " + p.string()).code == 2);
    CHECK(cli("field eval --config /nonexistent/config.json").code == 2);
}

TEST_CASE("field oracle matches on the flat vacuum and refuses edge sites") {
    Run r = cli("field oracle --config " + kFlat + " --site 3,3,2,3 --field theta --json");
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["components"].size() == 16);
    CHECK(j["max_abs_diff"].get<double>() < 1e-12);
    CHECK(cli("field oracle --config " + kFlat + " --site 1,3,3,3 --field A").code == 2);
    CHECK(cli("field oracle --config " + kFlat + " --site 3,3,3 --field A").code == 2);
    CHECK(cli("field oracle --config " + kFlat + " --site 3,3,3,9 --field psi").code == 2);
}

TEST_CASE("usage errors exit 2") {
    CHECK(cli("").code == 2);
    CHECK(cli("frobnicate").code == 2);
    CHECK(cli("verify --suite nope").code == 2);
    CHECK(cli("field oracle --config x.json --site 3,3,3,3 --field B").code == 2);
    CHECK(cli("--help").code == 0);
}
