#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <spacelab/spacelab.hpp>

using namespace spacelab;

namespace {

const std::string kInstances = SPACELAB_INSTANCES;
const std::string kCli = SPACELAB_CLI;

struct Run {
    int code = -1;
    std::string out;
};

Run run_cli(const std::string& args)
{
    Run r;
    std::string cmd = kCli + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string instance(const std::string& name) { return kInstances + "/" + name; }

ErrorKind parse_kind(const std::string& text)
{
    try {
        parse_instance_text(text);
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "parsed: " << text;
    return ErrorKind::NotFound;
}

} // namespace

TEST(Instance, DeskParses)
{
    auto f = parse_instance(instance("desk.json"));
    EXPECT_EQ(f.posets.size(), 3u);
    EXPECT_EQ(f.maps.size(), 3u);
    EXPECT_EQ(f.actions.size(), 3u);
    const auto& swap = f.actions.at("swap");
    EXPECT_TRUE(swap.monoid()->is_group());
    EXPECT_EQ(swap.act(1, 0), 1u);
    EXPECT_EQ(f.maps.at("bottom")(0), 0u);
    EXPECT_FALSE(f.has_suites);
}

TEST(Instance, OtherExamplesParse)
{
    auto m = parse_instance(instance("min_monoid.json"));
    ASSERT_EQ(m.actions.size(), 1u);
    EXPECT_FALSE(m.actions.begin()->second.monoid()->is_group());
    EXPECT_TRUE(m.has_suites);
    EXPECT_EQ(m.suites, std::vector<std::string>{"sigma"});
    auto r = parse_instance(instance("regular_c3.json"));
    EXPECT_EQ(r.actions.size(), 2u);
}

TEST(Instance, ShorthandPosets)
{
    auto f = parse_instance_text(R"({"posets": {"C3": {"chain": 3}, "D2": {"discrete": 2}}})");
    EXPECT_EQ(f.posets.at("C3")->size(), 3u);
    EXPECT_TRUE(f.posets.at("D2")->is_discrete());
}

TEST(Instance, InvalidFiles)
{
    auto kind = [](const std::string& name) {
        try {
            parse_instance(instance("invalid/" + name));
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::NotFound;
    };
    EXPECT_EQ(kind("syntax.json"), ErrorKind::SyntaxError);
    EXPECT_EQ(kind("unknown_poset.json"), ErrorKind::UnresolvedReference);
    EXPECT_EQ(kind("non_monotone.json"), ErrorKind::LawViolation);
    EXPECT_EQ(kind("bad_action.json"), ErrorKind::LawViolation);
}

TEST(Instance, ErrorsCarryLocations)
{
    try {
        parse_instance_text(R"({"posets": {"C2": {"chain": 2}},
            "maps": {"flip": {"from": "C2", "to": "C2", "assign": {"0": "1", "1": "0"}}}})");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::LawViolation);
        EXPECT_EQ(e.witness()["location"], "maps.flip");
        EXPECT_EQ(e.witness()["kind"], "NotMonotone");
    }
    EXPECT_EQ(parse_kind(R"({"posets": {"X": {"elements": ["a"], "covers": [["a", "b"]]}}})"),
              ErrorKind::UnresolvedReference);
    EXPECT_EQ(parse_kind(R"({"posets": {"X": {"elements": ["a", "b"], "covers": [["a", "b"], ["b", "a"]]}}})"),
              ErrorKind::LawViolation);
    EXPECT_EQ(parse_kind(R"({"shapes": {}})"), ErrorKind::SyntaxError);
    EXPECT_EQ(parse_kind("{\"posets\": "), ErrorKind::SyntaxError);
}

TEST(Instance, SizeCap)
{
    Caps caps;
    caps.max_poset = 2;
    EXPECT_THROW(parse_instance_text(R"({"posets": {"C3": {"chain": 3}}})", caps), Error);
}

TEST(Instance, FragmentsRoundTrip)
{
    auto v = make_poset_named({"a", "b", "c"}, {{"a", "b"}, {"a", "c"}}, "V");
    nlohmann::json doc = {{"posets", {{"V", poset_fragment(*v)}}}};
    auto f = parse_instance_json(doc);
    EXPECT_TRUE(f.posets.at("V")->same_as(*v));

    auto g = cyclic_group(2);
    auto a = make_acted(g, discrete(2), {0, 1, 1, 0}, "swap");
    auto back = parse_instance_json(action_fragment(a, "sigma"));
    ASSERT_EQ(back.actions.size(), 1u);
    EXPECT_EQ(back.actions.begin()->second.table(), a.table());
    EXPECT_EQ(back.suites, std::vector<std::string>{"sigma"});
}

TEST(Report, EmptySelection)
{
    auto f = parse_instance_text(R"({"posets": {"C2": {"chain": 2}}, "suites": []})");
    auto r = run_suite("all", &f);
    EXPECT_TRUE(r.checks.empty());
    EXPECT_TRUE(r.passed());
    EXPECT_NE(r.to_text().find("no checks selected"), std::string::npos);
}

TEST(Report, JsonShape)
{
    auto f = parse_instance(instance("desk.json"));
    auto r = run_suite("open", &f);
    auto j = r.to_json();
    EXPECT_EQ(j["suite"], "open");
    EXPECT_EQ(j["version"], kVersion);
    ASSERT_TRUE(j["checks"].is_array());
    ASSERT_FALSE(j["checks"].empty());
    for (const auto& c : j["checks"]) {
        EXPECT_TRUE(c.contains("id"));
        EXPECT_TRUE(c.contains("status"));
        EXPECT_TRUE(c.contains("millis"));
    }
    EXPECT_TRUE(j["caps"].contains("max_poset"));
}

TEST(Report, UnknownSuite)
{
    EXPECT_THROW(run_suite("nonsense", nullptr), Error);
}

TEST(Replay, MinMonoidFragmentReproducesFailure)
{
    auto f = parse_instance(instance("min_monoid.json"));
    auto r = run_suite("all", &f);
    ASSERT_FALSE(r.passed());
    const CheckResult* failed = nullptr;
    for (const auto& c : r.checks) {
        if (c.status == Status::Fail) failed = &c;
    }
    ASSERT_NE(failed, nullptr);
    ASSERT_FALSE(failed->fragment.is_null());
    auto replay = parse_instance_json(failed->fragment);
    auto again = run_suite("all", &replay);
    EXPECT_EQ(again.to_json(false), r.to_json(false));
}

TEST(Cli, ExitCodes)
{
    EXPECT_EQ(run_cli("all " + instance("desk.json")).code, 0);
    EXPECT_EQ(run_cli("sigma " + instance("min_monoid.json")).code, 1);
    EXPECT_EQ(run_cli("all " + instance("invalid/syntax.json")).code, 2);
    EXPECT_EQ(run_cli("all " + instance("invalid/non_monotone.json")).code, 2);
    EXPECT_EQ(run_cli("bogus").code, 2);
    EXPECT_EQ(run_cli("all /nonexistent.json").code, 2);
    EXPECT_EQ(run_cli("catalog --catalog 7 --max-poset 6").code, 2);
}

TEST(Cli, MinMonoidDiagnosticIsStructured)
{
    auto r = run_cli("sigma " + instance("min_monoid.json") + " --format json");
    ASSERT_EQ(r.code, 1);
    auto j = nlohmann::json::parse(r.out);
    bool found = false;
    for (const auto& c : j["checks"]) {
        if (c["status"] != "fail") continue;
        for (const auto& w : c["witnesses"]) {
            if (w.contains("witness") && w["witness"].contains("diagnostic")) {
                EXPECT_EQ(w["witness"]["diagnostic"]["stage"], "fork-equation");
                found = true;
            }
        }
        EXPECT_TRUE(c["witnesses"].back().contains("fragment"));
    }
    EXPECT_TRUE(found);
}

TEST(Cli, JsonIsDeterministic)
{
    auto a = run_cli("all " + instance("desk.json") + " --format json --no-timing");
    auto b = run_cli("all " + instance("desk.json") + " --format json --no-timing");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_NO_THROW(nlohmann::json::parse(a.out));
}

TEST(Cli, CatalogList)
{
    auto r = run_cli("catalog --catalog 3 --list");
    ASSERT_EQ(r.code, 0);
    auto doc = nlohmann::json::parse(r.out);
    EXPECT_EQ(doc["posets"].size(), 9u);
    auto f = parse_instance_json(doc);
    EXPECT_EQ(f.posets.size(), 9u);
}

TEST(Cli, TextReportNamesReplay)
{
    auto r = run_cli("sigma " + instance("min_monoid.json"));
    EXPECT_NE(r.out.find("fail"), std::string::npos);
    EXPECT_NE(r.out.find("replay: "), std::string::npos);
}
