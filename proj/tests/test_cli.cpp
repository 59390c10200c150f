#include <gtest/gtest.h>

#include "bope/cli.hpp"
#include "bope/series.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace bope;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& content)
{
    auto path = std::filesystem::temp_directory_path() / ("bope_cli_" + name);
    std::ofstream(path) << content;
    return path.string();
}

// "(zi-zj)/(zk-zl)" at a point
cplx eval_ratio(const std::string& f, const std::vector<cplx>& z)
{
    int i, j, k, l;
    EXPECT_EQ(std::sscanf(f.c_str(), "(z%d-z%d)/(z%d-z%d)", &i, &j, &k, &l), 4) << f;
    return (z[i - 1] - z[j - 1]) / (z[k - 1] - z[l - 1]);
}

} // namespace

TEST(CliTree, ComposeExamples)
{
    auto r = run({"tree", "compose", "3((12)4)", "2", "2(13)"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "5((1(3(24)))6)\n");
    EXPECT_EQ(run({"tree", "compose", "3((12)4)", "2", ""}).out, "2(13)\n");
    EXPECT_EQ(run({"tree", "compose", "t(c1) o2", "c1", "12"}).out, "t(c1 c2) o3\n");
}

TEST(CliTree, DoubleParsePermute)
{
    auto r = run({"tree", "double", "t(c1) o2"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "(12)3\n");
    EXPECT_EQ(run({"tree", "parse", "( 1 ( 2 3 ) )"}).out, "1(23)\n");
    EXPECT_EQ(run({"tree", "permute", "1(23)", "3,1,2"}).out, "3(12)\n");
    auto j = json::parse(run({"tree", "parse", "t(c1 c2) o3", "--format", "json"}).out);
    EXPECT_EQ(j["kind"], "colored");
    EXPECT_EQ(j["closed"], 2);
    EXPECT_EQ(j["open"], 1);
}

TEST(CliTree, InvalidInputExitsTwo)
{
    for (std::vector<std::string> args : {std::vector<std::string>{"tree", "parse", "(1"},
                                          {"tree", "parse", "1(13)"},
                                          {"tree", "compose", "12", "5", "1"},
                                          {"tree", "permute", "12", "1,1"},
                                          {"tree", "double", "12"},
                                          {"tree", "frobnicate", "12"},
                                          {"tree", "parse", "12", "--format", "xml"},
                                          {"bogus"},
                                          {}}) {
        auto r = run(args);
        EXPECT_EQ(r.code, 2) << args.size();
        EXPECT_TRUE(r.out.empty());
    }
    auto r = run({"tree", "parse", "(1 2"});
    EXPECT_NE(r.err.find("position"), std::string::npos);
}

TEST(CliCoords, WorkedExample)
{
    auto r = run({"coords", "(23)((15)4)"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = json::parse(r.out);
    EXPECT_EQ(j["z_A"], "z4");
    EXPECT_EQ(j["x_A"], "z3-z4");
    std::map<std::string, std::string> zeta;
    for (const auto& e : j["zeta"])
        zeta[e["name"]] = e["formula"];
    EXPECT_EQ(zeta["zeta(23)"], "(z2-z3)/(z3-z4)");
    EXPECT_EQ(zeta["zeta(15)"], "(z1-z5)/(z5-z4)");
    EXPECT_EQ(zeta["zeta((15)4)"], "(z5-z4)/(z3-z4)");
    EXPECT_EQ(j["Q"]["z3"].size(), 1u);
    EXPECT_TRUE(j["Q"]["z4"].empty());
    EXPECT_FALSE(j.contains("values"));
}

TEST(CliCoords, FormulasMatchPsiAtPoint)
{
    std::vector<cplx> z{{0.1, 0.2}, {1.3, 0}, {2, 0}, {-1, 0.5}, {0, 0.05}};
    auto r = run({"coords", "(23)((15)4)", "--point", "0.1+0.2i, 1.3, 2, -1+0.5i, 0.05i"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = json::parse(r.out);
    for (const auto& e : j["zeta"]) {
        cplx want = eval_ratio(e["formula"], z);
        const auto& v = j["values"][e["name"].get<std::string>()];
        EXPECT_NEAR(std::abs(cplx(v[0], v[1]) - want), 0, 1e-15);
    }
    EXPECT_LT(j["roundtrip_error"].get<double>(), 1e-12);
    EXPECT_EQ(j["point"].size(), 5u);
    EXPECT_EQ(run({"coords", "(23)((15)4)", "--point", "1,2"}).code, 2);
    EXPECT_EQ(run({"coords", "(23)((15)4)", "--point", "1,1,2,3,4"}).code, 2);
}

TEST(CliExpand, MatchesTruncatedGeometric)
{
    auto r = run({"expand", "(23)((15)4)", "(z2-z1)^-1", "--N", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = json::parse(r.out);
    EXPECT_EQ(j["N"], 2);
    // x_A^{-1} (1 + u + u^2) with u = -zeta_a + zeta_c + zeta_b zeta_c, degree <= 2
    std::map<std::map<std::string, std::string>, double> want{
        {{{"x_A", "-1"}}, 1},
        {{{"x_A", "-1"}, {"zeta(23)", "1"}}, -1},
        {{{"x_A", "-1"}, {"zeta((15)4)", "1"}}, 1},
        {{{"x_A", "-1"}, {"zeta((15)4)", "1"}, {"zeta(15)", "1"}}, 1},
        {{{"x_A", "-1"}, {"zeta(23)", "2"}}, 1},
        {{{"x_A", "-1"}, {"zeta(23)", "1"}, {"zeta((15)4)", "1"}}, -2},
        {{{"x_A", "-1"}, {"zeta((15)4)", "2"}}, 1},
    };
    ASSERT_EQ(j["terms"].size(), want.size());
    for (const auto& t : j["terms"]) {
        auto key = t["exponents"].get<std::map<std::string, std::string>>();
        ASSERT_TRUE(want.count(key)) << t.dump();
        EXPECT_DOUBLE_EQ(t["re"].get<double>(), want[key]);
        EXPECT_EQ(t["im"].get<double>(), 0.0);
        EXPECT_TRUE(t["logs"].empty());
    }
    EXPECT_EQ(run({"expand", "(23)((15)4)", "(z2-z1)^x"}).code, 2);
    EXPECT_EQ(run({"expand", "(23)((15)4)", "(z7-z1)"}).code, 2);
}

TEST(CliBraid, Actions)
{
    EXPECT_EQ(run({"braid", "perm", "s1 s2"}).out, "3 1 2\n");
    EXPECT_EQ(run({"braid", "mirror", "s1 s2^-1"}).out, "s1^-1 s2\n");
    EXPECT_EQ(run({"braid", "mirror", "e", "--strands", "3"}).out, "e\n");
    EXPECT_EQ(run({"braid", "cable", "s1", "1", "e", "--inner", "2"}).out, "s2 s1\n");
    auto j = json::parse(run({"braid", "generator", "p", "--format", "json"}).out);
    EXPECT_EQ(j["source"], "t(c1) o2");
    EXPECT_EQ(j["target"], "o2 t(c1)");
    EXPECT_EQ(j["word"], "s2^-1 s1");
    EXPECT_EQ(run({"braid", "generator", "zeta"}).code, 2);
    EXPECT_EQ(run({"braid", "perm", "s3", "--strands", "3"}).code, 2);
    EXPECT_EQ(run({"braid", "cable", "s1", "4", "s1"}).code, 2);
}

TEST(CliVerify, BootstrapPasses)
{
    auto cfg = temp_file("model.json", R"({"R_squared": "2", "reflection": "+1"})");
    auto r = run({"verify", "bootstrap", "--config", cfg});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = json::parse(r.out);
    EXPECT_EQ(j["check"], "bootstrap");
    EXPECT_TRUE(j["pass"].get<bool>());
    EXPECT_EQ(j["parameters"]["box"], 5);
    EXPECT_EQ(j["sample_count"], 1 + 2 * 121 * 121 + 11 * 121);
    EXPECT_FALSE(j.contains("runtime"));
    auto timed = json::parse(run({"verify", "bootstrap", "--config", cfg, "--timing"}).out);
    EXPECT_TRUE(timed.contains("runtime"));
}

TEST(CliVerify, AllActionsPassOnDefaults)
{
    for (std::string a : {"bulk-consistency", "boundary-consistency", "skew", "regions"}) {
        auto r = run({"verify", a, "--format", "text"});
        EXPECT_EQ(r.code, 0) << a << "\n" << r.out << r.err;
        EXPECT_EQ(r.out.rfind(a + ": pass", 0), 0u) << r.out;
    }
    auto cfg = temp_file("neg.json", R"({"R_squared": "3", "reflection": "-1", "charges": [[2, -1], [1, 2]],
                                         "truncation": 30, "tolerance": 1e-6, "seed": 4, "points": 5})");
    EXPECT_EQ(run({"verify", "boundary-consistency", "--config", cfg}).code, 0);
}

TEST(CliVerify, FailureExitsOne)
{
    auto cfg = temp_file("fail.json", R"({"R_squared": "1/2", "truncation": 0, "tolerance": 1e-12, "points": 3})");
    auto r = run({"verify", "bulk-consistency", "--config", cfg});
    EXPECT_EQ(r.code, 1);
    EXPECT_FALSE(json::parse(r.out)["pass"].get<bool>());
}

TEST(CliVerify, InputErrorsExitTwo)
{
    auto bad_json = temp_file("bad.json", "{\"R_squared\": ");
    auto bad_rho = temp_file("rho.json", R"({"reflection": "+2"})");
    auto bad_r = temp_file("r.json", R"({"R_squared": "0"})");
    auto bad_ch = temp_file("ch.json", R"({"charges": [[1, 2, 3]]})");
    EXPECT_EQ(run({"verify", "bootstrap", "--config", "/nonexistent/model.json"}).code, 2);
    EXPECT_EQ(run({"verify", "bootstrap", "--config", bad_json}).code, 2);
    EXPECT_EQ(run({"verify", "bootstrap", "--config", bad_rho}).code, 2);
    EXPECT_EQ(run({"verify", "bootstrap", "--config", bad_r}).code, 2);
    EXPECT_EQ(run({"verify", "skew", "--config", bad_ch}).code, 2);
    EXPECT_EQ(run({"verify", "everything"}).code, 2);
    EXPECT_EQ(run({"verify", "skew", "--N", "x"}).code, 2);
}

TEST(CliVerify, DeterministicJson)
{
    std::vector<std::string> args{"verify", "boundary-consistency", "--seed", "17", "--N", "20"};
    auto a = run(args), b = run(args);
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(json::parse(a.out)["seed"], 17);
    auto c = run({"verify", "boundary-consistency", "--seed", "18", "--N", "20"});
    EXPECT_NE(a.out, c.out);
}

TEST(CliOutput, WritesFile)
{
    auto path = (std::filesystem::temp_directory_path() / "bope_cli_out.txt").string();
    std::filesystem::remove(path);
    auto r = run({"tree", "double", "t(c1 c2)", "--out", path});
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(r.out.empty());
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "(13)(24)");
}

TEST(CliJson, SeventeenDigits)
{
    EXPECT_EQ(dump_json(json(0.1), -1), "0.10000000000000001");
    EXPECT_EQ(dump_json(json::array({1.0 / 3, 2, "a"}), -1), "[0.33333333333333331,2,\"a\"]");
    EXPECT_EQ(dump_json(json(std::nan("")), -1), "null");
    EXPECT_EQ(json::parse(dump_json({{"x", 0.1}})).at("x").get<double>(), 0.1);
}

TEST(CliJson, ParseComplex)
{
    EXPECT_EQ(parse_complex("1.5"), cplx(1.5, 0));
    EXPECT_EQ(parse_complex("-2i"), cplx(0, -2));
    EXPECT_EQ(parse_complex("i"), cplx(0, 1));
    EXPECT_EQ(parse_complex("0.3+0.2i"), cplx(0.3, 0.2));
    EXPECT_EQ(parse_complex("1e-3-4e-2i"), cplx(1e-3, -4e-2));
    EXPECT_EQ(parse_complex("-1-i"), cplx(-1, -1));
    EXPECT_EQ(parse_point("1, 2i 3-i").size(), 3u);
    EXPECT_THROW(parse_complex("1+2j"), std::invalid_argument);
    EXPECT_THROW(parse_complex(""), std::invalid_argument);
}
