// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sstream>

#include "fixtures.hpp"
#include "tablepref/cli.hpp"
#include "tablepref/io.hpp"
#include "test_support.hpp"

using namespace tablepref;
using json = nlohmann::json;
using tablepref::testing::TempDir;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

json last_error(const Run& r) {
    const auto start = r.err.rfind("{\"error\"");
    REQUIRE(start != std::string::npos);
    const std::string line = r.err.substr(start);
    CHECK(std::count(line.begin(), line.end(), '\n') == 1);
    return json::parse(line);
}

}  // namespace

TEST_CASE("simulate, mock predict and eval-batch close the loop") {
    TempDir dir("cli");
    const std::string bench = dir.sub("bench");
    REQUIRE(cli({"simulate", "--seed", "7", "--context-len", "1", "--out", bench}).code == 0);
    REQUIRE(cli({"mock-script", "--benchmark", bench, "--method", "mouma", "--out", dir.sub("m.json")}).code == 0);
    const Run p = cli({"predict", "--provider", "mock", "--mock-script", dir.sub("m.json"), "--method", "mouma",
                       "--benchmark", bench, "--out", dir.sub("pred/MOUMA"), "--jobs", "2"});
    REQUIRE(p.code == 0);
    const Run e = cli({"eval-batch", "--manifest", bench, "--pred", dir.sub("pred/MOUMA"), "--json", dir.sub("e.json")});
    REQUIRE(e.code == 0);
    CHECK(e.out.find("MOUMA,all,72,72,1.000000,1.000000,0.000000") != std::string::npos);
    CHECK(read_json_file(dir.sub("e.json")).at("cases").size() == 72);

    const Run one = cli({"predict", "--provider", "mock", "--mock-script", dir.sub("m.json"), "--method", "mouma",
                         "--case", bench + "/cases/case_000"});
    REQUIRE(one.code == 0);
    const json pred = json::parse(one.out);
    CHECK(pred.at("case") == "case_000");
    write_json_file(dir.sub("one.json"), pred);
    const Run ev = cli({"eval", "--gt", bench + "/cases/case_000/ground_truth.json", "--pred", dir.sub("one.json"),
                        "--catalog", bench + "/catalog"});
    REQUIRE(ev.code == 0);
    CHECK(json::parse(ev.out).at("accuracy") == 1.0);

    REQUIRE(cli({"render", "--method", "mogma", "--grid", "10x10", "--case", bench + "/cases/case_000", "--out",
                 dir.sub("render")})
                .code == 0);
    CHECK(std::filesystem::exists(dir.sub("render/prompt.txt")));
    CHECK(std::filesystem::exists(dir.sub("render/initial_state_1.jpg")));
    CHECK(read_json_file(dir.sub("render/bundle.json")).at("images").size() == 1 + 1 + 5);
}

TEST_CASE("exit codes and single-line errors") {
    TempDir dir("cli");
    const std::string bench = dir.sub("bench");
    REQUIRE(cli({"simulate", "--context-len", "0", "--out", bench}).code == 0);

    Run r = cli({"predict", "--method", "logma", "--case", bench + "/cases/case_000"});
    CHECK(r.code == kExitUsage);
    CHECK(last_error(r)["error"]["code"] == "config_error");

    r = cli({"eval", "--gt", dir.sub("missing.json"), "--pred", dir.sub("missing.json")});
    CHECK(r.code == kExitData);
    CHECK(last_error(r)["error"]["exit"] == kExitData);

    ::unsetenv("TABLEPREF_CLI_UNSET");
    r = cli({"predict", "--provider", "openai", "--model", "m", "--credential-env", "TABLEPREF_CLI_UNSET", "--method",
             "louma", "--case", bench + "/cases/case_000"});
    CHECK(r.code == kExitProvider);
    CHECK(last_error(r)["error"]["code"] == "provider_error");

    r = cli({"simulate"});
    CHECK(r.code == kExitUsage);
    CHECK(last_error(r)["error"]["code"] == "usage_error");

    r = cli({"--help"});
    CHECK(r.code == kExitOk);
    for (const char* sub : {"simulate", "render", "predict", "eval", "eval-batch", "acceptability", "contexts", "serve"}) {
        CHECK(r.out.find(sub) != std::string::npos);
    }
}

TEST_CASE("config file supplies defaults and flags override it") {
    TempDir dir("cli");
    write_file_atomic(dir.sub("cfg.toml"), "[simulate]\ncontext-len = 0\nseed = 3\nout = \"" + dir.sub("a") + "\"\n");
    REQUIRE(cli({"--config", dir.sub("cfg.toml"), "simulate"}).code == 0);
    CHECK(read_json_file(dir.sub("a/manifest.json")).at("context_length") == 0);
    REQUIRE(cli({"--config", dir.sub("cfg.toml"), "simulate", "--context-len", "2", "--out", dir.sub("b")}).code == 0);
    const json m = read_json_file(dir.sub("b/manifest.json"));
    CHECK(m.at("context_length") == 2);
    CHECK(m.at("seed") == 3);
}

TEST_CASE("acceptability on the planted fixture equals the hand count") {
    TempDir dir("cli");
    const std::vector<double> taus = {0.01, 0.05, 0.10};
    const auto tiers = oracle::search_tiers({0.727, 0.333, 0.199});
    const auto sliders = tablepref::testing::planted_sliders(taus, tiers, 99);
    std::string lines;
    for (const RatingRecord& r : tablepref::testing::to_ratings(sliders)) lines += to_json(r).dump() + "\n";
    write_file_atomic(dir.sub("ratings.jsonl"), lines);

    const Run r = cli({"acceptability", "--ratings", dir.sub("ratings.jsonl"), "--csv", dir.sub("acc.csv")});
    REQUIRE(r.code == 0);
    const json report = json::parse(r.out);
    for (std::size_t k = 0; k < taus.size(); ++k) {
        const oracle::Tier hand = oracle::count_acceptance(sliders, taus[k]);
        const json& row = report.at("rows")[k];
        CHECK(row.at("people_accepting") == hand.accept);
        CHECK(row.at("people_total") == hand.total);
    }
    CHECK(read_text_file(dir.sub("acc.csv")).rfind("threshold,", 0) == 0);
    CHECK(cli({"acceptability", "--ratings", dir.sub("ratings.jsonl"), "--thresholds", "0.1,x"}).code == kExitUsage);
}
