// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "prompt_fixture.hpp"
#include "sample_gen.hpp"
#include "tablepref/angles.hpp"
#include "tablepref/cli.hpp"
#include "tablepref/dataset.hpp"
#include "tablepref/io.hpp"
#include "tablepref/pipeline.hpp"
#include "tablepref/prompts.hpp"
#include "tablepref/service.hpp"
#include "test_support.hpp"

// After Eigen: <resolv.h> defines _res.
#include <httplib.h>

using namespace tablepref;
using json = nlohmann::json;
using tablepref::testing::TempDir;

namespace {

constexpr double kKabschTol = 1e-6;
constexpr double kKabschBudgetS = 10.0;
constexpr double kInvarianceTol = 1e-9;
constexpr double kClosedLoopTol = 1e-9;
constexpr double kSwapTol = 1e-12;
constexpr double kGridCentroidTol = 1e-12;
constexpr double kCircularTol = 1e-9;
constexpr double kStudyFlowBudgetS = 60.0;

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

const Catalog& cat() { return tablepref::testing::placeholder_catalog(); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

int run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    if (code != 0) std::fprintf(stderr, "%s", err.str().c_str());
    return code;
}

Outcome kabsch_oracle() {
    Outcome o;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 1 + static_cast<std::size_t>(i % 8);
        std::vector<Eigen::Vector2d> a, b;
        std::vector<oracle::P2> pa, pb;
        for (std::size_t k = 0; k < n; ++k) {
            a.emplace_back(unit(rng), unit(rng));
            b.emplace_back(unit(rng), unit(rng));
            pa.push_back({a.back().x(), a.back().y()});
            pb.push_back({b.back().x(), b.back().y()});
        }
        worst = std::max(worst, std::fabs(kabsch(a, b).rmsd - oracle::angle_scan_rmsd(pa, pb)));
    }
    const double elapsed = seconds_since(t0);
    o.require(worst <= kKabschTol, "max deviation " + num(worst));
    o.require(elapsed < kKabschBudgetS, "took " + num(elapsed) + " s");
    if (o.ok) o.detail = "200 sets, max deviation " + num(worst) + ", " + num(elapsed) + " s";
    return o;
}

Outcome registration_invariance() {
    Outcome o;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> deg(0.0, 360.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Arrangement gt = tablepref::testing::random_arrangement(rng, cat(), 2 + i % 5);
        const Arrangement pred = tablepref::testing::random_arrangement(rng, cat(), 2 + i % 5);
        Arrangement moved = pred;
        const double th = deg(rng) * std::numbers::pi / 180.0;
        const double cx = unit(rng), cy = unit(rng), tx = unit(rng) - 0.5, ty = unit(rng) - 0.5;
        for (Placement& p : moved.placements) {
            const double dx = p.x - cx, dy = p.y - cy;
            p.x = cx + std::cos(th) * dx - std::sin(th) * dy + tx;
            p.y = cy + std::sin(th) * dx + std::cos(th) * dy + ty;
        }
        const auto r0 = evaluate(gt, pred, cat()).rmsd;
        const auto r1 = evaluate(gt, moved, cat()).rmsd;
        if (!r0 || !r1) {
            o.require(false, "missing rmsd in trial " + std::to_string(i));
            continue;
        }
        worst = std::max(worst, std::fabs(*r0 - *r1));
    }
    o.require(worst <= kInvarianceTol, "max change " + num(worst));
    if (o.ok) o.detail = "100 trials, max change " + num(worst);
    return o;
}

Outcome matching_conformance() {
    Outcome o;
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::size_t> side(1, 5);
    for (int i = 0; i < 50; ++i) {
        const Arrangement gt = tablepref::testing::random_arrangement(rng, cat(), side(rng));
        const Arrangement pred = tablepref::testing::random_arrangement(rng, cat(), side(rng));
        std::vector<std::vector<int>> d;
        for (const Placement& g : gt.placements) {
            std::vector<int> row;
            for (const Placement& p : pred.placements) {
                const int recount = oracle::hamming_recount(cat().at(g.object), cat().at(p.object));
                o.require(hamming(cat().at(g.object), cat().at(p.object)) == recount,
                          "hamming disagrees with recount in instance " + std::to_string(i));
                row.push_back(recount);
            }
            d.push_back(row);
        }
        const auto trace = oracle::greedy_trace(d, pred.length());
        const MatchResult m = match(gt, pred, cat());
        bool same = m.size() == trace.size();
        for (std::size_t k = 0; same && k < trace.size(); ++k) {
            same = m.pairs[k].gt == trace[k].first && m.pairs[k].pred == trace[k].second &&
                   m.pairs[k].distance == d[trace[k].first][trace[k].second];
        }
        o.require(same, "greedy trace differs in instance " + std::to_string(i));
    }
    if (o.ok) o.detail = "50 instances match the hand trace";
    return o;
}

Outcome closed_loop() {
    Outcome o;
    TempDir dir("accept_loop");
    const std::string bench = dir.sub("bench");
    o.require(run({"simulate", "--seed", "7", "--out", bench}) == 0, "simulate failed");
    if (!o.ok) return o;
    const std::map<std::string, std::string> modes = {{"truth", "T"}, {"shift", "S"}, {"swap-color", "W"}};
    std::string summary;
    for (const auto& [mode, tag] : modes) {
        const std::string script = dir.sub(mode + ".json");
        const std::string pred = dir.sub("pred_" + mode);
        const std::string report = dir.sub("eval_" + mode + ".json");
        const bool ran = run({"mock-script", "--benchmark", bench, "--method", "louma", "--mode", mode, "--out", script}) == 0 &&
                         run({"predict", "--provider", "mock", "--mock-script", script, "--method", "louma",
                              "--benchmark", bench, "--out", pred}) == 0 &&
                         run({"eval-batch", "--manifest", bench, "--pred", pred, "--json", report}) == 0;
        o.require(ran, mode + ": pipeline failed");
        if (!ran) continue;
        const json cases = read_json_file(report).at("cases");
        o.require(cases.size() == 72, mode + ": " + std::to_string(cases.size()) + " cases");
        const BenchmarkManifest m = load_manifest(bench);
        double rmsd_sum = 0.0;
        for (std::size_t i = 0; i < cases.size(); ++i) {
            const json& c = cases[i];
            if (!c.contains("report") || !c["report"]["rmsd"].is_number()) {
                o.require(false, mode + ": no report for " + c.value("case", std::string("?")));
                continue;
            }
            const double acc = c["report"]["accuracy"].get<double>();
            const double rmsd = c["report"]["rmsd"].get<double>();
            rmsd_sum += rmsd;
            if (mode == "swap-color") {
                const double t = static_cast<double>(load_case(m.case_dirs[i]).ground_truth.length());
                o.require(std::fabs(acc - (t - 1) / t) <= kSwapTol, mode + ": accuracy " + num(acc) + " in " +
                                                                         c["case"].get<std::string>());
            } else {
                o.require(acc == 1.0, mode + ": accuracy " + num(acc) + " in " + c["case"].get<std::string>());
                o.require(rmsd <= kClosedLoopTol, mode + ": rmsd " + num(rmsd) + " in " + c["case"].get<std::string>());
            }
        }
        summary += mode + " mean rmsd " + num(rmsd_sum / static_cast<double>(std::max<std::size_t>(1, cases.size()))) + "; ";
    }
    if (o.ok) o.detail = "72 cases per mode; " + summary + "swap accuracy (T-1)/T";
    return o;
}

Outcome benchmark_shape() {
    Outcome o;
    const Benchmark b = generate_benchmark(cat(), kDefaultContextLength, kDefaultSeed);
    o.require(b.cases.size() == 72, std::to_string(b.cases.size()) + " cases");
    std::map<Split, int> splits;
    std::map<std::string, std::set<std::string>> spec_tables;
    for (const ExperimentCase& c : b.cases) {
        ++splits[c.split];
        if (c.spec) {
            spec_tables[std::string(to_string(c.spec->layout)) + "/" + std::string(to_string(c.spec->color)) + "/" +
                        c.spec->noise.name]
                .insert(c.context_table);
        }
    }
    o.require(splits[Split::Reconstruction] == 36 && splits[Split::Generalization] == 36, "split counts");
    o.require(spec_tables.size() == 18, std::to_string(spec_tables.size()) + " specs");
    for (const auto& [spec, tables] : spec_tables) o.require(tables.size() == 2, spec + " tables");
    TempDir a("accept_a"), c("accept_b");
    write_benchmark(b, a.str(), "catalog");
    write_benchmark(generate_benchmark(cat(), kDefaultContextLength, kDefaultSeed), c.str(), "catalog");
    const auto da = tablepref::testing::tree_digest(a.path());
    o.require(da == tablepref::testing::tree_digest(c.path()), "trees differ");
    if (o.ok) o.detail = "72 cases, 36/36, 18 specs x 2 tables, " + std::to_string(da.size()) + " identical files";
    return o;
}

Outcome grid_codec() {
    Outcome o;
    const GridSpec g{10, 10};
    int ok = 0;
    for (int col = 0; col < g.cols; ++col) {
        for (int row = 0; row < g.rows; ++row) {
            const std::string id = g.cell_id(col, row);
            const auto [x, y] = cell_centroid(id, g);
            const bool same = cell_containing(x, y, g) == id;
            o.require(same, id + " does not round-trip");
            ok += same ? 1 : 0;
        }
    }
    o.require(cell_centroid("A1", g) == std::pair{0.05, 0.05}, "A1 centroid");
    if (o.ok) o.detail = std::to_string(ok) + " cells round-trip, A1 -> (0.05, 0.05)";
    return o;
}

RawStep step(std::string type, int id, double x, double y, double rot) { return RawStep{std::move(type), id, XY{x, y}, rot}; }

std::vector<Sample> singles(const std::vector<RawStep>& steps) {
    std::vector<Sample> out;
    for (const RawStep& s : steps) out.push_back({s});
    return out;
}

Outcome aggregation_rules() {
    Outcome o;
    auto lengths = [](std::initializer_list<std::size_t> ns) {
        std::vector<Sample> out;
        for (std::size_t n : ns) out.emplace_back(n, step("plate", 75, 0.5, 0.5, 0));
        return out;
    };
    o.require(aggregate_plan_length(lengths({4, 4, 4, 5, 3})) == 4, "mode of lengths");
    o.require(aggregate_plan_length(lengths({3, 5})) == 3, "length tie");
    o.require(aggregate_step_type(singles({step("spoon", 100, 0, 0, 0), step("fork", 25, 0, 0, 0)}), 0) == "fork",
              "type tie");
    const auto ids = singles({step("fork", 92, 0, 0, 0), step("fork", 17, 0, 0, 0)});
    o.require(aggregate_object_id(step_voters(ids, 0, "fork")) == 17, "id tie");
    const auto far = singles({step("cup", 0, 1.4, 0.5, 0), step("cup", 0, 1.2, -0.3, 0)});
    const auto [fx, fy] = aggregate_position_unmarked(step_voters(far, 0, "cup"));
    o.require(fx == 1.0 && std::fabs(fy - 0.1) <= kGridCentroidTol, "clamped mean (" + num(fx) + ", " + num(fy) + ")");
    const GridSpec g;
    const std::vector<Sample> pooled = {Sample{RawStep{"cup", 0, std::vector<std::string>{"A1", "A1"}, Cardinal::N}},
                                        Sample{RawStep{"cup", 0, std::vector<std::string>{"B1"}, Cardinal::N}}};
    const auto w = aggregate_position_grid(step_voters(pooled, 0, "cup"), g);
    const double closed_form = (2.0 * 0.05 + 0.15) / 3.0;
    o.require(w && std::fabs(w->first - closed_form) <= kGridCentroidTol, "weighted grid centroid");
    const double r = aggregate_rotation(step_voters(singles({step("cup", 0, 0, 0, 350), step("cup", 0, 0, 0, 10)}), 0, "cup"),
                                        Method::LOUMA);
    o.require(circular_distance_deg(r, 0.0) <= kCircularTol, "circular mean of 350 and 10");

    std::mt19937_64 rng(20260416);
    for (int trial = 0; trial < 100; ++trial) {
        const Method method = kAllMethods[static_cast<std::size_t>(trial) % 4];
        const std::optional<GridSpec> grid = uses_grid(method) ? std::optional<GridSpec>(GridSpec{}) : std::nullopt;
        const std::vector<Sample> samples = tablepref::testing::random_samples(rng, method);
        const TaskPlan base = aggregate_plan(samples, method, cat(), grid, "table_0");
        std::vector<Sample> shuffled = samples;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        o.require(aggregate_plan(shuffled, method, cat(), grid, "table_0").arrangement() == base.arrangement(),
                  "permutation changed the plan in set " + std::to_string(trial));
        std::vector<Sample> doubled = samples;
        doubled.insert(doubled.end(), samples.begin(), samples.end());
        o.require(aggregate_plan(doubled, method, cat(), grid, "table_0").arrangement() == base.arrangement(),
                  "duplication changed the plan in set " + std::to_string(trial));
    }
    if (o.ok) {
        o.detail = "tie-breaks, clamp, grid x=" + num(w->first) + ", circular " + num(r) +
                   ", 100 sets permutation/duplication invariant";
    }
    return o;
}

Outcome acceptability_arithmetic() {
    Outcome o;
    const std::vector<double> taus = {0.01, 0.05, 0.10};
    const std::vector<double> targets = {0.727, 0.333, 0.199};
    const auto tiers = oracle::search_tiers(targets);
    const auto sliders = tablepref::testing::planted_sliders(taus, tiers, 42);
    const auto records = tablepref::testing::to_ratings(sliders);
    const AcceptanceReport rep = subjective_acceptance(records, taus, std::span<const std::optional<double>>{});
    std::string got;
    for (std::size_t k = 0; k < taus.size(); ++k) {
        const auto& row = rep.rows[k];
        const oracle::Tier hand = oracle::count_acceptance(sliders, taus[k]);
        o.require(row.people_accepting == static_cast<std::size_t>(hand.accept) &&
                      row.people_total == static_cast<std::size_t>(hand.total),
                  "hand count differs at " + num(taus[k]));
        o.require(row.people && std::lround(*row.people * 1000.0) == std::lround(targets[k] * 1000.0),
                  "people% at " + num(taus[k]));
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", row.people.value_or(-1));
        got += std::string(k ? "/" : "") + buf;
    }
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> rmsd(0.0, 0.2);
    std::bernoulli_distribution missing(0.1);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::optional<double>> preds(1 + trial % 40);
        for (auto& p : preds) p = missing(rng) ? std::nullopt : std::optional(rmsd(rng));
        std::vector<double> t = {0.01, 0.02, 0.05, 0.08, 0.10, 0.15};
        const AcceptanceReport r = subjective_acceptance(records, t, preds);
        for (std::size_t k = 1; k < t.size(); ++k) {
            o.require(r.rows[k].model.value_or(0) >= r.rows[k - 1].model.value_or(0), "model% decreases");
        }
    }
    if (o.ok) o.detail = "people% = " + got + ", model% monotone on 100 random sets";
    return o;
}

Outcome prompt_fidelity() {
    Outcome o;
    const std::string_view opening = "My preferences for setting a table";
    for (Method m : kAllMethods) {
        const PromptBundle b = tablepref::testing::fixture_bundle(m);
        const std::string name = std::string(to_string(m));
        o.require(prompt_template(m).starts_with(opening), name + " template opening");
        o.require(b.text.find(prompt_template(m)) != std::string::npos, name + " template not verbatim");
        const std::string snap = std::string(TABLEPREF_SNAPSHOT_DIR) + "/prompt_" + name + ".txt";
        o.require(std::filesystem::exists(snap) && read_text_file(snap) == tablepref::testing::snapshot_of(b),
                  name + " snapshot differs");
    }
    if (o.ok) o.detail = "4 methods contain their template verbatim and match snapshots";
    return o;
}

Arrangement study_arrangement(std::mt19937_64& rng, const std::string& table) {
    std::uniform_int_distribution<std::size_t> n(3, 5);
    std::uniform_real_distribution<double> pos(0.15, 0.85);
    std::uniform_real_distribution<double> deg(0.0, 360.0);
    std::uniform_int_distribution<int> id(0, 124);
    Arrangement a{table, {}};
    const std::size_t count = n(rng);
    std::set<int> used;
    while (a.placements.size() < count) {
        const int o = id(rng);
        if (used.insert(o).second) a.placements.push_back({o, pos(rng), pos(rng), deg(rng)});
    }
    return a;
}

Outcome study_flow() {
    Outcome o;
    TempDir dir("accept_study");
    const auto t0 = std::chrono::steady_clock::now();
    ServiceConfig cfg;
    cfg.data_dir = dir.sub("service");
    cfg.catalog_dir = dir.sub("catalog");
    write_catalog(cat(), cfg.catalog_dir);
    Service service(cfg);
    const int port = service.start("127.0.0.1", 0);
    httplib::Client http("127.0.0.1", port);
    auto post = [&](const std::string& path, const json& body, int want) {
        auto res = http.Post(path, body.dump(), "application/json");
        const bool ok = res && res->status == want;
        o.require(ok, "POST " + path + " -> " + (res ? std::to_string(res->status) + " " + res->body : "no response"));
        return ok ? json::parse(res->body) : json();
    };

    constexpr int kSessions = 3;
    std::mt19937_64 rng(11);
    for (int p = 0; p < kSessions && o.ok; ++p) {
        const json s = post("/sessions", {{"participant", "scripted-" + std::to_string(p)}, {"seed", 100 + p}}, 201);
        if (!o.ok) break;
        const std::string base = "/sessions/" + s["id"].get<std::string>();
        for (const json& trial : s["trials"]) {
            const int k = trial["index"];
            const Arrangement a = study_arrangement(rng, trial["table"]);
            post(base + "/arrangements", {{"trial", k}, {"arrangement", a}}, 201);
            post(base + "/ratings", {{"trial", k}, {"phase", "baseline"}, {"rating", 90}}, 201);
            auto jr = http.Get(base + "/jitter?trial=" + std::to_string(k));
            o.require(jr && jr->status == 200, "jitter failed");
            post(base + "/ratings", {{"trial", k}, {"phase", "jitter"}, {"rating", 60}}, 201);
            post(base + "/corrections", {{"trial", k}, {"arrangement", a}}, 201);
            post(base + "/ratings", {{"trial", k}, {"phase", "correction"}, {"rating", 85}}, 201);
        }
        auto st = http.Get(base);
        o.require(st && st->status == 200, "session status");
        if (st) {
            for (const json& t : json::parse(st->body)["trials"]) o.require(t["complete"] == true, "trial incomplete");
        }
    }
    service.stop();
    if (!o.ok) return o;

    const std::string store_dir = dir.sub("service/store");
    DatasetStore(store_dir).export_jsonl(dir.sub("records.jsonl"));
    const auto records = read_records_jsonl(dir.sub("records.jsonl"));
    o.require(complete_sessions(records).size() == kSessions, "completeness filter");
    const auto kept = filter_complete(records);
    for (int k : {0, 2, 4}) {
        const ContextBuild b = build_contexts(kept, k);
        o.require(b.splits.size() == kSessions && b.skipped.empty(), "build_contexts k=" + std::to_string(k));
    }

    const std::string ctx = dir.sub("contexts");
    o.require(run({"contexts", "--dataset", dir.sub("records.jsonl"), "--k", "0,2,4", "--out", ctx, "--catalog",
                   cfg.catalog_dir}) == 0,
              "contexts command");
    for (int k : {0, 2, 4}) {
        const std::string bench = ctx + "/k" + std::to_string(k);
        const std::string script = dir.sub("mock_k" + std::to_string(k) + ".json");
        const std::string pred = dir.sub("pred_k" + std::to_string(k));
        const std::string report = dir.sub("eval_k" + std::to_string(k) + ".json");
        const bool ran = run({"mock-script", "--benchmark", bench, "--method", "louma", "--out", script}) == 0 &&
                         run({"predict", "--provider", "mock", "--mock-script", script, "--method", "louma",
                              "--benchmark", bench, "--out", pred}) == 0 &&
                         run({"eval-batch", "--manifest", bench, "--pred", pred, "--json", report}) == 0;
        o.require(ran, "sweep k=" + std::to_string(k));
        if (ran) {
            for (const json& c : read_json_file(report).at("cases")) {
                o.require(c.contains("report") && c["report"]["accuracy"] == 1.0, "sweep accuracy k=" + std::to_string(k));
            }
        }
    }
    const double elapsed = seconds_since(t0);
    o.require(elapsed < kStudyFlowBudgetS, "took " + num(elapsed) + " s");
    if (o.ok) {
        o.detail = std::to_string(kSessions) + " sessions x (1 practice + 5 trials) over HTTP, k in {0,2,4} swept in " +
                   num(elapsed) + " s";
    }
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"kabsch-oracle-equivalence", kabsch_oracle},
        {"registration-invariance", registration_invariance},
        {"matching-conformance", matching_conformance},
        {"closed-loop-mock-pipeline", closed_loop},
        {"benchmark-shape", benchmark_shape},
        {"grid-codec", grid_codec},
        {"aggregation-rules", aggregation_rules},
        {"acceptability-arithmetic", acceptability_arithmetic},
        {"prompt-fidelity", prompt_fidelity},
        {"study-flow-completeness", study_flow},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %s: %s\n", o.ok ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
        failed += o.ok ? 0 : 1;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
