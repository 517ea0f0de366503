// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#include "tablepref/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <future>
#include <map>
#include <mutex>
#include <thread>

#include "tablepref/io.hpp"

namespace tablepref {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string error_code(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::Usage: return "usage_error";
        case ErrorKind::Data: return "data_error";
        case ErrorKind::Provider: return "provider_error";
    }
    return "error";
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads.
template <typename F>
void parallel_for(std::size_t n, int jobs, F&& fn) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        }));
    }
    for (auto& f : pool) f.get();
}

}  // namespace

void PredictOptions::validate() const {
    if (samples < 1) {
        throw ConfigError("samples must be at least 1");
    }
    if (uses_grid(method) && !grid) {
        throw ConfigError(std::string(to_string(method)) + " requires --grid (e.g. 10x10)");
    }
    if (grid) {
        grid->validate();
    }
}

json Prediction::to_json() const {
    return {{"case", case_id},
            {"method", std::string(to_string(plan.method))},
            {"provider", plan.provider},
            {"arrangement", plan.arrangement()},
            {"support", plan.support_json()},
            {"usage", tablepref::to_json(usage)}};
}

Prediction predict(ModelClient& client, const PreferenceContext& context, const Arrangement& initial,
                   const Catalog& catalog, const PredictOptions& opts) {
    opts.validate();
    const std::optional<GridSpec> grid = uses_grid(opts.method) ? opts.grid : std::nullopt;
    const PromptBundle bundle = build_prompt(opts.method, context, catalog, initial, grid, opts.samples);
    const SampleResult result = client.sample(bundle);
    const std::vector<std::string> texts = result.texts();
    if (texts.empty()) {
        std::string why = "all " + std::to_string(result.outcomes.size()) + " samples failed";
        if (!result.outcomes.empty()) {
            const SampleOutcome& o = result.outcomes.front();
            why += " (" + std::string(to_string(o.error)) + ": " + o.message + ")";
        }
        throw ProviderError(why);
    }
    Prediction p;
    p.usage = result.usage;
    p.plan = plan_from_responses(texts, opts.method, catalog, grid, initial.table);
    p.plan.provider = std::string(to_string(client.config().kind));
    p.plan.samples_total = result.outcomes.size();
    for (std::size_t k = 0; k < result.outcomes.size(); ++k) {
        const SampleOutcome& o = result.outcomes[k];
        if (!o.ok()) {
            p.plan.sample_errors.push_back("request " + std::to_string(k) + ": " + std::string(to_string(o.error)) +
                                           ": " + o.message);
        }
    }
    return p;
}

Prediction predict_case(ModelClient& client, const ExperimentCase& c, const Catalog& catalog,
                        const PredictOptions& opts) {
    Prediction p = predict(client, c.preference_context(), c.initial(), catalog, opts);
    p.case_id = c.id;
    return p;
}

Arrangement load_predicted_arrangement(const std::string& path) {
    const json j = read_json_file(path);
    try {
        if (j.is_object() && j.contains("arrangement")) {
            return j.at("arrangement").get<Arrangement>();
        }
        return j.get<Arrangement>();
    } catch (const json::exception& e) {
        throw DecodeError(path + ": " + e.what());
    } catch (const DecodeError& e) {
        throw DecodeError(path + ": " + e.what());
    }
}

json BatchSummary::to_json() const {
    json f = json::array();
    for (const BatchFailure& b : failures) {
        f.push_back({{"case", b.case_id}, {"code", b.code}, {"message", b.message}});
    }
    return {{"predicted", predicted}, {"failed", failures.size()}, {"failures", f}, {"usage", tablepref::to_json(usage)}};
}

BatchSummary predict_batch(ModelClient& client, const BenchmarkManifest& manifest, const Catalog& catalog,
                           const PredictOptions& opts, const std::string& out_dir, int jobs) {
    opts.validate();
    fs::create_directories(out_dir);
    BatchSummary summary;
    std::mutex mu;
    parallel_for(manifest.case_dirs.size(), jobs, [&](std::size_t i) {
        const std::string& dir = manifest.case_dirs[i];
        std::string id = fs::path(dir).filename().string();
        try {
            const ExperimentCase c = load_case(dir);
            id = c.id;
            const Prediction p = predict_case(client, c, catalog, opts);
            write_json_file((fs::path(out_dir) / (c.id + ".json")).string(), p.to_json());
            std::lock_guard lock(mu);
            ++summary.predicted;
            summary.usage += p.usage;
        } catch (const Error& e) {
            std::lock_guard lock(mu);
            summary.failures.push_back({id, error_code(e), e.what()});
        }
    });
    std::sort(summary.failures.begin(), summary.failures.end(),
              [](const BatchFailure& a, const BatchFailure& b) { return a.case_id < b.case_id; });
    return summary;
}

std::string EvalBatch::cases_csv() const {
    std::string out = "case,split,method,accuracy,all_correct,rmsd,error\n";
    for (const EvalRow& r : rows) {
        out += r.case_id + "," + r.split + "," + r.method + ",";
        if (r.report) {
            out += fmt6(r.report->accuracy) + "," + (r.report->all_correct ? "1" : "0") + ",";
            out += r.report->rmsd ? fmt6(*r.report->rmsd) : "";
            out += ",";
        } else {
            out += ",,,";
        }
        std::string err = r.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        out += err + "\n";
    }
    return out;
}

namespace {

struct Group {
    std::size_t cases = 0, evaluated = 0, with_rmsd = 0, all_correct = 0;
    double accuracy_sum = 0.0, rmsd_sum = 0.0;
};

std::map<std::pair<std::string, std::string>, Group> group_rows(const std::vector<EvalRow>& rows) {
    std::map<std::pair<std::string, std::string>, Group> groups;
    for (const EvalRow& r : rows) {
        for (const std::string& split : {r.split, std::string("all")}) {
            Group& g = groups[{r.method, split}];
            ++g.cases;
            if (!r.report) continue;
            ++g.evaluated;
            g.accuracy_sum += r.report->accuracy;
            g.all_correct += r.report->all_correct ? 1 : 0;
            if (r.report->rmsd) {
                ++g.with_rmsd;
                g.rmsd_sum += *r.report->rmsd;
            }
        }
    }
    return groups;
}

}  // namespace

std::string EvalBatch::summary_csv() const {
    std::string out = "method,split,cases,evaluated,mean_accuracy,all_correct_rate,mean_rmsd\n";
    for (const auto& [key, g] : group_rows(rows)) {
        out += key.first + "," + key.second + "," + std::to_string(g.cases) + "," + std::to_string(g.evaluated) + ",";
        if (g.evaluated > 0) {
            out += fmt6(g.accuracy_sum / static_cast<double>(g.evaluated)) + "," +
                   fmt6(static_cast<double>(g.all_correct) / static_cast<double>(g.evaluated));
        } else {
            out += ",";
        }
        out += ",";
        out += g.with_rmsd > 0 ? fmt6(g.rmsd_sum / static_cast<double>(g.with_rmsd)) : "";
        out += "\n";
    }
    return out;
}

json EvalBatch::to_json() const {
    json cases = json::array();
    for (const EvalRow& r : rows) {
        json j = {{"case", r.case_id}, {"split", r.split}, {"method", r.method}};
        if (r.report) {
            j["report"] = *r.report;
        } else {
            j["error"] = r.error;
        }
        cases.push_back(std::move(j));
    }
    json summary = json::array();
    for (const auto& [key, g] : group_rows(rows)) {
        json s = {{"method", key.first}, {"split", key.second}, {"cases", g.cases}, {"evaluated", g.evaluated}};
        s["mean_accuracy"] = g.evaluated ? json(g.accuracy_sum / static_cast<double>(g.evaluated)) : json(nullptr);
        s["all_correct_rate"] =
            g.evaluated ? json(static_cast<double>(g.all_correct) / static_cast<double>(g.evaluated)) : json(nullptr);
        s["mean_rmsd"] = g.with_rmsd ? json(g.rmsd_sum / static_cast<double>(g.with_rmsd)) : json(nullptr);
        summary.push_back(std::move(s));
    }
    return {{"summary", summary}, {"cases", cases}};
}

EvalBatch eval_batch(const BenchmarkManifest& manifest, const Catalog& catalog,
                     const std::vector<std::string>& pred_dirs, int jobs) {
    std::vector<ExperimentCase> cases;
    for (const std::string& dir : manifest.case_dirs) {
        cases.push_back(load_case(dir));
    }
    EvalBatch out;
    out.rows.resize(cases.size() * pred_dirs.size());
    parallel_for(out.rows.size(), jobs, [&](std::size_t i) {
        const ExperimentCase& c = cases[i % cases.size()];
        const std::string& pred_dir = pred_dirs[i / cases.size()];
        EvalRow& row = out.rows[i];
        row.case_id = c.id;
        row.split = std::string(to_string(c.split));
        row.method = fs::path(pred_dir).filename().string();
        const fs::path file = fs::path(pred_dir) / (c.id + ".json");
        if (!fs::exists(file)) {
            row.error = "missing prediction";
            return;
        }
        try {
            const json j = read_json_file(file.string());
            if (j.is_object() && j.contains("method")) {
                row.method = j.at("method").get<std::string>();
            }
            row.report = evaluate(c.ground_truth, load_predicted_arrangement(file.string()), catalog);
        } catch (const Error& e) {
            row.error = e.what();
        }
    });
    return out;
}

MockMode parse_mock_mode(std::string_view s) {
    if (s == "truth") return MockMode::Truth;
    if (s == "shift") return MockMode::Shift;
    if (s == "swap-color") return MockMode::SwapColor;
    throw ConfigError("unknown mock mode '" + std::string(s) + "' (expected truth, shift or swap-color)");
}

std::string response_text(const Arrangement& a, const Catalog& catalog, Method method,
                          const std::optional<GridSpec>& grid) {
    if (uses_grid(method) && !grid) {
        throw ConfigError(std::string(to_string(method)) + " needs a grid");
    }
    json steps = json::array();
    for (const Placement& p : a.placements) {
        const ObjectSpec* o = catalog.find(p.object);
        json step = {{"type", o ? std::string(to_string(o->cls)) : std::string("unknown")}, {"id", p.object}};
        if (uses_grid(method)) {
            step["position"] = json::array({cell_containing(p.x, p.y, *grid)});
            step["cardinal_direction"] = std::string(to_string(degrees_to_cardinal(p.rotation)));
        } else {
            step["position"] = json::array({p.x, p.y});
            step["rotation"] = p.rotation;
        }
        steps.push_back(std::move(step));
    }
    return steps.dump();
}

Arrangement swap_one_color(const Arrangement& a, const Catalog& catalog, std::size_t case_index) {
    if (a.placements.empty()) {
        return a;
    }
    Arrangement out = a;
    Placement& victim = out.placements[case_index % a.placements.size()];
    const ObjectSpec& original = catalog.at(victim.object);
    const ObjectSpec* best = nullptr;
    int best_d = 0;
    for (const ObjectSpec* cand : catalog.of_class(original.cls)) {
        if (cand->color1 == original.color1 && cand->color2 == original.color2) continue;
        const int d = hamming(original, *cand);
        if (!best || d < best_d || (d == best_d && cand->id < best->id)) {
            best = cand;
            best_d = d;
        }
    }
    if (!best) {
        throw GenerationError("no " + std::string(to_string(original.cls)) + " with a different colour than object " +
                              std::to_string(original.id));
    }
    victim.object = best->id;
    return out;
}

json make_mock_script(const BenchmarkManifest& manifest, const Catalog& catalog, const PredictOptions& opts,
                      MockMode mode) {
    opts.validate();
    const std::optional<GridSpec> grid = uses_grid(opts.method) ? opts.grid : std::nullopt;
    json script = json::object();
    for (std::size_t i = 0; i < manifest.case_dirs.size(); ++i) {
        const ExperimentCase c = load_case(manifest.case_dirs[i]);
        Arrangement answer = c.ground_truth;
        if (mode == MockMode::Shift) {
            for (Placement& p : answer.placements) {
                p.x += kMockShiftX;
                p.y += kMockShiftY;
            }
        } else if (mode == MockMode::SwapColor) {
            answer = swap_one_color(answer, catalog, i);
        }
        const PromptBundle bundle =
            build_prompt(opts.method, c.preference_context(), catalog, c.initial(), grid, opts.samples);
        script[bundle.hash()] = response_text(answer, catalog, opts.method, grid);
    }
    return script;
}

}  // namespace tablepref
