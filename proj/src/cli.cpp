// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#include "tablepref/cli.hpp"

#include <algorithm>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tablepref/acceptability.hpp"
#include "tablepref/dataset.hpp"
#include "tablepref/io.hpp"
#include "tablepref/pipeline.hpp"
#include "tablepref/service.hpp"

namespace tablepref {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::Usage: return kExitUsage;
        case ErrorKind::Data: return kExitData;
        case ErrorKind::Provider: return kExitProvider;
    }
    return kExitData;
}

void print_error(std::ostream& err, const std::string& code, const std::string& message, int exit) {
    err << json{{"error", {{"code", code}, {"message", message}, {"exit", exit}}}}.dump() << "\n";
}

void emit(const json& j, const std::string& path, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << j.dump(2) << "\n";
    } else {
        write_json_file(path, j);
    }
}

void emit_text(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
    } else {
        write_file_atomic(path, text);
    }
}

std::vector<double> parse_doubles(const std::string& csv, const char* what) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(std::string("invalid ") + what + " '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError(std::string("empty ") + what);
    return out;
}

/// Explicit path, else the manifest's catalog, else the placeholder catalog.
Catalog resolve_catalog(const std::string& flag, const std::string& manifest_catalog, std::ostream& err) {
    if (!flag.empty()) return load_catalog(flag);
    if (!manifest_catalog.empty() && fs::exists(manifest_catalog)) return load_catalog(manifest_catalog);
    err << "note: using the built-in placeholder catalog\n";
    return make_placeholder_catalog();
}

/// Catalog recorded by the benchmark that owns a case directory, if any.
std::string case_catalog(const std::string& case_dir) {
    const fs::path manifest = fs::path(case_dir).parent_path().parent_path() / "manifest.json";
    if (!fs::exists(manifest)) return "";
    return load_manifest(manifest.string()).catalog_path();
}

struct PromptFlags {
    std::string method;
    std::string grid;
    int samples = kDefaultSamples;

    void attach(CLI::App* app, bool method_required = true) {
        auto* m = app->add_option("--method", method, "louma, logma, mouma or mogma");
        if (method_required) m->required();
        app->add_option("--grid", grid, "grid as CxR, required by logma and mogma (e.g. 10x10)");
        app->add_option("--samples", samples, "responses requested per prompt")->capture_default_str();
    }
    PredictOptions options() const {
        PredictOptions o;
        o.method = parse_method(method);
        if (!grid.empty()) o.grid = GridSpec::parse(grid);
        o.samples = samples;
        o.validate();
        return o;
    }
};

struct ProviderFlags {
    std::string kind = "mock";
    std::string config_file;
    std::string model;
    std::string endpoint;
    std::string credential_env;
    std::string mock_script;
    std::string replay_log;
    int max_attempts = 0;

    void attach(CLI::App* app) {
        app->add_option("--provider", kind, "mock, openai, anthropic or gemini")->capture_default_str();
        app->add_option("--provider-config", config_file, "provider JSON file; flags below override it");
        app->add_option("--model", model, "provider model name");
        app->add_option("--endpoint", endpoint, "provider base URL");
        app->add_option("--credential-env", credential_env, "environment variable holding the API key");
        app->add_option("--mock-script", mock_script, "mock response script (JSON)");
        app->add_option("--replay-log", replay_log, "append requests and responses to this JSON-lines file");
        app->add_option("--max-attempts", max_attempts, "attempts per request including retries");
    }
    ProviderConfig config() const {
        ProviderConfig pc;
        if (!config_file.empty()) {
            pc = provider_config_from_json(read_json_file(config_file));
        } else {
            pc.kind = parse_provider_kind(kind);
        }
        if (!model.empty()) pc.model = model;
        if (!endpoint.empty()) pc.endpoint = endpoint;
        if (!credential_env.empty()) pc.credential_env = credential_env;
        if (!mock_script.empty()) pc.mock_script = mock_script;
        if (!replay_log.empty()) pc.replay_log = replay_log;
        if (max_attempts > 0) pc.retry.max_attempts = max_attempts;
        pc.validate();
        return pc;
    }
};

std::vector<RatingRecord> load_ratings(const std::string& ratings, const std::string& dataset, const Catalog& catalog,
                                       std::ostream& err) {
    if (!ratings.empty()) return read_ratings_jsonl(ratings);
    std::vector<StudyRecord> records;
    if (fs::is_directory(dataset)) {
        records = DatasetStore(dataset).records();
    } else {
        records = read_records_jsonl(dataset);
    }
    const auto kept = filter_complete(records);
    err << "note: " << complete_sessions(records).size() << " complete session(s), " << kept.size()
        << " record(s)\n";
    return rating_records(kept, catalog);
}

std::vector<std::optional<double>> load_prediction_rmsds(const std::string& path) {
    const json j = read_json_file(path);
    std::vector<std::optional<double>> out;
    const json& cases = j.is_object() && j.contains("cases") ? j.at("cases") : j;
    if (!cases.is_array()) throw DecodeError(path + ": expected eval-batch output or an array of reports");
    for (const json& c : cases) {
        const json& rep = c.contains("report") ? c.at("report") : c;
        out.push_back(rep.contains("rmsd") && rep.at("rmsd").is_number() ? std::optional(rep.at("rmsd").get<double>())
                                                                          : std::nullopt);
    }
    return out;
}

std::vector<StudyRecord> load_study_records(const std::string& dataset) {
    if (fs::is_directory(dataset)) return DatasetStore(dataset).records();
    return read_records_jsonl(dataset);
}

Service* g_service = nullptr;

extern "C" void stop_service(int) {
    if (g_service) g_service->stop();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Table-setting preference prediction toolkit", "tablepref"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML or INI file with option defaults ([subcommand] sections); flags override it");
    int jobs = 1;

    // make-catalog
    std::string catalog_out;
    auto* make_catalog = app.add_subcommand("make-catalog", "write the placeholder 125-object catalog");
    make_catalog->add_option("--out", catalog_out, "output directory")->required();

    // simulate
    std::uint64_t sim_seed = kDefaultSeed;
    int context_len = kDefaultContextLength;
    std::string sim_out, sim_catalog;
    auto* simulate = app.add_subcommand("simulate", "generate the 72-case simulated benchmark");
    simulate->add_option("--seed", sim_seed, "generator seed")->capture_default_str();
    simulate->add_option("--context-len", context_len, "context arrangements per case")->capture_default_str();
    simulate->add_option("--out", sim_out, "benchmark directory")->required();
    simulate->add_option("--catalog", sim_catalog, "catalog directory (default: placeholder copied to <out>/catalog)");

    // render
    PromptFlags render_flags;
    std::string render_case, render_out, render_catalog;
    auto* render = app.add_subcommand("render", "write a case's prompt text and images");
    render_flags.attach(render);
    render->add_option("--case", render_case, "case directory")->required();
    render->add_option("--out", render_out, "output directory")->required();
    render->add_option("--catalog", render_catalog, "catalog directory");

    // predict
    PromptFlags predict_flags;
    ProviderFlags provider_flags;
    std::string predict_case_dir, predict_bench, predict_out, predict_catalog;
    auto* predict_cmd = app.add_subcommand("predict", "query a model and aggregate a task plan");
    predict_flags.attach(predict_cmd);
    provider_flags.attach(predict_cmd);
    auto* case_opt = predict_cmd->add_option("--case", predict_case_dir, "single case directory");
    auto* bench_opt = predict_cmd->add_option("--benchmark", predict_bench, "benchmark directory or manifest");
    case_opt->excludes(bench_opt);
    predict_cmd->add_option("--out", predict_out, "output file (--case) or directory (--benchmark)");
    predict_cmd->add_option("--catalog", predict_catalog, "catalog directory");
    predict_cmd->add_option("--jobs", jobs, "parallel cases")->capture_default_str();

    // mock-script
    PromptFlags mock_flags;
    std::string mock_bench, mock_mode = "truth", mock_out, mock_catalog;
    auto* mock = app.add_subcommand("mock-script", "write a mock provider script answering every case");
    mock_flags.attach(mock);
    mock->add_option("--benchmark", mock_bench, "benchmark directory or manifest")->required();
    mock->add_option("--mode", mock_mode, "truth, shift or swap-color")->capture_default_str();
    mock->add_option("--out", mock_out, "script file")->required();
    mock->add_option("--catalog", mock_catalog, "catalog directory");

    // eval
    std::string eval_gt, eval_pred, eval_catalog, eval_out;
    auto* eval = app.add_subcommand("eval", "score one predicted arrangement");
    eval->add_option("--gt", eval_gt, "ground-truth arrangement JSON")->required();
    eval->add_option("--pred", eval_pred, "predicted arrangement or prediction JSON")->required();
    eval->add_option("--catalog", eval_catalog, "catalog directory");
    eval->add_option("--out", eval_out, "report file (default stdout)");

    // eval-batch
    std::string batch_manifest, batch_catalog, batch_csv, batch_summary, batch_json;
    std::vector<std::string> batch_preds;
    auto* eval_batch_cmd = app.add_subcommand("eval-batch", "score every case of a benchmark");
    eval_batch_cmd->add_option("--manifest", batch_manifest, "benchmark directory or manifest")->required();
    eval_batch_cmd->add_option("--pred", batch_preds, "prediction directory (repeatable)")->required();
    eval_batch_cmd->add_option("--catalog", batch_catalog, "catalog directory");
    eval_batch_cmd->add_option("--csv", batch_csv, "per-case CSV");
    eval_batch_cmd->add_option("--summary", batch_summary, "per-method summary CSV (default stdout)");
    eval_batch_cmd->add_option("--json", batch_json, "full JSON report");
    eval_batch_cmd->add_option("--jobs", jobs, "parallel cases")->capture_default_str();

    // acceptability
    std::string acc_ratings, acc_dataset, acc_predictions, acc_thresholds = "0.01,0.05,0.10", acc_out, acc_csv,
                                                           acc_objective, acc_catalog;
    auto* acc = app.add_subcommand("acceptability", "subjective and objective acceptance tables");
    auto* ratings_opt = acc->add_option("--ratings", acc_ratings, "rating records (JSON lines)");
    auto* dataset_opt = acc->add_option("--dataset", acc_dataset, "study store directory or exported JSON lines");
    ratings_opt->excludes(dataset_opt);
    acc->add_option("--predictions", acc_predictions, "eval-batch JSON supplying model rmsds");
    acc->add_option("--thresholds", acc_thresholds, "comma-separated rmsd thresholds")->capture_default_str();
    acc->add_option("--out", acc_out, "report JSON (default stdout)");
    acc->add_option("--csv", acc_csv, "report CSV");
    acc->add_option("--objective", acc_objective, "objective summary JSON");
    acc->add_option("--catalog", acc_catalog, "catalog directory (for --dataset)");

    // contexts
    std::string ctx_dataset, ctx_k = "0,2,4", ctx_out, ctx_catalog;
    auto* contexts = app.add_subcommand("contexts", "build context/hold-out cases from study data");
    contexts->add_option("--dataset", ctx_dataset, "study store directory or exported JSON lines")->required();
    contexts->add_option("--k", ctx_k, "comma-separated context lengths")->capture_default_str();
    contexts->add_option("--out", ctx_out, "output directory (one k<C> benchmark each)")->required();
    contexts->add_option("--catalog", ctx_catalog, "catalog path recorded in each manifest");

    // export
    std::string export_dir, export_out;
    bool export_practice = false;
    auto* export_cmd = app.add_subcommand("export", "write the study store as one JSON-lines file");
    export_cmd->add_option("--data-dir", export_dir, "study store directory")->required();
    export_cmd->add_option("--out", export_out, "output file")->required();
    export_cmd->add_flag("--include-practice", export_practice, "also export practice trials");

    // serve
    std::string serve_host = "127.0.0.1", serve_dir, serve_catalog, serve_providers, serve_origin = "*";
    int serve_port = 8080;
    auto* serve = app.add_subcommand("serve", "run the HTTP service");
    serve->add_option("--port", serve_port, "TCP port (0 picks one)")->capture_default_str();
    serve->add_option("--host", serve_host, "bind address")->capture_default_str();
    serve->add_option("--data-dir", serve_dir, "service data directory")->required();
    serve->add_option("--catalog", serve_catalog, "catalog directory");
    serve->add_option("--providers", serve_providers, "JSON object of named provider configs");
    serve->add_option("--cors-origin", serve_origin, "Access-Control-Allow-Origin value")->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kExitOk;
        }
        print_error(err, "usage_error", e.what(), kExitUsage);
        return kExitUsage;
    }

    try {
        if (*make_catalog) {
            write_catalog(make_placeholder_catalog(), catalog_out);
            err << "wrote catalog to " << catalog_out << "\n";
        } else if (*simulate) {
            std::string ref = "catalog";
            Catalog catalog;
            if (sim_catalog.empty()) {
                catalog = make_placeholder_catalog();
                write_catalog(catalog, (fs::path(sim_out) / "catalog").string());
            } else {
                catalog = load_catalog(sim_catalog);
                ref = fs::absolute(sim_catalog).string();
            }
            const Benchmark bench = generate_benchmark(catalog, context_len, sim_seed);
            write_benchmark(bench, sim_out, ref);
            err << "wrote " << bench.cases.size() << " cases to " << sim_out << "\n";
        } else if (*render) {
            const PredictOptions opts = render_flags.options();
            const Catalog catalog = resolve_catalog(render_catalog, case_catalog(render_case), err);
            const ExperimentCase c = load_case(render_case);
            const std::optional<GridSpec> grid = uses_grid(opts.method) ? opts.grid : std::nullopt;
            const PromptBundle b = build_prompt(opts.method, c.preference_context(), catalog, c.initial(), grid,
                                                opts.samples);
            fs::create_directories(render_out);
            write_file_atomic((fs::path(render_out) / "prompt.txt").string(), b.text);
            json images = json::array();
            for (const PromptImage& img : b.images) {
                write_file_atomic((fs::path(render_out) / img.name).string(), encode_png(img.image.pixels));
                images.push_back({{"name", img.name},
                                  {"width", img.image.pixels.width()},
                                  {"height", img.image.pixels.height()},
                                  {"annotations", img.image.annotations_json()},
                                  {"provenance", img.image.provenance}});
            }
            write_json_file((fs::path(render_out) / "bundle.json").string(),
                            json{{"method", std::string(to_string(b.method))},
                                 {"samples", b.samples},
                                 {"hash", b.hash()},
                                 {"images", images}});
            err << "wrote " << b.images.size() << " images to " << render_out << "\n";
        } else if (*predict_cmd) {
            if (predict_case_dir.empty() == predict_bench.empty()) {
                throw ConfigError("predict needs exactly one of --case or --benchmark");
            }
            const PredictOptions opts = predict_flags.options();
            ModelClient client(provider_flags.config());
            if (!predict_case_dir.empty()) {
                const Catalog catalog = resolve_catalog(predict_catalog, case_catalog(predict_case_dir), err);
                const Prediction p = predict_case(client, load_case(predict_case_dir), catalog, opts);
                emit(p.to_json(), predict_out, out);
            } else {
                if (predict_out.empty()) throw ConfigError("--benchmark needs --out <directory>");
                const BenchmarkManifest m = load_manifest(predict_bench);
                const Catalog catalog = resolve_catalog(predict_catalog, m.catalog_path(), err);
                const auto start = std::chrono::steady_clock::now();
                const BatchSummary s = predict_batch(client, m, catalog, opts, predict_out, jobs);
                write_json_file((fs::path(predict_out) / "summary.json").string(), s.to_json());
                err << "predicted " << s.predicted << " of " << m.case_dirs.size() << " cases in "
                    << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() << " s\n";
                if (s.predicted == 0 && !s.failures.empty()) {
                    const BatchFailure& f = s.failures.front();
                    const int code = f.code == "provider_error" ? kExitProvider : kExitData;
                    print_error(err, f.code, f.case_id + ": " + f.message, code);
                    return code;
                }
            }
        } else if (*mock) {
            const PredictOptions opts = mock_flags.options();
            const BenchmarkManifest m = load_manifest(mock_bench);
            const Catalog catalog = resolve_catalog(mock_catalog, m.catalog_path(), err);
            write_json_file(mock_out, make_mock_script(m, catalog, opts, parse_mock_mode(mock_mode)));
        } else if (*eval) {
            const Catalog catalog = resolve_catalog(eval_catalog, "", err);
            const EvalReport r = evaluate(load_arrangement(eval_gt), load_predicted_arrangement(eval_pred), catalog);
            emit(json(r), eval_out, out);
        } else if (*eval_batch_cmd) {
            const BenchmarkManifest m = load_manifest(batch_manifest);
            const Catalog catalog = resolve_catalog(batch_catalog, m.catalog_path(), err);
            const EvalBatch e = eval_batch(m, catalog, batch_preds, jobs);
            if (!batch_csv.empty()) write_file_atomic(batch_csv, e.cases_csv());
            if (!batch_json.empty()) write_json_file(batch_json, e.to_json());
            emit_text(e.summary_csv(), batch_summary, out);
        } else if (*acc) {
            if (acc_ratings.empty() && acc_dataset.empty()) {
                throw ConfigError("acceptability needs --ratings or --dataset");
            }
            const std::vector<double> taus = parse_doubles(acc_thresholds, "threshold");
            Catalog catalog;
            if (!acc_dataset.empty()) catalog = resolve_catalog(acc_catalog, "", err);
            const auto records = load_ratings(acc_ratings, acc_dataset, catalog, err);
            std::vector<std::optional<double>> rmsds;
            if (!acc_predictions.empty()) rmsds = load_prediction_rmsds(acc_predictions);
            const AcceptanceReport report = subjective_acceptance(records, taus, rmsds);
            if (!acc_csv.empty()) write_file_atomic(acc_csv, report.to_csv());
            if (!acc_objective.empty()) write_json_file(acc_objective, objective_acceptance(records).to_json());
            emit(report.to_json(), acc_out, out);
        } else if (*contexts) {
            const std::vector<double> ks = parse_doubles(ctx_k, "context length");
            const auto records = filter_complete(load_study_records(ctx_dataset));
            const std::string ref = ctx_catalog.empty() ? "" : fs::absolute(ctx_catalog).string();
            json summary = json::array();
            for (double k : ks) {
                const int c = static_cast<int>(k);
                if (c < 0 || static_cast<double>(c) != k) throw ConfigError("context lengths must be whole numbers");
                const ContextBuild b = build_contexts(records, c);
                for (const std::string& s : b.skipped) err << "skipped " << s << " (k=" << c << ")\n";
                write_context_cases(b, c, (fs::path(ctx_out) / ("k" + std::to_string(c))).string(), ref);
                summary.push_back({{"k", c}, {"cases", b.splits.size()}, {"skipped", b.skipped.size()}});
            }
            emit(summary, "", out);
        } else if (*export_cmd) {
            DatasetStore(export_dir).export_jsonl(export_out, export_practice);
        } else if (*serve) {
            ServiceConfig cfg;
            cfg.data_dir = serve_dir;
            cfg.catalog_dir = serve_catalog;
            cfg.cors_origin = serve_origin;
            if (!serve_providers.empty()) {
                const json p = read_json_file(serve_providers);
                if (!p.is_object()) throw ConfigError(serve_providers + ": expected an object of provider configs");
                for (const auto& [name, pc] : p.items()) cfg.providers[name] = provider_config_from_json(pc);
            }
            Service service(cfg);
            const int port = service.bind(serve_host, serve_port);
            err << "listening on http://" << serve_host << ":" << port << "\n" << std::flush;
            g_service = &service;
            std::signal(SIGINT, stop_service);
            std::signal(SIGTERM, stop_service);
            service.run();
            g_service = nullptr;
        }
    } catch (const Error& e) {
        const int code = exit_code(e.kind());
        print_error(err, e.code(), e.what(), code);
        return code;
    } catch (const json::exception& e) {
        print_error(err, "decode_error", e.what(), kExitData);
        return kExitData;
    } catch (const std::filesystem::filesystem_error& e) {
        print_error(err, "io_error", e.what(), kExitData);
        return kExitData;
    }
    return kExitOk;
}

}  // namespace tablepref
