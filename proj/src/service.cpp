// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#include "tablepref/service.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <functional>
#include <mutex>
#include <random>
#include <thread>

#include <httplib.h>

#include "tablepref/evaluation.hpp"
#include "tablepref/io.hpp"
#include "tablepref/pipeline.hpp"

namespace tablepref {

namespace fs = std::filesystem;
using json = nlohmann::json;

json ApiError::to_json() const {
    return {{"error", {{"code", code}, {"message", message}, {"request_id", request_id}}}};
}

ApiError api_error_from(const std::exception& e, std::string request_id) {
    ApiError a;
    a.request_id = std::move(request_id);
    a.message = e.what();
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        a.code = err->code();
        if (dynamic_cast<const NotFoundError*>(err)) {
            a.status = 404;
        } else if (dynamic_cast<const ConflictError*>(err)) {
            a.status = 409;
        } else if (err->kind() == ErrorKind::Provider || dynamic_cast<const AggregationError*>(err)) {
            a.status = 502;
        } else {
            a.status = 422;
        }
    } else if (dynamic_cast<const json::exception*>(&e)) {
        a.status = 422;
        a.code = "invalid_request";
    } else {
        a.status = 500;
        a.code = "internal";
    }
    return a;
}

namespace {

struct Reply {
    int status = 200;
    json body;
};

using Handler = std::function<Reply(const httplib::Request&)>;

json body_json(const httplib::Request& req) {
    if (req.body.empty()) {
        return json::object();
    }
    try {
        json j = json::parse(req.body);
        if (!j.is_object()) {
            throw ValidationError("request body must be a JSON object");
        }
        return j;
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("invalid JSON body: ") + e.what());
    }
}

int int_field(const json& j, const char* key) {
    if (!j.contains(key)) {
        throw ValidationError(std::string("missing field '") + key + "'");
    }
    const json& v = j.at(key);
    if (v.is_number_integer()) {
        return v.get<int>();
    }
    throw ValidationError(std::string("field '") + key + "' must be an integer");
}

Arrangement arrangement_field(const json& j, const char* key) {
    if (!j.contains(key)) {
        throw ValidationError(std::string("missing field '") + key + "'");
    }
    try {
        return j.at(key).get<Arrangement>();
    } catch (const DecodeError& e) {
        throw ValidationError(std::string(key) + ": " + e.what());
    } catch (const json::exception& e) {
        throw ValidationError(std::string(key) + ": " + e.what());
    }
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct CachedReply {
    std::string fingerprint;
    int status = 0;
    std::string body;
};

struct PredictJob {
    std::mutex mu;
    std::string status = "running";
    json result;
    std::optional<ApiError> error;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
};

}  // namespace

struct Service::Impl {
    ServiceConfig cfg;
    Catalog catalog;
    std::string catalog_root;
    std::unique_ptr<DatasetStore> store;
    httplib::Server server;
    std::thread runner;
    std::atomic<std::uint64_t> request_counter{0};
    std::mt19937_64 token_rng{std::random_device{}()};

    std::mutex idem_mu;
    std::map<std::string, CachedReply> idem_cache;
    std::deque<std::string> idem_order;
    std::map<std::string, std::shared_ptr<std::mutex>> idem_inflight;

    std::mutex clients_mu;
    std::map<std::string, std::shared_ptr<ModelClient>> clients;

    std::mutex jobs_mu;
    std::map<std::string, std::shared_ptr<PredictJob>> jobs;
    std::vector<std::thread> job_threads;

    explicit Impl(ServiceConfig c);
    ~Impl();

    std::string request_id(const httplib::Request& req);
    void dispatch(const httplib::Request& req, httplib::Response& res, const Handler& h, bool mutating);
    void run_handler(const httplib::Request& req, httplib::Response& res, const Handler& h, const std::string& rid);
    void remember(const std::string& key, CachedReply reply);
    std::string new_token();
    void add(const std::string& verb, const std::string& pattern, Handler h);
    void routes();

    json catalog_json() const;
    json tables_json() const;
    json session_status(const Session& s) const;
    std::shared_ptr<ModelClient> client_for(const json& provider);
    json run_predict(const json& body);
};

Service::Impl::Impl(ServiceConfig c) : cfg(std::move(c)) {
    if (cfg.data_dir.empty()) {
        throw ConfigError("service needs a data directory");
    }
    fs::create_directories(cfg.data_dir);
    catalog_root = cfg.catalog_dir;
    if (catalog_root.empty()) {
        catalog_root = (fs::path(cfg.data_dir) / "catalog").string();
        if (!fs::exists(fs::path(catalog_root) / "catalog.json")) {
            write_catalog(make_placeholder_catalog(), catalog_root);
        }
    }
    catalog = load_catalog(catalog_root);
    if (fs::is_regular_file(catalog_root)) {
        catalog_root = fs::path(catalog_root).parent_path().string();
    }
    store = std::make_unique<DatasetStore>((fs::path(cfg.data_dir) / "store").string());
    for (const auto& [name, pc] : cfg.providers) {
        pc.validate();
    }
    routes();
}

Service::Impl::~Impl() {
    server.stop();
    if (runner.joinable()) runner.join();
    std::vector<std::thread> pending;
    {
        std::lock_guard lock(jobs_mu);
        pending.swap(job_threads);
    }
    for (std::thread& t : pending) t.join();
}

std::string Service::Impl::request_id(const httplib::Request& req) {
    std::string rid = req.get_header_value("X-Request-Id");
    const bool ok = !rid.empty() && rid.size() <= 128 && std::all_of(rid.begin(), rid.end(), [](unsigned char ch) {
        return std::isalnum(ch) || ch == '-' || ch == '_' || ch == '.';
    });
    return ok ? rid : "req-" + hex64(++request_counter);
}

std::string Service::Impl::new_token() {
    std::lock_guard lock(jobs_mu);
    return "p" + hex64(token_rng());
}

void Service::Impl::run_handler(const httplib::Request& req, httplib::Response& res, const Handler& h,
                                const std::string& rid) {
    try {
        Reply r = h(req);
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    } catch (const std::exception& e) {
        const ApiError a = api_error_from(e, rid);
        res.status = a.status;
        res.set_content(a.to_json().dump(), "application/json");
    }
}

void Service::Impl::remember(const std::string& key, CachedReply reply) {
    std::lock_guard lock(idem_mu);
    if (idem_cache.emplace(key, std::move(reply)).second) {
        idem_order.push_back(key);
    }
    while (idem_order.size() > cfg.idempotency_cache) {
        idem_cache.erase(idem_order.front());
        idem_inflight.erase(idem_order.front());
        idem_order.pop_front();
    }
}

void Service::Impl::dispatch(const httplib::Request& req, httplib::Response& res, const Handler& h, bool mutating) {
    const std::string rid = request_id(req);
    res.set_header("X-Request-Id", rid);
    const std::string idem = req.get_header_value("Idempotency-Key");
    if (!mutating || idem.empty()) {
        run_handler(req, res, h, rid);
        return;
    }
    const std::string key = req.method + " " + req.path + " " + idem;
    const std::string fingerprint = sha256_hex(req.body);
    std::shared_ptr<std::mutex> gate;
    {
        std::lock_guard lock(idem_mu);
        auto& slot = idem_inflight[key];
        if (!slot) slot = std::make_shared<std::mutex>();
        gate = slot;
    }
    std::lock_guard serial(*gate);
    {
        std::lock_guard lock(idem_mu);
        if (auto it = idem_cache.find(key); it != idem_cache.end()) {
            if (it->second.fingerprint != fingerprint) {
                ApiError a{422, "idempotency_key_reused", "Idempotency-Key was used with a different request body", rid};
                res.status = a.status;
                res.set_content(a.to_json().dump(), "application/json");
                return;
            }
            res.status = it->second.status;
            res.set_header("Idempotent-Replayed", "true");
            res.set_content(it->second.body, "application/json");
            return;
        }
    }
    run_handler(req, res, h, rid);
    if (res.status < 500) {
        remember(key, {fingerprint, res.status, res.body});
    }
}

void Service::Impl::add(const std::string& verb, const std::string& pattern, Handler h) {
    const bool mutating = verb == "POST";
    auto fn = [this, h = std::move(h), mutating](const httplib::Request& req, httplib::Response& res) {
        dispatch(req, res, h, mutating);
    };
    if (verb == "GET") {
        server.Get(pattern, fn);
    } else {
        server.Post(pattern, fn);
    }
}

json Service::Impl::catalog_json() const {
    json objects = json::array();
    for (const ObjectSpec& o : catalog.objects()) {
        json j = object_to_json(o);
        j["sprite_url"] = o.sprite.empty() ? json(nullptr) : json("/assets/" + o.sprite);
        objects.push_back(std::move(j));
    }
    return {{"objects", objects}};
}

json Service::Impl::tables_json() const {
    json tables = json::array();
    for (const TableSpec& t : catalog.tables()) {
        tables.push_back({{"id", t.id}, {"image_url", t.image.empty() ? json(nullptr) : json("/assets/" + t.image)}});
    }
    return {{"tables", tables}};
}

json Service::Impl::session_status(const Session& s) const {
    json j = to_json(s);
    json trials = json::array();
    for (const TrialSlot& t : s.trials) {
        const StudyRecord r = store->load_record(s.id, t.index);
        trials.push_back({{"index", t.index},
                          {"table", t.table},
                          {"practice", t.practice},
                          {"complete", r.complete()},
                          {"missing", r.missing()}});
    }
    j["trials"] = trials;
    return j;
}

std::shared_ptr<ModelClient> Service::Impl::client_for(const json& provider) {
    if (provider.is_string()) {
        const std::string name = provider.get<std::string>();
        std::lock_guard lock(clients_mu);
        if (auto it = clients.find(name); it != clients.end()) {
            return it->second;
        }
        auto cfg_it = cfg.providers.find(name);
        if (cfg_it == cfg.providers.end()) {
            throw ValidationError("unknown provider '" + name + "'");
        }
        auto client = std::make_shared<ModelClient>(cfg_it->second);
        clients.emplace(name, client);
        return client;
    }
    if (provider.is_object()) {
        if (provider.value("kind", std::string()) != "mock" || !provider.contains("script")) {
            throw ValidationError("inline providers must be {\"kind\": \"mock\", \"script\": ...}");
        }
        ProviderConfig pc;
        pc.kind = ProviderKind::Mock;
        pc.mock_inline = provider.at("script");
        return std::make_shared<ModelClient>(pc);
    }
    throw ValidationError("field 'provider' must be a provider name or an inline mock");
}

json Service::Impl::run_predict(const json& body) {
    PredictOptions opts;
    opts.method = parse_method(body.value("method", std::string()));
    if (body.contains("grid")) {
        opts.grid = GridSpec::parse(body.at("grid").get<std::string>());
    }
    opts.samples = body.value("samples", kDefaultSamples);
    opts.validate();

    PreferenceContext context;
    if (const json& k = body.value("context", json::array()); k.is_array()) {
        for (const json& a : k) {
            context.entries.push_back({a.get<Arrangement>(), ""});
        }
    } else {
        context = k.get<PreferenceContext>();
    }
    Arrangement initial;
    if (body.contains("initial")) {
        initial = arrangement_field(body, "initial");
    } else if (body.contains("table")) {
        initial.table = body.at("table").get<std::string>();
    } else {
        throw ValidationError("predict needs 'initial' or 'table'");
    }
    if (!catalog.tables().empty() && !catalog.find_table(initial.table)) {
        throw ValidationError("unknown table '" + initial.table + "'");
    }
    if (!body.contains("provider")) {
        throw ValidationError("missing field 'provider'");
    }
    auto client = client_for(body.at("provider"));
    const Prediction p = predict(*client, context, initial, catalog, opts);
    return p.to_json();
}

void Service::Impl::routes() {
    httplib::Headers cors = {{"Access-Control-Allow-Origin", cfg.cors_origin},
                             {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                             {"Access-Control-Allow-Headers", "Content-Type, Idempotency-Key, X-Request-Id"},
                             {"Access-Control-Expose-Headers", "X-Request-Id, Idempotent-Replayed"}};
    server.set_default_headers(cors);
    server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.set_error_handler([this](const httplib::Request& req, httplib::Response& res) {
        if (!res.body.empty()) return;
        const std::string rid = request_id(req);
        res.set_header("X-Request-Id", rid);
        ApiError a{res.status, res.status == 404 ? "not_found" : "http_error",
                   res.status == 404 ? "no route for " + req.method + " " + req.path : "request failed", rid};
        res.set_content(a.to_json().dump(), "application/json");
    });
    server.set_mount_point("/assets", catalog_root);

    add("GET", "/health", [](const httplib::Request&) { return Reply{200, {{"status", "ok"}}}; });
    add("GET", "/catalog", [this](const httplib::Request&) { return Reply{200, catalog_json()}; });
    add("GET", "/tables", [this](const httplib::Request&) { return Reply{200, tables_json()}; });

    add("POST", "/sessions", [this](const httplib::Request& req) {
        const json body = body_json(req);
        std::vector<std::string> tables;
        for (const TableSpec& t : catalog.tables()) tables.push_back(t.id);
        if (tables.empty()) throw ValidationError("catalog has no tables");
        const std::uint64_t seed = body.contains("seed") ? body.at("seed").get<std::uint64_t>() : token_rng();
        const Session s = store->create_session(body.value("participant", std::string()), tables, seed);
        return Reply{201, session_status(s)};
    });
    add("GET", R"(/sessions/([^/]+))", [this](const httplib::Request& req) {
        return Reply{200, session_status(store->load_session(req.matches[1]))};
    });
    add("POST", R"(/sessions/([^/]+)/arrangements)", [this](const httplib::Request& req) {
        const json body = body_json(req);
        const bool created = store->put_arrangement(req.matches[1], int_field(body, "trial"),
                                                    arrangement_field(body, "arrangement"));
        return Reply{created ? 201 : 200, {{"stored", created}}};
    });
    add("POST", R"(/sessions/([^/]+)/ratings)", [this](const httplib::Request& req) {
        const json body = body_json(req);
        const RatingPhase phase = parse_rating_phase(body.value("phase", std::string()));
        if (!body.contains("rating") || !body.at("rating").is_number()) {
            throw ValidationError("field 'rating' must be a number in [0, 100]");
        }
        const double rating = body.at("rating").get<double>();
        const bool created = store->put_rating(req.matches[1], int_field(body, "trial"), phase, rating);
        return Reply{created ? 201 : 200, {{"stored", created}, {"normalized", rating / 100.0}}};
    });
    add("GET", R"(/sessions/([^/]+)/jitter)", [this](const httplib::Request& req) {
        if (!req.has_param("trial")) throw ValidationError("missing query parameter 'trial'");
        int trial = 0;
        try {
            trial = std::stoi(req.get_param_value("trial"));
        } catch (const std::exception&) {
            throw ValidationError("query parameter 'trial' must be an integer");
        }
        const JitterDraw d = store->draw_jitter(req.matches[1], trial, cfg.jitter);
        return Reply{200, {{"trial", trial}, {"t", d.t}, {"seed", d.seed}, {"arrangement", d.arrangement}}};
    });
    add("POST", R"(/sessions/([^/]+)/corrections)", [this](const httplib::Request& req) {
        const json body = body_json(req);
        const bool created = store->put_correction(req.matches[1], int_field(body, "trial"),
                                                   arrangement_field(body, "arrangement"));
        return Reply{created ? 201 : 200, {{"stored", created}}};
    });

    add("POST", "/predict", [this](const httplib::Request& req) {
        json body = body_json(req);
        if (!body.value("async", false)) {
            return Reply{200, run_predict(body)};
        }
        const std::string token = new_token();
        auto job = std::make_shared<PredictJob>();
        std::lock_guard lock(jobs_mu);
        jobs.emplace(token, job);
        job_threads.emplace_back([this, job, token, body = std::move(body)] {
            json result;
            std::optional<ApiError> error;
            try {
                result = run_predict(body);
            } catch (const std::exception& e) {
                error = api_error_from(e, token);
            }
            std::lock_guard jl(job->mu);
            job->status = error ? "failed" : "done";
            job->result = std::move(result);
            job->error = std::move(error);
        });
        return Reply{202, {{"token", token}, {"status", "running"}, {"poll", "/predict/" + token}}};
    });
    add("GET", R"(/predict/([A-Za-z0-9]+))", [this](const httplib::Request& req) {
        std::shared_ptr<PredictJob> job;
        {
            std::lock_guard lock(jobs_mu);
            auto it = jobs.find(req.matches[1]);
            if (it == jobs.end()) throw NotFoundError("unknown prediction token");
            job = it->second;
        }
        std::lock_guard jl(job->mu);
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - job->started).count();
        json j = {{"token", std::string(req.matches[1])}, {"status", job->status}, {"elapsed_s", elapsed}};
        if (job->status == "done") j["result"] = job->result;
        if (job->error) j["error"] = job->error->to_json().at("error");
        return Reply{200, j};
    });
    add("POST", "/evaluate", [this](const httplib::Request& req) {
        const json body = body_json(req);
        const EvalReport r = evaluate(arrangement_field(body, "gt"), arrangement_field(body, "pred"), catalog);
        return Reply{200, json(r)};
    });
}

Service::Service(ServiceConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg))) {}
Service::~Service() = default;

int Service::bind(const std::string& host, int port) {
    if (port == 0) {
        const int p = impl_->server.bind_to_any_port(host);
        if (p <= 0) throw ConfigError("cannot bind " + host);
        return p;
    }
    if (!impl_->server.bind_to_port(host, port)) {
        throw ConfigError("cannot bind " + host + ":" + std::to_string(port));
    }
    return port;
}

void Service::run() { impl_->server.listen_after_bind(); }

int Service::start(const std::string& host, int port) {
    const int p = bind(host, port);
    impl_->runner = std::thread([this] { run(); });
    impl_->server.wait_until_ready();
    return p;
}

void Service::stop() {
    impl_->server.stop();
    if (impl_->runner.joinable()) impl_->runner.join();
}

DatasetStore& Service::store() { return *impl_->store; }
const Catalog& Service::catalog() const { return impl_->catalog; }

}  // namespace tablepref
